#include <cmath>
#include <limits>

#include "doctest.h"
#include "mtdgrid/lp.hpp"
#include "mtdgrid/opf.hpp"
#include "test_grids.hpp"

using namespace mtdgrid;

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

// Brute-force oracle: enumerate all vertices of {x >= 0, Ax <= b, x <= box}
// via active-set combinations and take the best feasible one. Only sane for
// tiny LPs; used to cross-check lp_solve.
double vertex_enumeration_min(const Mat& a, const Vec& b, const Vec& c, double box) {
    const int n = static_cast<int>(a.cols());
    const int m = static_cast<int>(a.rows());
    // Build the full inequality system: Ax <= b, -x <= 0, x <= box.
    Mat g(m + 2 * n, n);
    Vec h(m + 2 * n);
    g.topRows(m) = a;
    h.head(m) = b;
    g.middleRows(m, n) = -Mat::Identity(n, n);
    h.segment(m, n).setZero();
    g.bottomRows(n) = Mat::Identity(n, n);
    h.tail(n).setConstant(box);

    const int total = m + 2 * n;
    std::vector<int> idx(static_cast<std::size_t>(n));
    double best = kInf;

    // Iterate over all n-subsets of rows.
    std::vector<int> comb(static_cast<std::size_t>(n));
    for (int i = 0; i < n; ++i) comb[static_cast<std::size_t>(i)] = i;
    while (true) {
        Mat basis(n, n);
        Vec rhs(n);
        for (int i = 0; i < n; ++i) {
            basis.row(i) = g.row(comb[static_cast<std::size_t>(i)]);
            rhs[i] = h[comb[static_cast<std::size_t>(i)]];
        }
        Eigen::FullPivLU<Mat> lu(basis);
        if (lu.isInvertible()) {
            Vec x = lu.solve(rhs);
            if (((g * x).array() <= h.array() + 1e-7).all())
                best = std::min(best, c.dot(x));
        }
        int k = n - 1;
        while (k >= 0 && comb[static_cast<std::size_t>(k)] == total - n + k) --k;
        if (k < 0) break;
        ++comb[static_cast<std::size_t>(k)];
        for (int j = k + 1; j < n; ++j)
            comb[static_cast<std::size_t>(j)] = comb[static_cast<std::size_t>(j - 1)] + 1;
    }
    return best;
}

}  // namespace

TEST_CASE("minimal lp: min x subject to x >= 3") {
    LpProblem p = LpProblem::make(0, 1);
    p.c[0] = 1.0;
    p.var_lb[0] = 3.0;
    LpSolution s = lp_solve(p);
    REQUIRE(s.status == LpStatus::Optimal);
    CHECK(s.x[0] == doctest::Approx(3.0));
    CHECK(s.objective == doctest::Approx(3.0));
}

TEST_CASE("degenerate lp has a unique objective") {
    // min x1 + x2 s.t. x1 + x2 >= 2, x >= 0: any point on the face is optimal.
    LpProblem p = LpProblem::make(1, 2);
    p.c << 1.0, 1.0;
    p.a << 1.0, 1.0;
    p.row_lb[0] = 2.0;
    p.var_lb.setZero();
    LpSolution s = lp_solve(p);
    REQUIRE(s.status == LpStatus::Optimal);
    CHECK(s.objective == doctest::Approx(2.0));
    CHECK(s.x.minCoeff() >= -1e-9);
}

TEST_CASE("infeasible and unbounded verdicts") {
    LpProblem p = LpProblem::make(1, 1);
    p.c[0] = 1.0;
    p.a(0, 0) = 1.0;
    p.row_ub[0] = -1.0;  // x <= -1
    p.var_lb[0] = 0.0;   // x >= 0
    CHECK(lp_solve(p).status == LpStatus::Infeasible);

    LpProblem q = LpProblem::make(1, 1);
    q.c[0] = -1.0;
    q.a(0, 0) = 1.0;
    q.row_lb[0] = 0.0;  // x >= 0, minimize -x
    q.var_lb[0] = 0.0;
    CHECK(lp_solve(q).status == LpStatus::Unbounded);
}

TEST_CASE("equality rows and free variables") {
    // min 2u + v s.t. u + v = 5, u - v <= 1, v free, u in [0, 10].
    LpProblem p = LpProblem::make(2, 2);
    p.c << 2.0, 1.0;
    p.a << 1.0, 1.0, 1.0, -1.0;
    p.row_lb[0] = p.row_ub[0] = 5.0;
    p.row_ub[1] = 1.0;
    p.var_lb[0] = 0.0;
    p.var_ub[0] = 10.0;
    LpSolution s = lp_solve(p);
    REQUIRE(s.status == LpStatus::Optimal);
    CHECK(s.objective == doctest::Approx(5.0));  // u = 0, v = 5
    CHECK(s.x[0] == doctest::Approx(0.0));
    CHECK(s.x[1] == doctest::Approx(5.0));
}

TEST_CASE("random small lps match the vertex-enumeration oracle") {
    Rng rng(314159);
    int solved = 0;
    for (int trial = 0; trial < 200; ++trial) {
        const int n = 2 + static_cast<int>(rng.below(4));  // 2..5 vars
        const int m = 3 + static_cast<int>(rng.below(6));  // 3..8 rows
        Mat a(m, n);
        for (int i = 0; i < m; ++i)
            for (int j = 0; j < n; ++j) a(i, j) = rng.uniform(-2.0, 2.0);
        // Feasible by construction at a random nonnegative point.
        Vec x0(n);
        for (int j = 0; j < n; ++j) x0[j] = rng.uniform(0.0, 3.0);
        Vec b = a * x0;
        for (int i = 0; i < m; ++i) b[i] += rng.uniform(0.0, 2.0);
        Vec c(n);
        for (int j = 0; j < n; ++j) c[j] = rng.uniform(-1.0, 1.0);
        const double box = 10.0;

        LpProblem p = LpProblem::make(m, n);
        p.c = c;
        p.a = a;
        for (int i = 0; i < m; ++i) p.row_ub[i] = b[i];
        for (int j = 0; j < n; ++j) {
            p.var_lb[j] = 0.0;
            p.var_ub[j] = box;
        }
        LpSolution s = lp_solve(p);
        REQUIRE(s.status == LpStatus::Optimal);
        const double oracle = vertex_enumeration_min(a, b, c, box);
        CHECK(s.objective == doctest::Approx(oracle).epsilon(1e-6));
        // Primal feasibility of the returned point.
        CHECK(((a * s.x).array() <= b.array() + 1e-7).all());
        CHECK(s.x.minCoeff() >= -1e-7);
        ++solved;
    }
    CHECK(solved == 200);
}

TEST_CASE("forced dispatch on the two-bus grid") {
    Grid g = two_bus_grid();
    Vec load(2);
    load << 0.0, 10.0;
    DispatchResult d = solve_opf(g, load);
    REQUIRE(d.optimal);
    CHECK(d.gen_mw[0] == doctest::Approx(10.0));
    CHECK(d.cost == doctest::Approx(200.0));
    CHECK(d.flows_mw[0] == doctest::Approx(10.0));
}

TEST_CASE("load above capacity is infeasible without shedding, feasible with") {
    Grid g = two_bus_grid();  // 50 MW cap
    Vec load(2);
    load << 0.0, 80.0;
    CHECK_FALSE(solve_opf(g, load).optimal);
    DispatchResult d = solve_opf_with_shedding(g, load);
    REQUIRE(d.optimal);
    CHECK(d.shed_mw.sum() == doctest::Approx(30.0));
    CHECK(d.gen_mw[0] == doctest::Approx(50.0));
}

TEST_CASE("shedding reduces to plain opf when capacity is adequate") {
    Grid g = load_case("case14");
    Vec load = g.loads_mw();
    DispatchResult plain = solve_opf(g, load);
    DispatchResult shed = solve_opf_with_shedding(g, load);
    REQUIRE(plain.optimal);
    REQUIRE(shed.optimal);
    CHECK(shed.shed_mw.sum() == doctest::Approx(0.0).epsilon(1e-9));
    CHECK(shed.cost == doctest::Approx(plain.cost).epsilon(1e-7));
}

TEST_CASE("isolating a loaded bus forces exactly its load to shed") {
    // Chain 1 - 2 - 3 with all generation at bus 1; cutting 2-3 strands bus 3.
    std::vector<Bus> buses{{1, 0, true}, {2, 20, false}, {3, 15, false}};
    auto mk = [](int id, int f, int t) {
        Branch b;
        b.id = id;
        b.from_bus = f;
        b.to_bus = t;
        b.reactance = 0.1;
        b.x_min = 0.08;
        b.x_max = 0.12;
        b.flow_limit_mw = kInf;
        b.has_dfacts = true;
        return b;
    };
    std::vector<Branch> branches{mk(1, 1, 2), mk(2, 2, 3)};
    std::vector<Generator> gens{{1, 0, 100, 25, 30}};
    Grid g(buses, branches, gens);
    Grid cut = g.without_branches({2});
    DispatchResult d = solve_opf_with_shedding(cut, cut.loads_mw());
    REQUIRE(d.optimal);
    CHECK(d.shed_mw[2] == doctest::Approx(15.0).epsilon(1e-6));
    CHECK(d.shed_mw.sum() == doctest::Approx(15.0).epsilon(1e-6));
    CHECK(d.gen_mw[0] == doctest::Approx(20.0).epsilon(1e-6));
}

TEST_CASE("ramp limits bind when previous dispatch is given") {
    Grid g = two_bus_grid();  // ramp 15 MW
    Vec load(2);
    load << 0.0, 30.0;
    OpfOptions opts;
    opts.prev_gen_mw = std::vector<double>{10.0};
    CHECK_FALSE(solve_opf(g, load, opts).optimal);  // needs 30, reachable max 25
    opts.prev_gen_mw = std::vector<double>{20.0};
    DispatchResult ok = solve_opf(g, load, opts);
    REQUIRE(ok.optimal);
    CHECK(ok.gen_mw[0] == doctest::Approx(30.0));
}

TEST_CASE("mtd cost is zero for null and congestion-free perturbations") {
    Grid g = load_case("case14");
    Vec load = g.loads_mw();
    Perturbation none;
    CHECK(mtd_cost(g, load, none) == doctest::Approx(0.0));

    // The bundled case has unlimited flow limits, so dispatch never moves.
    Perturbation p;
    p.deltas[3] = 0.2;
    p.deltas[7] = -0.2;
    CHECK(mtd_cost(g, load, p) == doctest::Approx(0.0).epsilon(1e-9));
}

TEST_CASE("line outage never reduces the shedding-opf cost") {
    Grid g = load_case("case14");
    Vec load = g.loads_mw();
    const double base = solve_opf_with_shedding(g, load).cost;
    for (int id : {2, 5, 10, 16}) {
        Grid cut = g.without_branches({id});
        DispatchResult d = solve_opf_with_shedding(cut, load);
        REQUIRE(d.optimal);
        CHECK(d.cost >= base - 1e-6);
    }
}

TEST_CASE("nodal balance of returned dispatch") {
    Grid g = load_case("case14");
    Vec load = g.loads_mw();
    DispatchResult d = solve_opf(g, load);
    REQUIRE(d.optimal);
    Vec inj = -load;
    for (std::size_t i = 0; i < g.generators().size(); ++i)
        inj[g.generators()[i].bus - 1] += d.gen_mw[i];
    Mat a = reduced_incidence(g);
    Vec lhs = a * d.flows_mw;
    int r = 0;
    for (int bus = 1; bus <= g.bus_count(); ++bus) {
        if (bus == g.slack_bus()) continue;
        CHECK(std::abs(lhs[r] - inj[bus - 1]) < 1e-6 * 100.0);
        ++r;
    }
}
