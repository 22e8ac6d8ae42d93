#include <cmath>

#include "doctest.h"
#include "mtdgrid/estimation.hpp"
#include "mtdgrid/powerflow.hpp"
#include "test_grids.hpp"

using namespace mtdgrid;

namespace {

Vec balanced_injections(const Grid& g, Rng& rng, double scale_mw = 50.0) {
    Vec p(g.bus_count());
    for (int i = 0; i < g.bus_count(); ++i) p[i] = rng.uniform(-scale_mw, scale_mw);
    p[g.slack_bus() - 1] -= p.sum();
    return p;
}

}  // namespace

TEST_CASE("two-bus dc solve matches hand solution") {
    Grid g = two_bus_grid();
    Vec inj(2);
    inj << -10.0, 10.0;  // +10 MW injected at bus 2, slack balances
    DcState st = solve_dc(g, inj);
    // B = 1/x = 10 (p.u.), p2 = 0.1 p.u. -> theta2 = 0.01 rad.
    CHECK(st.theta[0] == doctest::Approx(0.01));
    // Flow oriented 1->2 carries -10 MW (power moves 2->1).
    CHECK(st.flows_mw[0] == doctest::Approx(-10.0));
}

TEST_CASE("zero injections give the zero state") {
    Grid g = load_case("case14");
    Vec inj = Vec::Zero(14);
    DcState st = solve_dc(g, inj);
    CHECK(st.theta.cwiseAbs().maxCoeff() == doctest::Approx(0.0));
    CHECK(st.flows_mw.cwiseAbs().maxCoeff() == doctest::Approx(0.0));
}

TEST_CASE("nodal balance holds on ieee14") {
    Grid g = load_case("case14");
    Rng rng(42);
    for (int t = 0; t < 20; ++t) {
        Vec inj = balanced_injections(g, rng);
        DcState st = solve_dc(g, inj);
        Mat a = reduced_incidence(g);
        Vec residual = a * st.flows_mw;
        const int slack = g.slack_bus();
        int r = 0;
        for (int bus = 1; bus <= g.bus_count(); ++bus) {
            if (bus == slack) continue;
            CHECK(std::abs(residual[r] - inj[bus - 1]) < 1e-8 * 100.0);
            ++r;
        }
    }
}

TEST_CASE("unbalanced injections are rejected") {
    Grid g = two_bus_grid();
    Vec inj(2);
    inj << 0.0, 10.0;
    CHECK_THROWS_AS(solve_dc(g, inj), std::invalid_argument);
}

TEST_CASE("disconnected grid yields structural error") {
    std::vector<Bus> buses{{1, 0, true}, {2, 0, false}, {3, 0, false}, {4, 0, false}};
    std::vector<Branch> branches{{1, 1, 2, 0.1, 0.1, 0.1, 1e9, false},
                                 {2, 3, 4, 0.1, 0.1, 0.1, 1e9, false}};
    Grid g(buses, branches, {});
    Vec inj = Vec::Zero(4);
    inj << -1.0, 1.0, -2.0, 2.0;
    CHECK_THROWS_AS(solve_dc(g, inj), StructuralError);
}

TEST_CASE("measurement matrix structure on the two-bus grid") {
    Grid g = two_bus_grid();
    MeasurementMatrix m = build_h(g);
    REQUIRE(m.h.rows() == 4);  // M = N + 2L = 2 + 2
    REQUIRE(m.h.cols() == 1);
    // Forward-flow row, its negation, then injections at buses 1 and 2.
    CHECK(m.h(0, 0) == doctest::Approx(-10.0));
    CHECK(m.h(1, 0) == doctest::Approx(10.0));
    CHECK(m.h(2, 0) == doctest::Approx(-10.0));
    CHECK(m.h(3, 0) == doctest::Approx(10.0));
}

TEST_CASE("reverse-flow rows negate forward rows") {
    Grid g = load_case("case14");
    MeasurementMatrix m = build_h(g);
    const int l = g.branch_count();
    CHECK((m.h.middleRows(l, l) + m.h.topRows(l)).cwiseAbs().maxCoeff() ==
          doctest::Approx(0.0));
}

TEST_CASE("measurement matrix rank is N-1 on ieee14") {
    Grid g = load_case("case14");
    MeasurementMatrix m = build_h(g);
    Eigen::FullPivLU<Mat> lu(m.h);
    lu.setThreshold(1e-10);
    CHECK(lu.rank() == 13);
}

TEST_CASE("h * theta reproduces stacked solve_dc measurements") {
    Grid g = load_case("case14");
    Rng rng(3);
    for (int t = 0; t < 10; ++t) {
        Vec inj = balanced_injections(g, rng);
        DcState st = solve_dc(g, inj);
        Vec z = build_h(g).h * st.theta;
        const int l = g.branch_count();
        for (const auto& br : g.branches()) {
            CHECK(pu_to_mw(z[br.id - 1]) == doctest::Approx(st.flows_mw[br.id - 1]));
            CHECK(pu_to_mw(z[l + br.id - 1]) == doctest::Approx(-st.flows_mw[br.id - 1]));
        }
        for (int bus = 1; bus <= g.bus_count(); ++bus)
            CHECK(pu_to_mw(z[2 * l + bus - 1]) == doctest::Approx(inj[bus - 1]).epsilon(1e-6));
    }
}

TEST_CASE("apply_perturbation scales reactances in range") {
    Grid g = load_case("case14");
    Perturbation p;
    for (int id : {1, 3, 5, 8, 9, 18, 19}) p.deltas[id] = 0.15;
    Grid g2 = apply_perturbation(g, p);
    for (int id : {1, 3, 5, 8, 9, 18, 19})
        CHECK(g2.branch(id).reactance == doctest::Approx(1.15 * g.branch(id).reactance));
    CHECK(g2.branch(2).reactance == doctest::Approx(g.branch(2).reactance));

    Perturbation zero;
    zero.deltas[4] = 0.0;
    CHECK(apply_perturbation(g, zero) == g);

    Perturbation outside;
    outside.deltas[2] = 0.5;  // x_max is 1.2x
    CHECK_THROWS_AS(apply_perturbation(g, outside), RangeViolation);
    try {
        apply_perturbation(g, outside);
    } catch (const RangeViolation& e) {
        REQUIRE(e.offending.size() == 1);
        CHECK(e.offending[0] == 2);
    }
}
