#include "mtdgrid/opf.hpp"

#include <cmath>
#include <limits>

namespace mtdgrid {

namespace {
constexpr double kInf = std::numeric_limits<double>::infinity();
}

DispatchResult solve_opf(const Grid& grid, const Vec& load_mw, const OpfOptions& opts) {
    const int n = grid.bus_count();
    const int l = grid.branch_count();
    const int ng = static_cast<int>(grid.generators().size());
    if (load_mw.size() != n) throw std::invalid_argument("load length must equal bus count");

    const bool shed = opts.allow_shedding;
    const int n_shed = shed ? n : 0;

    // Variables: theta (N-1, radians, free), g (per generator, p.u.),
    // shed (per bus, p.u., only when enabled).
    const int n_theta = n - 1;
    const int n_vars = n_theta + ng + n_shed;
    const int v_gen = n_theta;
    const int v_shed = n_theta + ng;

    // Rows: N-1 reduced nodal balances, 1 system balance, flow limits.
    int n_flow_rows = 0;
    for (const auto& br : grid.branches())
        if (std::isfinite(br.flow_limit_mw)) ++n_flow_rows;

    const int r_balance = 0;
    const int r_system = n_theta;
    const int r_flow = n_theta + 1;
    const int n_rows = n_theta + 1 + n_flow_rows;

    LpProblem p = LpProblem::make(n_rows, n_vars);

    const Mat a_red = reduced_incidence(grid);
    Vec d(l);
    for (int i = 0; i < l; ++i) d[i] = 1.0 / grid.branches()[static_cast<std::size_t>(i)].reactance;
    const Mat b_mat = a_red * d.asDiagonal() * a_red.transpose();

    const int slack = grid.slack_bus();
    auto row_of_bus = [&](int bus) { return bus < slack ? bus - 1 : bus - 2; };

    // Reduced balance: B theta - sum(g at bus) - shed_bus = -load_bus (p.u.)
    for (int i = 0; i < n_theta; ++i) {
        for (int j = 0; j < n_theta; ++j) p.a(r_balance + i, j) = b_mat(i, j);
    }
    int bus_idx = 0;
    for (int bus = 1; bus <= n; ++bus) {
        if (bus == slack) continue;
        const int row = r_balance + bus_idx;
        p.row_lb[row] = p.row_ub[row] = -mw_to_pu(load_mw[bus - 1]);
        if (shed) p.a(row, v_shed + bus - 1) = -1.0;
        ++bus_idx;
    }
    for (int g = 0; g < ng; ++g) {
        const int bus = grid.generators()[static_cast<std::size_t>(g)].bus;
        if (bus != slack) p.a(row_of_bus(bus), v_gen + g) = -1.0;
    }

    // System balance: sum g + sum shed = sum load.
    for (int g = 0; g < ng; ++g) p.a(r_system, v_gen + g) = 1.0;
    if (shed)
        for (int bus = 0; bus < n; ++bus) p.a(r_system, v_shed + bus) = 1.0;
    p.row_lb[r_system] = p.row_ub[r_system] = mw_to_pu(load_mw.sum());

    // Flow limits: -fmax <= D A^T theta <= fmax.
    int fr = 0;
    for (int i = 0; i < l; ++i) {
        const Branch& br = grid.branches()[static_cast<std::size_t>(i)];
        if (!std::isfinite(br.flow_limit_mw)) continue;
        const int row = r_flow + fr++;
        for (int j = 0; j < n_theta; ++j) p.a(row, j) = d[i] * a_red(j, i);
        p.row_lb[row] = -mw_to_pu(br.flow_limit_mw);
        p.row_ub[row] = mw_to_pu(br.flow_limit_mw);
    }

    // Bounds and objective. Costs are $/MWh, variables p.u.
    for (int g = 0; g < ng; ++g) {
        const Generator& gen = grid.generators()[static_cast<std::size_t>(g)];
        double lo = gen.g_min_mw, hi = gen.g_max_mw;
        if (opts.prev_gen_mw) {
            const double prev = opts.prev_gen_mw->at(static_cast<std::size_t>(g));
            lo = std::max(lo, prev - gen.ramp_limit_mw);
            hi = std::min(hi, prev + gen.ramp_limit_mw);
        }
        p.var_lb[v_gen + g] = mw_to_pu(lo);
        p.var_ub[v_gen + g] = mw_to_pu(hi);
        p.c[v_gen + g] = gen.cost_per_mwh * kMvaBase;
    }
    if (shed)
        for (int bus = 0; bus < n; ++bus) {
            p.var_lb[v_shed + bus] = 0.0;
            p.var_ub[v_shed + bus] = mw_to_pu(load_mw[bus]);
            p.c[v_shed + bus] = opts.shed_cost_per_mwh * kMvaBase;
        }

    const LpSolution sol = lp_solve(p);

    DispatchResult res;
    res.optimal = sol.status == LpStatus::Optimal;
    if (!res.optimal) return res;

    res.theta = sol.x.head(n_theta);
    res.gen_mw.resize(static_cast<std::size_t>(ng));
    for (int g = 0; g < ng; ++g) res.gen_mw[static_cast<std::size_t>(g)] = pu_to_mw(sol.x[v_gen + g]);
    res.shed_mw = Vec::Zero(n);
    if (shed)
        for (int bus = 0; bus < n; ++bus) res.shed_mw[bus] = pu_to_mw(sol.x[v_shed + bus]);
    res.flows_mw = kMvaBase * (d.asDiagonal() * (a_red.transpose() * res.theta));
    res.cost = sol.objective;
    return res;
}

DispatchResult solve_opf_with_shedding(const Grid& grid, const Vec& load_mw,
                                       const std::optional<std::vector<double>>& prev_gen_mw,
                                       double shed_cost_per_mwh) {
    OpfOptions opts;
    opts.prev_gen_mw = prev_gen_mw;
    opts.allow_shedding = true;
    opts.shed_cost_per_mwh = shed_cost_per_mwh;
    return solve_opf(grid, load_mw, opts);
}

double mtd_cost(const Grid& grid, const Vec& load_mw, const Perturbation& p) {
    const DispatchResult base = solve_opf(grid, load_mw);
    if (!base.optimal) throw std::runtime_error("baseline OPF infeasible");
    const DispatchResult perturbed = solve_opf(apply_perturbation(grid, p), load_mw);
    if (!perturbed.optimal) throw std::runtime_error("perturbed OPF infeasible");
    return perturbed.cost - base.cost;
}

}  // namespace mtdgrid
