#include "mtdgrid/powerflow.hpp"

#include <cmath>

namespace mtdgrid {

namespace {

Vec susceptances(const Grid& grid) {
    Vec d(grid.branch_count());
    for (int i = 0; i < grid.branch_count(); ++i)
        d[i] = 1.0 / grid.branches()[static_cast<std::size_t>(i)].reactance;
    return d;
}

}  // namespace

DcState solve_dc(const Grid& grid, const Vec& injections_mw) {
    const int n = grid.bus_count();
    if (injections_mw.size() != n)
        throw std::invalid_argument("injections length must equal bus count");
    if (std::abs(injections_mw.sum()) > 1e-6 * std::max(1.0, injections_mw.cwiseAbs().maxCoeff()))
        throw std::invalid_argument("injections do not balance");

    const Mat a = reduced_incidence(grid);
    const Vec d = susceptances(grid);
    const Mat b = a * d.asDiagonal() * a.transpose();

    Vec p_reduced(n - 1);
    const int slack = grid.slack_bus();
    int r = 0;
    for (int bus = 1; bus <= n; ++bus)
        if (bus != slack) p_reduced[r++] = mw_to_pu(injections_mw[bus - 1]);

    Eigen::LDLT<Mat> ldlt(b);
    const Vec diag = ldlt.vectorD().cwiseAbs();
    if (ldlt.info() != Eigen::Success ||
        diag.minCoeff() <= 1e-10 * std::max(1.0, diag.maxCoeff()))
        throw StructuralError("singular susceptance matrix (grid disconnected?)");
    Vec theta = ldlt.solve(p_reduced);

    DcState state;
    state.theta = theta;
    state.flows_mw = kMvaBase * (d.asDiagonal() * (a.transpose() * theta));
    return state;
}

MeasurementMatrix build_h(const Grid& grid) {
    const int n = grid.bus_count();
    const int l = grid.branch_count();
    const Mat a_red = reduced_incidence(grid);
    const Vec d = susceptances(grid);

    const Mat flow_block = d.asDiagonal() * a_red.transpose();  // L x (N-1)
    const Mat inj_block = full_incidence(grid) * flow_block;    // N x (N-1)

    MeasurementMatrix m;
    m.buses = n;
    m.branches = l;
    m.h.resize(n + 2 * l, n - 1);
    m.h.topRows(l) = flow_block;
    m.h.middleRows(l, l) = -flow_block;
    m.h.bottomRows(n) = inj_block;
    return m;
}

Vec stack_measurements(const Grid& grid, const DcState& state) {
    return build_h(grid).h * state.theta;
}

Vec full_angles(const Grid& grid, const DcState& state) {
    const int n = grid.bus_count();
    const int slack = grid.slack_bus();
    Vec th = Vec::Zero(n);
    int r = 0;
    for (int bus = 1; bus <= n; ++bus)
        if (bus != slack) th[bus - 1] = state.theta[r++];
    return th;
}

Grid apply_perturbation(const Grid& grid, const Perturbation& p) {
    std::vector<int> offending;
    auto branches = grid.branches();
    for (const auto& [id, eta] : p.deltas) {
        if (!grid.has_branch(id)) {
            offending.push_back(id);
            continue;
        }
        Branch& br = branches[grid.position_of(id)];
        const double x_new = br.reactance * (1.0 + eta);
        const bool in_range =
            x_new >= br.x_min * (1 - 1e-12) && x_new <= br.x_max * (1 + 1e-12);
        if ((eta != 0.0 && !br.has_dfacts) || !in_range) {
            offending.push_back(id);
            continue;
        }
        br.reactance = x_new;
    }
    if (!offending.empty()) {
        std::string msg = "perturbation outside D-FACTS range on branches:";
        for (int id : offending) msg += " " + std::to_string(id);
        throw RangeViolation(msg, offending);
    }
    return Grid(grid.buses(), std::move(branches), grid.generators());
}

}  // namespace mtdgrid
