#pragma once

#include <optional>
#include <vector>

#include "mtdgrid/grid.hpp"
#include "mtdgrid/lp.hpp"
#include "mtdgrid/powerflow.hpp"
#include "mtdgrid/types.hpp"

namespace mtdgrid {

struct DispatchResult {
    bool optimal = false;
    std::vector<double> gen_mw;  // per generator, grid order
    Vec shed_mw;                 // per bus, zero when shedding disabled
    Vec theta;                   // N-1 angles
    Vec flows_mw;                // per branch
    double cost = 0.0;           // $/h
};

struct OpfOptions {
    std::optional<std::vector<double>> prev_gen_mw;  // enables ramp limits
    bool allow_shedding = false;
    double shed_cost_per_mwh = 1000.0;
};

/// DC optimal power flow: min sum c_i g_i (+ shedding cost) subject to nodal
/// balance, flow limits, generator limits and optional ramp limits, at the
/// grid's current reactances.
DispatchResult solve_opf(const Grid& grid, const Vec& load_mw,
                         const OpfOptions& opts = {});

DispatchResult solve_opf_with_shedding(const Grid& grid, const Vec& load_mw,
                                       const std::optional<std::vector<double>>& prev_gen_mw = {},
                                       double shed_cost_per_mwh = 1000.0);

/// Operational cost of a reactance perturbation: OPF cost at the perturbed
/// reactances minus OPF cost at the baseline reactances.
double mtd_cost(const Grid& grid, const Vec& load_mw, const Perturbation& p);

}  // namespace mtdgrid
