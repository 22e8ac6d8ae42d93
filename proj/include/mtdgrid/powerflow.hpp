#pragma once

#include <map>

#include "mtdgrid/grid.hpp"
#include "mtdgrid/types.hpp"

namespace mtdgrid {

/// Solved DC operating point. Angles exclude the slack bus (its angle is 0);
/// flows follow branch orientation: F_l = (theta_from - theta_to) / x_l.
struct DcState {
    Vec theta;     // length N-1, radians
    Vec flows_mw;  // length L
};

/// Stacked DC measurement model, M = N + 2L rows over N-1 angle states.
/// Row order is fixed project-wide: forward flows (1..L), reverse flows
/// (L+1..2L), bus injections (2L+1..2L+N, all buses including slack).
/// Rows are in per-unit.
struct MeasurementMatrix {
    Mat h;  // M x (N-1)
    int buses = 0;
    int branches = 0;

    int rows() const { return buses + 2 * branches; }
    int forward_row(int branch_id) const { return branch_id - 1; }
    int reverse_row(int branch_id) const { return branches + branch_id - 1; }
    int injection_row(int bus_id) const { return 2 * branches + bus_id - 1; }
};

/// Relative reactance changes keyed by branch id: x <- x * (1 + eta).
struct Perturbation {
    std::map<int, double> deltas;
};

class StructuralError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

class RangeViolation : public std::runtime_error {
public:
    RangeViolation(std::string what, std::vector<int> branches)
        : std::runtime_error(std::move(what)), offending(std::move(branches)) {}
    std::vector<int> offending;
};

/// Solve B * theta = reduced injections, B = A D A^T. Injections are net MW
/// per bus (generation minus load) and must sum to ~0.
DcState solve_dc(const Grid& grid, const Vec& injections_mw);

MeasurementMatrix build_h(const Grid& grid);

/// Noiseless stacked measurements (per-unit) of a solved state.
Vec stack_measurements(const Grid& grid, const DcState& state);

/// Angle vector indexed by bus (length N, slack entry zero).
Vec full_angles(const Grid& grid, const DcState& state);

Grid apply_perturbation(const Grid& grid, const Perturbation& p);

}  // namespace mtdgrid
