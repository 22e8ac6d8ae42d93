#pragma once

#include <Eigen/Dense>

namespace mtdgrid {

using Mat = Eigen::MatrixXd;
using Vec = Eigen::VectorXd;
using Eigen::Index;

/// System-wide per-unit base (MVA). Flows and loads cross the API in MW;
/// everything internal is per-unit on this base.
inline constexpr double kMvaBase = 100.0;

inline double mw_to_pu(double mw) { return mw / kMvaBase; }
inline double pu_to_mw(double pu) { return pu * kMvaBase; }

}  // namespace mtdgrid
