#pragma once

#include <cstdint>

#include "mtdgrid/powerflow.hpp"
#include "mtdgrid/types.hpp"

namespace mtdgrid {

struct MeasurementSet {
    Vec z;      // length M, per-unit
    Vec sigma;  // length M, noise std per channel, > 0
};

/// Bad-data detector configuration. tau is on the weighted-residual scale:
/// an alarm fires when (z - h theta_hat)' W (z - h theta_hat) > tau^2 with
/// W = diag(1/sigma^2), which is chi-square distributed with M-(N-1) degrees
/// of freedom on clean data.
struct BddConfig {
    double alpha = 0.05;
    double tau = 0.0;
};

class ObservabilityError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Per-channel noise scale: 1% of max(|z_i|, 1 MW on the per-unit base).
Vec default_sigma(const Vec& z_clean, double rel = 0.01);

/// z = h * theta + n with independent Gaussian n; deterministic in the seed.
MeasurementSet generate_measurements(const Grid& grid, const DcState& state,
                                     const Vec& sigma, std::uint64_t seed);

/// Weighted least squares: theta_hat = (h' W h)^-1 h' W z, W = diag(w).
Vec wls_estimate(const MeasurementMatrix& h, const Vec& w, const Vec& z);

/// Unweighted residual norm ||z - h theta_hat||_2.
double bdd_residual(const Vec& z, const MeasurementMatrix& h, const Vec& theta_hat);

/// Weighted residual statistic (z - h theta_hat)' W (z - h theta_hat).
double weighted_residual_sq(const Vec& z, const MeasurementMatrix& h, const Vec& w,
                            const Vec& theta_hat);

/// Regularized lower incomplete gamma P(a, x) and chi-square helpers.
double chi_square_cdf(double x, double dof);
double chi_square_quantile(double p, double dof);

/// Threshold such that P(weighted residual > tau^2 | clean) = alpha.
BddConfig calibrate_threshold(double alpha, int dof);
BddConfig calibrate_threshold(double alpha, const MeasurementMatrix& h, const Vec& w);

/// Full detector pass: estimate, compute weighted residual, compare.
bool bdd_detects(const Vec& z, const MeasurementMatrix& h, const Vec& sigma,
                 const BddConfig& cfg);

}  // namespace mtdgrid
