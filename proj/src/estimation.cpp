#include "mtdgrid/estimation.hpp"

#include <cmath>
#include <limits>

#include "mtdgrid/rng.hpp"

namespace mtdgrid {

namespace {

// Regularized lower incomplete gamma P(a, x), series for x < a+1 and
// continued fraction otherwise (Lentz). Accurate to ~1e-14 for the
// degree-of-freedom range used here.
double gamma_p(double a, double x) {
    if (x <= 0) return 0.0;
    const double lg = std::lgamma(a);
    if (x < a + 1.0) {
        double ap = a;
        double sum = 1.0 / a;
        double del = sum;
        for (int i = 0; i < 500; ++i) {
            ap += 1.0;
            del *= x / ap;
            sum += del;
            if (std::abs(del) < std::abs(sum) * 1e-16) break;
        }
        return sum * std::exp(-x + a * std::log(x) - lg);
    }
    const double tiny = 1e-300;
    double b = x + 1.0 - a;
    double c = 1.0 / tiny;
    double d = 1.0 / b;
    double h = d;
    for (int i = 1; i < 500; ++i) {
        const double an = -i * (i - a);
        b += 2.0;
        d = an * d + b;
        if (std::abs(d) < tiny) d = tiny;
        c = b + an / c;
        if (std::abs(c) < tiny) c = tiny;
        d = 1.0 / d;
        const double del = d * c;
        h *= del;
        if (std::abs(del - 1.0) < 1e-16) break;
    }
    const double q = std::exp(-x + a * std::log(x) - lg) * h;
    return 1.0 - q;
}

}  // namespace

Vec default_sigma(const Vec& z_clean, double rel) {
    const double floor_pu = mw_to_pu(1.0);
    Vec s(z_clean.size());
    for (Index i = 0; i < z_clean.size(); ++i)
        s[i] = rel * std::max(std::abs(z_clean[i]), floor_pu);
    return s;
}

MeasurementSet generate_measurements(const Grid& grid, const DcState& state,
                                     const Vec& sigma, std::uint64_t seed) {
    const Vec clean = stack_measurements(grid, state);
    if (sigma.size() != clean.size())
        throw std::invalid_argument("sigma length must equal channel count");
    Rng rng(seed);
    MeasurementSet ms;
    ms.sigma = sigma;
    ms.z = clean;
    for (Index i = 0; i < clean.size(); ++i)
        if (sigma[i] > 0) ms.z[i] += sigma[i] * rng.gaussian();
    return ms;
}

Vec wls_estimate(const MeasurementMatrix& h, const Vec& w, const Vec& z) {
    const Mat hw = h.h.transpose() * w.asDiagonal();
    const Mat gain = hw * h.h;
    Eigen::LDLT<Mat> ldlt(gain);
    const Vec diag = ldlt.vectorD().cwiseAbs();
    if (ldlt.info() != Eigen::Success ||
        diag.minCoeff() <= 1e-10 * std::max(1.0, diag.maxCoeff()))
        throw ObservabilityError("normal matrix is singular: system unobservable");
    return ldlt.solve(hw * z);
}

double bdd_residual(const Vec& z, const MeasurementMatrix& h, const Vec& theta_hat) {
    return (z - h.h * theta_hat).norm();
}

double weighted_residual_sq(const Vec& z, const MeasurementMatrix& h, const Vec& w,
                            const Vec& theta_hat) {
    const Vec r = z - h.h * theta_hat;
    return r.dot(w.asDiagonal() * r);
}

double chi_square_cdf(double x, double dof) {
    return gamma_p(0.5 * dof, 0.5 * x);
}

double chi_square_quantile(double p, double dof) {
    if (p <= 0) return 0.0;
    if (p >= 1) return std::numeric_limits<double>::infinity();
    double lo = 0.0;
    double hi = std::max(dof + 10.0 * std::sqrt(2.0 * dof), 16.0);
    while (chi_square_cdf(hi, dof) < p) hi *= 2.0;
    for (int i = 0; i < 200; ++i) {
        const double mid = 0.5 * (lo + hi);
        if (chi_square_cdf(mid, dof) < p)
            lo = mid;
        else
            hi = mid;
        if (hi - lo < 1e-13 * std::max(1.0, hi)) break;
    }
    return 0.5 * (lo + hi);
}

BddConfig calibrate_threshold(double alpha, int dof) {
    if (!(alpha > 0.0 && alpha < 1.0))
        throw std::invalid_argument("alpha must lie in (0,1)");
    BddConfig cfg;
    cfg.alpha = alpha;
    cfg.tau = std::sqrt(chi_square_quantile(1.0 - alpha, dof));
    return cfg;
}

BddConfig calibrate_threshold(double alpha, const MeasurementMatrix& h, const Vec& w) {
    (void)w;  // weights enter through the statistic, not the threshold
    const int dof = h.rows() - static_cast<int>(h.h.cols());
    return calibrate_threshold(alpha, dof);
}

bool bdd_detects(const Vec& z, const MeasurementMatrix& h, const Vec& sigma,
                 const BddConfig& cfg) {
    const Vec w = sigma.cwiseAbs2().cwiseInverse();
    const Vec theta_hat = wls_estimate(h, w, z);
    return weighted_residual_sq(z, h, w, theta_hat) > cfg.tau * cfg.tau;
}

}  // namespace mtdgrid
