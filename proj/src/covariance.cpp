#include "lfpp/covariance.hpp"

#include "lfpp/quadrature.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace lfpp {

bool CovarianceCurve::grid_is_symmetric(double tol) const {
    const std::size_t n = lags.size();
    if (n == 0 || n % 2 == 0) return false;
    for (std::size_t i = 0; i < n; ++i) {
        if (std::abs(lags[i] + lags[n - 1 - i]) > tol) return false;
    }
    return std::abs(lags[n / 2]) <= tol;
}

namespace {

/// Sum of K(((t' - t) + tau)/h) over pairs within the truncation window,
/// via a two-pointer sweep. `exclude_same_index` drops pairs where t and
/// t' are the same event occurrence (diagonal case j == j').
double pair_kernel_sum(const std::vector<double>& left, const std::vector<double>& right,
                       double tau, const EstimatorConfig& cfg, bool exclude_same_index) {
    const double h = cfg.bandwidth;
    const double radius = cfg.kernel_truncation_radius * h;
    const SmoothingKernel kernel = cfg.smoothing_kernel;
    double sum = 0.0;
    std::size_t lo = 0, hi = 0;
    for (std::size_t i = 0; i < left.size(); ++i) {
        // Need |t' - t + tau| <= radius, i.e. t' in [t - tau - radius, t - tau + radius].
        const double lower = left[i] - tau - radius;
        const double upper = left[i] - tau + radius;
        while (lo < right.size() && right[lo] < lower) ++lo;
        if (hi < lo) hi = lo;
        while (hi < right.size() && right[hi] <= upper) ++hi;
        for (std::size_t p = lo; p < hi; ++p) {
            if (exclude_same_index && p == i) continue;
            sum += smoothing_kernel_value(kernel, (right[p] - left[i] + tau) / h);
        }
    }
    return sum;
}

}  // namespace

CovarianceCurve estimate_cross_covariance(const EventSequence& seq,
                                          const EstimatorConfig& cfg) {
    cfg.validate();
    const double T = seq.window_end();
    if (!(T > 0.0)) {
        throw std::invalid_argument("estimate_cross_covariance: empty window (T <= 0)");
    }
    const int d = seq.dim();
    const std::vector<double> lags = cfg.lag_grid();
    const int m_half = cfg.half_grid_points();

    CovarianceCurve curve;
    curve.lags = lags;
    curve.values.assign(lags.size(), Mat::Zero(d, d));

    const double norm = 1.0 / (T * cfg.bandwidth);
    for (int j = 0; j < d; ++j) {
        const double mean_j = static_cast<double>(seq.count(j)) / T;
        for (int jp = j; jp < d; ++jp) {
            const double mean_term = mean_j * (static_cast<double>(seq.count(jp)) / T);
            // Swap symmetry V_{jj'}(tau) = V_{j'j}(-tau) lets the (j', j)
            // block be mirrored instead of recomputed; for j == j' the
            // mirror makes the diagonal even in tau.
            const int m_start = (j == jp) ? 0 : -m_half;
            for (int m = m_start; m <= m_half; ++m) {
                const double tau = m * cfg.lag_grid_step;
                const double value =
                    norm * pair_kernel_sum(seq.component(j), seq.component(jp), tau,
                                           cfg, j == jp) -
                    mean_term;
                curve.values[m + m_half](j, jp) = value;
                curve.values[m_half - m](jp, j) = value;
            }
        }
    }
    return curve;
}

double transfer_kernel_correlation(const TransferBank& transfer, double tau) {
    const double b0 = transfer.support_radius();
    const double t = std::abs(tau);
    if (t >= b0) return 0.0;
    if (transfer.kernel() == TransferKernel::gauss) {
        // integral_t^b0 e^{-s^2/2} e^{-(s-t)^2/2} ds
        //   = e^{-t^2/4} * (sqrt(pi)/2) * [erf(b0 - t/2) - erf(t/2)]
        return std::exp(-0.25 * t * t) * 0.5 * std::sqrt(M_PI) *
               (std::erf(b0 - 0.5 * t) - std::erf(0.5 * t));
    }
    return integrate_adaptive(
        [&](double s) { return transfer.beta(s) * transfer.beta(s - t); }, t, b0,
        1e-9);
}

CovarianceCurve analytic_cross_covariance(const ModelSpec& model,
                                          const std::string& group,
                                          const std::vector<double>& lags) {
    model.validate();
    const Vec& mu = model.groups.at(model.group_index(group)).mu;
    const Mat& a = model.transfer.coefficients();
    const Mat shape = a * mu.asDiagonal() * a.transpose();

    CovarianceCurve curve;
    curve.lags = lags;
    curve.values.reserve(lags.size());
    for (double tau : lags) {
        curve.values.push_back(transfer_kernel_correlation(model.transfer, tau) * shape);
    }
    return curve;
}

}  // namespace lfpp
