#pragma once

#include "lfpp/core.hpp"

#include <string>
#include <vector>

namespace lfpp {

/// Cross-covariance matrix V(tau) sampled on a symmetric lag grid.
/// Swap symmetry values[tau](j, j') == values[-tau](j', j) holds exactly
/// (the estimator writes mirrored slots from the same accumulation).
struct CovarianceCurve {
    std::vector<double> lags;  ///< ascending, symmetric about 0, contains 0
    std::vector<Mat> values;   ///< one d x d matrix per lag

    int dim() const { return values.empty() ? 0 : static_cast<int>(values.front().rows()); }
    std::size_t grid_size() const { return lags.size(); }

    /// Index of lag 0 (grid midpoint).
    std::size_t zero_index() const { return lags.size() / 2; }

    bool grid_is_symmetric(double tol = 1e-12) const;
};

/// Kernel-smoothing estimator of the cross-covariance matrix:
///   Vhat_{jj'}(tau) = (1/(T h)) * sum over event pairs (t in N_j, t' in N_j')
///                     of K(((t' - t) + tau)/h)
///                   - (N_j([0,T])/T) * (N_j'([0,T])/T),
/// with same-event pairs excluded on the diagonal (by event identity) and
/// Vhat = 0 for |tau| > C_tr. Pairs with |(t'-t)+tau| > R*h contribute 0
/// and are skipped by a two-pointer sweep over the sorted event lists, so
/// the cost is O(matched pairs), not O(|N_j| * |N_j'|).
CovarianceCurve estimate_cross_covariance(const EventSequence& seq,
                                          const EstimatorConfig& cfg);

/// Population cross-covariance of the model for one group:
///   V_{jj'}(tau) = sum_l mu_l * integral omega_{jl}(s) omega_{j'l}(s - tau) ds
///                = r(tau) * [A diag(mu) A^T]_{jj'},
/// where r is the correlation of the (causal, truncated) transfer kernel
/// with itself. r uses a closed form for the gauss kernel and adaptive
/// quadrature (absolute tolerance 1e-8) otherwise.
CovarianceCurve analytic_cross_covariance(const ModelSpec& model,
                                          const std::string& group,
                                          const std::vector<double>& lags);

/// Kernel self-correlation r(tau) = integral beta(s) beta(s - tau) ds over
/// the truncated support. Exposed for oracle tests.
double transfer_kernel_correlation(const TransferBank& transfer, double tau);

}  // namespace lfpp
