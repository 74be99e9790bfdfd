#pragma once

#include "lfpp/core.hpp"
#include "lfpp/covariance.hpp"

#include <string>
#include <utility>
#include <vector>

namespace lfpp {

/// Fourier transform of a covariance curve at a fixed frequency,
/// Hermitian-symmetrized. `presym_defect` records max |S - S^dagger| of
/// the raw trapezoidal transform before symmetrization.
struct SpectralMatrix {
    double frequency = 0.0;
    CMat entries;
    double presym_defect = 0.0;

    int dim() const { return static_cast<int>(entries.rows()); }
};

/// Fourier-Eigen embedding: leading eigenvalues, sorted descending.
struct Embedding {
    Vec values;

    int dim() const { return static_cast<int>(values.size()); }
};

/// max |S - S^dagger| entrywise.
double hermitian_defect(const CMat& matrix);

/// Entry (j, j') = trapezoidal quadrature of V_{jj'}(tau) e^{-i 2 pi xi0 tau}
/// over the lag grid, then symmetrized S <- (S + S^dagger)/2. The grid must
/// be symmetric about 0.
SpectralMatrix fourier_transform_curve(const CovarianceCurve& curve, double xi0);

/// All d eigenvalues of a Hermitian matrix, sorted descending by algebraic
/// value. Throws if the input is not Hermitian.
Vec hermitian_eigenvalues(const SpectralMatrix& matrix);

/// Eigenvalues (descending) with matching eigenvectors in the columns.
std::pair<Vec, CMat> hermitian_eigensystem(const SpectralMatrix& matrix);

/// Estimated Fourier-Eigen embedding of one sequence: covariance estimate,
/// Fourier transform at cfg.frequency, top embed_dim eigenvalues.
Embedding fourier_eigen_embedding(const EventSequence& seq,
                                  const EstimatorConfig& est_cfg,
                                  const SpectralConfig& sp_cfg);

/// Population-level spectral quantities of a model at one frequency.
struct PopulationOracle {
    CMat transfer_transform;            ///< W(xi0), d x k
    std::vector<std::string> labels;    ///< group labels, model order
    std::vector<Vec> group_mu;          ///< latent intensity per group
    std::vector<CMat> group_spectra;    ///< V^(g)(xi0) = W diag(mu) W^dagger
    std::vector<Vec> group_embeddings;  ///< top-k eigenvalues per group
    std::vector<CMat> group_eigvecs;    ///< top-k eigenvectors, phase-fixed
    double sigma_1 = 0.0;               ///< largest singular value of W
    double sigma_k = 0.0;               ///< smallest singular value of W
    Mat rho;                            ///< rho_{gr} = |U_g^dagger U_r - I|_F
    bool full_rank = true;              ///< sigma_k >= 1e-8
    std::string warning;                ///< set when full_rank is false

    int group(const std::string& label) const;
};

/// Population embedding of one group plus the shared oracle diagnostics.
/// W(xi0) is computed by adaptive quadrature of each transfer function
/// (absolute tolerance 1e-9 on real and imaginary parts).
std::pair<Embedding, PopulationOracle> population_embedding(const ModelSpec& model,
                                                            const std::string& group,
                                                            double xi0);

/// Fourier transform of the bank's kernel shape, F{beta}(xi).
Complex transfer_kernel_transform(const TransferBank& transfer, double xi);

/// Both sides of the population separation inequality
///   (1/k)|f_g - f_r|_2 >= sigma_k^2 |mu_g - mu_r|_2
///                       - 3 sigma_1^2 (|mu_g| ^ |mu_r|) (rho v rho^2).
struct SeparationReport {
    double lhs = 0.0;
    double rhs = 0.0;
    double rho = 0.0;
    bool holds = false;
};

SeparationReport separation_diagnostic(const PopulationOracle& oracle,
                                       const std::string& g, const std::string& r);

/// Batched embedding path for cohort-scale runs. Computes the identical
/// trapezoid-transform-at-xi0 of the kernel-smoothed covariance by
/// accumulating, per event pair at signed gap D = t' - t,
///   q(D) = sum_m w_m K((D + tau_m)/h) e^{-i 2 pi xi0 tau_m},
/// from a precomputed piecewise cubic Hermite table (node spacing
/// min(lag_grid_step, h)/8; interpolation error is negligible next to the
/// estimator's statistical noise). One table serves every sequence sharing
/// the same configs.
class SpectralEmbedder {
public:
    SpectralEmbedder(EstimatorConfig est_cfg, SpectralConfig sp_cfg);

    /// Hermitian-symmetrized spectral matrix of one sequence.
    SpectralMatrix spectral_matrix(const EventSequence& seq) const;

    Embedding embed(const EventSequence& seq) const;

    const EstimatorConfig& estimator_config() const { return est_cfg_; }
    const SpectralConfig& spectral_config() const { return sp_cfg_; }

private:
    Complex table_value(double gap) const;

    EstimatorConfig est_cfg_;
    SpectralConfig sp_cfg_;
    double max_gap_;       ///< C_tr + R h: pairs beyond contribute 0
    double node_step_;
    // One-sided node values/derivatives: q has breaks where a lag grid
    // point lands exactly on the smoothing kernel's truncation edge.
    std::vector<Complex> node_value_right_;
    std::vector<Complex> node_deriv_right_;
    std::vector<Complex> node_value_left_;
    std::vector<Complex> node_deriv_left_;
    double mean_term_weight_;  ///< real transform of the constant-1 curve
};

/// Top-k eigenvalues (descending) of a Hermitian matrix; helper shared by
/// embedding paths.
Vec top_eigenvalues(const CMat& hermitian, int k);

}  // namespace lfpp
