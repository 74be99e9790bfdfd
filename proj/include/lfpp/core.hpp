#pragma once

#include <Eigen/Dense>

#include <complex>
#include <cstdint>
#include <optional>
#include <string>
#include <vector>

namespace lfpp {

using Vec = Eigen::VectorXd;
using Mat = Eigen::MatrixXd;
using CVec = Eigen::VectorXcd;
using CMat = Eigen::MatrixXcd;
using Complex = std::complex<double>;

/// A multivariate point process realization: per-component ascending event
/// times on the window [0, window_end].
class EventSequence {
public:
    /// Empty sequence with `dim` components.
    EventSequence(int dim, double window_end);

    /// Takes ownership of per-component time lists; validates that every
    /// component is sorted ascending with all times inside [0, window_end].
    EventSequence(std::vector<std::vector<double>> events, double window_end);

    int dim() const { return static_cast<int>(events_.size()); }
    double window_end() const { return window_end_; }
    const std::vector<double>& component(int j) const { return events_.at(j); }
    const std::vector<std::vector<double>>& components() const { return events_; }

    std::size_t total_events() const;

    /// Count of events of component j (N_j([0, T])).
    std::size_t count(int j) const { return events_.at(j).size(); }

private:
    std::vector<std::vector<double>> events_;
    double window_end_;
};

/// Transfer kernel shapes beta(t) for omega_{jl}(t) = a_{jl} * beta(t).
enum class TransferKernel { gauss, sinc_decay, sqrt_ramp, lin_ramp, exp4 };

std::string to_string(TransferKernel k);
TransferKernel transfer_kernel_from_string(const std::string& name);

/// Natural/default support radius b0 for each kernel shape. The gauss
/// kernel is not compactly supported; 6 is used as its effective support
/// (value < 2e-8 beyond, negligible next to Monte Carlo noise).
double default_support_radius(TransferKernel k);

/// Bank of transfer functions omega_{jl}(t) = a_{jl} * beta(t), truncated
/// to exactly zero outside [0, support_radius).
class TransferBank {
public:
    TransferBank(Mat coefficients, TransferKernel kernel,
                 double support_radius = -1.0);

    int d() const { return static_cast<int>(coefficients_.rows()); }
    int k() const { return static_cast<int>(coefficients_.cols()); }
    const Mat& coefficients() const { return coefficients_; }
    TransferKernel kernel() const { return kernel_; }
    double support_radius() const { return support_radius_; }

    /// beta(t); exactly 0 for t < 0 and t >= support_radius.
    double beta(double t) const;

    /// omega_{jl}(t) = a_{jl} * beta(t).
    double evaluate(int j, int l, double t) const {
        return coefficients_(j, l) * beta(t);
    }

    /// sup_t beta(t), used for thinning bounds.
    double beta_sup() const { return beta_sup_; }

    /// Integral of beta over [0, support_radius).
    double beta_integral() const { return beta_integral_; }

private:
    Mat coefficients_;
    TransferKernel kernel_;
    double support_radius_;
    double beta_sup_;
    double beta_integral_;
};

/// One latent class: label and latent intensity vector mu (length k).
struct Group {
    std::string label;
    Vec mu;
};

/// Full generative specification of the latent factor point process.
struct ModelSpec {
    TransferBank transfer;
    Vec baseline;               ///< nu, length d, entrywise >= 0
    std::vector<Group> groups;  ///< |G| >= 2, each mu of length k
    Vec prior;                  ///< pi over groups, sums to 1, entries > 0

    int d() const { return transfer.d(); }
    int k() const { return transfer.k(); }

    /// Index of a group label; throws if unknown.
    int group_index(const std::string& label) const;

    /// Throws std::invalid_argument on any violated invariant.
    void validate() const;
};

/// Symmetric smoothing kernels K for the covariance estimator.
enum class SmoothingKernel { gaussian, epanechnikov };

std::string to_string(SmoothingKernel k);
SmoothingKernel smoothing_kernel_from_string(const std::string& name);

/// K(u), untruncated.
double smoothing_kernel_value(SmoothingKernel k, double u);

/// Configuration of the kernel-smoothing cross-covariance estimator.
struct EstimatorConfig {
    double bandwidth = 1.0;          ///< h
    SmoothingKernel smoothing_kernel = SmoothingKernel::gaussian;
    double lag_threshold = 5.0;      ///< C_tr: estimate is 0 beyond |tau| > C_tr
    double lag_grid_step = 0.05;     ///< delta tau; must divide C_tr evenly
    double kernel_truncation_radius = 4.0;  ///< R: K treated as 0 beyond |u| > R

    /// Number of grid steps on each side of 0 (grid has 2M+1 lags).
    int half_grid_points() const;

    /// The symmetric lag grid {-C_tr, ..., -dt, 0, dt, ..., C_tr}.
    std::vector<double> lag_grid() const;

    void validate() const;
};

/// Configuration of the spectral embedding step.
struct SpectralConfig {
    double frequency = 1.0;  ///< xi_0
    int embed_dim = 2;       ///< k: number of leading eigenvalues retained

    void validate() const;
};

/// One patient: id, observed event sequence over d codes on [0, T_i],
/// optional class label.
struct PatientRecord {
    std::string id;
    EventSequence events;
    std::optional<std::string> label;

    double observation_time() const { return events.window_end(); }
};

/// A cohort of patients sharing the same code dimension d.
struct Dataset {
    std::vector<PatientRecord> records;

    int dim() const;
    bool has_labels() const;
    void validate() const;
};

}  // namespace lfpp
