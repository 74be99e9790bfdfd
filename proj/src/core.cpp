#include "lfpp/core.hpp"

#include "lfpp/quadrature.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>
#include <stdexcept>

namespace lfpp {

namespace {

void require(bool ok, const std::string& message) {
    if (!ok) throw std::invalid_argument(message);
}

/// Untruncated beta(t) for t >= 0.
double beta_raw(TransferKernel k, double t) {
    switch (k) {
        case TransferKernel::gauss:
            return std::exp(-0.5 * t * t);
        case TransferKernel::sinc_decay:
            return t < M_PI ? std::abs(std::sin(t)) / (t + 1.0) : 0.0;
        case TransferKernel::sqrt_ramp:
            return t < 1.0 ? 1.0 - std::sqrt(t) : 0.0;
        case TransferKernel::lin_ramp:
            return t < 1.0 ? 1.0 - t : 0.0;
        case TransferKernel::exp4:
            return t < 2.0 ? std::exp(-t * std::log(4.0)) : 0.0;
    }
    return 0.0;
}

double beta_sup_of(TransferKernel k, double b0) {
    if (k != TransferKernel::sinc_decay) return beta_raw(k, 0.0);
    // |sin t|/(t+1) peaks at the interior root of tan t = 1 + t.
    double best = 0.0;
    const double hi = std::min(b0, M_PI);
    const int n = 20000;
    for (int i = 0; i <= n; ++i) {
        best = std::max(best, beta_raw(k, hi * i / n));
    }
    return best;
}

}  // namespace

EventSequence::EventSequence(int dim, double window_end)
    : events_(static_cast<std::size_t>(dim)), window_end_(window_end) {
    require(dim >= 1, "EventSequence: dim must be >= 1");
    require(window_end > 0.0, "EventSequence: window_end must be > 0");
}

EventSequence::EventSequence(std::vector<std::vector<double>> events, double window_end)
    : events_(std::move(events)), window_end_(window_end) {
    require(!events_.empty(), "EventSequence: dim must be >= 1");
    require(window_end_ > 0.0, "EventSequence: window_end must be > 0");
    for (std::size_t j = 0; j < events_.size(); ++j) {
        const auto& times = events_[j];
        for (std::size_t i = 0; i < times.size(); ++i) {
            std::ostringstream where;
            where << "EventSequence: component " << j << ", event " << i;
            require(times[i] >= 0.0 && times[i] <= window_end_,
                    where.str() + ": time outside [0, window_end]");
            require(i == 0 || times[i - 1] <= times[i],
                    where.str() + ": times not sorted ascending");
        }
    }
}

std::size_t EventSequence::total_events() const {
    std::size_t n = 0;
    for (const auto& component : events_) n += component.size();
    return n;
}

std::string to_string(TransferKernel k) {
    switch (k) {
        case TransferKernel::gauss: return "gauss";
        case TransferKernel::sinc_decay: return "sinc_decay";
        case TransferKernel::sqrt_ramp: return "sqrt_ramp";
        case TransferKernel::lin_ramp: return "lin_ramp";
        case TransferKernel::exp4: return "exp4";
    }
    return "?";
}

TransferKernel transfer_kernel_from_string(const std::string& name) {
    if (name == "gauss") return TransferKernel::gauss;
    if (name == "sinc_decay") return TransferKernel::sinc_decay;
    if (name == "sqrt_ramp") return TransferKernel::sqrt_ramp;
    if (name == "lin_ramp") return TransferKernel::lin_ramp;
    if (name == "exp4") return TransferKernel::exp4;
    throw std::invalid_argument("unknown transfer kernel: " + name);
}

double default_support_radius(TransferKernel k) {
    switch (k) {
        case TransferKernel::gauss: return 6.0;
        case TransferKernel::sinc_decay: return M_PI;
        case TransferKernel::sqrt_ramp: return 1.0;
        case TransferKernel::lin_ramp: return 1.0;
        case TransferKernel::exp4: return 2.0;
    }
    return 0.0;
}

TransferBank::TransferBank(Mat coefficients, TransferKernel kernel, double support_radius)
    : coefficients_(std::move(coefficients)),
      kernel_(kernel),
      support_radius_(support_radius > 0.0 ? support_radius
                                           : default_support_radius(kernel)) {
    require(coefficients_.rows() >= 1 && coefficients_.cols() >= 1,
            "TransferBank: coefficient matrix must be nonempty");
    require((coefficients_.array() >= 0.0).all(),
            "TransferBank: all coefficients must be >= 0");
    require(support_radius_ >= 0.0, "TransferBank: support_radius must be >= 0");
    beta_sup_ = beta_sup_of(kernel_, support_radius_);
    beta_integral_ = integrate_adaptive(
        [this](double t) { return beta(t); }, 0.0, support_radius_, 1e-10);
}

double TransferBank::beta(double t) const {
    if (t < 0.0 || t >= support_radius_) return 0.0;
    return beta_raw(kernel_, t);
}

int ModelSpec::group_index(const std::string& label) const {
    for (std::size_t g = 0; g < groups.size(); ++g) {
        if (groups[g].label == label) return static_cast<int>(g);
    }
    throw std::invalid_argument("ModelSpec: unknown group label: " + label);
}

void ModelSpec::validate() const {
    require(baseline.size() == d(), "ModelSpec: baseline length must equal d");
    require((baseline.array() >= 0.0).all(), "ModelSpec: baseline must be >= 0");
    require(groups.size() >= 2, "ModelSpec: at least 2 groups required");
    require(prior.size() == static_cast<Eigen::Index>(groups.size()),
            "ModelSpec: prior length must equal number of groups");
    require((prior.array() > 0.0).all(),
            "ModelSpec: prior must assign nonzero mass to each group");
    require(std::abs(prior.sum() - 1.0) <= 1e-12, "ModelSpec: prior must sum to 1");
    for (const auto& group : groups) {
        require(group.mu.size() == k(), "ModelSpec: mu length must equal k");
        require((group.mu.array() >= 0.0).all(),
                "ModelSpec: mu entries must be >= 0 (group " + group.label + ")");
    }
    for (std::size_t g = 0; g < groups.size(); ++g) {
        for (std::size_t r = g + 1; r < groups.size(); ++r) {
            require(groups[g].label != groups[r].label,
                    "ModelSpec: duplicate group label " + groups[g].label);
        }
    }
}

std::string to_string(SmoothingKernel k) {
    return k == SmoothingKernel::gaussian ? "gaussian" : "epanechnikov";
}

SmoothingKernel smoothing_kernel_from_string(const std::string& name) {
    if (name == "gaussian") return SmoothingKernel::gaussian;
    if (name == "epanechnikov") return SmoothingKernel::epanechnikov;
    throw std::invalid_argument("unknown smoothing kernel: " + name);
}

double smoothing_kernel_value(SmoothingKernel k, double u) {
    switch (k) {
        case SmoothingKernel::gaussian:
            return std::exp(-0.5 * u * u) / std::sqrt(2.0 * M_PI);
        case SmoothingKernel::epanechnikov:
            return std::abs(u) <= 1.0 ? 0.75 * (1.0 - u * u) : 0.0;
    }
    return 0.0;
}

int EstimatorConfig::half_grid_points() const {
    return static_cast<int>(std::llround(lag_threshold / lag_grid_step));
}

std::vector<double> EstimatorConfig::lag_grid() const {
    const int m = half_grid_points();
    std::vector<double> grid(2 * m + 1);
    for (int i = -m; i <= m; ++i) grid[i + m] = i * lag_grid_step;
    return grid;
}

void EstimatorConfig::validate() const {
    require(bandwidth > 0.0, "EstimatorConfig: bandwidth must be > 0");
    require(lag_threshold > 0.0, "EstimatorConfig: lag_threshold must be > 0");
    require(lag_grid_step > 0.0, "EstimatorConfig: lag_grid_step must be > 0");
    require(kernel_truncation_radius > 0.0,
            "EstimatorConfig: kernel_truncation_radius must be > 0");
    const double ratio = lag_threshold / lag_grid_step;
    require(std::abs(ratio - std::llround(ratio)) <= 1e-9 * std::max(1.0, ratio),
            "EstimatorConfig: lag_grid_step must divide lag_threshold evenly");
}

void SpectralConfig::validate() const {
    require(embed_dim >= 1, "SpectralConfig: embed_dim must be >= 1");
    require(std::isfinite(frequency), "SpectralConfig: frequency must be finite");
}

int Dataset::dim() const {
    return records.empty() ? 0 : records.front().events.dim();
}

bool Dataset::has_labels() const {
    for (const auto& record : records) {
        if (record.label.has_value()) return true;
    }
    return false;
}

void Dataset::validate() const {
    const int d = dim();
    for (const auto& record : records) {
        require(record.events.dim() == d,
                "Dataset: all records must share the same dimension d");
    }
}

}  // namespace lfpp
