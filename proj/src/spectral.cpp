#include "lfpp/spectral.hpp"

#include "lfpp/quadrature.hpp"

#include <Eigen/Eigenvalues>
#include <Eigen/SVD>

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace lfpp {

double hermitian_defect(const CMat& matrix) {
    return (matrix - matrix.adjoint()).cwiseAbs().maxCoeff();
}

SpectralMatrix fourier_transform_curve(const CovarianceCurve& curve, double xi0) {
    if (!curve.grid_is_symmetric()) {
        throw std::invalid_argument(
            "fourier_transform_curve: lag grid must be symmetric about 0");
    }
    const std::size_t n = curve.lags.size();
    const int d = curve.dim();
    CMat raw = CMat::Zero(d, d);
    for (std::size_t m = 0; m < n; ++m) {
        const double tau = curve.lags[m];
        double step;  // trapezoid weight
        if (m == 0) {
            step = 0.5 * (curve.lags[1] - curve.lags[0]);
        } else if (m + 1 == n) {
            step = 0.5 * (curve.lags[n - 1] - curve.lags[n - 2]);
        } else {
            step = 0.5 * (curve.lags[m + 1] - curve.lags[m - 1]);
        }
        const double angle = -2.0 * M_PI * xi0 * tau;
        const Complex phase(std::cos(angle) * step, std::sin(angle) * step);
        raw += phase * curve.values[m];
    }
    SpectralMatrix out;
    out.frequency = xi0;
    out.presym_defect = hermitian_defect(raw);
    out.entries = 0.5 * (raw + raw.adjoint());
    return out;
}

namespace {

void require_hermitian(const CMat& entries) {
    const double scale = std::max(1.0, entries.cwiseAbs().maxCoeff());
    if (hermitian_defect(entries) > 1e-12 * scale) {
        throw std::invalid_argument("hermitian eigendecomposition: input not Hermitian");
    }
}

Vec descending(Vec values) {
    std::sort(values.data(), values.data() + values.size(), std::greater<double>());
    return values;
}

}  // namespace

Vec hermitian_eigenvalues(const SpectralMatrix& matrix) {
    require_hermitian(matrix.entries);
    Eigen::SelfAdjointEigenSolver<CMat> solver(matrix.entries,
                                               Eigen::EigenvaluesOnly);
    return descending(solver.eigenvalues());
}

std::pair<Vec, CMat> hermitian_eigensystem(const SpectralMatrix& matrix) {
    require_hermitian(matrix.entries);
    Eigen::SelfAdjointEigenSolver<CMat> solver(matrix.entries);
    const Vec ascending = solver.eigenvalues();
    const CMat vectors = solver.eigenvectors();
    const Eigen::Index d = ascending.size();
    Vec values(d);
    CMat ordered(d, d);
    for (Eigen::Index i = 0; i < d; ++i) {
        values[i] = ascending[d - 1 - i];
        ordered.col(i) = vectors.col(d - 1 - i);
    }
    return {values, ordered};
}

Vec top_eigenvalues(const CMat& hermitian, int k) {
    Eigen::SelfAdjointEigenSolver<CMat> solver(hermitian, Eigen::EigenvaluesOnly);
    const Vec all = descending(solver.eigenvalues());
    return all.head(k);
}

Embedding fourier_eigen_embedding(const EventSequence& seq,
                                  const EstimatorConfig& est_cfg,
                                  const SpectralConfig& sp_cfg) {
    est_cfg.validate();
    sp_cfg.validate();
    if (sp_cfg.embed_dim > seq.dim()) {
        throw std::invalid_argument("fourier_eigen_embedding: embed_dim > d");
    }
    const CovarianceCurve curve = estimate_cross_covariance(seq, est_cfg);
    const SpectralMatrix spectrum = fourier_transform_curve(curve, sp_cfg.frequency);
    return Embedding{top_eigenvalues(spectrum.entries, sp_cfg.embed_dim)};
}

Complex transfer_kernel_transform(const TransferBank& transfer, double xi) {
    const double b0 = transfer.support_radius();
    const double real = integrate_adaptive(
        [&](double t) { return transfer.beta(t) * std::cos(2.0 * M_PI * xi * t); },
        0.0, b0, 1e-9);
    const double imag = integrate_adaptive(
        [&](double t) { return -transfer.beta(t) * std::sin(2.0 * M_PI * xi * t); },
        0.0, b0, 1e-9);
    return Complex(real, imag);
}

int PopulationOracle::group(const std::string& label) const {
    for (std::size_t g = 0; g < labels.size(); ++g) {
        if (labels[g] == label) return static_cast<int>(g);
    }
    throw std::invalid_argument("PopulationOracle: unknown group label: " + label);
}

namespace {

/// Fix each column's phase: largest-modulus entry made real positive.
CMat fix_phases(CMat vectors) {
    for (Eigen::Index c = 0; c < vectors.cols(); ++c) {
        Eigen::Index argmax = 0;
        vectors.col(c).cwiseAbs().maxCoeff(&argmax);
        const Complex pivot = vectors(argmax, c);
        const double mod = std::abs(pivot);
        if (mod > 0.0) vectors.col(c) *= std::conj(pivot) / mod;
    }
    return vectors;
}

}  // namespace

std::pair<Embedding, PopulationOracle> population_embedding(const ModelSpec& model,
                                                            const std::string& group,
                                                            double xi0) {
    model.validate();
    const int k = model.k();
    const Complex beta_hat = transfer_kernel_transform(model.transfer, xi0);
    PopulationOracle oracle;
    oracle.transfer_transform = model.transfer.coefficients().cast<Complex>() * beta_hat;

    Eigen::JacobiSVD<CMat> svd(oracle.transfer_transform);
    oracle.sigma_1 = svd.singularValues()(0);
    // A d x k matrix with d < k cannot have full column rank.
    oracle.sigma_k = model.d() < k ? 0.0 : svd.singularValues()(k - 1);
    oracle.full_rank = oracle.sigma_k >= 1e-8;
    if (!oracle.full_rank) {
        oracle.warning = "W(xi0) is rank deficient (sigma_k = " +
                         std::to_string(oracle.sigma_k) +
                         "); embeddings may not separate groups at this frequency";
    }

    const std::size_t n_groups = model.groups.size();
    for (std::size_t g = 0; g < n_groups; ++g) {
        oracle.labels.push_back(model.groups[g].label);
        oracle.group_mu.push_back(model.groups[g].mu);
        const CMat spectrum = oracle.transfer_transform *
                              model.groups[g].mu.asDiagonal() *
                              oracle.transfer_transform.adjoint();
        SpectralMatrix wrapped;
        wrapped.frequency = xi0;
        wrapped.entries = 0.5 * (spectrum + spectrum.adjoint());
        auto [values, vectors] = hermitian_eigensystem(wrapped);
        oracle.group_spectra.push_back(wrapped.entries);
        oracle.group_embeddings.push_back(values.head(k));
        oracle.group_eigvecs.push_back(fix_phases(vectors.leftCols(k)));
    }

    oracle.rho = Mat::Zero(n_groups, n_groups);
    for (std::size_t g = 0; g < n_groups; ++g) {
        for (std::size_t r = 0; r < n_groups; ++r) {
            const CMat overlap =
                oracle.group_eigvecs[g].adjoint() * oracle.group_eigvecs[r];
            oracle.rho(g, r) = (overlap - CMat::Identity(k, k)).norm();
        }
    }

    const int g = model.group_index(group);
    return {Embedding{oracle.group_embeddings[g]}, oracle};
}

SeparationReport separation_diagnostic(const PopulationOracle& oracle,
                                       const std::string& g, const std::string& r) {
    const int gi = oracle.group(g);
    const int ri = oracle.group(r);
    const Vec& mu_g = oracle.group_mu[gi];
    const Vec& mu_r = oracle.group_mu[ri];
    const double k = static_cast<double>(mu_g.size());

    SeparationReport report;
    report.rho = oracle.rho(gi, ri);
    report.lhs =
        (oracle.group_embeddings[gi] - oracle.group_embeddings[ri]).norm() / k;
    const double sk2 = oracle.sigma_k * oracle.sigma_k;
    const double s12 = oracle.sigma_1 * oracle.sigma_1;
    report.rhs = sk2 * (mu_g - mu_r).norm() -
                 3.0 * s12 * std::min(mu_g.norm(), mu_r.norm()) *
                     std::max(report.rho, report.rho * report.rho);
    report.holds = report.lhs >= report.rhs - 1e-9 * std::max(1.0, std::abs(report.rhs));
    return report;
}

// ---------------------------------------------------------------------------
// SpectralEmbedder

SpectralEmbedder::SpectralEmbedder(EstimatorConfig est_cfg, SpectralConfig sp_cfg)
    : est_cfg_(est_cfg), sp_cfg_(sp_cfg) {
    est_cfg_.validate();
    sp_cfg_.validate();
    const double h = est_cfg_.bandwidth;
    const double radius = est_cfg_.kernel_truncation_radius * h;
    max_gap_ = est_cfg_.lag_threshold + radius;
    node_step_ = std::min(est_cfg_.lag_grid_step, h) / 8.0;

    const int m_half = est_cfg_.half_grid_points();
    const double dt = est_cfg_.lag_grid_step;
    const double xi0 = sp_cfg_.frequency;

    const std::size_t n_nodes =
        static_cast<std::size_t>(std::ceil(2.0 * max_gap_ / node_step_)) + 2;
    node_value_right_.assign(n_nodes, Complex(0.0, 0.0));
    node_deriv_right_.assign(n_nodes, Complex(0.0, 0.0));
    node_value_left_.assign(n_nodes, Complex(0.0, 0.0));
    node_deriv_left_.assign(n_nodes, Complex(0.0, 0.0));

    // Trapezoid weights and phases of the lag grid, shared by every node.
    std::vector<double> weight(2 * m_half + 1), cosine(2 * m_half + 1),
        sine(2 * m_half + 1);
    mean_term_weight_ = 0.0;
    for (int m = -m_half; m <= m_half; ++m) {
        const std::size_t idx = static_cast<std::size_t>(m + m_half);
        weight[idx] = dt * (std::abs(m) == m_half ? 0.5 : 1.0);
        const double angle = -2.0 * M_PI * xi0 * (m * dt);
        cosine[idx] = std::cos(angle);
        sine[idx] = std::sin(angle);
        mean_term_weight_ += weight[idx] * cosine[idx];
    }

    const SmoothingKernel kernel = est_cfg_.smoothing_kernel;
    const bool gaussian = kernel == SmoothingKernel::gaussian;
    const double radius_u = est_cfg_.kernel_truncation_radius;
    // |u| where K or K' is discontinuous: the truncation radius for the
    // gaussian kernel, the natural support edge for epanechnikov. q(D) is
    // piecewise smooth with breaks where some grid point sits exactly on
    // this edge; node values and derivatives are stored one-sided so a
    // Hermite cell never interpolates across a break.
    const double edge_u = gaussian ? radius_u : std::min(radius_u, 1.0);
    const double edge_eps = 1e-9 * std::max(1.0, edge_u);
    for (std::size_t node = 0; node < n_nodes; ++node) {
        const double gap = static_cast<double>(node) * node_step_ - max_gap_;
        Complex value(0.0, 0.0), deriv(0.0, 0.0);
        Complex edge_right(0.0, 0.0), edge_left(0.0, 0.0);
        Complex edge_deriv_right(0.0, 0.0), edge_deriv_left(0.0, 0.0);
        for (int m = -m_half; m <= m_half; ++m) {
            const double u = (gap + m * dt) / h;
            const double au = std::abs(u);
            if (au > radius_u + edge_eps) continue;
            const std::size_t idx = static_cast<std::size_t>(m + m_half);
            const Complex phase(cosine[idx], sine[idx]);
            const double kv = smoothing_kernel_value(kernel, u);
            const double kd = gaussian ? -u * kv : (au <= 1.0 ? -1.5 * u : 0.0);
            if (au >= edge_u - edge_eps && au <= edge_u + edge_eps) {
                // Exactly on the break: |u| shrinks to the right of the node
                // when u < 0, to the left when u > 0. Evaluate the inside
                // limit at the snapped edge position (au may sit a few ulp
                // outside the branch cut).
                const double u_snap = u < 0.0 ? -edge_u : edge_u;
                const double kv_edge = smoothing_kernel_value(kernel, u_snap);
                const double kd_edge = gaussian ? -u_snap * kv_edge : -1.5 * u_snap;
                if (u < 0.0) {
                    edge_right += weight[idx] * kv_edge * phase;
                    edge_deriv_right += weight[idx] * (kd_edge / h) * phase;
                } else {
                    edge_left += weight[idx] * kv_edge * phase;
                    edge_deriv_left += weight[idx] * (kd_edge / h) * phase;
                }
                continue;
            }
            value += weight[idx] * kv * phase;
            deriv += weight[idx] * (kd / h) * phase;
        }
        node_value_right_[node] = value + edge_right;
        node_deriv_right_[node] = deriv + edge_deriv_right;
        node_value_left_[node] = value + edge_left;
        node_deriv_left_[node] = deriv + edge_deriv_left;
    }
}

Complex SpectralEmbedder::table_value(double gap) const {
    const double position = (gap + max_gap_) / node_step_;
    std::size_t cell = static_cast<std::size_t>(position);
    if (cell + 1 >= node_value_right_.size()) cell = node_value_right_.size() - 2;
    const double t = position - static_cast<double>(cell);
    // Cubic Hermite within the cell; the endpoints use the limits taken
    // from inside the cell.
    const double t2 = t * t, t3 = t2 * t;
    const double h00 = 2.0 * t3 - 3.0 * t2 + 1.0;
    const double h10 = t3 - 2.0 * t2 + t;
    const double h01 = -2.0 * t3 + 3.0 * t2;
    const double h11 = t3 - t2;
    return h00 * node_value_right_[cell] + h01 * node_value_left_[cell + 1] +
           node_step_ * (h10 * node_deriv_right_[cell] +
                         h11 * node_deriv_left_[cell + 1]);
}

SpectralMatrix SpectralEmbedder::spectral_matrix(const EventSequence& seq) const {
    const int d = seq.dim();
    const double T = seq.window_end();

    // Merge all events into one time-ordered stream tagged with code ids.
    std::vector<std::pair<double, int>> merged;
    merged.reserve(seq.total_events());
    for (int j = 0; j < d; ++j) {
        for (double t : seq.component(j)) merged.emplace_back(t, j);
    }
    std::sort(merged.begin(), merged.end());

    CMat sums = CMat::Zero(d, d);
    const std::size_t n = merged.size();
    for (std::size_t i = 0; i < n; ++i) {
        const double t_i = merged[i].first;
        const int code_i = merged[i].second;
        for (std::size_t p = i + 1; p < n; ++p) {
            const double gap = merged[p].first - t_i;
            if (gap > max_gap_) break;
            const Complex q = table_value(gap);
            // Ordered pair (t_i, t_p) feeds entry (code_i, code_p); the
            // reversed pair has gap -gap and q(-D) = conj(q(D)).
            sums(code_i, merged[p].second) += q;
            sums(merged[p].second, code_i) += std::conj(q);
        }
    }

    const double norm = 1.0 / (T * est_cfg_.bandwidth);
    CMat entries(d, d);
    for (int j = 0; j < d; ++j) {
        for (int jp = 0; jp < d; ++jp) {
            const double mean_term = (static_cast<double>(seq.count(j)) / T) *
                                     (static_cast<double>(seq.count(jp)) / T);
            entries(j, jp) = norm * sums(j, jp) - mean_term * mean_term_weight_;
        }
    }

    SpectralMatrix out;
    out.frequency = sp_cfg_.frequency;
    out.presym_defect = hermitian_defect(entries);
    out.entries = 0.5 * (entries + entries.adjoint());
    return out;
}

Embedding SpectralEmbedder::embed(const EventSequence& seq) const {
    if (sp_cfg_.embed_dim > seq.dim()) {
        throw std::invalid_argument("SpectralEmbedder: embed_dim > d");
    }
    return Embedding{top_eigenvalues(spectral_matrix(seq).entries, sp_cfg_.embed_dim)};
}

}  // namespace lfpp
