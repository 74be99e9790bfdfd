#include "lfpp/learn.hpp"

#include "lfpp/rng.hpp"

#include <Eigen/Cholesky>
#include <Eigen/SVD>

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <stdexcept>

namespace lfpp {

namespace {

double sigmoid(double z) {
    if (z >= 0.0) return 1.0 / (1.0 + std::exp(-z));
    const double e = std::exp(z);
    return e / (1.0 + e);
}

double log1p_exp(double z) {
    // log(1 + e^z), overflow-safe
    return z > 30.0 ? z : std::log1p(std::exp(z));
}

}  // namespace

LogisticModel train_logistic(const std::vector<Vec>& features,
                             const std::vector<int>& labels, double reg, double tol,
                             int max_iter) {
    const int n = static_cast<int>(features.size());
    if (n == 0 || labels.size() != features.size()) {
        throw std::invalid_argument("train_logistic: features/labels size mismatch");
    }
    const int k = static_cast<int>(features.front().size());
    int positives = 0;
    for (int y : labels) positives += (y != 0);
    if (positives == 0 || positives == n) {
        throw std::invalid_argument("train_logistic: need at least one example per class");
    }

    Vec mean = Vec::Zero(k);
    for (const Vec& x : features) mean += x;
    mean /= n;
    Vec scale = Vec::Zero(k);
    for (const Vec& x : features) scale += (x - mean).cwiseAbs2();
    scale = (scale / n).cwiseSqrt();
    for (int j = 0; j < k; ++j) {
        if (scale[j] <= 0.0 || !std::isfinite(scale[j])) scale[j] = 1.0;
    }

    Mat x(n, k);
    Vec y(n);
    for (int i = 0; i < n; ++i) {
        x.row(i) = ((features[i] - mean).cwiseQuotient(scale)).transpose();
        y[i] = labels[i] != 0 ? 1.0 : -1.0;
    }

    // Parameters theta = (w, b); Newton with backtracking on the convex
    // objective (1/n) sum log(1 + exp(-y z)) + reg |w|^2 / 2.
    Vec theta = Vec::Zero(k + 1);
    const auto objective_at = [&](const Vec& point) {
        double value = 0.0;
        for (int i = 0; i < n; ++i) {
            const double z = x.row(i).dot(point.head(k)) + point[k];
            value += log1p_exp(-y[i] * z);
        }
        return value / n + 0.5 * reg * point.head(k).squaredNorm();
    };

    LogisticModel model;
    model.feature_mean = mean;
    model.feature_scale = scale;

    double objective = objective_at(theta);
    Vec gradient(k + 1);
    for (int iter = 0; iter < max_iter; ++iter) {
        Vec probabilities(n);
        gradient.setZero();
        Mat hessian = Mat::Zero(k + 1, k + 1);
        for (int i = 0; i < n; ++i) {
            const double z = x.row(i).dot(theta.head(k)) + theta[k];
            const double p = sigmoid(z);
            probabilities[i] = p;
            const double residual = p - (y[i] > 0.0 ? 1.0 : 0.0);
            const double curve = std::max(p * (1.0 - p), 1e-12);
            Vec xi(k + 1);
            xi.head(k) = x.row(i).transpose();
            xi[k] = 1.0;
            gradient += (residual / n) * xi;
            hessian += (curve / n) * xi * xi.transpose();
        }
        gradient.head(k) += reg * theta.head(k);
        hessian.topLeftCorner(k, k) += reg * Mat::Identity(k, k);

        model.gradient_norm = gradient.norm();
        model.iterations = iter;
        if (model.gradient_norm <= tol) {
            model.converged = true;
            break;
        }

        hessian.diagonal().array() += 1e-12;
        const Vec step = hessian.ldlt().solve(gradient);
        double damping = 1.0;
        Vec proposal = theta - damping * step;
        double proposed = objective_at(proposal);
        while (proposed > objective - 1e-4 * damping * gradient.dot(step) &&
               damping > 1e-8) {
            damping *= 0.5;
            proposal = theta - damping * step;
            proposed = objective_at(proposal);
        }
        theta = proposal;
        objective = proposed;
    }
    if (!model.converged) {
        // Final gradient check after the last update.
        Vec final_gradient = Vec::Zero(k + 1);
        for (int i = 0; i < n; ++i) {
            const double z = x.row(i).dot(theta.head(k)) + theta[k];
            const double residual = sigmoid(z) - (y[i] > 0.0 ? 1.0 : 0.0);
            Vec xi(k + 1);
            xi.head(k) = x.row(i).transpose();
            xi[k] = 1.0;
            final_gradient += (residual / n) * xi;
        }
        final_gradient.head(k) += reg * theta.head(k);
        model.gradient_norm = final_gradient.norm();
        model.iterations = max_iter;
        model.converged = model.gradient_norm <= tol;
    }
    if (reg == 0.0) {
        // With separable data and no regularization the objective has no
        // minimizer: the weights drift to infinity while the gradient
        // vanishes. Detect saturated margins and report guidance instead
        // of returning a runaway model.
        bool separated = true;
        double min_margin = std::numeric_limits<double>::infinity();
        for (int i = 0; i < n; ++i) {
            const double z = x.row(i).dot(theta.head(k)) + theta[k];
            if (y[i] * z <= 0.0) separated = false;
            min_margin = std::min(min_margin, y[i] * z);
        }
        if (!model.converged || (separated && min_margin > 5.0)) {
            throw std::runtime_error(
                "train_logistic: no finite optimum; the data are perfectly "
                "separable with reg = 0 - use reg > 0 (default 1e-4)");
        }
    }

    model.weights = theta.head(k);
    model.bias = theta[k];
    model.objective = objective;
    return model;
}

double predict_score(const LogisticModel& model, const Vec& feature) {
    if (feature.size() != model.weights.size()) {
        throw std::invalid_argument("predict_score: feature dimension mismatch");
    }
    const Vec standardized =
        (feature - model.feature_mean).cwiseQuotient(model.feature_scale);
    return sigmoid(model.weights.dot(standardized) + model.bias);
}

double auc(const std::vector<double>& scores, const std::vector<int>& labels) {
    const std::size_t n = scores.size();
    if (labels.size() != n || n == 0) {
        throw std::invalid_argument("auc: scores/labels size mismatch");
    }
    std::size_t positives = 0;
    for (int y : labels) positives += (y != 0);
    if (positives == 0 || positives == n) {
        throw std::invalid_argument("auc: both classes must be present");
    }

    std::vector<std::size_t> order(n);
    std::iota(order.begin(), order.end(), 0);
    std::sort(order.begin(), order.end(),
              [&](std::size_t a, std::size_t b) { return scores[a] < scores[b]; });

    // Rank sum of positives with average ranks over ties.
    double positive_rank_sum = 0.0;
    std::size_t i = 0;
    while (i < n) {
        std::size_t j = i;
        while (j + 1 < n && scores[order[j + 1]] == scores[order[i]]) ++j;
        const double average_rank = 0.5 * static_cast<double>(i + j) + 1.0;
        for (std::size_t p = i; p <= j; ++p) {
            if (labels[order[p]] != 0) positive_rank_sum += average_rank;
        }
        i = j + 1;
    }
    const double n_pos = static_cast<double>(positives);
    const double n_neg = static_cast<double>(n - positives);
    return (positive_rank_sum - n_pos * (n_pos + 1.0) / 2.0) / (n_pos * n_neg);
}

double ClusteringResult::objective(const std::vector<Vec>& features) const {
    double total = 0.0;
    for (std::size_t i = 0; i < features.size(); ++i) {
        total += (features[i] - centers[assignments[i]]).squaredNorm();
    }
    return total;
}

namespace {

int nearest_center(const Vec& point, const std::vector<Vec>& centers) {
    int best = 0;
    double best_distance = std::numeric_limits<double>::infinity();
    for (std::size_t c = 0; c < centers.size(); ++c) {
        const double distance = (point - centers[c]).squaredNorm();
        if (distance < best_distance) {
            best_distance = distance;
            best = static_cast<int>(c);
        }
    }
    return best;
}

/// k-means++ seeding: first center uniform, then D^2-weighted draws.
std::vector<Vec> kmeanspp_seed(const std::vector<Vec>& points, int k,
                               RandomSource& rng) {
    const std::size_t n = points.size();
    std::vector<Vec> centers;
    centers.reserve(k);
    centers.push_back(points[rng.uniform_int(n)]);
    std::vector<double> distance(n);
    while (static_cast<int>(centers.size()) < k) {
        double total = 0.0;
        for (std::size_t i = 0; i < n; ++i) {
            distance[i] = (points[i] - centers[nearest_center(points[i], centers)])
                              .squaredNorm();
            total += distance[i];
        }
        std::size_t choice = 0;
        if (total > 0.0) {
            const double target = rng.uniform() * total;
            double cumulative = 0.0;
            for (std::size_t i = 0; i < n; ++i) {
                cumulative += distance[i];
                if (target < cumulative) {
                    choice = i;
                    break;
                }
                choice = i;
            }
        } else {
            choice = rng.uniform_int(n);
        }
        centers.push_back(points[choice]);
    }
    return centers;
}

/// Lloyd iterations; returns number of iterations run. Empty clusters are
/// reseeded at the point farthest from its current center.
int lloyd(const std::vector<Vec>& points, std::vector<Vec>& centers,
          std::vector<int>& assignments, int max_iter, int* reseeds) {
    const std::size_t n = points.size();
    const int k = static_cast<int>(centers.size());
    int iter = 0;
    for (; iter < max_iter; ++iter) {
        bool changed = false;
        for (std::size_t i = 0; i < n; ++i) {
            const int a = nearest_center(points[i], centers);
            if (a != assignments[i]) {
                assignments[i] = a;
                changed = true;
            }
        }
        if (!changed && iter > 0) break;

        std::vector<Vec> sums(k, Vec::Zero(points.front().size()));
        std::vector<int> counts(k, 0);
        for (std::size_t i = 0; i < n; ++i) {
            sums[assignments[i]] += points[i];
            counts[assignments[i]] += 1;
        }
        for (int c = 0; c < k; ++c) {
            if (counts[c] > 0) {
                centers[c] = sums[c] / counts[c];
            } else {
                // Reseed an emptied cluster at the farthest point.
                std::size_t farthest = 0;
                double best = -1.0;
                for (std::size_t i = 0; i < n; ++i) {
                    const double distance =
                        (points[i] - centers[assignments[i]]).squaredNorm();
                    if (distance > best) {
                        best = distance;
                        farthest = i;
                    }
                }
                centers[c] = points[farthest];
                if (reseeds != nullptr) *reseeds += 1;
            }
        }
    }
    return iter;
}

}  // namespace

ClusteringResult kmeans_spectral(const std::vector<Vec>& features, int num_clusters,
                                 std::uint64_t seed, int max_iter) {
    const std::size_t n = features.size();
    if (num_clusters < 2) {
        throw std::invalid_argument("kmeans_spectral: num_clusters must be >= 2");
    }
    if (n < static_cast<std::size_t>(num_clusters)) {
        throw std::invalid_argument("kmeans_spectral: need n >= num_clusters");
    }
    const int k = static_cast<int>(features.front().size());

    // Rank-|G| approximation of the stacked embedding matrix via SVD.
    Mat stacked(n, k);
    for (std::size_t i = 0; i < n; ++i) stacked.row(i) = features[i].transpose();
    Mat reduced = stacked;
    if (num_clusters < k) {
        Eigen::BDCSVD<Mat> svd(stacked, Eigen::ComputeThinU | Eigen::ComputeThinV);
        const int rank = num_clusters;
        reduced = svd.matrixU().leftCols(rank) *
                  svd.singularValues().head(rank).asDiagonal() *
                  svd.matrixV().leftCols(rank).transpose();
    }
    std::vector<Vec> spectral_rows(n);
    for (std::size_t i = 0; i < n; ++i) spectral_rows[i] = reduced.row(i).transpose();

    RandomSource rng = seeded_rng(seed, 0);
    std::vector<Vec> centers = kmeanspp_seed(spectral_rows, num_clusters, rng);
    std::vector<int> assignments(n, -1);
    lloyd(spectral_rows, centers, assignments, 10, nullptr);

    // Map the initial centers to the original feature space (means of the
    // assigned original rows), then run Lloyd on the original rows.
    ClusteringResult result;
    result.centers.assign(num_clusters, Vec::Zero(k));
    std::vector<int> counts(num_clusters, 0);
    for (std::size_t i = 0; i < n; ++i) {
        result.centers[assignments[i]] += features[i];
        counts[assignments[i]] += 1;
    }
    for (int c = 0; c < num_clusters; ++c) {
        if (counts[c] > 0) {
            result.centers[c] /= counts[c];
        } else {
            result.centers[c] = features[rng.uniform_int(n)];
        }
    }
    result.assignments.assign(n, -1);
    result.iterations = lloyd(features, result.centers, result.assignments, max_iter,
                              &result.reseed_events);
    return result;
}

double adjusted_rand_index(const std::vector<int>& labels_a,
                           const std::vector<int>& labels_b) {
    if (labels_a.size() != labels_b.size()) {
        throw std::invalid_argument("adjusted_rand_index: length mismatch");
    }
    const std::size_t n = labels_a.size();
    if (n < 2) {
        throw std::invalid_argument("adjusted_rand_index: need at least 2 items");
    }

    const auto relabel = [](const std::vector<int>& labels) {
        std::vector<int> dense(labels.size());
        std::vector<int> seen;
        for (std::size_t i = 0; i < labels.size(); ++i) {
            auto it = std::find(seen.begin(), seen.end(), labels[i]);
            if (it == seen.end()) {
                seen.push_back(labels[i]);
                dense[i] = static_cast<int>(seen.size()) - 1;
            } else {
                dense[i] = static_cast<int>(it - seen.begin());
            }
        }
        return std::pair(dense, static_cast<int>(seen.size()));
    };
    const auto [a, ka] = relabel(labels_a);
    const auto [b, kb] = relabel(labels_b);

    Mat contingency = Mat::Zero(ka, kb);
    for (std::size_t i = 0; i < n; ++i) contingency(a[i], b[i]) += 1.0;

    const auto choose2 = [](double m) { return m * (m - 1.0) / 2.0; };
    double sum_cells = 0.0;
    for (int i = 0; i < ka; ++i) {
        for (int j = 0; j < kb; ++j) sum_cells += choose2(contingency(i, j));
    }
    double sum_rows = 0.0, sum_cols = 0.0;
    for (int i = 0; i < ka; ++i) sum_rows += choose2(contingency.row(i).sum());
    for (int j = 0; j < kb; ++j) sum_cols += choose2(contingency.col(j).sum());

    const double total_pairs = choose2(static_cast<double>(n));
    const double expected = sum_rows * sum_cols / total_pairs;
    const double maximum = 0.5 * (sum_rows + sum_cols);
    if (maximum == expected) return 1.0;  // both sides single-cluster
    return (sum_cells - expected) / (maximum - expected);
}

}  // namespace lfpp
