#pragma once

#include "lfpp/core.hpp"

#include <cstdint>
#include <vector>

namespace lfpp {

/// Binary logistic classifier on standardized features.
struct LogisticModel {
    Vec weights;
    double bias = 0.0;
    Vec feature_mean;   ///< training standardization: per-dimension mean
    Vec feature_scale;  ///< per-dimension standard deviation (1 where zero)
    int iterations = 0;
    double objective = 0.0;
    double gradient_norm = 0.0;
    bool converged = false;
};

/// Empirical risk minimization with logistic loss over linear classifiers:
/// minimizes (1/n) sum log(1 + exp(-y_i (w.x_i + b))) + reg * |w|^2 / 2 by
/// damped Newton iterations until the gradient norm is <= tol or max_iter.
/// Inputs are standardized internally. Throws on perfect separation with
/// reg == 0 (non-convergence), with guidance to use reg > 0.
LogisticModel train_logistic(const std::vector<Vec>& features,
                             const std::vector<int>& labels, double reg = 1e-4,
                             double tol = 1e-8, int max_iter = 100);

/// sigmoid(w . standardized(x) + b), in (0, 1).
double predict_score(const LogisticModel& model, const Vec& feature);

/// Mann-Whitney AUC with tie handling: P(s+ > s-) + P(s+ = s-)/2, computed
/// exactly via rank sums. Both classes must be present.
double auc(const std::vector<double>& scores, const std::vector<int>& labels);

struct ClusteringResult {
    std::vector<int> assignments;
    std::vector<Vec> centers;
    int iterations = 0;
    int reseed_events = 0;  ///< empty-cluster reseeds during Lloyd

    /// Sum of squared distances to assigned centers.
    double objective(const std::vector<Vec>& features) const;
};

/// K-means with spectral initialization: initial centers come from
/// k-means++ seeding plus a short Lloyd run on the rows of the
/// rank-num_clusters SVD approximation of the stacked embeddings; the main
/// Lloyd loop then runs on the original rows until assignments are stable
/// or max_iter. Deterministic for a fixed seed. An emptied cluster is
/// reseeded at the point farthest from its current center.
ClusteringResult kmeans_spectral(const std::vector<Vec>& features, int num_clusters,
                                 std::uint64_t seed, int max_iter = 300);

/// Pair-counting adjusted Rand index; invariant to relabeling either side.
double adjusted_rand_index(const std::vector<int>& labels_a,
                           const std::vector<int>& labels_b);

}  // namespace lfpp
