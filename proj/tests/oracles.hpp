// Independent reference implementations used only by tests. Each one is a
// brute-force or closed-form route kept separate from the library code it
// checks.
#pragma once

#include "lfpp/core.hpp"
#include "lfpp/covariance.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <vector>

namespace oracles {

/// Naive O(n^2) double-loop version of the kernel-smoothing estimator,
/// no truncation shortcuts.
inline lfpp::CovarianceCurve naive_cross_covariance(const lfpp::EventSequence& seq,
                                                    const lfpp::EstimatorConfig& cfg) {
    const double T = seq.window_end();
    const double h = cfg.bandwidth;
    const int d = seq.dim();
    lfpp::CovarianceCurve curve;
    curve.lags = cfg.lag_grid();
    curve.values.assign(curve.lags.size(), lfpp::Mat::Zero(d, d));
    for (std::size_t m = 0; m < curve.lags.size(); ++m) {
        const double tau = curve.lags[m];
        for (int j = 0; j < d; ++j) {
            for (int jp = 0; jp < d; ++jp) {
                double sum = 0.0;
                const auto& left = seq.component(j);
                const auto& right = seq.component(jp);
                for (std::size_t a = 0; a < left.size(); ++a) {
                    for (std::size_t b = 0; b < right.size(); ++b) {
                        if (j == jp && a == b) continue;
                        const double u = (right[b] - left[a] + tau) / h;
                        if (std::abs(u) > cfg.kernel_truncation_radius) continue;
                        sum += lfpp::smoothing_kernel_value(cfg.smoothing_kernel, u);
                    }
                }
                curve.values[m](j, jp) =
                    sum / (T * h) - (static_cast<double>(left.size()) / T) *
                                        (static_cast<double>(right.size()) / T);
            }
        }
    }
    return curve;
}

/// All-pairs AUC: P(s+ > s-) + P(s+ = s-)/2.
inline double brute_force_auc(const std::vector<double>& scores,
                              const std::vector<int>& labels) {
    double wins = 0.0;
    long pairs = 0;
    for (std::size_t i = 0; i < scores.size(); ++i) {
        if (labels[i] == 0) continue;
        for (std::size_t j = 0; j < scores.size(); ++j) {
            if (labels[j] != 0) continue;
            ++pairs;
            if (scores[i] > scores[j]) {
                wins += 1.0;
            } else if (scores[i] == scores[j]) {
                wins += 0.5;
            }
        }
    }
    return wins / static_cast<double>(pairs);
}

/// Eigenvalues of a 2x2 Hermitian matrix from the quadratic formula,
/// descending.
inline std::pair<double, double> hermitian_2x2_eigenvalues(const lfpp::CMat& m) {
    const double a = m(0, 0).real();
    const double c = m(1, 1).real();
    const double off = std::abs(m(0, 1));
    const double mean = 0.5 * (a + c);
    const double radius = std::sqrt(0.25 * (a - c) * (a - c) + off * off);
    return {mean + radius, mean - radius};
}

/// Best 2-means objective over all bipartitions (points assigned to the
/// mean of their side), by exhaustive enumeration.
inline double best_bipartition_objective(const std::vector<lfpp::Vec>& points) {
    const std::size_t n = points.size();
    double best = std::numeric_limits<double>::infinity();
    for (unsigned long mask = 1; mask + 1 < (1UL << n); ++mask) {
        lfpp::Vec mean0 = lfpp::Vec::Zero(points.front().size());
        lfpp::Vec mean1 = lfpp::Vec::Zero(points.front().size());
        int n0 = 0, n1 = 0;
        for (std::size_t i = 0; i < n; ++i) {
            if (mask & (1UL << i)) {
                mean1 += points[i];
                ++n1;
            } else {
                mean0 += points[i];
                ++n0;
            }
        }
        mean0 /= n0;
        mean1 /= n1;
        double objective = 0.0;
        for (std::size_t i = 0; i < n; ++i) {
            objective += (points[i] - ((mask & (1UL << i)) ? mean1 : mean0)).squaredNorm();
        }
        best = std::min(best, objective);
    }
    return best;
}

/// ARI from the 2x2 contingency table, spelled out for hand-checkable
/// instances.
inline double contingency_ari(const std::vector<int>& a, const std::vector<int>& b) {
    const auto choose2 = [](double m) { return m * (m - 1.0) / 2.0; };
    int ka = *std::max_element(a.begin(), a.end()) + 1;
    int kb = *std::max_element(b.begin(), b.end()) + 1;
    std::vector<std::vector<double>> table(ka, std::vector<double>(kb, 0.0));
    for (std::size_t i = 0; i < a.size(); ++i) table[a[i]][b[i]] += 1.0;
    double cells = 0.0, rows = 0.0, cols = 0.0;
    for (int i = 0; i < ka; ++i) {
        double row = 0.0;
        for (int j = 0; j < kb; ++j) {
            cells += choose2(table[i][j]);
            row += table[i][j];
        }
        rows += choose2(row);
    }
    for (int j = 0; j < kb; ++j) {
        double col = 0.0;
        for (int i = 0; i < ka; ++i) col += table[i][j];
        cols += choose2(col);
    }
    const double total = choose2(static_cast<double>(a.size()));
    const double expected = rows * cols / total;
    return (cells - expected) / (0.5 * (rows + cols) - expected);
}

}  // namespace oracles
