#include "lfpp/baselines.hpp"

#include <Eigen/Eigenvalues>

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace lfpp {

Vec count_embedding(const EventSequence& seq) {
    Vec counts(seq.dim());
    for (int j = 0; j < seq.dim(); ++j) {
        counts[j] = static_cast<double>(seq.count(j));
    }
    return counts;
}

Mat pmi_matrix(const EventSequence& seq, double window) {
    if (!(window > 0.0)) {
        throw std::invalid_argument("pmi_matrix: window must be > 0");
    }
    const int d = seq.dim();
    const int bins =
        static_cast<int>(std::ceil(seq.window_end() / window - 1e-12));
    const int n_bins = std::max(bins, 1);

    // Binary occurrence indicator per (bin, code).
    std::vector<std::vector<bool>> occupied(
        n_bins, std::vector<bool>(static_cast<std::size_t>(d), false));
    for (int j = 0; j < d; ++j) {
        for (double t : seq.component(j)) {
            int bin = static_cast<int>(t / window);
            if (bin >= n_bins) bin = n_bins - 1;  // t == T lands in the last bin
            occupied[bin][j] = true;
        }
    }

    Vec marginal = Vec::Zero(d);
    Mat joint = Mat::Zero(d, d);
    for (int b = 0; b < n_bins; ++b) {
        std::vector<int> present;
        for (int j = 0; j < d; ++j) {
            if (occupied[b][j]) present.push_back(j);
        }
        for (std::size_t u = 0; u < present.size(); ++u) {
            marginal[present[u]] += 1.0;
            for (std::size_t v = 0; v < present.size(); ++v) {
                joint(present[u], present[v]) += 1.0;
            }
        }
    }
    marginal /= n_bins;
    joint /= n_bins;

    const double eps = 1.0 / n_bins;
    Mat pmi(d, d);
    for (int j = 0; j < d; ++j) {
        for (int jp = 0; jp < d; ++jp) {
            pmi(j, jp) = std::log((joint(j, jp) + eps) /
                                  ((marginal[j] + eps) * (marginal[jp] + eps)));
        }
    }
    return pmi;
}

Embedding pmi_embedding(const EventSequence& seq, double window, int k) {
    if (k > seq.dim()) {
        throw std::invalid_argument("pmi_embedding: k > d");
    }
    const Mat pmi = pmi_matrix(seq, window);
    Eigen::SelfAdjointEigenSolver<Mat> solver(pmi, Eigen::EigenvaluesOnly);
    Vec all = solver.eigenvalues();
    std::sort(all.data(), all.data() + all.size(), std::greater<double>());
    return Embedding{all.head(k)};
}

}  // namespace lfpp
