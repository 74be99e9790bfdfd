#pragma once

#include "lfpp/core.hpp"

#include <cstdint>
#include <string>
#include <vector>

namespace lfpp {

/// One cell of an experiment grid.
struct GridCell {
    int n = 0;
    double T = 0.0;
    double delta = 0.0;          ///< |mu0 - mu1|_2
    TransferKernel kernel = TransferKernel::gauss;
};

/// Experiment description for the simulation studies: a grid over sample
/// size, observation time, signal strength and transfer kernel, each cell
/// replicated R times with train/test cohorts simulated from the model.
struct ExperimentGrid {
    int d = 100;
    int k = 2;
    std::vector<int> n_list{500};
    std::vector<double> T_list{100.0};
    std::vector<double> delta_list{1.6};
    std::vector<TransferKernel> kernels{TransferKernel::gauss};
    int replications = 20;
    int test_size = 50;
    std::vector<std::string> methods{"fourier_eigen", "pmi", "counts"};
    std::uint64_t base_seed = 20240101;
    EstimatorConfig estimator;
    SpectralConfig spectral;
    double pmi_window_divisor = 20.0;  ///< PMI window = T / divisor
    Vec mu_base;                       ///< base latent intensity (default ones)
    double nu = 0.1;                   ///< constant baseline intensity
    double coef_low = 0.0;             ///< transfer coefficients ~ Unif(low, high)
    double coef_high = 0.5;
    bool freeze_coefficients = false;  ///< one A per cell instead of per replication
    int threads = 0;                   ///< 0: hardware concurrency

    std::vector<GridCell> cells() const;
    void validate() const;
};

/// Latent intensity vectors for a cell: mu0 = mu_base and
/// mu1 = mu_base + delta * (1, -1, 0, ...)/sqrt(2), which keeps the total
/// latent rate equal across groups. Throws if mu1 would go negative.
std::pair<Vec, Vec> group_intensities(const Vec& mu_base, double delta);

/// Model for one grid cell; the coefficient matrix is drawn Unif(low, high)
/// from the given random stream.
ModelSpec cell_model(const ExperimentGrid& grid, const GridCell& cell,
                     std::uint64_t coef_seed);

/// One (cell, method, metric) aggregate over replications.
struct ResultRow {
    int n = 0;
    double T = 0.0;
    double delta = 0.0;
    std::string kernel;
    std::string method;
    std::string metric;  ///< "auc" or "ari"
    double mean = 0.0;
    double std_error = 0.0;
    int replications = 0;
};

struct FailureRecord {
    std::string cell;
    int replication = 0;
    std::string message;
};

struct ResultTable {
    std::vector<ResultRow> rows;
    std::vector<FailureRecord> failures;

    const ResultRow* find(const GridCell& cell, const std::string& method,
                          const std::string& metric) const;
};

/// Classification study: per cell and replication, simulate train cohort
/// (stratified) and a test cohort of test_size, fit a logistic model per
/// embedding method, record out-of-sample AUC. Replication failures are
/// recorded and the run continues.
ResultTable run_classification_grid(const ExperimentGrid& grid);

/// Clustering study: K-means with spectral initialization per method on
/// the training cohort embeddings, scored by adjusted Rand index.
ResultTable run_clustering_grid(const ExperimentGrid& grid);

/// Transfer-kernel robustness study: AUC and ARI per (kernel, method) at a
/// single (n, T, delta) cell.
ResultTable run_transfer_variants(const ExperimentGrid& grid);

}  // namespace lfpp
