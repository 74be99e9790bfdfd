#include "lfpp/harness.hpp"

#include "lfpp/baselines.hpp"
#include "lfpp/learn.hpp"
#include "lfpp/rng.hpp"
#include "lfpp/simulate.hpp"
#include "lfpp/spectral.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <limits>
#include <sstream>
#include <stdexcept>
#include <thread>

namespace lfpp {

std::vector<GridCell> ExperimentGrid::cells() const {
    std::vector<GridCell> out;
    for (TransferKernel kernel : kernels) {
        for (int n : n_list) {
            for (double T : T_list) {
                for (double delta : delta_list) {
                    out.push_back(GridCell{n, T, delta, kernel});
                }
            }
        }
    }
    return out;
}

void ExperimentGrid::validate() const {
    if (d < 1 || k < 1) throw std::invalid_argument("ExperimentGrid: d, k must be >= 1");
    if (n_list.empty() || T_list.empty() || delta_list.empty() || kernels.empty()) {
        throw std::invalid_argument("ExperimentGrid: grid axes must be nonempty");
    }
    for (int n : n_list) {
        if (n < 2) throw std::invalid_argument("ExperimentGrid: n must be >= 2");
    }
    for (double T : T_list) {
        if (!(T > 0.0)) throw std::invalid_argument("ExperimentGrid: T must be > 0");
    }
    for (double delta : delta_list) {
        if (delta < 0.0) throw std::invalid_argument("ExperimentGrid: delta must be >= 0");
    }
    if (replications < 1) {
        throw std::invalid_argument("ExperimentGrid: replications must be >= 1");
    }
    if (test_size < 2) {
        throw std::invalid_argument("ExperimentGrid: test_size must be >= 2");
    }
    if (methods.empty()) {
        throw std::invalid_argument("ExperimentGrid: methods must be nonempty");
    }
    for (const std::string& method : methods) {
        if (method != "fourier_eigen" && method != "pmi" && method != "counts") {
            throw std::invalid_argument("ExperimentGrid: unknown method " + method);
        }
    }
    if (!(pmi_window_divisor > 0.0)) {
        throw std::invalid_argument("ExperimentGrid: pmi_window_divisor must be > 0");
    }
    if (!(coef_high > coef_low) || coef_low < 0.0) {
        throw std::invalid_argument("ExperimentGrid: need 0 <= coef_low < coef_high");
    }
    estimator.validate();
    spectral.validate();
}

std::pair<Vec, Vec> group_intensities(const Vec& mu_base, double delta) {
    Vec direction = Vec::Zero(mu_base.size());
    if (mu_base.size() == 1) {
        direction[0] = 1.0;
    } else {
        direction[0] = 1.0 / std::sqrt(2.0);
        direction[1] = -1.0 / std::sqrt(2.0);
    }
    const Vec mu1 = mu_base + delta * direction;
    if ((mu1.array() < 0.0).any()) {
        std::ostringstream message;
        message << "group_intensities: delta " << delta
                << " drives a latent intensity negative; raise mu_base (need >= "
                << delta / std::sqrt(2.0) << " in the second coordinate)";
        throw std::invalid_argument(message.str());
    }
    return {mu_base, mu1};
}

ModelSpec cell_model(const ExperimentGrid& grid, const GridCell& cell,
                     std::uint64_t coef_seed) {
    Vec mu_base = grid.mu_base.size() == grid.k ? grid.mu_base : Vec::Ones(grid.k);
    auto [mu0, mu1] = group_intensities(mu_base, cell.delta);

    RandomSource rng = seeded_rng(coef_seed, 0);
    Mat coefficients(grid.d, grid.k);
    for (int j = 0; j < grid.d; ++j) {
        for (int l = 0; l < grid.k; ++l) {
            coefficients(j, l) = rng.uniform(grid.coef_low, grid.coef_high);
        }
    }

    ModelSpec model{TransferBank(std::move(coefficients), cell.kernel),
                    Vec::Constant(grid.d, grid.nu),
                    {Group{"0", mu0}, Group{"1", mu1}},
                    Vec::Constant(2, 0.5)};
    model.validate();
    return model;
}

const ResultRow* ResultTable::find(const GridCell& cell, const std::string& method,
                                   const std::string& metric) const {
    for (const ResultRow& row : rows) {
        if (row.n == cell.n && row.T == cell.T && row.delta == cell.delta &&
            row.kernel == to_string(cell.kernel) && row.method == method &&
            row.metric == metric) {
            return &row;
        }
    }
    return nullptr;
}

namespace {

enum class GridTask { classification, clustering, both };

/// Per-replication metric values, one slot per (method, metric).
struct ReplicationOutcome {
    std::vector<double> auc_value;
    std::vector<double> ari_value;
    bool failed = false;
    std::string message;
};

/// Distinct sub-stream tags for deriving per-replication seeds.
enum : std::uint64_t {
    kTagTrain = 1,
    kTagTest = 2,
    kTagCoefficients = 3,
    kTagKmeans = 4,
};

std::uint64_t derive_seed(std::uint64_t base, std::uint64_t a, std::uint64_t b) {
    return RandomSource::mix_key(RandomSource::mix_key(base, a), b);
}

std::vector<Vec> method_embeddings(const std::string& method, const Dataset& cohort,
                                   const SpectralEmbedder& embedder,
                                   const ExperimentGrid& grid, double T) {
    std::vector<Vec> features;
    features.reserve(cohort.records.size());
    for (const PatientRecord& record : cohort.records) {
        if (method == "fourier_eigen") {
            features.push_back(embedder.embed(record.events).values);
        } else if (method == "pmi") {
            features.push_back(
                pmi_embedding(record.events, T / grid.pmi_window_divisor,
                              grid.spectral.embed_dim)
                    .values);
        } else {
            features.push_back(count_embedding(record.events));
        }
    }
    return features;
}

std::vector<int> binary_labels(const Dataset& cohort) {
    std::vector<int> labels;
    labels.reserve(cohort.records.size());
    for (const PatientRecord& record : cohort.records) {
        labels.push_back(record.label.value() == "1" ? 1 : 0);
    }
    return labels;
}

ReplicationOutcome run_replication(const ExperimentGrid& grid, const GridCell& cell,
                                   std::size_t cell_index, int replication,
                                   GridTask task) {
    const bool want_auc = task != GridTask::clustering;
    const bool want_ari = task != GridTask::classification;
    ReplicationOutcome outcome;
    const double nan = std::numeric_limits<double>::quiet_NaN();
    outcome.auc_value.assign(grid.methods.size(), nan);
    outcome.ari_value.assign(grid.methods.size(), nan);
    try {
        const std::uint64_t coef_rep =
            grid.freeze_coefficients ? 0 : static_cast<std::uint64_t>(replication);
        const std::uint64_t coef_seed = derive_seed(
            grid.base_seed, kTagCoefficients * 1000003ULL + cell_index, coef_rep);
        const ModelSpec model = cell_model(grid, cell, coef_seed);

        SimulationPlan train_plan{model,
                                  cell.n,
                                  {cell.T},
                                  derive_seed(grid.base_seed,
                                              kTagTrain * 1000003ULL + cell_index,
                                              static_cast<std::uint64_t>(replication)),
                                  true};
        const Dataset train = simulate_cohort(train_plan);
        const std::vector<int> train_labels = binary_labels(train);
        const SpectralEmbedder embedder(grid.estimator, grid.spectral);

        Dataset test;
        std::vector<int> test_labels;
        if (want_auc) {
            SimulationPlan test_plan{
                model,
                grid.test_size,
                {cell.T},
                derive_seed(grid.base_seed, kTagTest * 1000003ULL + cell_index,
                            static_cast<std::uint64_t>(replication)),
                true};
            test = simulate_cohort(test_plan);
            test_labels = binary_labels(test);
        }

        for (std::size_t m = 0; m < grid.methods.size(); ++m) {
            const auto train_features =
                method_embeddings(grid.methods[m], train, embedder, grid, cell.T);
            if (want_auc) {
                const auto test_features =
                    method_embeddings(grid.methods[m], test, embedder, grid, cell.T);
                const LogisticModel fit = train_logistic(train_features, train_labels);
                std::vector<double> scores;
                scores.reserve(test_features.size());
                for (const Vec& x : test_features) {
                    scores.push_back(predict_score(fit, x));
                }
                outcome.auc_value[m] = auc(scores, test_labels);
            }
            if (want_ari) {
                const ClusteringResult clusters = kmeans_spectral(
                    train_features, 2,
                    derive_seed(grid.base_seed, kTagKmeans * 1000003ULL + cell_index,
                                static_cast<std::uint64_t>(replication)));
                outcome.ari_value[m] =
                    adjusted_rand_index(clusters.assignments, train_labels);
            }
        }
    } catch (const std::exception& error) {
        outcome.failed = true;
        outcome.message = error.what();
    }
    return outcome;
}

std::string cell_name(const GridCell& cell) {
    std::ostringstream name;
    name << "n=" << cell.n << ",T=" << cell.T << ",delta=" << cell.delta
         << ",kernel=" << to_string(cell.kernel);
    return name.str();
}

void aggregate_metric(const ExperimentGrid& grid, const GridCell& cell,
                      const std::vector<ReplicationOutcome>& outcomes,
                      std::size_t offset, const std::string& metric,
                      ResultTable& table) {
    for (std::size_t m = 0; m < grid.methods.size(); ++m) {
        double sum = 0.0, sum_sq = 0.0;
        int count = 0;
        for (int r = 0; r < grid.replications; ++r) {
            const ReplicationOutcome& outcome = outcomes[offset + r];
            if (outcome.failed) continue;
            const double value =
                metric == "auc" ? outcome.auc_value[m] : outcome.ari_value[m];
            sum += value;
            sum_sq += value * value;
            ++count;
        }
        ResultRow row;
        row.n = cell.n;
        row.T = cell.T;
        row.delta = cell.delta;
        row.kernel = to_string(cell.kernel);
        row.method = grid.methods[m];
        row.metric = metric;
        row.replications = count;
        if (count > 0) {
            row.mean = sum / count;
            const double variance =
                count > 1 ? std::max(0.0, (sum_sq - sum * sum / count) / (count - 1))
                          : 0.0;
            row.std_error = std::sqrt(variance / count);
        } else {
            row.mean = std::numeric_limits<double>::quiet_NaN();
            row.std_error = std::numeric_limits<double>::quiet_NaN();
        }
        table.rows.push_back(row);
    }
}

ResultTable run_grid(const ExperimentGrid& grid, GridTask task) {
    grid.validate();
    const std::vector<GridCell> cells = grid.cells();
    const int reps = grid.replications;
    const std::size_t total = cells.size() * static_cast<std::size_t>(reps);
    std::vector<ReplicationOutcome> outcomes(total);

    const unsigned hardware = std::max(1u, std::thread::hardware_concurrency());
    const unsigned threads =
        grid.threads > 0 ? static_cast<unsigned>(grid.threads) : hardware;
    // Tasks write into disjoint slots; aggregation below is sequential and
    // order-fixed, so metric values do not depend on the schedule.
    std::atomic<std::size_t> next{0};
    const auto worker = [&]() {
        for (;;) {
            const std::size_t item = next.fetch_add(1);
            if (item >= total) break;
            const std::size_t cell_index = item / reps;
            const int replication = static_cast<int>(item % reps);
            outcomes[item] =
                run_replication(grid, cells[cell_index], cell_index, replication, task);
        }
    };
    if (threads <= 1) {
        worker();
    } else {
        std::vector<std::thread> pool;
        for (unsigned t = 0; t < threads; ++t) pool.emplace_back(worker);
        for (std::thread& t : pool) t.join();
    }

    ResultTable table;
    for (std::size_t c = 0; c < cells.size(); ++c) {
        const std::size_t offset = c * reps;
        if (task != GridTask::clustering) {
            aggregate_metric(grid, cells[c], outcomes, offset, "auc", table);
        }
        if (task != GridTask::classification) {
            aggregate_metric(grid, cells[c], outcomes, offset, "ari", table);
        }
        for (int r = 0; r < reps; ++r) {
            if (outcomes[offset + r].failed) {
                table.failures.push_back(
                    FailureRecord{cell_name(cells[c]), r, outcomes[offset + r].message});
            }
        }
    }
    return table;
}

}  // namespace

ResultTable run_classification_grid(const ExperimentGrid& grid) {
    return run_grid(grid, GridTask::classification);
}

ResultTable run_clustering_grid(const ExperimentGrid& grid) {
    return run_grid(grid, GridTask::clustering);
}

ResultTable run_transfer_variants(const ExperimentGrid& grid) {
    return run_grid(grid, GridTask::both);
}

}  // namespace lfpp
