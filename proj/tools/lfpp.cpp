// lfpp: simulate latent factor point process cohorts, compute Fourier-Eigen
// and baseline embeddings, run classification/clustering, and reproduce the
// simulation-study grids.

#include "lfpp/baselines.hpp"
#include "lfpp/covariance.hpp"
#include "lfpp/harness.hpp"
#include "lfpp/io.hpp"
#include "lfpp/learn.hpp"
#include "lfpp/simulate.hpp"
#include "lfpp/spectral.hpp"

#include <CLI11.hpp>
#include <nlohmann/json.hpp>

#include <filesystem>
#include <fstream>
#include <iostream>
#include <map>
#include <optional>
#include <string>

namespace {

constexpr int kExitOk = 0;
constexpr int kExitConfigError = 2;
constexpr int kExitPartialFailure = 3;

struct CommonOptions {
    std::string config;
    std::optional<std::uint64_t> seed;
    int threads = 0;
    std::string out_dir;
};

std::string joined(const std::string& dir, const std::string& name) {
    if (dir.empty()) return name;
    std::filesystem::create_directories(dir);
    return (std::filesystem::path(dir) / name).string();
}

int run_simulate(const CommonOptions& common, const std::string& out,
                 const std::string& labels_out) {
    nlohmann::json config = lfpp::io::load_json_file(common.config);
    if (common.seed) config["seed"] = *common.seed;
    const lfpp::SimulationPlan plan = lfpp::io::plan_from_json(config);
    const lfpp::Dataset cohort = lfpp::simulate_cohort(plan);
    lfpp::io::write_events_csv(cohort, joined(common.out_dir, out));
    if (!labels_out.empty()) {
        lfpp::io::write_labels_csv(cohort, joined(common.out_dir, labels_out));
    }
    std::cout << "simulated " << cohort.records.size() << " patients, "
              << [&] {
                     std::size_t total = 0;
                     for (const auto& r : cohort.records) total += r.events.total_events();
                     return total;
                 }()
              << " events\n";
    return kExitOk;
}

int run_embed(const CommonOptions& common, const std::string& events,
              const std::string& labels, const std::string& out,
              const std::string& method) {
    nlohmann::json config = common.config.empty()
                                ? nlohmann::json::object()
                                : lfpp::io::load_json_file(common.config);
    const lfpp::EstimatorConfig est_cfg = lfpp::io::estimator_config_from_json(
        config.value("estimator", nlohmann::json::object()));
    const lfpp::SpectralConfig sp_cfg = lfpp::io::spectral_config_from_json(
        config.value("spectral", nlohmann::json::object()));
    const double pmi_divisor = config.value("pmi_window_divisor", 20.0);

    const lfpp::Dataset cohort = lfpp::io::ingest_events(
        events, labels.empty() ? std::nullopt : std::make_optional(labels));
    if (cohort.records.empty()) {
        lfpp::io::EmbeddingTable empty;
        empty.values.resize(0, sp_cfg.embed_dim);
        lfpp::io::write_embeddings_csv(empty, joined(common.out_dir, out));
        return kExitOk;
    }

    lfpp::io::EmbeddingTable table;
    const int d = cohort.dim();
    const int width = method == "counts" ? d : sp_cfg.embed_dim;
    table.values.resize(static_cast<Eigen::Index>(cohort.records.size()), width);
    const lfpp::SpectralEmbedder embedder(est_cfg, sp_cfg);
    for (std::size_t i = 0; i < cohort.records.size(); ++i) {
        const lfpp::PatientRecord& record = cohort.records[i];
        table.ids.push_back(record.id);
        if (method != "fourier_eigen") table.methods.push_back(method);
        lfpp::Vec values;
        if (method == "fourier_eigen") {
            values = embedder.embed(record.events).values;
        } else if (method == "pmi") {
            values = lfpp::pmi_embedding(record.events,
                                         record.observation_time() / pmi_divisor,
                                         sp_cfg.embed_dim)
                         .values;
        } else if (method == "counts") {
            values = lfpp::count_embedding(record.events);
        } else {
            throw std::invalid_argument("unknown method: " + method);
        }
        table.values.row(static_cast<Eigen::Index>(i)) = values.transpose();
    }
    lfpp::io::write_embeddings_csv(table, joined(common.out_dir, out));
    return kExitOk;
}

std::map<std::string, std::string> label_map(const std::string& labels_csv) {
    std::map<std::string, std::string> out;
    for (const auto& [id, label] : lfpp::io::read_labels_csv(labels_csv)) {
        out[id] = label;
    }
    return out;
}

int run_classify(const CommonOptions& common, const std::string& train_csv,
                 const std::string& labels_csv, const std::string& test_csv,
                 const std::string& scores_out, const std::string& model_out,
                 double reg) {
    const lfpp::io::EmbeddingTable train = lfpp::io::read_embeddings_csv(train_csv);
    const lfpp::io::EmbeddingTable test = lfpp::io::read_embeddings_csv(test_csv);
    const std::map<std::string, std::string> labels = label_map(labels_csv);

    std::vector<lfpp::Vec> features;
    std::vector<int> y;
    std::vector<std::string> classes;
    for (std::size_t i = 0; i < train.ids.size(); ++i) {
        const auto found = labels.find(train.ids[i]);
        if (found == labels.end()) {
            throw std::runtime_error("no label for training patient " + train.ids[i]);
        }
        if (std::find(classes.begin(), classes.end(), found->second) == classes.end()) {
            classes.push_back(found->second);
        }
        features.push_back(train.values.row(static_cast<Eigen::Index>(i)).transpose());
        y.push_back(found->second == classes.front() ? 0 : 1);
    }
    if (classes.size() != 2) {
        throw std::runtime_error("classify expects exactly 2 label classes, got " +
                                 std::to_string(classes.size()));
    }
    const lfpp::LogisticModel model = lfpp::train_logistic(features, y, reg);

    std::vector<double> scores;
    std::vector<int> test_labels;
    bool all_test_labeled = true;
    for (std::size_t i = 0; i < test.ids.size(); ++i) {
        scores.push_back(lfpp::predict_score(
            model, test.values.row(static_cast<Eigen::Index>(i)).transpose()));
        const auto found = labels.find(test.ids[i]);
        if (found == labels.end()) {
            all_test_labeled = false;
        } else {
            test_labels.push_back(found->second == classes.front() ? 0 : 1);
        }
    }
    lfpp::io::write_scores_csv(test.ids, scores, joined(common.out_dir, scores_out));
    if (!model_out.empty()) {
        std::ofstream out(joined(common.out_dir, model_out));
        out << lfpp::io::logistic_model_to_json(model).dump(2) << '\n';
    }
    if (all_test_labeled && !test_labels.empty()) {
        std::cout << "auc=" << lfpp::io::format_double(lfpp::auc(scores, test_labels))
                  << " (positive class '" << classes[1] << "')\n";
    } else {
        std::cout << "auc unavailable (unlabeled test patients)\n";
    }
    return kExitOk;
}

int run_cluster(const CommonOptions& common, const std::string& embeddings_csv,
                int k, const std::string& labels_csv, const std::string& out) {
    const lfpp::io::EmbeddingTable table = lfpp::io::read_embeddings_csv(embeddings_csv);
    std::vector<lfpp::Vec> features;
    for (std::size_t i = 0; i < table.ids.size(); ++i) {
        features.push_back(table.values.row(static_cast<Eigen::Index>(i)).transpose());
    }
    const std::uint64_t seed = common.seed.value_or(0);
    const lfpp::ClusteringResult result = lfpp::kmeans_spectral(features, k, seed);
    lfpp::io::write_assignments_csv(table.ids, result.assignments,
                                    joined(common.out_dir, out));
    if (!labels_csv.empty()) {
        const std::map<std::string, std::string> labels = label_map(labels_csv);
        std::vector<int> truth;
        std::vector<std::string> classes;
        bool complete = true;
        for (const std::string& id : table.ids) {
            const auto found = labels.find(id);
            if (found == labels.end()) {
                complete = false;
                break;
            }
            auto it = std::find(classes.begin(), classes.end(), found->second);
            if (it == classes.end()) {
                classes.push_back(found->second);
                it = std::prev(classes.end());
            }
            truth.push_back(static_cast<int>(it - classes.begin()));
        }
        if (complete && !truth.empty()) {
            std::cout << "ari="
                      << lfpp::io::format_double(
                             lfpp::adjusted_rand_index(result.assignments, truth))
                      << '\n';
        } else {
            std::cout << "ari unavailable (unlabeled patients)\n";
        }
    }
    return kExitOk;
}

int run_covariance(const CommonOptions& common, const std::string& events,
                   const std::string& patient, const std::string& out) {
    nlohmann::json config = common.config.empty()
                                ? nlohmann::json::object()
                                : lfpp::io::load_json_file(common.config);
    const lfpp::EstimatorConfig est_cfg = lfpp::io::estimator_config_from_json(
        config.value("estimator", nlohmann::json::object()));
    const lfpp::Dataset cohort = lfpp::io::ingest_events(events);
    for (const auto& record : cohort.records) {
        if (record.id == patient) {
            lfpp::io::write_curve_csv(
                lfpp::estimate_cross_covariance(record.events, est_cfg),
                joined(common.out_dir, out));
            return kExitOk;
        }
    }
    throw std::runtime_error("patient not found: " + patient);
}

int run_experiment(const CommonOptions& common, const std::string& task,
                   bool with_svg) {
    nlohmann::json config = lfpp::io::load_json_file(common.config);
    if (common.seed) config["base_seed"] = *common.seed;
    if (common.threads > 0) config["threads"] = common.threads;
    lfpp::ExperimentGrid grid = lfpp::io::grid_from_json(config);

    const std::string study = task.empty() ? config.value("task", "both") : task;
    lfpp::ResultTable table;
    if (study == "classification") {
        table = lfpp::run_classification_grid(grid);
    } else if (study == "clustering") {
        table = lfpp::run_clustering_grid(grid);
    } else if (study == "both" || study == "transfer_variants") {
        table = lfpp::run_transfer_variants(grid);
    } else {
        throw std::invalid_argument("unknown task: " + study);
    }

    lfpp::io::write_results_csv(table, joined(common.out_dir, "results.csv"));
    if (!table.failures.empty()) {
        lfpp::io::write_failures_csv(table, joined(common.out_dir, "failures.csv"));
    }
    if (with_svg) {
        lfpp::io::write_results_svg(table, "auc", joined(common.out_dir, "auc.svg"));
        lfpp::io::write_results_svg(table, "ari", joined(common.out_dir, "ari.svg"));
    }
    for (const auto& row : table.rows) {
        std::cout << row.kernel << " n=" << row.n << " T=" << row.T
                  << " delta=" << row.delta << ' ' << row.method << ' ' << row.metric
                  << " = " << row.mean << " (se " << row.std_error << ", R "
                  << row.replications << ")\n";
    }
    if (!table.failures.empty()) {
        std::cerr << table.failures.size() << " replication(s) failed; see failures.csv\n";
        return kExitPartialFailure;
    }
    return kExitOk;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"latent factor point process toolkit"};
    app.require_subcommand(1);

    CommonOptions common;
    app.add_option("--seed", common.seed, "override the config seed");
    app.add_option("--threads", common.threads, "worker threads (0 = hardware)");
    app.add_option("--out-dir", common.out_dir, "directory for output files");

    auto* simulate = app.add_subcommand("simulate", "simulate a cohort from a model");
    std::string sim_out = "events.csv", sim_labels = "labels.csv";
    simulate->add_option("--config", common.config, "simulation plan JSON")->required();
    simulate->add_option("--out", sim_out, "events CSV path");
    simulate->add_option("--labels", sim_labels, "labels CSV path");

    auto* embed = app.add_subcommand("embed", "compute patient embeddings");
    std::string embed_events, embed_labels, embed_out = "embeddings.csv",
                               embed_method = "fourier_eigen";
    embed->add_option("--events", embed_events, "events CSV")->required();
    embed->add_option("--labels", embed_labels, "optional labels CSV");
    embed->add_option("--config", common.config, "estimator/spectral config JSON");
    embed->add_option("--out", embed_out, "embeddings CSV path");
    embed->add_option("--method", embed_method, "fourier_eigen | pmi | counts");

    auto* classify = app.add_subcommand("classify", "train logistic model, score test");
    std::string cls_train, cls_labels, cls_test, cls_scores = "scores.csv", cls_model;
    double cls_reg = 1e-4;
    classify->add_option("--train", cls_train, "training embeddings CSV")->required();
    classify->add_option("--labels", cls_labels, "labels CSV")->required();
    classify->add_option("--test", cls_test, "test embeddings CSV")->required();
    classify->add_option("--out", cls_scores, "scores CSV path");
    classify->add_option("--model-out", cls_model, "optional model JSON path");
    classify->add_option("--reg", cls_reg, "l2 regularization strength");

    auto* cluster = app.add_subcommand("cluster", "k-means on embeddings");
    std::string clu_embeddings, clu_labels, clu_out = "assignments.csv";
    int clu_k = 2;
    cluster->add_option("--embeddings", clu_embeddings, "embeddings CSV")->required();
    cluster->add_option("--k", clu_k, "number of clusters");
    cluster->add_option("--labels", clu_labels, "optional labels CSV (prints ARI)");
    cluster->add_option("--out", clu_out, "assignments CSV path");

    auto* covariance = app.add_subcommand("covariance", "dump one patient's curve");
    std::string cov_events, cov_patient, cov_out = "curve.csv";
    covariance->add_option("--events", cov_events, "events CSV")->required();
    covariance->add_option("--patient", cov_patient, "patient id")->required();
    covariance->add_option("--config", common.config, "estimator config JSON");
    covariance->add_option("--out", cov_out, "curve CSV path");

    auto* experiment = app.add_subcommand("experiment", "run a simulation-study grid");
    std::string exp_task;
    bool exp_svg = false;
    experiment->add_option("--config", common.config, "experiment grid JSON")->required();
    experiment->add_option("--task", exp_task,
                           "classification | clustering | both (default from config)");
    experiment->add_flag("--svg", exp_svg, "also write per-metric SVG charts");

    CLI11_PARSE(app, argc, argv);

    try {
        if (simulate->parsed()) return run_simulate(common, sim_out, sim_labels);
        if (embed->parsed()) {
            return run_embed(common, embed_events, embed_labels, embed_out, embed_method);
        }
        if (classify->parsed()) {
            return run_classify(common, cls_train, cls_labels, cls_test, cls_scores,
                                cls_model, cls_reg);
        }
        if (cluster->parsed()) {
            return run_cluster(common, clu_embeddings, clu_k, clu_labels, clu_out);
        }
        if (covariance->parsed()) {
            return run_covariance(common, cov_events, cov_patient, cov_out);
        }
        if (experiment->parsed()) return run_experiment(common, exp_task, exp_svg);
    } catch (const std::invalid_argument& error) {
        std::cerr << "config error: " << error.what() << '\n';
        return kExitConfigError;
    } catch (const nlohmann::json::exception& error) {
        std::cerr << "config error: " << error.what() << '\n';
        return kExitConfigError;
    } catch (const std::exception& error) {
        std::cerr << "error: " << error.what() << '\n';
        return 1;
    }
    return kExitOk;
}
