#pragma once

#include "lfpp/core.hpp"
#include "lfpp/covariance.hpp"
#include "lfpp/harness.hpp"
#include "lfpp/learn.hpp"
#include "lfpp/simulate.hpp"

#include <nlohmann/json_fwd.hpp>

#include <optional>
#include <string>
#include <vector>

namespace lfpp::io {

/// Shortest-round-trip decimal formatting for doubles.
std::string format_double(double value);

// --- event data -------------------------------------------------------------

/// Write one row per event: patient_id,code_index,event_time.
void write_events_csv(const Dataset& dataset, const std::string& path);

/// Write patient_id,label (records without labels are skipped).
void write_labels_csv(const Dataset& dataset, const std::string& path);

/// Read the core event CSV (columns patient_id, code_index, event_time and
/// optionally observation_time), plus an optional label CSV. Per-patient
/// window end is the explicit observation time when present, otherwise the
/// patient's max event time. Patients appearing only in the label file are
/// retained as empty sequences. Malformed rows are reported with their line
/// number; a non-dense code index space is rejected with a remapping hint.
Dataset ingest_events(const std::string& events_csv,
                      const std::optional<std::string>& labels_csv = std::nullopt);

/// patient_id -> label pairs from a label CSV, in file order.
std::vector<std::pair<std::string, std::string>> read_labels_csv(
    const std::string& path);

// --- embeddings -------------------------------------------------------------

struct EmbeddingTable {
    std::vector<std::string> ids;
    std::vector<std::string> methods;  ///< empty when the file has no method column
    Mat values;                        ///< one row per patient
};

/// Columns patient_id, f_1..f_k; a method column is inserted after
/// patient_id when `method` is nonempty.
void write_embeddings_csv(const EmbeddingTable& table, const std::string& path);

EmbeddingTable read_embeddings_csv(const std::string& path);

// --- misc tables ------------------------------------------------------------

/// Covariance curve dump: columns tau, j, j_prime, value.
void write_curve_csv(const CovarianceCurve& curve, const std::string& path);

/// Columns patient_id, score.
void write_scores_csv(const std::vector<std::string>& ids,
                      const std::vector<double>& scores, const std::string& path);

/// Columns patient_id, cluster.
void write_assignments_csv(const std::vector<std::string>& ids,
                           const std::vector<int>& assignments,
                           const std::string& path);

// --- results ----------------------------------------------------------------

void write_results_csv(const ResultTable& table, const std::string& path);
ResultTable read_results_csv(const std::string& path);
void write_failures_csv(const ResultTable& table, const std::string& path);

/// One SVG per metric: panel grid over (n, T) cells, metric vs delta, one
/// series per method. Returns the number of panels written.
int write_results_svg(const ResultTable& table, const std::string& metric,
                      const std::string& path);

// --- configs ----------------------------------------------------------------

EstimatorConfig estimator_config_from_json(const nlohmann::json& j);
SpectralConfig spectral_config_from_json(const nlohmann::json& j);
ModelSpec model_from_json(const nlohmann::json& j, std::uint64_t seed);
SimulationPlan plan_from_json(const nlohmann::json& j);
ExperimentGrid grid_from_json(const nlohmann::json& j);

nlohmann::json logistic_model_to_json(const LogisticModel& model);
LogisticModel logistic_model_from_json(const nlohmann::json& j);

nlohmann::json load_json_file(const std::string& path);

}  // namespace lfpp::io
