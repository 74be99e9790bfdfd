#include "lfpp/io.hpp"

#include <nlohmann/json.hpp>

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <map>
#include <set>
#include <sstream>
#include <stdexcept>

namespace lfpp::io {

using nlohmann::json;

std::string format_double(double value) {
    char buffer[40];
    std::snprintf(buffer, sizeof(buffer), "%.17g", value);
    return buffer;
}

namespace {

std::ofstream open_out(const std::string& path) {
    std::ofstream out(path);
    if (!out) throw std::runtime_error("cannot open for writing: " + path);
    return out;
}

std::ifstream open_in(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("cannot open for reading: " + path);
    return in;
}

std::vector<std::string> split_csv_line(const std::string& line) {
    std::vector<std::string> fields;
    std::string field;
    std::istringstream stream(line);
    while (std::getline(stream, field, ',')) fields.push_back(field);
    if (!line.empty() && line.back() == ',') fields.push_back("");
    return fields;
}

double parse_double(const std::string& text, const std::string& what, int line) {
    try {
        std::size_t used = 0;
        const double value = std::stod(text, &used);
        if (used != text.size()) throw std::invalid_argument(text);
        return value;
    } catch (const std::exception&) {
        throw std::runtime_error("line " + std::to_string(line) + ": bad " + what +
                                 " value '" + text + "'");
    }
}

long parse_long(const std::string& text, const std::string& what, int line) {
    try {
        std::size_t used = 0;
        const long value = std::stol(text, &used);
        if (used != text.size()) throw std::invalid_argument(text);
        return value;
    } catch (const std::exception&) {
        throw std::runtime_error("line " + std::to_string(line) + ": bad " + what +
                                 " value '" + text + "'");
    }
}

}  // namespace

void write_events_csv(const Dataset& dataset, const std::string& path) {
    std::ofstream out = open_out(path);
    out << "patient_id,code_index,event_time\n";
    for (const PatientRecord& record : dataset.records) {
        for (int j = 0; j < record.events.dim(); ++j) {
            for (double t : record.events.component(j)) {
                out << record.id << ',' << j << ',' << format_double(t) << '\n';
            }
        }
    }
}

void write_labels_csv(const Dataset& dataset, const std::string& path) {
    std::ofstream out = open_out(path);
    out << "patient_id,label\n";
    for (const PatientRecord& record : dataset.records) {
        if (record.label) out << record.id << ',' << *record.label << '\n';
    }
}

Dataset ingest_events(const std::string& events_csv,
                      const std::optional<std::string>& labels_csv) {
    std::ifstream in = open_in(events_csv);
    std::string line;
    if (!std::getline(in, line)) {
        throw std::runtime_error(events_csv + ": missing header");
    }
    const std::vector<std::string> header = split_csv_line(line);
    const auto column = [&](const std::string& name) -> int {
        for (std::size_t i = 0; i < header.size(); ++i) {
            if (header[i] == name) return static_cast<int>(i);
        }
        return -1;
    };
    const int id_col = column("patient_id");
    const int code_col = column("code_index");
    const int time_col = column("event_time");
    const int obs_col = column("observation_time");
    if (id_col < 0 || code_col < 0 || time_col < 0) {
        throw std::runtime_error(
            events_csv + ": header must contain patient_id, code_index, event_time");
    }

    struct RawPatient {
        std::map<long, std::vector<double>> events;
        double observation_time = 0.0;
        bool explicit_time = false;
    };
    std::vector<std::string> order;
    std::map<std::string, RawPatient> patients;
    std::set<long> codes_seen;
    long max_code = -1;

    int line_number = 1;
    while (std::getline(in, line)) {
        ++line_number;
        if (line.empty()) continue;
        const std::vector<std::string> fields = split_csv_line(line);
        const int needed = std::max({id_col, code_col, time_col, obs_col});
        if (static_cast<int>(fields.size()) <= needed) {
            throw std::runtime_error("line " + std::to_string(line_number) +
                                     ": expected at least " + std::to_string(needed + 1) +
                                     " columns");
        }
        const std::string& id = fields[id_col];
        const long code = parse_long(fields[code_col], "code_index", line_number);
        const double time = parse_double(fields[time_col], "event_time", line_number);
        if (code < 0) {
            throw std::runtime_error("line " + std::to_string(line_number) +
                                     ": code_index must be >= 0");
        }
        if (time < 0.0) {
            throw std::runtime_error("line " + std::to_string(line_number) +
                                     ": event_time must be >= 0");
        }
        auto [it, inserted] = patients.try_emplace(id);
        if (inserted) order.push_back(id);
        it->second.events[code].push_back(time);
        it->second.observation_time = std::max(it->second.observation_time, time);
        if (obs_col >= 0) {
            const double obs =
                parse_double(fields[obs_col], "observation_time", line_number);
            it->second.observation_time = std::max(it->second.observation_time, obs);
            it->second.explicit_time = true;
        }
        codes_seen.insert(code);
        max_code = std::max(max_code, code);
    }

    // Code index space must be dense in [0, d).
    if (max_code >= 0 &&
        codes_seen.size() != static_cast<std::size_t>(max_code) + 1) {
        std::ostringstream message;
        message << events_csv << ": code indices are not dense in [0, " << max_code + 1
                << "); missing:";
        int shown = 0;
        for (long c = 0; c <= max_code && shown < 10; ++c) {
            if (codes_seen.count(c) == 0) {
                message << ' ' << c;
                ++shown;
            }
        }
        message << " - remap codes to consecutive 0-based indices before ingest";
        throw std::runtime_error(message.str());
    }

    std::map<std::string, std::string> labels;
    std::vector<std::string> label_order;
    if (labels_csv) {
        for (const auto& [id, label] : read_labels_csv(*labels_csv)) {
            if (labels.emplace(id, label).second) label_order.push_back(id);
        }
    }

    // Patients appearing only in the label file become empty sequences.
    double global_max_time = 0.0;
    for (const auto& [id, raw] : patients) {
        global_max_time = std::max(global_max_time, raw.observation_time);
    }
    for (const std::string& id : label_order) {
        if (patients.try_emplace(id).second) order.push_back(id);
    }

    const int d = static_cast<int>(std::max<long>(max_code + 1, 1));
    Dataset dataset;
    dataset.records.reserve(order.size());
    for (const std::string& id : order) {
        RawPatient& raw = patients.at(id);
        std::vector<std::vector<double>> events(d);
        for (auto& [code, times] : raw.events) {
            std::sort(times.begin(), times.end());
            events[code] = std::move(times);
        }
        double window = raw.observation_time;
        if (window <= 0.0) window = std::max(global_max_time, 1.0);
        PatientRecord record{id, EventSequence(std::move(events), window),
                             std::nullopt};
        const auto label = labels.find(id);
        if (label != labels.end()) record.label = label->second;
        dataset.records.push_back(std::move(record));
    }
    dataset.validate();
    return dataset;
}

std::vector<std::pair<std::string, std::string>> read_labels_csv(
    const std::string& path) {
    std::ifstream in = open_in(path);
    std::string line;
    if (!std::getline(in, line)) throw std::runtime_error(path + ": missing header");
    std::vector<std::pair<std::string, std::string>> out;
    int line_number = 1;
    while (std::getline(in, line)) {
        ++line_number;
        if (line.empty()) continue;
        const std::vector<std::string> fields = split_csv_line(line);
        if (fields.size() < 2) {
            throw std::runtime_error("line " + std::to_string(line_number) +
                                     ": label rows need patient_id,label");
        }
        out.emplace_back(fields[0], fields[1]);
    }
    return out;
}

void write_embeddings_csv(const EmbeddingTable& table, const std::string& path) {
    std::ofstream out = open_out(path);
    const bool with_method = !table.methods.empty();
    out << "patient_id";
    if (with_method) out << ",method";
    for (Eigen::Index j = 0; j < table.values.cols(); ++j) out << ",f_" << j + 1;
    out << '\n';
    for (std::size_t i = 0; i < table.ids.size(); ++i) {
        out << table.ids[i];
        if (with_method) out << ',' << table.methods[i];
        for (Eigen::Index j = 0; j < table.values.cols(); ++j) {
            out << ',' << format_double(table.values(static_cast<Eigen::Index>(i), j));
        }
        out << '\n';
    }
}

EmbeddingTable read_embeddings_csv(const std::string& path) {
    std::ifstream in = open_in(path);
    std::string line;
    if (!std::getline(in, line)) throw std::runtime_error(path + ": missing header");
    const std::vector<std::string> header = split_csv_line(line);
    if (header.empty() || header[0] != "patient_id") {
        throw std::runtime_error(path + ": first column must be patient_id");
    }
    const bool with_method = header.size() > 1 && header[1] == "method";
    const int first_value = with_method ? 2 : 1;
    const int k = static_cast<int>(header.size()) - first_value;
    if (k < 1) throw std::runtime_error(path + ": no embedding columns");

    EmbeddingTable table;
    std::vector<std::vector<double>> rows;
    int line_number = 1;
    while (std::getline(in, line)) {
        ++line_number;
        if (line.empty()) continue;
        const std::vector<std::string> fields = split_csv_line(line);
        if (fields.size() != header.size()) {
            throw std::runtime_error("line " + std::to_string(line_number) +
                                     ": wrong column count");
        }
        table.ids.push_back(fields[0]);
        if (with_method) table.methods.push_back(fields[1]);
        std::vector<double> row(k);
        for (int j = 0; j < k; ++j) {
            row[j] = parse_double(fields[first_value + j], "embedding", line_number);
        }
        rows.push_back(std::move(row));
    }
    table.values.resize(static_cast<Eigen::Index>(rows.size()), k);
    for (std::size_t i = 0; i < rows.size(); ++i) {
        for (int j = 0; j < k; ++j) {
            table.values(static_cast<Eigen::Index>(i), j) = rows[i][j];
        }
    }
    return table;
}

void write_curve_csv(const CovarianceCurve& curve, const std::string& path) {
    std::ofstream out = open_out(path);
    out << "tau,j,j_prime,value\n";
    for (std::size_t m = 0; m < curve.lags.size(); ++m) {
        for (int j = 0; j < curve.dim(); ++j) {
            for (int jp = 0; jp < curve.dim(); ++jp) {
                out << format_double(curve.lags[m]) << ',' << j << ',' << jp << ','
                    << format_double(curve.values[m](j, jp)) << '\n';
            }
        }
    }
}

void write_scores_csv(const std::vector<std::string>& ids,
                      const std::vector<double>& scores, const std::string& path) {
    std::ofstream out = open_out(path);
    out << "patient_id,score\n";
    for (std::size_t i = 0; i < ids.size(); ++i) {
        out << ids[i] << ',' << format_double(scores[i]) << '\n';
    }
}

void write_assignments_csv(const std::vector<std::string>& ids,
                           const std::vector<int>& assignments,
                           const std::string& path) {
    std::ofstream out = open_out(path);
    out << "patient_id,cluster\n";
    for (std::size_t i = 0; i < ids.size(); ++i) {
        out << ids[i] << ',' << assignments[i] << '\n';
    }
}

void write_results_csv(const ResultTable& table, const std::string& path) {
    std::ofstream out = open_out(path);
    out << "n,T,delta,kernel,method,metric,mean,std_error,replications\n";
    for (const ResultRow& row : table.rows) {
        out << row.n << ',' << format_double(row.T) << ',' << format_double(row.delta)
            << ',' << row.kernel << ',' << row.method << ',' << row.metric << ','
            << format_double(row.mean) << ',' << format_double(row.std_error) << ','
            << row.replications << '\n';
    }
}

ResultTable read_results_csv(const std::string& path) {
    std::ifstream in = open_in(path);
    std::string line;
    if (!std::getline(in, line)) throw std::runtime_error(path + ": missing header");
    ResultTable table;
    int line_number = 1;
    while (std::getline(in, line)) {
        ++line_number;
        if (line.empty()) continue;
        const std::vector<std::string> fields = split_csv_line(line);
        if (fields.size() != 9) {
            throw std::runtime_error("line " + std::to_string(line_number) +
                                     ": expected 9 columns");
        }
        ResultRow row;
        row.n = static_cast<int>(parse_long(fields[0], "n", line_number));
        row.T = parse_double(fields[1], "T", line_number);
        row.delta = parse_double(fields[2], "delta", line_number);
        row.kernel = fields[3];
        row.method = fields[4];
        row.metric = fields[5];
        row.mean = parse_double(fields[6], "mean", line_number);
        row.std_error = parse_double(fields[7], "std_error", line_number);
        row.replications =
            static_cast<int>(parse_long(fields[8], "replications", line_number));
        table.rows.push_back(row);
    }
    return table;
}

void write_failures_csv(const ResultTable& table, const std::string& path) {
    std::ofstream out = open_out(path);
    out << "cell,replication,message\n";
    for (const FailureRecord& failure : table.failures) {
        std::string message = failure.message;
        std::replace(message.begin(), message.end(), ',', ';');
        out << failure.cell << ',' << failure.replication << ',' << message << '\n';
    }
}

namespace {

struct PanelKey {
    int n;
    double T;
    bool operator<(const PanelKey& other) const {
        return n != other.n ? n < other.n : T < other.T;
    }
};

const char* kSeriesColors[] = {"#1f77b4", "#d62728", "#2ca02c", "#9467bd",
                               "#8c564b", "#e377c2"};

}  // namespace

int write_results_svg(const ResultTable& table, const std::string& metric,
                      const std::string& path) {
    // Collect panels (one per (n, T)) and series (one per method) of
    // metric-vs-delta lines, averaged rows as produced by the grid runners.
    std::map<PanelKey, std::map<std::string, std::map<double, double>>> panels;
    std::set<std::string> methods;
    for (const ResultRow& row : table.rows) {
        if (row.metric != metric || std::isnan(row.mean)) continue;
        panels[PanelKey{row.n, row.T}][row.method][row.delta] = row.mean;
        methods.insert(row.method);
    }
    if (panels.empty()) return 0;

    const int panel_w = 320, panel_h = 240, margin = 50;
    std::set<double> distinct_T;
    for (const auto& [key, series] : panels) distinct_T.insert(key.T);
    const int n_panels = static_cast<int>(panels.size());
    const int cols = std::max<int>(1, static_cast<int>(distinct_T.size()));
    const int rows = (n_panels + cols - 1) / cols;

    double lo = 1e300, hi = -1e300, dlo = 1e300, dhi = -1e300;
    for (const auto& [key, series] : panels) {
        for (const auto& [method, points] : series) {
            for (const auto& [delta, value] : points) {
                lo = std::min(lo, value);
                hi = std::max(hi, value);
                dlo = std::min(dlo, delta);
                dhi = std::max(dhi, delta);
            }
        }
    }
    if (hi <= lo) hi = lo + 1.0;
    if (dhi <= dlo) dhi = dlo + 1.0;

    std::ofstream out = open_out(path);
    const int width = cols * panel_w + 2 * margin;
    const int height = rows * panel_h + 2 * margin + 30;
    out << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << width
        << "\" height=\"" << height << "\">\n";
    out << "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";

    int index = 0;
    for (const auto& [key, series] : panels) {
        const int cx = margin + (index % cols) * panel_w;
        const int cy = margin + (index / cols) * panel_h;
        const int plot_w = panel_w - 60, plot_h = panel_h - 60;
        out << "<rect x=\"" << cx + 40 << "\" y=\"" << cy + 20 << "\" width=\""
            << plot_w << "\" height=\"" << plot_h
            << "\" fill=\"none\" stroke=\"#888\"/>\n";
        out << "<text x=\"" << cx + 40 + plot_w / 2 << "\" y=\"" << cy + 14
            << "\" text-anchor=\"middle\" font-size=\"12\">n=" << key.n
            << ", T=" << format_double(key.T) << "</text>\n";
        int series_index = 0;
        for (const auto& [method, points] : series) {
            std::ostringstream poly;
            for (const auto& [delta, value] : points) {
                const double x =
                    cx + 40 + (delta - dlo) / (dhi - dlo) * plot_w;
                const double y =
                    cy + 20 + plot_h - (value - lo) / (hi - lo) * plot_h;
                poly << x << ',' << y << ' ';
                out << "<circle cx=\"" << x << "\" cy=\"" << y
                    << "\" r=\"2.5\" fill=\""
                    << kSeriesColors[series_index % 6] << "\"/>\n";
            }
            out << "<polyline points=\"" << poly.str()
                << "\" fill=\"none\" stroke=\"" << kSeriesColors[series_index % 6]
                << "\" stroke-width=\"1.5\"/>\n";
            ++series_index;
        }
        ++index;
    }

    int legend_x = margin;
    int series_index = 0;
    for (const std::string& method : methods) {
        out << "<rect x=\"" << legend_x << "\" y=\"" << height - 24
            << "\" width=\"12\" height=\"12\" fill=\""
            << kSeriesColors[series_index % 6] << "\"/>\n";
        out << "<text x=\"" << legend_x + 16 << "\" y=\"" << height - 13
            << "\" font-size=\"12\">" << method << "</text>\n";
        legend_x += 16 + 10 * static_cast<int>(method.size()) + 20;
        ++series_index;
    }
    out << "</svg>\n";
    return n_panels;
}

// --- configs ----------------------------------------------------------------

namespace {

Vec vec_from_json(const json& j) {
    Vec v(j.size());
    for (std::size_t i = 0; i < j.size(); ++i) v[static_cast<Eigen::Index>(i)] = j[i];
    return v;
}

}  // namespace

EstimatorConfig estimator_config_from_json(const json& j) {
    EstimatorConfig cfg;
    cfg.bandwidth = j.value("bandwidth", cfg.bandwidth);
    if (j.contains("smoothing_kernel")) {
        cfg.smoothing_kernel =
            smoothing_kernel_from_string(j.at("smoothing_kernel").get<std::string>());
    }
    cfg.lag_threshold = j.value("lag_threshold", cfg.lag_threshold);
    cfg.lag_grid_step = j.value("lag_grid_step", cfg.lag_threshold / 100.0);
    cfg.kernel_truncation_radius =
        j.value("kernel_truncation_radius", cfg.kernel_truncation_radius);
    cfg.validate();
    return cfg;
}

SpectralConfig spectral_config_from_json(const json& j) {
    SpectralConfig cfg;
    cfg.frequency = j.value("frequency", cfg.frequency);
    cfg.embed_dim = j.value("embed_dim", cfg.embed_dim);
    cfg.validate();
    return cfg;
}

ModelSpec model_from_json(const json& j, std::uint64_t seed) {
    const int d = j.at("d").get<int>();
    const int k = j.at("k").get<int>();
    const TransferKernel kernel =
        transfer_kernel_from_string(j.value("kernel", std::string("gauss")));
    const double support = j.value("support_radius", -1.0);

    Mat coefficients(d, k);
    if (j.contains("coefficients")) {
        const json& rows = j.at("coefficients");
        if (rows.size() != static_cast<std::size_t>(d)) {
            throw std::invalid_argument("model.coefficients must have d rows");
        }
        for (int r = 0; r < d; ++r) {
            const json& row = rows[r];
            if (row.size() != static_cast<std::size_t>(k)) {
                throw std::invalid_argument("model.coefficients rows must have k entries");
            }
            for (int c = 0; c < k; ++c) coefficients(r, c) = row[c];
        }
    } else {
        const double low = j.value("coef_low", 0.0);
        const double high = j.value("coef_high", 0.5);
        RandomSource rng = seeded_rng(seed, 0xC0EFULL);
        for (int r = 0; r < d; ++r) {
            for (int c = 0; c < k; ++c) coefficients(r, c) = rng.uniform(low, high);
        }
    }

    Vec baseline;
    if (j.contains("baseline") && j.at("baseline").is_array()) {
        baseline = vec_from_json(j.at("baseline"));
    } else {
        baseline = Vec::Constant(d, j.value("baseline", 0.1));
    }

    ModelSpec model{TransferBank(std::move(coefficients), kernel, support), baseline,
                    {}, Vec()};
    for (const json& group : j.at("groups")) {
        model.groups.push_back(
            Group{group.at("label").get<std::string>(), vec_from_json(group.at("mu"))});
    }
    if (j.contains("prior")) {
        model.prior = vec_from_json(j.at("prior"));
    } else {
        model.prior =
            Vec::Constant(model.groups.size(), 1.0 / model.groups.size());
    }
    model.validate();
    return model;
}

SimulationPlan plan_from_json(const json& j) {
    SimulationPlan plan{model_from_json(j.at("model"), j.value("seed", 0ULL)),
                        j.at("n").get<int>(),
                        {},
                        j.value("seed", 0ULL),
                        j.value("stratified", false)};
    const json& times = j.at("observation_times");
    if (times.is_array()) {
        for (const json& t : times) plan.observation_times.push_back(t.get<double>());
    } else {
        plan.observation_times.push_back(times.get<double>());
    }
    plan.validate();
    return plan;
}

ExperimentGrid grid_from_json(const json& j) {
    ExperimentGrid grid;
    grid.d = j.value("d", grid.d);
    grid.k = j.value("k", grid.k);
    if (j.contains("n")) grid.n_list = j.at("n").get<std::vector<int>>();
    if (j.contains("T")) grid.T_list = j.at("T").get<std::vector<double>>();
    if (j.contains("delta")) grid.delta_list = j.at("delta").get<std::vector<double>>();
    if (j.contains("kernels")) {
        grid.kernels.clear();
        for (const json& name : j.at("kernels")) {
            grid.kernels.push_back(transfer_kernel_from_string(name.get<std::string>()));
        }
    }
    grid.replications = j.value("replications", grid.replications);
    grid.test_size = j.value("test_size", grid.test_size);
    if (j.contains("methods")) {
        grid.methods = j.at("methods").get<std::vector<std::string>>();
    }
    grid.base_seed = j.value("base_seed", grid.base_seed);
    if (j.contains("estimator")) {
        grid.estimator = estimator_config_from_json(j.at("estimator"));
    }
    if (j.contains("spectral")) {
        grid.spectral = spectral_config_from_json(j.at("spectral"));
    } else {
        grid.spectral.embed_dim = grid.k;
    }
    grid.pmi_window_divisor = j.value("pmi_window_divisor", grid.pmi_window_divisor);
    if (j.contains("mu_base")) grid.mu_base = vec_from_json(j.at("mu_base"));
    grid.nu = j.value("nu", grid.nu);
    grid.coef_low = j.value("coef_low", grid.coef_low);
    grid.coef_high = j.value("coef_high", grid.coef_high);
    grid.freeze_coefficients = j.value("freeze_coefficients", grid.freeze_coefficients);
    grid.threads = j.value("threads", grid.threads);
    grid.validate();
    return grid;
}

json logistic_model_to_json(const LogisticModel& model) {
    json j;
    j["weights"] = std::vector<double>(model.weights.data(),
                                       model.weights.data() + model.weights.size());
    j["bias"] = model.bias;
    j["feature_mean"] =
        std::vector<double>(model.feature_mean.data(),
                            model.feature_mean.data() + model.feature_mean.size());
    j["feature_scale"] =
        std::vector<double>(model.feature_scale.data(),
                            model.feature_scale.data() + model.feature_scale.size());
    j["iterations"] = model.iterations;
    j["objective"] = model.objective;
    j["converged"] = model.converged;
    return j;
}

LogisticModel logistic_model_from_json(const json& j) {
    LogisticModel model;
    model.weights = vec_from_json(j.at("weights"));
    model.bias = j.at("bias").get<double>();
    model.feature_mean = vec_from_json(j.at("feature_mean"));
    model.feature_scale = vec_from_json(j.at("feature_scale"));
    model.iterations = j.value("iterations", 0);
    model.objective = j.value("objective", 0.0);
    model.converged = j.value("converged", true);
    return model;
}

json load_json_file(const std::string& path) {
    std::ifstream in = open_in(path);
    json j;
    in >> j;
    return j;
}

}  // namespace lfpp::io
