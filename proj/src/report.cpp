#include "spef/report.hpp"

#include <charconv>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>

namespace spef::report {

namespace {

std::string trim(const std::string& s) {
    const auto first = s.find_first_not_of(" \t\r");
    if (first == std::string::npos) return "";
    const auto last = s.find_last_not_of(" \t\r");
    return s.substr(first, last - first + 1);
}

std::vector<std::string> split(const std::string& line, char sep) {
    std::vector<std::string> out;
    std::stringstream ss(line);
    std::string field;
    while (std::getline(ss, field, sep)) out.push_back(trim(field));
    if (!line.empty() && line.back() == sep) out.emplace_back();
    return out;
}

bool parse_double(const std::string& text, double& out) {
    const char* begin = text.data();
    const char* end = begin + text.size();
    auto [ptr, ec] = std::from_chars(begin, end, out);
    return ec == std::errc() && ptr == end && std::isfinite(out);
}

double require_double(const std::string& key, const std::string& text) {
    double v = 0.0;
    if (!parse_double(text, v)) {
        throw ParseError("key '" + key + "': expected a number, got '" + text + "'");
    }
    return v;
}

std::uint64_t require_unsigned(const std::string& key, const std::string& text) {
    std::uint64_t v = 0;
    auto [ptr, ec] = std::from_chars(text.data(), text.data() + text.size(), v);
    if (ec != std::errc() || ptr != text.data() + text.size()) {
        throw ParseError("key '" + key + "': expected a nonnegative integer, got '" + text + "'");
    }
    return v;
}

bool require_bool(const std::string& key, const std::string& text) {
    if (text == "true" || text == "1") return true;
    if (text == "false" || text == "0") return false;
    throw ParseError("key '" + key + "': expected true or false, got '" + text + "'");
}

std::vector<double> require_list(const std::string& key, const std::string& text) {
    std::vector<double> out;
    for (const auto& part : split(text, ',')) out.push_back(require_double(key, part));
    if (out.empty()) throw ParseError("key '" + key + "': empty list");
    return out;
}

std::pair<double, double> require_range(const std::string& key, const std::string& text) {
    const auto values = require_list(key, text);
    if (values.size() != 2) {
        throw ParseError("key '" + key + "': expected 'lo, hi'");
    }
    return {values[0], values[1]};
}

template <typename F>
auto wrap(const std::string& key, F&& parse) {
    try {
        return parse();
    } catch (const std::invalid_argument& e) {
        throw ParseError("key '" + key + "': " + e.what());
    }
}

nlohmann::json box_json(const SearchBox& box) { return {{"lo", box.lo}, {"hi", box.hi}}; }

}  // namespace

std::string format_number(double value) {
    if (std::isnan(value)) return "nan";
    if (std::isinf(value)) return value > 0 ? "inf" : "-inf";
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.6g", value);
    return buf;
}

std::string to_csv(const CsvTable& table) {
    std::ostringstream out;
    auto emit = [&](const std::vector<std::string>& row) {
        for (std::size_t i = 0; i < row.size(); ++i) {
            if (i) out << ',';
            out << row[i];
        }
        out << '\n';
    };
    emit(table.header);
    for (const auto& row : table.rows) emit(row);
    return out.str();
}

void write_text(const std::filesystem::path& path, const std::string& text) {
    if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
    std::ofstream out(path, std::ios::binary);
    if (!out) {
        throw std::runtime_error("cannot open '" + path.string() + "' for writing");
    }
    out << text;
}

CsvTable summary_table() {
    return {{"config", "estimator", "parameter", "mean", "median", "MSE", "bias", "sd", "failures"}, {}};
}

void append_summaries(CsvTable& table, const std::string& config_label, const ExperimentReport& report) {
    const bool scalar = report.config.dim() == 1;
    for (const auto& s : report.summaries) {
        table.rows.push_back({config_label, s.label,
                              scalar ? "beta" : "beta" + std::to_string(s.component + 1),
                              format_number(s.mean), format_number(s.median), format_number(s.mse),
                              format_number(s.bias), format_number(s.sd), std::to_string(s.failures)});
    }
}

CsvTable curve_table(const std::string& x_label, const std::vector<std::string>& curve_labels,
                     const std::vector<std::vector<CurvePoint>>& curves) {
    CsvTable table;
    table.header.push_back(x_label);
    for (const auto& label : curve_labels) table.header.push_back(label);
    // Rows are keyed by x; a curve missing a point leaves an empty cell.
    std::map<double, std::vector<std::string>> rows;
    for (std::size_t c = 0; c < curves.size(); ++c) {
        for (const auto& p : curves[c]) {
            auto& row = rows[p.x];
            row.resize(curves.size());
            row[c] = format_number(p.median);
        }
    }
    for (auto& [x, cells] : rows) {
        cells.resize(curves.size());
        std::vector<std::string> row{format_number(x)};
        row.insert(row.end(), cells.begin(), cells.end());
        table.rows.push_back(std::move(row));
    }
    return table;
}

nlohmann::json switches_json(const ProfileOptions& options, const SearchConfig& profile_search,
                             const SearchConfig& rank_search) {
    nlohmann::json j;
    j["partition_path"] = std::string(to_string(options.partition));
    j["f_star"] = std::string(to_string(options.f_star));
    j["loo_weights"] = std::string(to_string(options.lfc.loo_weights));
    j["kernel"] = std::string(to_string(options.kernel));
    j["y_bandwidth"] = options.y_bandwidth ? nlohmann::json(*options.y_bandwidth) : nlohmann::json("rule");
    j["index_bandwidth"] =
        options.index_bandwidth ? nlohmann::json(*options.index_bandwidth) : nlohmann::json("rule");
    j["index_grid_intervals"] = options.lfc.index_grid_intervals;
    j["quadrature_points"] = options.quadrature_points;
    j["profile_box"] = box_json(profile_search.box);
    j["rank_box"] = box_json(rank_search.box);
    j["rank_box_note"] = "reconstructed bound; the source experiments state none";
    j["grid_points"] = profile_search.grid_points;
    j["golden_tolerance"] = profile_search.golden_tolerance;
    j["simplex_tolerance"] = profile_search.simplex_tolerance;
    j["max_iterations"] = profile_search.max_iterations;
    j["sd_convention"] = "sample standard deviation, divisor r - 1";
    j["failure_policy"] = "failed replications excluded from summaries and counted";
    return j;
}

nlohmann::json config_json(const ExperimentConfig& config) {
    nlohmann::json j;
    j["experiment"] = std::string(to_string(config.experiment));
    j["n"] = config.n;
    j["replications"] = config.replications;
    j["beta_true"] = config.beta_true;
    j["mu"] = config.mu;
    j["sigma2"] = config.sigma2;
    if (config.experiment == Experiment::exp3) {
        j["mechanism"] = std::string(to_string(config.mechanism.kind));
        j["c"] = config.mechanism.c;
    }
    j["master_seed"] = config.master_seed;
    j["switches"] = switches_json(config.profile, config.profile_search, config.rank_search);
    return j;
}

std::filesystem::path manifest_path(const std::filesystem::path& out) {
    return std::filesystem::path(out.string() + ".manifest.json");
}

Dataset read_dataset_csv(std::istream& in) {
    std::string line;
    std::size_t line_no = 0;
    std::vector<std::string> header;
    while (std::getline(in, line)) {
        ++line_no;
        if (!trim(line).empty()) {
            header = split(trim(line), ',');
            break;
        }
    }
    if (header.empty()) throw ParseError("line 1: missing header");

    std::size_t d = 0;
    while (d < header.size() && header[d] == "x" + std::to_string(d + 1)) ++d;
    if (d == 0) throw ParseError("line " + std::to_string(line_no) + ": header must start with x1");
    if (d >= header.size() || header[d] != "y") {
        throw ParseError("line " + std::to_string(line_no) + ", field " + std::to_string(d + 1) +
                         ": expected 'y'");
    }
    const bool has_delta = header.size() == d + 2;
    if (header.size() > d + 2 || (has_delta && header[d + 1] != "delta")) {
        throw ParseError("line " + std::to_string(line_no) + ": unexpected columns after 'y'");
    }

    std::vector<Observation> obs;
    while (std::getline(in, line)) {
        ++line_no;
        if (trim(line).empty()) continue;
        const auto fields = split(trim(line), ',');
        if (fields.size() != header.size()) {
            throw ParseError("line " + std::to_string(line_no) + ": expected " +
                             std::to_string(header.size()) + " fields, got " +
                             std::to_string(fields.size()));
        }
        Observation o;
        o.x.resize(d);
        auto field = [&](std::size_t f) {
            double v = 0.0;
            if (!parse_double(fields[f], v)) {
                throw ParseError("line " + std::to_string(line_no) + ", field " + std::to_string(f + 1) +
                                 " (" + header[f] + "): not a finite number: '" + fields[f] + "'");
            }
            return v;
        };
        for (std::size_t j = 0; j < d; ++j) o.x[j] = field(j);
        o.y = field(d);
        if (has_delta) {
            if (fields[d + 1] != "0" && fields[d + 1] != "1") {
                throw ParseError("line " + std::to_string(line_no) + ", field " + std::to_string(d + 2) +
                                 " (delta): expected 0 or 1");
            }
            o.observed = fields[d + 1] == "1";
        }
        obs.push_back(std::move(o));
    }
    try {
        return Dataset(std::move(obs));
    } catch (const std::invalid_argument& e) {
        throw ParseError(std::string("dataset: ") + e.what());
    }
}

std::map<std::string, std::string> read_key_values(std::istream& in) {
    std::map<std::string, std::string> out;
    std::string line;
    std::size_t line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        const auto hash = line.find('#');
        if (hash != std::string::npos) line.erase(hash);
        line = trim(line);
        if (line.empty()) continue;
        const auto eq = line.find('=');
        if (eq == std::string::npos) {
            throw ParseError("line " + std::to_string(line_no) + ": expected 'key = value'");
        }
        const std::string key = trim(line.substr(0, eq));
        const std::string value = trim(line.substr(eq + 1));
        if (key.empty() || value.empty()) {
            throw ParseError("line " + std::to_string(line_no) + ": empty key or value");
        }
        if (!out.emplace(key, value).second) {
            throw ParseError("line " + std::to_string(line_no) + ": duplicate key '" + key + "'");
        }
    }
    return out;
}

ExperimentConfig apply_config(const std::map<std::string, std::string>& values, ExperimentConfig base) {
    ExperimentConfig config = base;
    if (auto it = values.find("experiment"); it != values.end()) {
        const Experiment e = wrap(it->first, [&] { return parse_experiment(it->second); });
        if (e != base.experiment) {
            config = e == Experiment::exp1   ? ExperimentConfig::exp1(base.n, 1.0, 1.0)
                     : e == Experiment::exp2 ? ExperimentConfig::exp2(base.n, 1.0)
                                             : ExperimentConfig::exp3(base.n, base.mechanism.kind,
                                                                      base.mechanism.c);
            config.replications = base.replications;
            config.master_seed = base.master_seed;
            config.threads = base.threads;
            config.profile = base.profile;
        }
    }
    std::pair<double, double> profile_box{config.profile_search.box.lo[0], config.profile_search.box.hi[0]};
    std::pair<double, double> rank_box{config.rank_search.box.lo[0], config.rank_search.box.hi[0]};
    for (const auto& [key, value] : values) {
        if (key == "experiment") {
            continue;
        } else if (key == "n") {
            config.n = require_unsigned(key, value);
        } else if (key == "replications") {
            config.replications = require_unsigned(key, value);
        } else if (key == "beta_true") {
            config.beta_true = require_list(key, value);
        } else if (key == "mu") {
            config.mu = require_double(key, value);
        } else if (key == "sigma2") {
            config.sigma2 = require_double(key, value);
        } else if (key == "mechanism") {
            config.mechanism.kind = wrap(key, [&] { return parse_mechanism_kind(value); });
        } else if (key == "c") {
            config.mechanism.c = require_double(key, value);
        } else if (key == "partition_path") {
            config.profile.partition = wrap(key, [&] { return parse_partition_path(value); });
        } else if (key == "f_star") {
            config.profile.f_star = wrap(key, [&] { return parse_base_estimate(value); });
        } else if (key == "loo_weights") {
            config.profile.lfc.loo_weights = wrap(key, [&] { return parse_loo_weights(value); });
        } else if (key == "kernel") {
            config.profile.kernel = wrap(key, [&] { return parse_kernel_family(value); });
        } else if (key == "y_bandwidth") {
            config.profile.y_bandwidth = require_double(key, value);
        } else if (key == "index_bandwidth") {
            config.profile.index_bandwidth = require_double(key, value);
        } else if (key == "index_grid_intervals") {
            config.profile.lfc.index_grid_intervals = require_unsigned(key, value);
        } else if (key == "quadrature_points") {
            config.profile.quadrature_points = require_unsigned(key, value);
        } else if (key == "profile_box") {
            profile_box = require_range(key, value);
        } else if (key == "rank_box") {
            rank_box = require_range(key, value);
        } else if (key == "master_seed") {
            config.master_seed = require_unsigned(key, value);
        } else if (key == "threads") {
            config.threads = require_unsigned(key, value);
        } else if (key == "fit_profile") {
            config.fit_profile = require_bool(key, value);
        } else if (key == "fit_rank") {
            config.fit_rank = require_bool(key, value);
        } else {
            throw ParseError("unknown key '" + key + "'");
        }
    }
    config.profile_search.box = SearchBox::uniform(config.dim(), profile_box.first, profile_box.second);
    config.rank_search.box = SearchBox::uniform(config.dim(), rank_box.first, rank_box.second);
    try {
        config.validate();
    } catch (const std::invalid_argument& e) {
        throw ParseError(std::string("config: ") + e.what());
    }
    return config;
}

}  // namespace spef::report
