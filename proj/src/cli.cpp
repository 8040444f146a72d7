#include "spef/cli.hpp"

#include <chrono>
#include <cmath>
#include <fstream>
#include <functional>
#include <numbers>
#include <set>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "json.hpp"
#include "spef/errors.hpp"
#include "spef/missing_data.hpp"
#include "spef/profile.hpp"
#include "spef/rank_surrogate.hpp"
#include "spef/report.hpp"
#include "spef/simulation.hpp"

namespace spef::cli {

namespace {

using nlohmann::json;
using report::CsvTable;
using report::format_number;

struct CommonFlags {
    std::uint64_t seed = 7;
    std::size_t reps = 100;
    std::size_t threads = 0;
    std::string out;

    std::string partition = "quadrature";
    std::string f_star = "unstandardized";
    std::string loo_weights = "renormalized";
    std::string kernel = "gaussian";
    double y_bandwidth = 0.0;
    double index_bandwidth = 0.0;
    std::vector<double> profile_box{-10.0, 10.0};
    std::vector<double> rank_box{-250.0, 250.0};

    std::vector<std::size_t> n;
    std::vector<double> mu;
    std::vector<double> sigma2;
    std::vector<double> c;

    std::map<std::string, CLI::Option*> options;

    bool given(const std::string& name) const {
        auto it = options.find(name);
        return it != options.end() && it->second->count() > 0;
    }
};

void add_common(CLI::App& sub, CommonFlags& f, const std::string& default_out) {
    f.out = default_out;
    f.options["seed"] = sub.add_option("--seed", f.seed, "Master seed")->capture_default_str();
    f.options["reps"] = sub.add_option("--reps", f.reps, "Replications per configuration")
                            ->check(CLI::PositiveNumber)
                            ->capture_default_str();
    f.options["threads"] =
        sub.add_option("--threads", f.threads, "Worker threads (0 = available parallelism)")
            ->capture_default_str();
    f.options["out"] = sub.add_option("--out", f.out, "Output CSV path")->capture_default_str();
    f.options["partition"] =
        sub.add_option("--partition", f.partition, "b evaluation: quadrature | index_integral")
            ->capture_default_str();
    f.options["f_star"] = sub.add_option("--f-star", f.f_star, "unstandardized | standardized")
                              ->capture_default_str();
    f.options["loo_weights"] =
        sub.add_option("--loo-weights", f.loo_weights, "renormalized | full_sample")->capture_default_str();
    f.options["kernel"] =
        sub.add_option("--kernel", f.kernel, "gaussian | epanechnikov")->capture_default_str();
    f.options["y_bandwidth"] =
        sub.add_option("--y-bandwidth", f.y_bandwidth, "Fixed response bandwidth (default: rule)")
            ->check(CLI::PositiveNumber);
    f.options["index_bandwidth"] =
        sub.add_option("--index-bandwidth", f.index_bandwidth, "Fixed index bandwidth (default: rule)")
            ->check(CLI::PositiveNumber);
    f.options["profile_box"] =
        sub.add_option("--profile-box", f.profile_box, "Profile search bounds: lo hi")->expected(2);
    f.options["rank_box"] =
        sub.add_option("--rank-box", f.rank_box, "Rank-surrogate search bounds: lo hi")->expected(2);
}

void add_filters(CLI::App& sub, CommonFlags& f, bool with_mu, bool with_c) {
    f.options["n"] = sub.add_option("--n", f.n, "Sample size(s)");
    f.options["sigma2"] = sub.add_option("--sigma2", f.sigma2, "Error variance(s)");
    if (with_mu) f.options["mu"] = sub.add_option("--mu", f.mu, "Covariate mean(s)");
    if (with_c) f.options["c"] = sub.add_option("--c", f.c, "Observation probability(ies)");
}

SearchBox box_from(const std::vector<double>& bounds, std::size_t dim, const char* name) {
    if (bounds.size() != 2) {
        throw std::invalid_argument(std::string(name) + " needs two values");
    }
    SearchBox box = SearchBox::uniform(dim, bounds[0], bounds[1]);
    box.validate();
    return box;
}

/// Applies flags onto a config. With `only_given`, untouched flags leave the
/// config as it is.
void apply_flags(const CommonFlags& f, ExperimentConfig& config, bool only_given) {
    auto use = [&](const char* name) { return !only_given || f.given(name); };
    if (use("seed")) config.master_seed = f.seed;
    if (use("reps")) config.replications = f.reps;
    if (use("threads")) config.threads = f.threads;
    if (use("partition")) config.profile.partition = parse_partition_path(f.partition);
    if (use("f_star")) config.profile.f_star = parse_base_estimate(f.f_star);
    if (use("loo_weights")) config.profile.lfc.loo_weights = parse_loo_weights(f.loo_weights);
    if (use("kernel")) config.profile.kernel = parse_kernel_family(f.kernel);
    if (f.given("y_bandwidth")) config.profile.y_bandwidth = f.y_bandwidth;
    if (f.given("index_bandwidth")) config.profile.index_bandwidth = f.index_bandwidth;
    if (use("profile_box")) config.profile_search.box = box_from(f.profile_box, config.dim(), "--profile-box");
    if (use("rank_box")) config.rank_search.box = box_from(f.rank_box, config.dim(), "--rank-box");
}

template <typename T>
bool keep(const std::vector<T>& filter, T value) {
    if (filter.empty()) return true;
    for (const T& v : filter) {
        if (std::abs(static_cast<double>(v) - static_cast<double>(value)) < 1e-12) return true;
    }
    return false;
}

struct Row {
    std::string label;
    ExperimentConfig config;
};

std::string exp1_label(const ExperimentConfig& c) {
    return "n=" + std::to_string(c.n) + ";mu=" + format_number(c.mu) + ";sigma2=" + format_number(c.sigma2);
}

std::string exp2_label(const ExperimentConfig& c) {
    return "n=" + std::to_string(c.n) + ";sigma2=" + format_number(c.sigma2);
}

std::string exp3_label(const ExperimentConfig& c) {
    return "n=" + std::to_string(c.n) + ";mechanism=" + std::string(to_string(c.mechanism.kind)) +
           ";c=" + format_number(c.mechanism.c);
}

std::string row_label(const ExperimentConfig& c) {
    switch (c.experiment) {
        case Experiment::exp1:
            return exp1_label(c);
        case Experiment::exp2:
            return exp2_label(c);
        case Experiment::exp3:
            return exp3_label(c);
    }
    return "";
}

std::vector<Row> table_rows(int table, const CommonFlags& f) {
    std::vector<ExperimentConfig> configs;
    using MuS2 = std::pair<double, double>;
    if (table == 1 || table == 2) {
        const std::vector<std::size_t> sizes = table == 1 ? std::vector<std::size_t>{100}
                                                          : std::vector<std::size_t>{200, 400};
        const std::vector<MuS2> cells =
            table == 1 ? std::vector<MuS2>{{1, 1},   {2, 1},    {3, 1},    {1, 0.1},  {1, 1.1},
                                           {1, 1.15}, {0, 1.15}, {2, 1.15}, {3, 1.15}}
                       : std::vector<MuS2>{{1, 0.1}, {1, 1.1}, {1, 1.15}, {0, 1.15}, {2, 1.15}, {3, 1.15}};
        for (std::size_t n : f.n.empty() ? sizes : f.n) {
            for (const auto& [mu, s2] : cells) {
                if (keep(f.mu, mu) && keep(f.sigma2, s2)) configs.push_back(ExperimentConfig::exp1(n, mu, s2));
            }
        }
    } else if (table == 3) {
        for (std::size_t n : f.n.empty() ? std::vector<std::size_t>{100, 200} : f.n) {
            for (double s2 : {0.1, 0.5, 1.0}) {
                if (keep(f.sigma2, s2)) configs.push_back(ExperimentConfig::exp2(n, s2));
            }
        }
    } else {
        const MechanismKind kind =
            table == 4 ? MechanismKind::decomposable_indicator : MechanismKind::nondecomposable_line;
        const std::vector<double> probs =
            table == 4 ? std::vector<double>{0.6, 0.7, 0.8} : std::vector<double>{0.85, 0.90, 0.95};
        for (std::size_t n : f.n.empty() ? std::vector<std::size_t>{100, 200, 400} : f.n) {
            for (double c : probs) {
                if (keep(f.c, c)) configs.push_back(ExperimentConfig::exp3(n, kind, c));
            }
        }
    }
    std::vector<Row> rows;
    for (auto& config : configs) {
        apply_flags(f, config, false);
        config.validate();
        rows.push_back({row_label(config), config});
    }
    if (rows.empty()) {
        throw std::invalid_argument("the filters select no configuration");
    }
    return rows;
}

json base_manifest(const std::string& subcommand, const CommonFlags& f) {
    json m;
    m["tool"] = "spef";
    m["version"] = kToolVersion;
    m["subcommand"] = subcommand;
    m["master_seed"] = f.seed;
    m["output"] = f.out;
    return m;
}

void write_outputs(const std::string& out, const CsvTable& table, json manifest, double seconds) {
    report::write_text(out, report::to_csv(table));
    manifest["wall_time_seconds"] = seconds;
    report::write_text(report::manifest_path(out), manifest.dump(2) + "\n");
}

double seconds_since(std::chrono::steady_clock::time_point start) {
    return std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
}

json failure_json(const ExperimentReport& r) {
    json out = json::array();
    for (const auto& run : r.runs) {
        std::set<std::string> messages;
        for (const auto& e : run.errors) {
            if (!e.empty()) messages.insert(e);
        }
        out.push_back({{"estimator", run.label},
                       {"failures", run.failures()},
                       {"messages", std::vector<std::string>(messages.begin(), messages.end())}});
    }
    return out;
}

int run_table(int table, const CommonFlags& f, std::ostream& err) {
    const auto start = std::chrono::steady_clock::now();
    const auto rows = table_rows(table, f);
    CsvTable csv = report::summary_table();
    json manifest = base_manifest("table" + std::to_string(table), f);
    manifest["configs"] = json::array();
    bool any_success = false;
    for (const auto& row : rows) {
        const auto t0 = std::chrono::steady_clock::now();
        const ExperimentReport r = run_experiment(row.config);
        report::append_summaries(csv, row.label, r);
        for (const auto& s : r.summaries) any_success = any_success || s.replications_used > 0;
        json entry = report::config_json(row.config);
        entry["label"] = row.label;
        entry["failures"] = failure_json(r);
        manifest["configs"].push_back(entry);
        err << "table" << table << ' ' << row.label << " done in " << format_number(seconds_since(t0))
            << " s\n";
    }
    write_outputs(f.out, csv, manifest, seconds_since(start));
    return any_success ? kExitSuccess : kExitEstimation;
}

std::vector<double> arithmetic_grid(double lo, double hi, double step) {
    std::vector<double> out;
    const auto count = static_cast<std::size_t>(std::llround((hi - lo) / step));
    for (std::size_t i = 0; i <= count; ++i) out.push_back(lo + step * static_cast<double>(i));
    return out;
}

int run_figure(int figure, const CommonFlags& f, std::ostream& err) {
    const auto start = std::chrono::steady_clock::now();
    json manifest = base_manifest("figure" + std::to_string(figure), f);
    manifest["configs"] = json::array();
    CsvTable csv;
    if (figure == 1) {
        const std::vector<double> variances = f.sigma2.empty() ? std::vector<double>{0.05, 0.1, 1.0} : f.sigma2;
        const auto grid = arithmetic_grid(0.0, 10.0, 0.5);
        std::vector<std::vector<CurvePoint>> curves;
        std::vector<std::string> labels;
        for (double s2 : variances) {
            ExperimentConfig config =
                ExperimentConfig::exp1(f.n.empty() ? 100 : f.n.front(), f.mu.empty() ? 0.0 : f.mu.front(), s2);
            config.fit_profile = false;
            apply_flags(f, config, false);
            curves.push_back(median_rank_curve(config, grid));
            labels.push_back(variances.size() == 1 ? "median" : "sigma2=" + format_number(s2));
            manifest["configs"].push_back(report::config_json(config));
        }
        csv = report::curve_table("beta", labels, curves);
    } else {
        ExperimentConfig config =
            figure == 2 ? ExperimentConfig::exp1(f.n.empty() ? 100 : f.n.front(),
                                                 f.mu.empty() ? 0.0 : f.mu.front(),
                                                 f.sigma2.empty() ? 1.15 : f.sigma2.front())
                        : ExperimentConfig::exp2(f.n.empty() ? 200 : f.n.front(),
                                                 f.sigma2.empty() ? 1.0 : f.sigma2.front());
        config.fit_rank = false;
        apply_flags(f, config, false);
        const auto grid = arithmetic_grid(-3.0, 3.0, 0.1);
        const auto curve = f_curve_median(config, grid);
        csv = report::curve_table("y", {"median"}, {curve});
        json entry = report::config_json(config);
        entry["omitted_points"] = grid.size() - curve.size();
        manifest["configs"].push_back(entry);
        if (curve.empty()) {
            write_outputs(f.out, csv, manifest, seconds_since(start));
            err << "no replication produced a curve\n";
            return kExitEstimation;
        }
    }
    write_outputs(f.out, csv, manifest, seconds_since(start));
    return kExitSuccess;
}

struct FitFlags {
    std::string data;
    std::string estimator = "auto";
    std::size_t curve_points = 201;
};

std::string curve_path(const std::string& out) {
    const std::filesystem::path p(out);
    return (p.parent_path() / (p.stem().string() + "_curve" + p.extension().string())).string();
}

int run_fit(const CommonFlags& f, const FitFlags& ff, std::ostream& err) {
    const auto start = std::chrono::steady_clock::now();
    std::ifstream in(ff.data);
    if (!in) {
        throw std::invalid_argument("cannot open '" + ff.data + "'");
    }
    const Dataset data = report::read_dataset_csv(in);

    ExperimentConfig config;
    config.beta_true.assign(data.dim(), 0.0);
    config.profile_search.box = SearchBox::uniform(data.dim(), -10.0, 10.0);
    config.rank_search.box = SearchBox::uniform(data.dim(), -250.0, 250.0);
    apply_flags(f, config, false);

    std::string estimator = ff.estimator;
    if (estimator == "auto") {
        estimator = data.observed_count() < data.size() ? "observed" : "profile";
    }

    json manifest = base_manifest("fit", f);
    manifest["data"] = ff.data;
    manifest["estimator"] = estimator;
    manifest["n"] = data.size();
    manifest["observed"] = data.observed_count();
    manifest["switches"] = report::switches_json(config.profile, config.profile_search, config.rank_search);

    CsvTable csv{{"quantity", "value"}, {}};
    CsvTable curve;
    try {
        std::vector<double> beta;
        double loglik = 0.0;
        bool converged = false;
        if (estimator == "profile") {
            const FitResult r = fit(ProfileObjective(data.observed_subset(), config.profile), config.profile_search);
            beta = r.beta_hat;
            loglik = r.loglik_at_max;
            converged = r.converged;
            curve.header = {"y", "f_tilde", "f_hat"};
            const TrapezoidGrid grid(r.support, ff.curve_points);
            for (double y : grid.nodes()) {
                curve.rows.push_back({format_number(y), format_number(r.f_tilde(y)), format_number(r.f_hat(y))});
            }
        } else if (estimator == "observed") {
            const OutcomeRegressionFit r = fit_observed(data, config.profile, config.profile_search);
            beta = r.beta_O;
            loglik = r.loglik_at_max;
            converged = r.converged;
            curve.header = {"y", "f_m", "g1"};
            const TrapezoidGrid grid(r.grid.support(), ff.curve_points);
            for (double y : grid.nodes()) {
                double g1 = std::numeric_limits<double>::quiet_NaN();
                try {
                    g1 = r.g1_tilde(y);
                } catch (const NumericalError&) {
                }
                curve.rows.push_back({format_number(y), format_number(r.f_m(y)), format_number(g1)});
            }
        } else if (estimator == "rank") {
            const FitResult r = rank_fit(RankObjective(data), config.rank_search);
            beta = r.beta_hat;
            loglik = r.loglik_at_max;
            converged = r.converged;
        } else {
            throw std::invalid_argument("unknown estimator '" + estimator + "'");
        }
        for (std::size_t j = 0; j < beta.size(); ++j) {
            csv.rows.push_back({beta.size() == 1 ? "beta" : "beta" + std::to_string(j + 1), format_number(beta[j])});
        }
        csv.rows.push_back({"loglik", format_number(loglik)});
        csv.rows.push_back({"converged", converged ? "1" : "0"});
    } catch (const NumericalError& e) {
        manifest["error"] = e.what();
        write_outputs(f.out, csv, manifest, seconds_since(start));
        err << "estimation failed: " << e.what() << '\n';
        return kExitEstimation;
    }
    if (!curve.header.empty()) {
        const std::string path = curve_path(f.out);
        report::write_text(path, report::to_csv(curve));
        manifest["curve"] = path;
    }
    write_outputs(f.out, csv, manifest, seconds_since(start));
    return kExitSuccess;
}

int run_custom(const CommonFlags& f, const std::string& config_path, std::ostream& err) {
    const auto start = std::chrono::steady_clock::now();
    std::ifstream in(config_path);
    if (!in) {
        throw std::invalid_argument("cannot open '" + config_path + "'");
    }
    ExperimentConfig config = report::apply_config(report::read_key_values(in), ExperimentConfig{});
    apply_flags(f, config, true);
    config.validate();
    const ExperimentReport r = run_experiment(config);
    CsvTable csv = report::summary_table();
    const std::string label = row_label(config);
    report::append_summaries(csv, label, r);
    json manifest = base_manifest("custom", f);
    manifest["master_seed"] = config.master_seed;
    manifest["config_file"] = config_path;
    json entry = report::config_json(config);
    entry["label"] = label;
    entry["failures"] = failure_json(r);
    manifest["configs"] = json::array({entry});
    write_outputs(f.out, csv, manifest, seconds_since(start));
    for (const auto& s : r.summaries) {
        if (s.replications_used > 0) return kExitSuccess;
    }
    err << "every replication failed\n";
    return kExitEstimation;
}

}  // namespace

int run(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
    CLI::App app{"Profile-likelihood estimation for the semiparametric exponential family", "spef"};
    app.set_version_flag("--version", kToolVersion);
    app.require_subcommand(1);

    std::map<std::string, CommonFlags> flags;
    std::map<std::string, CLI::App*> subs;
    for (int t = 1; t <= 5; ++t) {
        const std::string name = "table" + std::to_string(t);
        auto* sub = app.add_subcommand(name, "Monte Carlo summary for " + name);
        add_common(*sub, flags[name], name + ".csv");
        add_filters(*sub, flags[name], t <= 2, t >= 4);
        subs[name] = sub;
    }
    for (int fig = 1; fig <= 3; ++fig) {
        const std::string name = "figure" + std::to_string(fig);
        auto* sub = app.add_subcommand(name, "Median curve data for " + name);
        add_common(*sub, flags[name], name + ".csv");
        add_filters(*sub, flags[name], fig != 3, false);
        subs[name] = sub;
    }
    FitFlags fit_flags;
    auto* fit_sub = app.add_subcommand("fit", "Fit one dataset (CSV header x1..xd,y[,delta])");
    add_common(*fit_sub, flags["fit"], "fit.csv");
    fit_sub->add_option("--data", fit_flags.data, "Input CSV")->required();
    fit_sub->add_option("--estimator", fit_flags.estimator, "auto | profile | observed | rank")
        ->capture_default_str();
    fit_sub->add_option("--curve-points", fit_flags.curve_points, "Points in the curve CSV")
        ->check(CLI::Range(2, 100000))
        ->capture_default_str();
    subs["fit"] = fit_sub;

    std::string config_path;
    auto* custom_sub = app.add_subcommand("custom", "Run one experiment described by a key = value file");
    add_common(*custom_sub, flags["custom"], "custom.csv");
    custom_sub->add_option("--config", config_path, "Config file")->required();
    subs["custom"] = custom_sub;

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e, out, err);
        return code == 0 ? kExitSuccess : kExitUsage;
    }

    try {
        for (const auto& [name, sub] : subs) {
            if (!sub->parsed()) continue;
            const CommonFlags& f = flags[name];
            if (name.rfind("table", 0) == 0) return run_table(name.back() - '0', f, err);
            if (name.rfind("figure", 0) == 0) return run_figure(name.back() - '0', f, err);
            if (name == "fit") return run_fit(f, fit_flags, err);
            if (name == "custom") return run_custom(f, config_path, err);
        }
    } catch (const report::ParseError& e) {
        err << "error: " << e.what() << '\n';
        return kExitUsage;
    } catch (const std::invalid_argument& e) {
        err << "error: " << e.what() << '\n';
        return kExitUsage;
    } catch (const NumericalError& e) {
        err << "estimation failed: " << e.what() << '\n';
        return kExitEstimation;
    } catch (const std::exception& e) {
        err << "error: " << e.what() << '\n';
        return kExitUsage;
    }
    return kExitUsage;
}

}  // namespace spef::cli
