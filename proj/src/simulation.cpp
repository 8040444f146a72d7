#include "spef/simulation.hpp"

#include <Eigen/Cholesky>
#include <Eigen/Core>

#include <algorithm>
#include <atomic>
#include <cmath>
#include <exception>
#include <limits>
#include <mutex>
#include <random>
#include <stdexcept>
#include <thread>

#include "spef/errors.hpp"
#include "spef/rank_surrogate.hpp"

namespace spef {

namespace {

constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

std::uint64_t splitmix64(std::uint64_t x) {
    x += 0x9e3779b97f4a7c15ULL;
    x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
    x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
    return x ^ (x >> 31);
}

Eigen::MatrixXd exp2_factor(std::size_t d) {
    Eigen::MatrixXd sigma(d, d);
    for (std::size_t i = 0; i < d; ++i) {
        for (std::size_t j = 0; j < d; ++j) {
            sigma(i, j) = std::pow(0.1, std::abs(static_cast<double>(i) - static_cast<double>(j)));
        }
    }
    return Eigen::LLT<Eigen::MatrixXd>(sigma).matrixL();
}

std::size_t resolve_threads(std::size_t threads) {
    if (threads != 0) return threads;
    return std::max<std::size_t>(1, std::thread::hardware_concurrency());
}

std::vector<double> fit_profile_estimate(const ExperimentConfig& config, const Dataset& data) {
    if (config.experiment == Experiment::exp3) {
        return fit_observed(data, config.profile, config.profile_search).beta_O;
    }
    return fit(ProfileObjective(data, config.profile), config.profile_search).beta_hat;
}

void check_observed(const ExperimentConfig& config, const Dataset& data) {
    if (config.experiment == Experiment::exp3 && data.observed_count() < kMinObserved) {
        throw NumericalError(ErrorKind::all_data_missing,
                             "only " + std::to_string(data.observed_count()) + " observed responses");
    }
}

}  // namespace

std::string_view to_string(Experiment experiment) {
    switch (experiment) {
        case Experiment::exp1:
            return "exp1";
        case Experiment::exp2:
            return "exp2";
        case Experiment::exp3:
            return "exp3";
    }
    return "unknown";
}

Experiment parse_experiment(std::string_view name) {
    if (name == "exp1") return Experiment::exp1;
    if (name == "exp2") return Experiment::exp2;
    if (name == "exp3") return Experiment::exp3;
    throw std::invalid_argument("unknown experiment '" + std::string(name) + "'");
}

void ExperimentConfig::validate() const {
    if (n < kMinObserved) {
        throw std::invalid_argument("experiments need n >= 10");
    }
    if (replications == 0) {
        throw std::invalid_argument("experiments need at least one replication");
    }
    if (!(sigma2 > 0.0) || !std::isfinite(sigma2)) {
        throw std::invalid_argument("sigma2 must be positive");
    }
    if (beta_true.empty()) {
        throw std::invalid_argument("beta_true must be nonempty");
    }
    if (experiment != Experiment::exp2 && beta_true.size() != 1) {
        throw std::invalid_argument("exp1 and exp3 use a scalar beta");
    }
    if (profile_search.box.dim() != dim() || rank_search.box.dim() != dim()) {
        throw std::invalid_argument("search boxes must match the dimension of beta_true");
    }
    profile_search.box.validate();
    rank_search.box.validate();
    mechanism.validate();
}

ExperimentConfig ExperimentConfig::exp1(std::size_t n, double mu, double sigma2) {
    ExperimentConfig config;
    config.n = n;
    config.mu = mu;
    config.sigma2 = sigma2;
    return config;
}

ExperimentConfig ExperimentConfig::exp2(std::size_t n, double sigma2) {
    ExperimentConfig config;
    config.experiment = Experiment::exp2;
    config.n = n;
    config.mu = 0.0;
    config.sigma2 = sigma2;
    config.beta_true = {1.0, 2.0, 3.0};
    config.profile_search = SearchConfig::with_box(3, -10.0, 10.0);
    config.rank_search = SearchConfig::with_box(3, -250.0, 250.0);
    return config;
}

ExperimentConfig ExperimentConfig::exp3(std::size_t n, MechanismKind kind, double c) {
    ExperimentConfig config;
    config.experiment = Experiment::exp3;
    config.n = n;
    config.mu = 2.0;
    config.sigma2 = 1.1;
    config.mechanism = {kind, c};
    return config;
}

std::uint64_t substream_seed(std::uint64_t master_seed, std::size_t index) {
    return splitmix64(master_seed ^ splitmix64(static_cast<std::uint64_t>(index)));
}

Dataset generate(const ExperimentConfig& config, std::size_t replication) {
    config.validate();
    std::mt19937_64 rng(substream_seed(config.master_seed, replication));
    std::normal_distribution<double> normal(0.0, 1.0);
    const std::size_t d = config.dim();
    const double noise_sd = std::sqrt(config.sigma2);
    const Eigen::MatrixXd factor =
        config.experiment == Experiment::exp2 ? exp2_factor(d) : Eigen::MatrixXd::Identity(d, d);

    std::vector<Observation> obs(config.n);
    Eigen::VectorXd z(d);
    for (auto& o : obs) {
        for (std::size_t j = 0; j < d; ++j) z(j) = normal(rng);
        const Eigen::VectorXd x = factor * z;
        o.x.resize(d);
        for (std::size_t j = 0; j < d; ++j) o.x[j] = x(j) + config.mu;
        o.y = dot(config.beta_true, o.x) + noise_sd * normal(rng);
    }
    Dataset data(std::move(obs));
    if (config.experiment == Experiment::exp3) {
        return apply_missingness(data, config.mechanism, rng);
    }
    return data;
}

double median(std::vector<double> values) {
    if (values.empty()) return kNaN;
    const std::size_t mid = values.size() / 2;
    std::nth_element(values.begin(), values.begin() + static_cast<std::ptrdiff_t>(mid), values.end());
    const double upper = values[mid];
    if (values.size() % 2 == 1) return upper;
    const double lower = *std::max_element(values.begin(), values.begin() + static_cast<std::ptrdiff_t>(mid));
    return 0.5 * (lower + upper);
}

SimSummary summarize(std::string label, std::size_t component, double truth,
                     std::span<const double> estimates, std::size_t failures) {
    SimSummary s;
    s.label = std::move(label);
    s.component = component;
    s.truth = truth;
    s.replications_used = estimates.size();
    s.failures = failures;
    if (estimates.empty()) {
        s.mean = s.median = s.mse = s.bias = s.sd = kNaN;
        return s;
    }
    const double r = static_cast<double>(estimates.size());
    double sum = 0.0;
    double sq_err = 0.0;
    for (double v : estimates) {
        sum += v;
        sq_err += (v - truth) * (v - truth);
    }
    s.mean = sum / r;
    s.bias = s.mean - truth;
    s.mse = sq_err / r;
    double ss = 0.0;
    for (double v : estimates) ss += (v - s.mean) * (v - s.mean);
    s.sd = estimates.size() > 1 ? std::sqrt(ss / (r - 1.0)) : 0.0;
    s.median = median(std::vector<double>(estimates.begin(), estimates.end()));
    return s;
}

std::size_t EstimatorRuns::failures() const {
    return static_cast<std::size_t>(
        std::count_if(estimates.begin(), estimates.end(), [](const auto& e) { return !e.has_value(); }));
}

const EstimatorRuns& ExperimentReport::estimator(std::string_view label) const {
    for (const auto& r : runs) {
        if (r.label == label) return r;
    }
    throw std::out_of_range("no estimator labelled '" + std::string(label) + "'");
}

const SimSummary& ExperimentReport::summary(std::string_view label, std::size_t component) const {
    for (const auto& s : summaries) {
        if (s.label == label && s.component == component) return s;
    }
    throw std::out_of_range("no summary for '" + std::string(label) + "'");
}

void parallel_for(std::size_t count, std::size_t threads, const std::function<void(std::size_t)>& task) {
    const std::size_t workers = std::min(resolve_threads(threads), std::max<std::size_t>(count, 1));
    if (workers <= 1) {
        for (std::size_t i = 0; i < count; ++i) task(i);
        return;
    }
    std::atomic<std::size_t> next{0};
    std::exception_ptr failure;
    std::mutex failure_mutex;
    std::vector<std::thread> pool;
    pool.reserve(workers);
    for (std::size_t w = 0; w < workers; ++w) {
        pool.emplace_back([&] {
            for (std::size_t i = next++; i < count; i = next++) {
                try {
                    task(i);
                } catch (...) {
                    std::lock_guard<std::mutex> lock(failure_mutex);
                    if (!failure) failure = std::current_exception();
                }
            }
        });
    }
    for (auto& t : pool) t.join();
    if (failure) std::rethrow_exception(failure);
}

ExperimentReport run_experiment(const ExperimentConfig& config) {
    config.validate();
    ExperimentReport report;
    report.config = config;
    const std::size_t reps = config.replications;
    std::vector<std::string> labels;
    if (config.fit_profile) labels.emplace_back("profile");
    if (config.fit_rank) labels.emplace_back("rank");
    for (const auto& label : labels) {
        report.runs.push_back({label, std::vector<std::optional<std::vector<double>>>(reps),
                               std::vector<std::string>(reps)});
    }

    parallel_for(reps, config.threads, [&](std::size_t rep) {
        std::optional<Dataset> data;
        std::string data_error;
        try {
            data.emplace(generate(config, rep));
            check_observed(config, *data);
        } catch (const std::exception& e) {
            data.reset();
            data_error = e.what();
        }
        for (auto& run : report.runs) {
            if (!data) {
                run.errors[rep] = data_error;
                continue;
            }
            try {
                if (run.label == "profile") {
                    run.estimates[rep] = fit_profile_estimate(config, *data);
                } else {
                    run.estimates[rep] = rank_fit(RankObjective(*data), config.rank_search).beta_hat;
                }
            } catch (const NumericalError& e) {
                run.errors[rep] = e.what();
            }
        }
    });

    for (const auto& run : report.runs) {
        for (std::size_t c = 0; c < config.dim(); ++c) {
            std::vector<double> values;
            for (const auto& e : run.estimates) {
                if (e) values.push_back((*e)[c]);
            }
            report.summaries.push_back(
                summarize(run.label, c, config.beta_true[c], values, run.failures()));
        }
    }
    return report;
}

std::vector<CurvePoint> f_curve_median(const ExperimentConfig& config, std::span<const double> y_grid) {
    config.validate();
    if (y_grid.empty()) {
        throw std::invalid_argument("y grid must be nonempty");
    }
    const std::size_t reps = config.replications;
    std::vector<std::optional<std::vector<std::optional<double>>>> values(reps);

    parallel_for(reps, config.threads, [&](std::size_t rep) {
        try {
            const Dataset data = generate(config, rep);
            check_observed(config, data);
            const FitResult result = fit(ProfileObjective(data.observed_subset(), config.profile),
                                         config.profile_search);
            std::vector<std::optional<double>> row(y_grid.size());
            for (std::size_t g = 0; g < y_grid.size(); ++g) {
                if (!result.support.contains(y_grid[g])) continue;
                try {
                    row[g] = result.f_hat(y_grid[g]);
                } catch (const NumericalError& e) {
                    if (e.kind() != ErrorKind::isolated_y) throw;
                }
            }
            values[rep] = std::move(row);
        } catch (const NumericalError&) {
            values[rep].reset();
        }
    });

    std::vector<CurvePoint> out;
    for (std::size_t g = 0; g < y_grid.size(); ++g) {
        std::vector<double> column;
        bool complete = true;
        for (const auto& row : values) {
            if (!row) continue;
            if (!(*row)[g]) {
                complete = false;
                break;
            }
            column.push_back(*(*row)[g]);
        }
        if (!complete || column.empty()) continue;
        out.push_back({y_grid[g], median(column), column.size()});
    }
    return out;
}

std::vector<CurvePoint> median_rank_curve(const ExperimentConfig& config,
                                          std::span<const double> beta_grid) {
    config.validate();
    if (config.dim() != 1) {
        throw std::invalid_argument("rank curves are defined for a scalar beta");
    }
    if (beta_grid.empty()) {
        throw std::invalid_argument("beta grid must be nonempty");
    }
    const std::size_t reps = config.replications;
    std::vector<std::vector<double>> values(reps);
    parallel_for(reps, config.threads, [&](std::size_t rep) {
        const RankObjective objective(generate(config, rep));
        values[rep].resize(beta_grid.size());
        for (std::size_t g = 0; g < beta_grid.size(); ++g) {
            values[rep][g] = objective(beta_grid.subspan(g, 1));
        }
    });
    std::vector<CurvePoint> out;
    for (std::size_t g = 0; g < beta_grid.size(); ++g) {
        std::vector<double> column(reps);
        for (std::size_t r = 0; r < reps; ++r) column[r] = values[r][g];
        out.push_back({beta_grid[g], median(std::move(column)), reps});
    }
    return out;
}

}  // namespace spef
