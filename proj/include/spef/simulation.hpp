#ifndef SPEF_SIMULATION_HPP
#define SPEF_SIMULATION_HPP

#include <cstddef>
#include <cstdint>
#include <functional>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "spef/core_model.hpp"
#include "spef/missing_data.hpp"
#include "spef/optimize.hpp"
#include "spef/profile.hpp"

namespace spef {

enum class Experiment {
    exp1,  // Y = beta X + e, X ~ N(mu, 1), e ~ N(0, sigma2)
    exp2,  // Y = beta^T X + e, X ~ N(0, Sigma), sigma_ij = 0.1^|i-j|
    exp3,  // exp1 with X ~ N(2, 1) and a missingness mechanism
};

std::string_view to_string(Experiment experiment);
Experiment parse_experiment(std::string_view name);

struct ExperimentConfig {
    Experiment experiment = Experiment::exp1;
    std::size_t n = 100;
    std::size_t replications = 100;
    std::vector<double> beta_true{2.0};
    double mu = 1.0;
    double sigma2 = 1.0;
    MissingMechanism mechanism;
    ProfileOptions profile;
    SearchConfig profile_search = SearchConfig::with_box(1, -10.0, 10.0);
    SearchConfig rank_search = SearchConfig::with_box(1, -250.0, 250.0);
    bool fit_profile = true;
    bool fit_rank = true;
    std::uint64_t master_seed = 7;
    /// Worker threads; 0 means the available hardware parallelism.
    std::size_t threads = 1;

    void validate() const;
    std::size_t dim() const { return beta_true.size(); }

    static ExperimentConfig exp1(std::size_t n, double mu, double sigma2);
    static ExperimentConfig exp2(std::size_t n, double sigma2);
    static ExperimentConfig exp3(std::size_t n, MechanismKind kind, double c);
};

/// Replications of exp3 with fewer observed responses than this fail.
inline constexpr std::size_t kMinObserved = 10;

/// Seed of replication `index`, derived from the master seed alone.
std::uint64_t substream_seed(std::uint64_t master_seed, std::size_t index);

/// The dataset of one replication. For exp3 the observed flags are set.
Dataset generate(const ExperimentConfig& config, std::size_t replication);

struct SimSummary {
    std::string label;
    std::size_t component = 0;
    double truth = 0.0;
    double mean = 0.0;
    double median = 0.0;
    double mse = 0.0;
    double bias = 0.0;
    /// Sample standard deviation with the r - 1 divisor (0 for r = 1).
    double sd = 0.0;
    std::size_t replications_used = 0;
    std::size_t failures = 0;
};

SimSummary summarize(std::string label, std::size_t component, double truth,
                     std::span<const double> estimates, std::size_t failures);

struct EstimatorRuns {
    std::string label;
    /// One slot per replication; empty when the fit failed.
    std::vector<std::optional<std::vector<double>>> estimates;
    std::vector<std::string> errors;

    std::size_t failures() const;
};

struct ExperimentReport {
    ExperimentConfig config;
    std::vector<EstimatorRuns> runs;
    std::vector<SimSummary> summaries;

    const EstimatorRuns& estimator(std::string_view label) const;
    const SimSummary& summary(std::string_view label, std::size_t component = 0) const;
};

/// Fits the profile estimator (fit_observed for exp3) and the rank
/// surrogate in every replication and summarises each component.
ExperimentReport run_experiment(const ExperimentConfig& config);

struct CurvePoint {
    double x = 0.0;
    double median = 0.0;
    std::size_t count = 0;
};

/// Median over replications of the standardized base-measure estimate of
/// the profile fit. Grid points where some replication has no kernel mass
/// are omitted.
std::vector<CurvePoint> f_curve_median(const ExperimentConfig& config, std::span<const double> y_grid);

/// Median over replications of the rank surrogate at each scalar beta.
std::vector<CurvePoint> median_rank_curve(const ExperimentConfig& config,
                                          std::span<const double> beta_grid);

double median(std::vector<double> values);

/// Runs task(i) for i in [0, count) on `threads` workers.
void parallel_for(std::size_t count, std::size_t threads, const std::function<void(std::size_t)>& task);

}  // namespace spef

#endif
