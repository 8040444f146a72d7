#ifndef SPEF_PROFILE_HPP
#define SPEF_PROFILE_HPP

#include <cstddef>
#include <memory>
#include <optional>
#include <span>
#include <string_view>
#include <vector>

#include "spef/core_model.hpp"
#include "spef/kernel.hpp"
#include "spef/lfc.hpp"
#include "spef/optimize.hpp"
#include "spef/quadrature.hpp"

namespace spef {

/// How b(beta^T X_i, f*) enters the profile log-likelihood.
enum class PartitionPath {
    quadrature,      // log int exp(theta*y) f*(y) dy on the response grid
    index_integral,  // int_0^theta m(t) dt, the cumulative regression identity
};

/// Which base-measure estimate plays f* inside the likelihood.
enum class BaseEstimate {
    unstandardized,  // f_tilde
    standardized,    // f_hat = f_tilde / normalizer
};

std::string_view to_string(PartitionPath path);
std::string_view to_string(BaseEstimate estimate);
std::string_view to_string(LooWeights weights);
PartitionPath parse_partition_path(std::string_view name);
BaseEstimate parse_base_estimate(std::string_view name);
LooWeights parse_loo_weights(std::string_view name);

struct ProfileOptions {
    PartitionPath partition = PartitionPath::quadrature;
    BaseEstimate f_star = BaseEstimate::unstandardized;
    LfcOptions lfc;
    KernelFamily kernel = KernelFamily::gaussian;
    /// Fixed bandwidths; unset means bandwidth_rule on Y and on beta^T X.
    std::optional<double> y_bandwidth;
    std::optional<double> index_bandwidth;
    /// Multipliers applied to the rule bandwidths (ignored for fixed ones).
    double y_bandwidth_scale = 1.0;
    double index_bandwidth_scale = 1.0;
    std::size_t quadrature_points = kDefaultQuadraturePoints;
};

/// The estimated log-likelihood
///   l(beta) = sum_i [ beta^T X_i Y_i - b(beta^T X_i, f*) + log f*(Y_i) ]
/// with f*(Y_i) evaluated leave-one-out. Everything that does not depend on
/// beta (response weights, support grid) is built once at construction.
class ProfileObjective {
public:
    explicit ProfileObjective(Dataset data, ProfileOptions options = {});

    /// -inf when the least favorable curve overflows at this beta.
    double operator()(std::span<const double> beta) const;

    /// The least favorable curve at beta, sharing the cached response weights.
    LfcEvaluator lfc(std::span<const double> beta) const;

    /// B_i = int_0^{beta^T X_i} m(t) dt for every observation.
    std::vector<double> log_denominators(std::span<const double> beta) const;

    /// log f_tilde_beta at every node of the response grid.
    std::vector<double> log_lfc_on_grid(const LfcEvaluator& evaluator) const;

    const Dataset& data() const { return data_; }
    const ProfileOptions& options() const { return options_; }
    const KernelSpec& y_kernel() const { return y_kernel_; }
    const TrapezoidGrid& grid() const { return grid_; }
    const Interval& support() const { return grid_.support(); }
    std::shared_ptr<const ResponseSmoother> smoother() const { return smoother_; }

private:
    Dataset data_;
    ProfileOptions options_;
    std::vector<double> ys_;
    KernelSpec y_kernel_;
    std::shared_ptr<const ResponseSmoother> smoother_;
    TrapezoidGrid grid_;
    std::vector<double> grid_log_weights_;
};

double profile_loglik(const ProfileObjective& objective, std::span<const double> beta);

struct FitResult {
    std::vector<double> beta_hat;
    double loglik_at_max = 0.0;
    std::vector<TracePoint> trace;
    bool converged = false;
    /// Final base-measure estimates; empty for estimators that eliminate f.
    std::optional<StandardizedLfc> base;
    Interval support;

    double f_tilde(double y) const;
    double f_hat(double y) const;
};

FitResult fit(const ProfileObjective& objective, const SearchConfig& search);

}  // namespace spef

#endif
