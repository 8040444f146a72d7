#include "spef/profile.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <stdexcept>
#include <string>

#include "spef/errors.hpp"

namespace spef {

namespace {

constexpr double kNegInf = -std::numeric_limits<double>::infinity();

KernelSpec make_y_kernel(const Dataset& data, const ProfileOptions& options) {
    const auto ys = data.responses();
    return {options.kernel, options.y_bandwidth ? *options.y_bandwidth
                                            : options.y_bandwidth_scale * bandwidth_rule(ys)};
}

Interval response_support(const Dataset& data, double bandwidth) {
    const auto ys = data.responses();
    const auto [lo, hi] = std::minmax_element(ys.begin(), ys.end());
    return {*lo - 3.0 * bandwidth, *hi + 3.0 * bandwidth};
}

}  // namespace

std::string_view to_string(PartitionPath path) {
    return path == PartitionPath::quadrature ? "quadrature" : "index_integral";
}

std::string_view to_string(BaseEstimate estimate) {
    return estimate == BaseEstimate::unstandardized ? "unstandardized" : "standardized";
}

std::string_view to_string(LooWeights weights) {
    return weights == LooWeights::renormalized ? "renormalized" : "full_sample";
}

PartitionPath parse_partition_path(std::string_view name) {
    if (name == "quadrature") return PartitionPath::quadrature;
    if (name == "index_integral") return PartitionPath::index_integral;
    throw std::invalid_argument("unknown partition path '" + std::string(name) + "'");
}

BaseEstimate parse_base_estimate(std::string_view name) {
    if (name == "unstandardized") return BaseEstimate::unstandardized;
    if (name == "standardized") return BaseEstimate::standardized;
    throw std::invalid_argument("unknown base estimate '" + std::string(name) + "'");
}

LooWeights parse_loo_weights(std::string_view name) {
    if (name == "renormalized") return LooWeights::renormalized;
    if (name == "full_sample") return LooWeights::full_sample;
    throw std::invalid_argument("unknown leave-one-out weighting '" + std::string(name) + "'");
}

ProfileObjective::ProfileObjective(Dataset data, ProfileOptions options)
    : data_(std::move(data)),
      options_(options),
      ys_(data_.responses()),
      y_kernel_(make_y_kernel(data_, options_)),
      smoother_(std::make_shared<const ResponseSmoother>(ys_, y_kernel_, options_.lfc.loo_weights)),
      grid_(response_support(data_, y_kernel_.bandwidth()), options_.quadrature_points) {
    if (options_.partition == PartitionPath::quadrature) {
        grid_log_weights_ = smoother_->log_weight_table(grid_.nodes());
    }
}

std::vector<double> ProfileObjective::log_denominators(std::span<const double> beta) const {
    if (beta.size() != data_.dim()) {
        throw std::invalid_argument("beta has the wrong dimension");
    }
    const auto index = data_.index(beta);
    const auto [lo, hi] = std::minmax_element(index.begin(), index.end());
    std::vector<double> out(index.size());
    if (*lo == *hi) {
        // A constant index makes the regression the sample mean everywhere.
        const double mean = std::accumulate(ys_.begin(), ys_.end(), 0.0) / static_cast<double>(ys_.size());
        for (std::size_t i = 0; i < index.size(); ++i) out[i] = index[i] * mean;
        return out;
    }
    const double h = options_.index_bandwidth ? *options_.index_bandwidth
                                              : options_.index_bandwidth_scale * bandwidth_rule(index);
    const IndexIntegral integral(index, ys_, KernelSpec(options_.kernel, h), {*lo, *hi},
                                 options_.lfc.index_grid_intervals);
    for (std::size_t i = 0; i < index.size(); ++i) out[i] = integral(index[i]);
    return out;
}

LfcEvaluator ProfileObjective::lfc(std::span<const double> beta) const {
    return LfcEvaluator::from_parts(data_.index(beta), log_denominators(beta), smoother_);
}

std::vector<double> ProfileObjective::log_lfc_on_grid(const LfcEvaluator& evaluator) const {
    if (grid_log_weights_.empty()) {
        return evaluator.log_values(grid_.nodes(), smoother_->log_weight_table(grid_.nodes()));
    }
    return evaluator.log_values(grid_.nodes(), grid_log_weights_);
}

double ProfileObjective::operator()(std::span<const double> beta) const {
    try {
        const LfcEvaluator f = lfc(beta);
        const std::size_t n = f.size();
        const auto index = f.index();

        double log_norm = 0.0;
        if (options_.f_star == BaseEstimate::standardized) {
            log_norm = std::log(f.normalizer());
        }

        double total = 0.0;
        for (std::size_t k = 0; k < n; ++k) {
            total += index[k] * ys_[k] + f.log_at_sample(k) - log_norm;
        }

        if (options_.partition == PartitionPath::index_integral) {
            for (double b : f.log_denominators()) total -= b;
        } else {
            const TiltedIntegral partition(grid_, log_lfc_on_grid(f));
            for (std::size_t i = 0; i < n; ++i) {
                total -= partition(index[i]) - log_norm;
            }
        }
        return std::isfinite(total) ? total : kNegInf;
    } catch (const NumericalError& e) {
        if (e.kind() == ErrorKind::lfc_overflow) return kNegInf;
        throw;
    }
}

double profile_loglik(const ProfileObjective& objective, std::span<const double> beta) {
    return objective(beta);
}

double FitResult::f_tilde(double y) const {
    if (!base) {
        throw std::logic_error("fit carries no base-measure estimate");
    }
    return base->tilde(y);
}

double FitResult::f_hat(double y) const {
    if (!base) {
        throw std::logic_error("fit carries no base-measure estimate");
    }
    return (*base)(y);
}

FitResult fit(const ProfileObjective& objective, const SearchConfig& search) {
    search.box.validate();
    if (search.box.dim() != objective.data().dim()) {
        throw std::invalid_argument("search box dimension does not match the covariates");
    }
    auto opt = maximize([&](std::span<const double> beta) { return objective(beta); }, search);
    FitResult out;
    out.beta_hat = std::move(opt.argmax);
    out.loglik_at_max = opt.value;
    out.trace = std::move(opt.trace);
    out.converged = opt.converged;
    out.base = objective.lfc(out.beta_hat).standardize();
    out.support = objective.support();
    return out;
}

}  // namespace spef
