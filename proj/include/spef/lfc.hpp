#ifndef SPEF_LFC_HPP
#define SPEF_LFC_HPP

#include <cstddef>
#include <memory>
#include <optional>
#include <span>
#include <vector>

#include "spef/core_model.hpp"
#include "spef/kernel.hpp"
#include "spef/quadrature.hpp"

namespace spef {

/// How the kernel weights W_i(Y_k) are normalised when observation k is
/// left out of the outer sum.
enum class LooWeights {
    renormalized,  // divide by the sum over i != k, so the weights sum to 1
    full_sample,   // keep the full-sample denominator sum over all i
};

struct LfcOptions {
    LooWeights loo_weights = LooWeights::renormalized;
    /// Trapezoid intervals across the span of the index values.
    std::size_t index_grid_intervals = 400;
};

/// Cumulative integral t -> int_0^t m(s) ds of the Nadaraya-Watson
/// regression m of y on the index, on the lattice {k * step}. The origin is
/// a lattice node; values between nodes add one exact partial trapezoid.
class IndexIntegral {
public:
    IndexIntegral(std::span<const double> index, std::span<const double> ys, const KernelSpec& kernel,
                  Interval range, std::size_t intervals = 400);

    /// Oriented integral from 0 to theta; theta must lie inside the range.
    double operator()(double theta) const;

    double regression(double t) const;
    double step() const { return step_; }

private:
    std::vector<double> index_;
    std::vector<double> ys_;
    KernelSpec kernel_;
    Interval range_;
    double step_ = 0.0;
    long first_node_ = 0;
    std::vector<double> node_regression_;
    std::vector<double> node_cumulative_;
};

/// int_0^theta m(t) dt for the regression of Y on beta^T X.
double cum_index_integral(std::span<const double> beta, const Dataset& data,
                          const KernelSpec& index_kernel, double theta, std::size_t intervals = 400);

/// Response-side kernel weights W_i(y) = K((Y_i - y)/h) / sum_j K((Y_j - y)/h),
/// with the leave-one-out rows at the sample points precomputed.
class ResponseSmoother {
public:
    ResponseSmoother(std::vector<double> ys, const KernelSpec& kernel,
                     LooWeights loo = LooWeights::renormalized);

    std::size_t size() const { return ys_.size(); }
    std::span<const double> responses() const { return ys_; }
    const KernelSpec& kernel() const { return kernel_; }
    LooWeights loo_mode() const { return loo_; }

    /// log W_i(y) for all i. Throws NumericalError(isolated_y) when the
    /// kernel sum falls below kKernelSumFloor.
    std::vector<double> log_weights(double y) const;

    /// log W_i(Y_k) with i = k set to -inf.
    std::span<const double> log_loo_weights(std::size_t k) const;

    /// Leave-one-out density estimate (n-1)^-1 sum_{j != k} K((Y_j - Y_k)/h)/h.
    double loo_density(std::size_t k) const;

    /// Row-major table of log W_i(y) for each evaluation point.
    std::vector<double> log_weight_table(std::span<const double> points) const;

private:
    std::vector<double> ys_;
    KernelSpec kernel_;
    LooWeights loo_;
    std::vector<double> loo_log_weights_;  // n x n
    std::vector<double> loo_density_;
};

class LfcEvaluator;

struct StandardizedLfc;

/// Explicit least favorable curve at a fixed beta:
///   f_tilde(y) = [ sum_i exp(theta_i * y - B_i) W_i(y) ]^-1,
/// where theta_i = beta^T X_i and B_i = int_0^theta_i m(t) dt. The B_i are
/// computed once at construction; the object is immutable afterwards.
class LfcEvaluator {
public:
    LfcEvaluator(std::span<const double> beta, const Dataset& data, const KernelSpec& index_kernel,
                 const KernelSpec& y_kernel, LfcOptions options = {});

    LfcEvaluator(std::span<const double> beta, const Dataset& data, const KernelSpec& index_kernel,
                 std::shared_ptr<const ResponseSmoother> smoother, LfcOptions options = {});

    /// Builds an evaluator from precomputed index values and log-denominators.
    static LfcEvaluator from_parts(std::vector<double> index, std::vector<double> log_denominators,
                                   std::shared_ptr<const ResponseSmoother> smoother);

    double operator()(double y) const;
    double log_value(double y) const;

    /// Leave-one-out value at the sample response Y_k.
    double at_sample(std::size_t k) const;
    double log_at_sample(std::size_t k) const;

    /// log f_tilde at each point, given ResponseSmoother::log_weight_table(points).
    std::vector<double> log_values(std::span<const double> points,
                                   std::span<const double> log_weight_table) const;

    std::size_t size() const { return index_.size(); }
    std::span<const double> index() const { return index_; }
    std::span<const double> log_denominators() const { return log_denominators_; }
    const ResponseSmoother& smoother() const { return *smoother_; }
    std::shared_ptr<const ResponseSmoother> shared_smoother() const { return smoother_; }

    /// Monte Carlo estimate (1/n) sum_i f_tilde(Y_i) / p_hat(Y_i) of the
    /// integral of f_tilde.
    double normalizer() const;

    StandardizedLfc standardize() const;

private:
    LfcEvaluator(std::vector<double> index, std::vector<double> log_denominators,
                 std::shared_ptr<const ResponseSmoother> smoother);

    double log_value_with(double y, std::span<const double> log_weights) const;

    std::vector<double> index_;
    std::vector<double> log_denominators_;
    std::shared_ptr<const ResponseSmoother> smoother_;
};

struct StandardizedLfc {
    LfcEvaluator tilde;
    double normalizer;

    double operator()(double y) const { return tilde(y) / normalizer; }
    double at_sample(std::size_t k) const { return tilde.at_sample(k) / normalizer; }
};

inline StandardizedLfc standardize(const LfcEvaluator& evaluator) { return evaluator.standardize(); }

inline double lfc_at(const LfcEvaluator& evaluator, double y,
                     std::optional<std::size_t> exclude = std::nullopt) {
    return exclude ? evaluator.at_sample(*exclude) : evaluator(y);
}

}  // namespace spef

#endif
