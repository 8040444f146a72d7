#include "spef/lfc.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>
#include <string>

#include "spef/errors.hpp"

namespace spef {

namespace {

constexpr double kNegInf = -std::numeric_limits<double>::infinity();
const double kLogKernelFloor = std::log(kKernelSumFloor);

}  // namespace

// ---------------------------------------------------------------------------
// IndexIntegral

IndexIntegral::IndexIntegral(std::span<const double> index, std::span<const double> ys,
                             const KernelSpec& kernel, Interval range, std::size_t intervals)
    : index_(index.begin(), index.end()), ys_(ys.begin(), ys.end()), kernel_(kernel), range_(range) {
    if (index.size() != ys.size() || index.empty()) {
        throw std::invalid_argument("index and responses must be equally sized and nonempty");
    }
    if (intervals == 0) {
        throw std::invalid_argument("index grid needs at least one interval");
    }
    range_.lo = std::min(range_.lo, 0.0);
    range_.hi = std::max(range_.hi, 0.0);
    if (range_.hi == range_.lo) {
        return;
    }
    step_ = range_.width() / static_cast<double>(intervals);
    first_node_ = static_cast<long>(std::floor(range_.lo / step_));
    const long last_node = static_cast<long>(std::ceil(range_.hi / step_));
    const std::size_t count = static_cast<std::size_t>(last_node - first_node_ + 1);

    node_regression_.resize(count);
    for (std::size_t i = 0; i < count; ++i) {
        const double t = static_cast<double>(first_node_ + static_cast<long>(i)) * step_;
        node_regression_[i] = nw_regress(index_, ys_, kernel_, t);
    }

    // Accumulate outward from the origin so that C(0) = 0 exactly.
    node_cumulative_.assign(count, 0.0);
    const std::size_t origin = static_cast<std::size_t>(-first_node_);
    for (std::size_t i = origin + 1; i < count; ++i) {
        node_cumulative_[i] =
            node_cumulative_[i - 1] + 0.5 * step_ * (node_regression_[i - 1] + node_regression_[i]);
    }
    for (std::size_t i = origin; i-- > 0;) {
        node_cumulative_[i] =
            node_cumulative_[i + 1] - 0.5 * step_ * (node_regression_[i] + node_regression_[i + 1]);
    }
}

double IndexIntegral::regression(double t) const { return nw_regress(index_, ys_, kernel_, t); }

double IndexIntegral::operator()(double theta) const {
    if (theta == 0.0) {
        return 0.0;
    }
    if (step_ == 0.0 || theta < range_.lo - 1e-12 * std::abs(range_.lo) ||
        theta > range_.hi + 1e-12 * std::abs(range_.hi)) {
        throw std::invalid_argument("theta outside the index integration range");
    }
    // Nearest node between 0 and theta.
    long node = theta > 0.0 ? static_cast<long>(std::floor(theta / step_))
                            : static_cast<long>(std::ceil(theta / step_));
    node = std::clamp(node, first_node_,
                      first_node_ + static_cast<long>(node_regression_.size()) - 1);
    const std::size_t slot = static_cast<std::size_t>(node - first_node_);
    const double node_t = static_cast<double>(node) * step_;
    const double partial = theta - node_t;
    if (partial == 0.0) {
        return node_cumulative_[slot];
    }
    return node_cumulative_[slot] + 0.5 * partial * (node_regression_[slot] + regression(theta));
}

double cum_index_integral(std::span<const double> beta, const Dataset& data,
                          const KernelSpec& index_kernel, double theta, std::size_t intervals) {
    const auto index = data.index(beta);
    const auto ys = data.responses();
    const auto [lo, hi] = std::minmax_element(index.begin(), index.end());
    const Interval range{std::min({*lo, theta, 0.0}), std::max({*hi, theta, 0.0})};
    return IndexIntegral(index, ys, index_kernel, range, intervals)(theta);
}

// ---------------------------------------------------------------------------
// ResponseSmoother

ResponseSmoother::ResponseSmoother(std::vector<double> ys, const KernelSpec& kernel, LooWeights loo)
    : ys_(std::move(ys)), kernel_(kernel), loo_(loo) {
    const std::size_t n = ys_.size();
    if (n < 3) {
        throw std::invalid_argument("response smoother needs at least three observations");
    }
    loo_log_weights_.assign(n * n, kNegInf);
    loo_density_.assign(n, 0.0);
    std::vector<double> log_k(n);
    for (std::size_t k = 0; k < n; ++k) {
        for (std::size_t i = 0; i < n; ++i) {
            log_k[i] = kernel_.log_value(ys_[i] - ys_[k]);
        }
        const double self = log_k[k];
        log_k[k] = kNegInf;
        const double log_others = log_sum_exp(log_k);
        if (log_others < kLogKernelFloor) {
            throw NumericalError(ErrorKind::isolated_y,
                                 "isolated y at observation " + std::to_string(k));
        }
        loo_density_[k] = std::exp(log_others) / (static_cast<double>(n - 1) * kernel_.bandwidth());

        double log_den = log_others;
        if (loo_ == LooWeights::full_sample) {
            const double pair[2] = {log_others, self};
            log_den = log_sum_exp(pair);
        }
        double* row = &loo_log_weights_[k * n];
        for (std::size_t i = 0; i < n; ++i) {
            row[i] = i == k ? kNegInf : log_k[i] - log_den;
        }
    }
}

std::vector<double> ResponseSmoother::log_weights(double y) const {
    std::vector<double> out(ys_.size());
    for (std::size_t i = 0; i < ys_.size(); ++i) {
        out[i] = kernel_.log_value(ys_[i] - y);
    }
    const double log_den = log_sum_exp(out);
    if (log_den < kLogKernelFloor) {
        throw NumericalError(ErrorKind::isolated_y, "isolated y at " + std::to_string(y));
    }
    for (double& v : out) {
        v -= log_den;
    }
    return out;
}

std::span<const double> ResponseSmoother::log_loo_weights(std::size_t k) const {
    if (k >= ys_.size()) {
        throw std::out_of_range("leave-one-out index out of range");
    }
    return {loo_log_weights_.data() + k * ys_.size(), ys_.size()};
}

double ResponseSmoother::loo_density(std::size_t k) const {
    if (k >= ys_.size()) {
        throw std::out_of_range("leave-one-out index out of range");
    }
    return loo_density_[k];
}

std::vector<double> ResponseSmoother::log_weight_table(std::span<const double> points) const {
    std::vector<double> table;
    table.reserve(points.size() * ys_.size());
    for (double y : points) {
        const auto row = log_weights(y);
        table.insert(table.end(), row.begin(), row.end());
    }
    return table;
}

// ---------------------------------------------------------------------------
// LfcEvaluator

LfcEvaluator::LfcEvaluator(std::vector<double> index, std::vector<double> log_denominators,
                           std::shared_ptr<const ResponseSmoother> smoother)
    : index_(std::move(index)),
      log_denominators_(std::move(log_denominators)),
      smoother_(std::move(smoother)) {
    if (!smoother_ || index_.size() != smoother_->size() ||
        log_denominators_.size() != index_.size()) {
        throw std::invalid_argument("evaluator parts differ in size");
    }
    for (double b : log_denominators_) {
        if (!std::isfinite(b)) {
            throw NumericalError(ErrorKind::lfc_overflow, "non-finite cached denominator");
        }
    }
}

LfcEvaluator LfcEvaluator::from_parts(std::vector<double> index, std::vector<double> log_denominators,
                                      std::shared_ptr<const ResponseSmoother> smoother) {
    return LfcEvaluator(std::move(index), std::move(log_denominators), std::move(smoother));
}

LfcEvaluator::LfcEvaluator(std::span<const double> beta, const Dataset& data,
                           const KernelSpec& index_kernel, const KernelSpec& y_kernel,
                           LfcOptions options)
    : LfcEvaluator(beta, data, index_kernel,
                   std::make_shared<const ResponseSmoother>(data.responses(), y_kernel,
                                                            options.loo_weights),
                   options) {}

LfcEvaluator::LfcEvaluator(std::span<const double> beta, const Dataset& data,
                           const KernelSpec& index_kernel,
                           std::shared_ptr<const ResponseSmoother> smoother, LfcOptions options)
    : index_(data.index(beta)), smoother_(std::move(smoother)) {
    if (!smoother_ || smoother_->size() != data.size()) {
        throw std::invalid_argument("response smoother does not match the dataset");
    }
    const auto ys = data.responses();
    const auto [lo, hi] = std::minmax_element(index_.begin(), index_.end());
    const IndexIntegral integral(index_, ys, index_kernel, {*lo, *hi}, options.index_grid_intervals);
    log_denominators_.reserve(index_.size());
    for (double theta : index_) {
        log_denominators_.push_back(integral(theta));
    }
}

double LfcEvaluator::log_value_with(double y, std::span<const double> log_w) const {
    const std::size_t n = index_.size();
    double shift = kNegInf;
    for (std::size_t i = 0; i < n; ++i) {
        shift = std::max(shift, index_[i] * y - log_denominators_[i] + log_w[i]);
    }
    double acc = 0.0;
    if (std::isfinite(shift)) {
        for (std::size_t i = 0; i < n; ++i) {
            acc += std::exp(index_[i] * y - log_denominators_[i] + log_w[i] - shift);
        }
    }
    const double out = -(shift + std::log(acc));
    if (!std::isfinite(out)) {
        throw NumericalError(ErrorKind::lfc_overflow, "lfc overflow at y = " + std::to_string(y));
    }
    return out;
}

double LfcEvaluator::log_value(double y) const {
    return log_value_with(y, smoother_->log_weights(y));
}

double LfcEvaluator::operator()(double y) const { return std::exp(log_value(y)); }

double LfcEvaluator::log_at_sample(std::size_t k) const {
    return log_value_with(smoother_->responses()[k], smoother_->log_loo_weights(k));
}

double LfcEvaluator::at_sample(std::size_t k) const { return std::exp(log_at_sample(k)); }

std::vector<double> LfcEvaluator::log_values(std::span<const double> points,
                                             std::span<const double> log_weight_table) const {
    const std::size_t n = index_.size();
    if (log_weight_table.size() != points.size() * n) {
        throw std::invalid_argument("weight table does not match the evaluation points");
    }
    std::vector<double> out(points.size());
    for (std::size_t g = 0; g < points.size(); ++g) {
        out[g] = log_value_with(points[g], log_weight_table.subspan(g * n, n));
    }
    return out;
}

double LfcEvaluator::normalizer() const {
    double acc = 0.0;
    for (std::size_t k = 0; k < index_.size(); ++k) {
        const double density = smoother_->loo_density(k);
        if (!(density > kKernelSumFloor)) {
            throw NumericalError(ErrorKind::density_floor, "density floor in standardization");
        }
        acc += at_sample(k) / density;
    }
    return acc / static_cast<double>(index_.size());
}

StandardizedLfc LfcEvaluator::standardize() const { return {*this, normalizer()}; }

}  // namespace spef
