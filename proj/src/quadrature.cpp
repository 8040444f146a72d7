#include "spef/quadrature.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

namespace spef {

TrapezoidGrid::TrapezoidGrid(Interval support, std::size_t points) : support_(support) {
    if (!(support.lo < support.hi) || !std::isfinite(support.lo) || !std::isfinite(support.hi)) {
        throw std::invalid_argument("degenerate quadrature support");
    }
    if (points < 2) {
        throw std::invalid_argument("quadrature grid needs at least two points");
    }
    step_ = support.width() / static_cast<double>(points - 1);
    nodes_.resize(points);
    for (std::size_t i = 0; i < points; ++i) {
        nodes_[i] = support.lo + step_ * static_cast<double>(i);
    }
    nodes_.back() = support.hi;
}

double TrapezoidGrid::integrate(std::span<const double> values) const {
    if (values.size() != nodes_.size()) {
        throw std::invalid_argument("integrand size does not match quadrature grid");
    }
    double interior = 0.0;
    for (std::size_t i = 1; i + 1 < values.size(); ++i) {
        interior += values[i];
    }
    return step_ * (interior + 0.5 * (values.front() + values.back()));
}

double TrapezoidGrid::log_integrate_exp(std::span<const double> log_values) const {
    if (log_values.size() != nodes_.size()) {
        throw std::invalid_argument("integrand size does not match quadrature grid");
    }
    const double shift = *std::max_element(log_values.begin(), log_values.end());
    if (shift == -std::numeric_limits<double>::infinity()) {
        return shift;
    }
    if (!std::isfinite(shift)) {
        return shift;
    }
    double interior = 0.0;
    for (std::size_t i = 1; i + 1 < log_values.size(); ++i) {
        interior += std::exp(log_values[i] - shift);
    }
    const double ends = std::exp(log_values.front() - shift) + std::exp(log_values.back() - shift);
    return shift + std::log(step_ * (interior + 0.5 * ends));
}

TiltedIntegral::TiltedIntegral(const TrapezoidGrid& grid, std::span<const double> log_values)
    : grid_(&grid), log_values_(log_values.begin(), log_values.end()) {
    const std::size_t size = grid.size();
    if (log_values.size() != size) {
        throw std::invalid_argument("integrand size does not match quadrature grid");
    }
    scaled_.assign(size, 0.0);
    for (std::size_t start = 0; start < size; start += kBlock) {
        const std::size_t end = std::min(size, start + kBlock);
        const double top = *std::max_element(log_values_.begin() + static_cast<std::ptrdiff_t>(start),
                                             log_values_.begin() + static_cast<std::ptrdiff_t>(end));
        block_start_.push_back(start);
        block_max_.push_back(top);
        if (!std::isfinite(top)) continue;
        for (std::size_t g = start; g < end; ++g) {
            const double weight = g == 0 || g + 1 == size ? 0.5 * grid.step() : grid.step();
            scaled_[g] = weight * std::exp(log_values_[g] - top);
        }
    }
}

double TiltedIntegral::operator()(double theta) const {
    const auto nodes = grid_->nodes();
    const double ratio_log = theta * grid_->step();
    if (std::abs(ratio_log) * static_cast<double>(kBlock) > 600.0) {
        std::vector<double> direct(nodes.size());
        for (std::size_t g = 0; g < nodes.size(); ++g) direct[g] = theta * nodes[g] + log_values_[g];
        return grid_->log_integrate_exp(direct);
    }
    const double ratio = std::exp(ratio_log);
    std::vector<double> block_logs;
    block_logs.reserve(block_start_.size());
    for (std::size_t b = 0; b < block_start_.size(); ++b) {
        if (!std::isfinite(block_max_[b])) continue;
        const std::size_t start = block_start_[b];
        const std::size_t end = std::min(nodes.size(), start + kBlock);
        double acc = scaled_[end - 1];
        for (std::size_t g = end - 1; g-- > start;) acc = acc * ratio + scaled_[g];
        block_logs.push_back(theta * nodes[start] + block_max_[b] + std::log(acc));
    }
    return log_sum_exp(block_logs);
}

double log_sum_exp(std::span<const double> values) {
    constexpr double neg_inf = -std::numeric_limits<double>::infinity();
    if (values.empty()) {
        return neg_inf;
    }
    const double shift = *std::max_element(values.begin(), values.end());
    if (!std::isfinite(shift)) {
        return shift;
    }
    double acc = 0.0;
    for (double v : values) {
        acc += std::exp(v - shift);
    }
    return shift + std::log(acc);
}

}  // namespace spef
