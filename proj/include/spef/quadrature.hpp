#ifndef SPEF_QUADRATURE_HPP
#define SPEF_QUADRATURE_HPP

#include <cstddef>
#include <span>
#include <vector>

namespace spef {

struct Interval {
    double lo = 0.0;
    double hi = 0.0;

    double width() const { return hi - lo; }
    bool contains(double v) const { return v >= lo && v <= hi; }
};

inline constexpr std::size_t kDefaultQuadraturePoints = 2001;

/// Uniform composite-trapezoid rule over a closed interval.
class TrapezoidGrid {
public:
    explicit TrapezoidGrid(Interval support, std::size_t points = kDefaultQuadraturePoints);

    const Interval& support() const { return support_; }
    std::span<const double> nodes() const { return nodes_; }
    std::size_t size() const { return nodes_.size(); }
    double step() const { return step_; }

    /// Integral of tabulated values (one per node).
    double integrate(std::span<const double> values) const;

    /// log of the integral of exp(log_values), computed with a max shift.
    /// Returns -inf when every entry is -inf.
    double log_integrate_exp(std::span<const double> log_values) const;

private:
    Interval support_;
    double step_;
    std::vector<double> nodes_;
};

/// log int exp(theta * y + v(y)) dy for many theta against one tabulated v.
/// The grid is cut into blocks; inside a block exp(theta * y) advances by a
/// constant ratio, so each theta costs one exponential per block instead of
/// one per node.
class TiltedIntegral {
public:
    TiltedIntegral(const TrapezoidGrid& grid, std::span<const double> log_values);

    double operator()(double theta) const;

private:
    static constexpr std::size_t kBlock = 64;

    const TrapezoidGrid* grid_;
    std::vector<double> log_values_;
    std::vector<double> scaled_;       // weight * exp(v - block max)
    std::vector<double> block_max_;
    std::vector<std::size_t> block_start_;
};

/// Stable log(sum(exp(v))) over a span; -inf for an empty or all -inf input.
double log_sum_exp(std::span<const double> values);

}  // namespace spef

#endif
