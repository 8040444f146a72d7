#ifndef SPEF_CORE_MODEL_HPP
#define SPEF_CORE_MODEL_HPP

#include <cstddef>
#include <functional>
#include <span>
#include <vector>

#include "spef/quadrature.hpp"

namespace spef {

struct Observation {
    std::vector<double> x;
    double y = 0.0;
    bool observed = true;
};

/// An ordered sample of (x, y, observed) triples sharing one covariate
/// dimension. Holds at least two observations.
class Dataset {
public:
    explicit Dataset(std::vector<Observation> observations);

    std::size_t size() const { return observations_.size(); }
    std::size_t dim() const { return dim_; }

    const Observation& operator[](std::size_t i) const { return observations_[i]; }
    std::span<const Observation> observations() const { return observations_; }
    auto begin() const { return observations_.begin(); }
    auto end() const { return observations_.end(); }

    std::vector<double> responses() const;

    /// beta^T x_i for every observation.
    std::vector<double> index(std::span<const double> beta) const;

    std::size_t observed_count() const;

    /// The observations with observed == true, in original order.
    /// Throws NumericalError(all_data_missing) when none are observed.
    Dataset observed_subset() const;

private:
    std::vector<Observation> observations_;
    std::size_t dim_;
};

double dot(std::span<const double> a, std::span<const double> b);

/// A base measure f >= 0 restricted to the interval quadrature runs over.
struct BaseMeasure {
    std::function<double(double)> density;
    Interval support;

    static BaseMeasure standard_normal(Interval support = {-8.0, 8.0});
    static BaseMeasure uniform(double lo, double hi);
};

/// b(theta, f) = log int exp(theta*y) f(y) dy on a fixed trapezoid grid,
/// with log f tabulated once so repeated evaluations are cheap.
class LogPartition {
public:
    explicit LogPartition(const BaseMeasure& f, std::size_t points = kDefaultQuadraturePoints);

    double operator()(double theta) const;

    /// Central difference with step 1e-5 * max(1, |theta|).
    double derivative(double theta) const;

    /// Quadrature of y * exp(theta*y - b(theta)) f(y): the conditional mean.
    double mean(double theta) const;

private:
    TrapezoidGrid grid_;
    std::vector<double> log_f_;
};

double log_partition(double theta, const BaseMeasure& f);

/// beta^T x * y - b(beta^T x, f) + log f(y).
double log_density(std::span<const double> beta, const BaseMeasure& f, const Observation& obs);

/// Sample mean over draws of the beta-score x * (y - b'(beta^T x, f)).
std::vector<double> score_mean(std::span<const double> beta, const BaseMeasure& f,
                               const Dataset& draws);

/// Functional derivative of the log-likelihood with respect to f at y:
/// -exp(theta*y) / int exp(theta*t) f(t) dt + 1/f(y), with theta = beta^T x.
double functional_derivative(std::span<const double> beta, const BaseMeasure& f,
                             std::span<const double> x, double y);

}  // namespace spef

#endif
