#include "spef/core_model.hpp"

#include <cmath>
#include <limits>
#include <numbers>
#include <stdexcept>
#include <string>

#include "spef/errors.hpp"

namespace spef {

namespace {

double safe_log(double v) {
    return v > 0.0 ? std::log(v) : -std::numeric_limits<double>::infinity();
}

}  // namespace

Dataset::Dataset(std::vector<Observation> observations) : observations_(std::move(observations)) {
    if (observations_.size() < 2) {
        throw std::invalid_argument("dataset needs at least two observations");
    }
    dim_ = observations_.front().x.size();
    if (dim_ == 0) {
        throw std::invalid_argument("covariate dimension must be at least 1");
    }
    for (std::size_t i = 0; i < observations_.size(); ++i) {
        const auto& obs = observations_[i];
        if (obs.x.size() != dim_) {
            throw std::invalid_argument("observation " + std::to_string(i) +
                                        " has covariate dimension " + std::to_string(obs.x.size()) +
                                        ", expected " + std::to_string(dim_));
        }
        if (!std::isfinite(obs.y)) {
            throw std::invalid_argument("observation " + std::to_string(i) + " has non-finite y");
        }
        for (double v : obs.x) {
            if (!std::isfinite(v)) {
                throw std::invalid_argument("observation " + std::to_string(i) +
                                            " has a non-finite covariate");
            }
        }
    }
}

std::vector<double> Dataset::responses() const {
    std::vector<double> ys;
    ys.reserve(observations_.size());
    for (const auto& obs : observations_) {
        ys.push_back(obs.y);
    }
    return ys;
}

std::vector<double> Dataset::index(std::span<const double> beta) const {
    if (beta.size() != dim_) {
        throw std::invalid_argument("beta has length " + std::to_string(beta.size()) +
                                    ", expected " + std::to_string(dim_));
    }
    std::vector<double> out;
    out.reserve(observations_.size());
    for (const auto& obs : observations_) {
        out.push_back(dot(beta, obs.x));
    }
    return out;
}

std::size_t Dataset::observed_count() const {
    std::size_t count = 0;
    for (const auto& obs : observations_) {
        count += obs.observed ? 1 : 0;
    }
    return count;
}

Dataset Dataset::observed_subset() const {
    std::vector<Observation> kept;
    for (const auto& obs : observations_) {
        if (obs.observed) {
            kept.push_back(obs);
        }
    }
    if (kept.empty()) {
        throw NumericalError(ErrorKind::all_data_missing, "all data missing");
    }
    return Dataset(std::move(kept));
}

double dot(std::span<const double> a, std::span<const double> b) {
    double acc = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) {
        acc += a[i] * b[i];
    }
    return acc;
}

BaseMeasure BaseMeasure::standard_normal(Interval support) {
    return {[](double y) { return std::exp(-0.5 * y * y) / std::sqrt(2.0 * std::numbers::pi); },
            support};
}

BaseMeasure BaseMeasure::uniform(double lo, double hi) {
    if (!(lo < hi)) {
        throw std::invalid_argument("uniform base measure needs lo < hi");
    }
    const double height = 1.0 / (hi - lo);
    return {[lo, hi, height](double y) { return (y >= lo && y <= hi) ? height : 0.0; }, {lo, hi}};
}

LogPartition::LogPartition(const BaseMeasure& f, std::size_t points) : grid_(f.support, points) {
    log_f_.reserve(grid_.size());
    for (double y : grid_.nodes()) {
        const double v = f.density(y);
        if (v < 0.0 || std::isnan(v)) {
            throw std::invalid_argument("base measure must be nonnegative");
        }
        log_f_.push_back(safe_log(v));
    }
}

double LogPartition::operator()(double theta) const {
    std::vector<double> terms(grid_.size());
    const auto nodes = grid_.nodes();
    for (std::size_t i = 0; i < terms.size(); ++i) {
        terms[i] = theta * nodes[i] + log_f_[i];
    }
    const double b = grid_.log_integrate_exp(terms);
    if (b == -std::numeric_limits<double>::infinity()) {
        throw NumericalError(ErrorKind::zero_integral, "base measure integrates to zero");
    }
    if (!std::isfinite(b)) {
        throw NumericalError(ErrorKind::log_partition_overflow, "log-partition overflow");
    }
    return b;
}

double LogPartition::derivative(double theta) const {
    const double eps = 1e-5 * std::max(1.0, std::abs(theta));
    return ((*this)(theta + eps) - (*this)(theta - eps)) / (2.0 * eps);
}

double LogPartition::mean(double theta) const {
    const double b = (*this)(theta);
    const auto nodes = grid_.nodes();
    std::vector<double> integrand(grid_.size());
    for (std::size_t i = 0; i < integrand.size(); ++i) {
        integrand[i] = nodes[i] * std::exp(theta * nodes[i] + log_f_[i] - b);
    }
    return grid_.integrate(integrand);
}

double log_partition(double theta, const BaseMeasure& f) {
    return LogPartition(f)(theta);
}

double log_density(std::span<const double> beta, const BaseMeasure& f, const Observation& obs) {
    if (beta.size() != obs.x.size()) {
        throw std::invalid_argument("beta and x differ in length");
    }
    const double fy = f.density(obs.y);
    if (!(fy > 0.0)) {
        throw NumericalError(ErrorKind::zero_base_measure, "zero base measure at y");
    }
    const double theta = dot(beta, obs.x);
    return theta * obs.y - log_partition(theta, f) + std::log(fy);
}

std::vector<double> score_mean(std::span<const double> beta, const BaseMeasure& f,
                               const Dataset& draws) {
    if (beta.size() != draws.dim()) {
        throw std::invalid_argument("beta and dataset dimension differ");
    }
    const LogPartition b(f);
    std::vector<double> acc(draws.dim(), 0.0);
    for (const auto& obs : draws) {
        const double residual = obs.y - b.derivative(dot(beta, obs.x));
        for (std::size_t j = 0; j < acc.size(); ++j) {
            acc[j] += obs.x[j] * residual;
        }
    }
    for (double& v : acc) {
        v /= static_cast<double>(draws.size());
    }
    return acc;
}

double functional_derivative(std::span<const double> beta, const BaseMeasure& f,
                             std::span<const double> x, double y) {
    if (beta.size() != x.size()) {
        throw std::invalid_argument("beta and x differ in length");
    }
    const double fy = f.density(y);
    if (!(fy > 0.0)) {
        throw NumericalError(ErrorKind::zero_base_measure, "zero base measure at y");
    }
    const double theta = dot(beta, x);
    return -std::exp(theta * y - log_partition(theta, f)) + 1.0 / fy;
}

}  // namespace spef
