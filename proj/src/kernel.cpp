#include "spef/kernel.hpp"

#include <cmath>
#include <limits>
#include <numbers>
#include <stdexcept>
#include <string>

#include "spef/errors.hpp"

namespace spef {

namespace {

const double kLogInvSqrtTwoPi = -0.5 * std::log(2.0 * std::numbers::pi);

}  // namespace

std::string_view to_string(KernelFamily family) {
    switch (family) {
        case KernelFamily::gaussian:
            return "gaussian";
        case KernelFamily::epanechnikov:
            return "epanechnikov";
    }
    return "unknown";
}

KernelFamily parse_kernel_family(std::string_view name) {
    if (name == "gaussian") return KernelFamily::gaussian;
    if (name == "epanechnikov") return KernelFamily::epanechnikov;
    throw std::invalid_argument("unknown kernel family '" + std::string(name) + "'");
}

KernelSpec::KernelSpec(KernelFamily family, double bandwidth)
    : family_(family), bandwidth_(bandwidth) {
    if (!(bandwidth > 0.0) || !std::isfinite(bandwidth)) {
        throw std::invalid_argument("kernel bandwidth must be positive and finite");
    }
}

double KernelSpec::operator()(double u) const {
    const double s = u / bandwidth_;
    switch (family_) {
        case KernelFamily::gaussian:
            return std::exp(-0.5 * s * s) / std::sqrt(2.0 * std::numbers::pi);
        case KernelFamily::epanechnikov:
            return std::abs(s) <= 1.0 ? 0.75 * (1.0 - s * s) : 0.0;
    }
    return 0.0;
}

double KernelSpec::log_value(double u) const {
    const double s = u / bandwidth_;
    switch (family_) {
        case KernelFamily::gaussian:
            return -0.5 * s * s + kLogInvSqrtTwoPi;
        case KernelFamily::epanechnikov:
            return std::abs(s) < 1.0 ? std::log(0.75 * (1.0 - s * s))
                                     : -std::numeric_limits<double>::infinity();
    }
    return -std::numeric_limits<double>::infinity();
}

double nw_regress(std::span<const double> xs, std::span<const double> ys, const KernelSpec& spec,
                  double t) {
    if (xs.size() != ys.size() || xs.empty()) {
        throw std::invalid_argument("nw_regress needs equally sized, nonempty inputs");
    }
    // Centring on ys[0] makes constant responses come back exactly.
    const double centre = ys[0];
    double num = 0.0;
    double den = 0.0;
    for (std::size_t i = 0; i < xs.size(); ++i) {
        const double w = spec(xs[i] - t);
        num += w * (ys[i] - centre);
        den += w;
    }
    if (den < kKernelSumFloor) {
        throw NumericalError(ErrorKind::empty_kernel_neighborhood, "empty kernel neighborhood");
    }
    return centre + num / den;
}

double nw_density(std::span<const double> ys, const KernelSpec& spec, double t,
                  std::optional<std::size_t> exclude) {
    if (exclude && (ys.size() < 2 || *exclude >= ys.size())) {
        throw std::invalid_argument("leave-one-out density needs n >= 2 and a valid index");
    }
    if (ys.empty()) {
        throw std::invalid_argument("nw_density needs at least one point");
    }
    double acc = 0.0;
    for (std::size_t j = 0; j < ys.size(); ++j) {
        if (exclude && j == *exclude) continue;
        acc += spec(ys[j] - t);
    }
    const double count = static_cast<double>(exclude ? ys.size() - 1 : ys.size());
    const double value = acc / (count * spec.bandwidth());
    if (!(value > 0.0)) {
        throw NumericalError(ErrorKind::vanishing_density, "vanishing density estimate");
    }
    return value;
}

double bandwidth_rule(std::span<const double> values) {
    const std::size_t n = values.size();
    if (n < 2) {
        throw NumericalError(ErrorKind::degenerate_sample, "degenerate sample");
    }
    double mean = 0.0;
    for (double v : values) mean += v;
    mean /= static_cast<double>(n);
    double ss = 0.0;
    for (double v : values) ss += (v - mean) * (v - mean);
    const double sd = std::sqrt(ss / static_cast<double>(n - 1));
    if (!(sd > 0.0)) {
        throw NumericalError(ErrorKind::degenerate_sample, "degenerate sample");
    }
    return 1.06 * sd * std::pow(static_cast<double>(n), -0.2);
}

}  // namespace spef
