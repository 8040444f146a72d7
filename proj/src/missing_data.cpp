#include "spef/missing_data.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <stdexcept>
#include <string>

#include "spef/errors.hpp"

namespace spef {

namespace {

constexpr double kNegInf = -std::numeric_limits<double>::infinity();
const double kHalfLogTwoPi = 0.5 * std::log(2.0 * std::numbers::pi);

std::vector<double> log_tabulate(const std::function<double(double)>& g, std::span<const double> nodes) {
    std::vector<double> out(nodes.size());
    for (std::size_t i = 0; i < nodes.size(); ++i) {
        const double v = g(nodes[i]);
        if (!(v >= 0.0) || !std::isfinite(v)) {
            throw std::invalid_argument("g1 must be finite and nonnegative");
        }
        out[i] = v > 0.0 ? std::log(v) : kNegInf;
    }
    return out;
}

double log_g_integral(double theta, const TrapezoidGrid& grid, std::span<const double> log_g1) {
    const auto nodes = grid.nodes();
    std::vector<double> integrand(nodes.size());
    for (std::size_t i = 0; i < nodes.size(); ++i) {
        const double u = nodes[i] - theta;
        integrand[i] = -0.5 * u * u - kHalfLogTwoPi + log_g1[i];
    }
    return grid.log_integrate_exp(integrand);
}

double ratio_on_grid(double theta, const TrapezoidGrid& grid, std::span<const double> log_g1) {
    const auto nodes = grid.nodes();
    std::vector<double> log_w(nodes.size());
    double shift = kNegInf;
    for (std::size_t i = 0; i < nodes.size(); ++i) {
        const double u = nodes[i] - theta;
        log_w[i] = -0.5 * u * u + log_g1[i];
        shift = std::max(shift, log_w[i]);
    }
    if (!std::isfinite(shift)) {
        throw NumericalError(ErrorKind::zero_integral, "zero integral in selection correction");
    }
    std::vector<double> w(nodes.size());
    std::vector<double> uw(nodes.size());
    for (std::size_t i = 0; i < nodes.size(); ++i) {
        w[i] = std::exp(log_w[i] - shift);
        uw[i] = (nodes[i] - theta) * w[i];
    }
    return grid.integrate(uw) / grid.integrate(w);
}

ProfileOptions grid_options(ProfileOptions options) {
    options.partition = PartitionPath::quadrature;
    return options;
}

}  // namespace

std::string_view to_string(MechanismKind kind) {
    return kind == MechanismKind::decomposable_indicator ? "decomposable_indicator"
                                                         : "nondecomposable_line";
}

MechanismKind parse_mechanism_kind(std::string_view name) {
    if (name == "decomposable_indicator" || name == "1") return MechanismKind::decomposable_indicator;
    if (name == "nondecomposable_line" || name == "2") return MechanismKind::nondecomposable_line;
    throw std::invalid_argument("unknown missing mechanism '" + std::string(name) + "'");
}

void MissingMechanism::validate() const {
    if (!(c >= 0.0 && c <= 1.0)) {
        throw std::invalid_argument("observation probability must lie in [0, 1]");
    }
}

double MissingMechanism::probability(double x, double y) const {
    switch (kind) {
        case MechanismKind::decomposable_indicator:
            return x > 0.0 && y > 0.0 ? c : 0.0;
        case MechanismKind::nondecomposable_line:
            return 1.8 * x < y ? c : 0.0;
    }
    return 0.0;
}

Dataset apply_missingness(const Dataset& data, const MissingMechanism& mechanism,
                          std::mt19937_64& rng) {
    mechanism.validate();
    if (data.dim() != 1) {
        throw std::invalid_argument("missing mechanisms are defined for a scalar covariate");
    }
    std::uniform_real_distribution<double> unit(0.0, 1.0);
    std::vector<Observation> out(data.begin(), data.end());
    std::size_t observed = 0;
    for (auto& obs : out) {
        const double u = unit(rng);
        obs.observed = u < mechanism.probability(obs.x[0], obs.y);
        observed += obs.observed ? 1 : 0;
    }
    if (observed == 0) {
        throw NumericalError(ErrorKind::all_data_missing, "all data missing");
    }
    return Dataset(std::move(out));
}

LfcEvaluator lfc_observed(std::span<const double> beta, const Dataset& data,
                          const KernelSpec& index_kernel, const KernelSpec& y_kernel,
                          LfcOptions options) {
    return LfcEvaluator(beta, data.observed_subset(), index_kernel, y_kernel, options);
}

double g1_recover(const std::function<double(double)>& f_m, double y) {
    if (std::abs(y) > kG1Limit) {
        throw NumericalError(ErrorKind::g1_overflow, "g1 overflow at y = " + std::to_string(y));
    }
    const double value = f_m(y);
    if (!std::isfinite(value)) {
        throw std::invalid_argument("base-measure value must be finite");
    }
    return std::sqrt(2.0 * std::numbers::pi) * value * std::exp(0.5 * y * y);
}

double g_functional(double theta, const std::function<double(double)>& g1, Interval support,
                    std::size_t points) {
    const TrapezoidGrid grid(support, points);
    const double value = log_g_integral(theta, grid, log_tabulate(g1, grid.nodes()));
    if (!std::isfinite(value)) {
        throw NumericalError(ErrorKind::zero_integral, "zero integral in G");
    }
    return value;
}

double g_ratio(double theta, const std::function<double(double)>& g1, Interval support,
               std::size_t points) {
    const TrapezoidGrid grid(support, points);
    return ratio_on_grid(theta, grid, log_tabulate(g1, grid.nodes()));
}

ObservedObjective::ObservedObjective(const Dataset& data, ProfileOptions options)
    : profile_(data.observed_subset(), grid_options(options)) {}

std::vector<double> ObservedObjective::log_g1_on_grid(const LfcEvaluator& f_m) const {
    auto log_g1 = profile_.log_lfc_on_grid(f_m);
    const auto nodes = profile_.grid().nodes();
    for (std::size_t i = 0; i < nodes.size(); ++i) {
        log_g1[i] += kHalfLogTwoPi + 0.5 * nodes[i] * nodes[i];
    }
    return log_g1;
}

double ObservedObjective::operator()(std::span<const double> beta) const {
    try {
        const LfcEvaluator f_m = profile_.lfc(beta);
        const auto log_g1 = log_g1_on_grid(f_m);
        const auto index = f_m.index();
        const auto ys = f_m.smoother().responses();
        // phi(y - theta) = exp(theta*y - theta^2/2) * phi(y), so G is a tilted integral.
        const auto nodes = profile_.grid().nodes();
        std::vector<double> log_base(nodes.size());
        for (std::size_t g = 0; g < nodes.size(); ++g) {
            log_base[g] = log_g1[g] - 0.5 * nodes[g] * nodes[g] - kHalfLogTwoPi;
        }
        const TiltedIntegral tilted(profile_.grid(), log_base);
        double total = 0.0;
        for (std::size_t i = 0; i < index.size(); ++i) {
            const double theta = index[i];
            const double g_value = tilted(theta) - 0.5 * theta * theta;
            total += theta * ys[i] - 0.5 * theta * theta - g_value + f_m.log_at_sample(i);
        }
        return std::isfinite(total) ? total : kNegInf;
    } catch (const NumericalError& e) {
        if (e.kind() == ErrorKind::lfc_overflow) return kNegInf;
        throw;
    }
}

double OutcomeRegressionFit::g1_tilde(double y) const {
    return g1_recover([this](double t) { return f_m(t); }, y);
}

double OutcomeRegressionFit::predict(std::span<const double> x) const {
    if (x.size() != beta_O.size()) {
        throw std::invalid_argument("covariate has the wrong dimension");
    }
    const double theta = dot(beta_O, x);
    return theta + ratio_on_grid(theta, grid, log_g1);
}

OutcomeRegressionFit fit_observed(const Dataset& data, const ProfileOptions& options,
                                  const SearchConfig& search) {
    const ObservedObjective objective(data, options);
    search.box.validate();
    if (search.box.dim() != data.dim()) {
        throw std::invalid_argument("search box dimension does not match the covariates");
    }
    auto opt = maximize([&](std::span<const double> beta) { return objective(beta); }, search);
    LfcEvaluator f_m = objective.profile().lfc(opt.argmax);
    auto log_g1 = objective.log_g1_on_grid(f_m);
    return {std::move(opt.argmax), opt.value,          std::move(opt.trace), opt.converged,
            std::move(f_m),        objective.profile().grid(), std::move(log_g1)};
}

}  // namespace spef
