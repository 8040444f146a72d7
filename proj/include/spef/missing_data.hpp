#ifndef SPEF_MISSING_DATA_HPP
#define SPEF_MISSING_DATA_HPP

#include <cstddef>
#include <functional>
#include <random>
#include <span>
#include <string_view>
#include <vector>

#include "spef/core_model.hpp"
#include "spef/kernel.hpp"
#include "spef/lfc.hpp"
#include "spef/optimize.hpp"
#include "spef/profile.hpp"
#include "spef/quadrature.hpp"

namespace spef {

enum class MechanismKind {
    decomposable_indicator,  // c * I{X > 0} * I{Y > 0}
    nondecomposable_line,    // c * I{1.8 X < Y}
};

std::string_view to_string(MechanismKind kind);
MechanismKind parse_mechanism_kind(std::string_view name);

struct MissingMechanism {
    MechanismKind kind = MechanismKind::decomposable_indicator;
    double c = 1.0;

    void validate() const;

    /// P(observed | x, y) for a scalar covariate.
    double probability(double x, double y) const;
};

/// Redraws the observed flags: one uniform per observation, observed when it
/// falls below the mechanism probability. Covariates must be scalar.
Dataset apply_missingness(const Dataset& data, const MissingMechanism& mechanism,
                          std::mt19937_64& rng);

/// Least favorable curve built from the observed subsample only.
LfcEvaluator lfc_observed(std::span<const double> beta, const Dataset& data,
                          const KernelSpec& index_kernel, const KernelSpec& y_kernel,
                          LfcOptions options = {});

/// Largest |y| for which exp(y^2 / 2) is representable.
inline constexpr double kG1Limit = 38.0;

/// g1(y) = sqrt(2 pi) * f_m(y) * exp(y^2 / 2).
double g1_recover(const std::function<double(double)>& f_m, double y);

/// G(theta, g1) = log int phi(y - theta) g1(y) dy over the support.
double g_functional(double theta, const std::function<double(double)>& g1, Interval support,
                    std::size_t points = kDefaultQuadraturePoints);

/// Selection correction
///   g(theta, g1) = int (y - theta) e^{-(y-theta)^2/2} g1(y) dy / int e^{-(y-theta)^2/2} g1(y) dy.
double g_ratio(double theta, const std::function<double(double)>& g1, Interval support,
               std::size_t points = kDefaultQuadraturePoints);

/// Log-likelihood of the observed sample under the selected Gaussian model,
///   sum_{i in O} [theta_i Y_i - theta_i^2/2 - G(theta_i, g1_beta) + log f_m(Y_i)],
/// with g1_beta tabulated on the response grid of the observed subsample.
class ObservedObjective {
public:
    explicit ObservedObjective(const Dataset& data, ProfileOptions options = {});

    double operator()(std::span<const double> beta) const;

    /// log g1_beta at the nodes of the response grid.
    std::vector<double> log_g1_on_grid(const LfcEvaluator& f_m) const;

    const ProfileObjective& profile() const { return profile_; }

private:
    ProfileObjective profile_;
};

struct OutcomeRegressionFit {
    std::vector<double> beta_O;
    double loglik_at_max = 0.0;
    std::vector<TracePoint> trace;
    bool converged = false;
    LfcEvaluator f_m;
    TrapezoidGrid grid;
    std::vector<double> log_g1;

    double g1_tilde(double y) const;

    /// beta_O^T x + g(beta_O^T x, g1) with g1 on the cached grid.
    double predict(std::span<const double> x) const;
};

OutcomeRegressionFit fit_observed(const Dataset& data, const ProfileOptions& options,
                                  const SearchConfig& search);

}  // namespace spef

#endif
