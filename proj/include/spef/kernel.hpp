#ifndef SPEF_KERNEL_HPP
#define SPEF_KERNEL_HPP

#include <cstddef>
#include <optional>
#include <span>
#include <string_view>

namespace spef {

enum class KernelFamily { gaussian, epanechnikov };

std::string_view to_string(KernelFamily family);
KernelFamily parse_kernel_family(std::string_view name);

/// Kernel family plus a strictly positive bandwidth h.
class KernelSpec {
public:
    KernelSpec(KernelFamily family, double bandwidth);

    KernelFamily family() const { return family_; }
    double bandwidth() const { return bandwidth_; }

    /// K(u / h), not divided by h.
    double operator()(double u) const;

    /// log K(u / h); -inf outside a compact support.
    double log_value(double u) const;

private:
    KernelFamily family_;
    double bandwidth_;
};

inline double kernel_eval(const KernelSpec& spec, double u) { return spec(u); }

/// Sums below this are treated as an empty neighbourhood.
inline constexpr double kKernelSumFloor = 1e-300;

/// Nadaraya-Watson regression of ys on xs evaluated at t.
double nw_regress(std::span<const double> xs, std::span<const double> ys, const KernelSpec& spec,
                  double t);

/// Kernel density estimate of ys at t. With `exclude` set, drops that index
/// and divides by n - 1 (the leave-one-out form).
double nw_density(std::span<const double> ys, const KernelSpec& spec, double t,
                  std::optional<std::size_t> exclude = std::nullopt);

/// h = 1.06 * sd * n^(-1/5), sd with the n - 1 divisor.
double bandwidth_rule(std::span<const double> values);

}  // namespace spef

#endif
