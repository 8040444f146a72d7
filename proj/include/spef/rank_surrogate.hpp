#ifndef SPEF_RANK_SURROGATE_HPP
#define SPEF_RANK_SURROGATE_HPP

#include <cstddef>
#include <span>
#include <vector>

#include "spef/core_model.hpp"
#include "spef/optimize.hpp"
#include "spef/profile.hpp"

namespace spef {

/// Pairwise rank surrogate
///   l_N(beta) = -C(n,2)^-1 sum_{i<j} log(1 + exp{-(Y_i - Y_j) beta^T (X_i - X_j)})
/// over the observed subset. Pair differences are stored at construction.
class RankObjective {
public:
    explicit RankObjective(const Dataset& data);

    double operator()(std::span<const double> beta) const;

    std::size_t size() const { return n_; }
    std::size_t dim() const { return dim_; }

private:
    std::size_t n_;
    std::size_t dim_;
    std::vector<double> dy_;
    std::vector<double> dx_;  // pairs x dim, row-major
};

/// Exponents are clamped to [-700, 700] before exponentiation.
inline constexpr double kRankExponentClamp = 700.0;

double rank_loglik(const RankObjective& objective, std::span<const double> beta);

/// Maximises the surrogate; the result carries no base-measure estimate.
FitResult rank_fit(const RankObjective& objective, const SearchConfig& search);

}  // namespace spef

#endif
