#ifndef SPEF_OPTIMIZE_HPP
#define SPEF_OPTIMIZE_HPP

#include <cstddef>
#include <cstdint>
#include <functional>
#include <span>
#include <vector>

namespace spef {

struct SearchBox {
    std::vector<double> lo;
    std::vector<double> hi;

    static SearchBox uniform(std::size_t dim, double lo, double hi);
    std::size_t dim() const { return lo.size(); }
    void validate() const;
};

struct SearchConfig {
    SearchBox box = SearchBox::uniform(1, -10.0, 10.0);
    /// Coarse scan resolution for one-dimensional problems.
    std::size_t grid_points = 41;
    double golden_tolerance = 1e-4;
    /// Simplex stops once max - min of the vertex values drops below this.
    double simplex_tolerance = 1e-6;
    std::size_t max_iterations = 500;
    /// Multi-start count for d >= 2; 0 means max(3, 2d).
    std::size_t starts = 0;
    std::uint64_t seed = 0x5eed;

    static SearchConfig with_box(std::size_t dim, double lo, double hi);
};

struct TracePoint {
    std::vector<double> beta;
    double value;
};

struct OptimizationResult {
    std::vector<double> argmax;
    double value;
    std::vector<TracePoint> trace;
    bool converged;
};

using Objective = std::function<double(std::span<const double>)>;

/// Maximises `objective` over the box. One dimension: grid scan then golden
/// section between the neighbours of the best grid point. Higher dimensions:
/// Nelder-Mead from a Latin-hypercube set of starts, iterates projected onto
/// the box. Evaluations returning -inf count as infeasible; throws
/// NumericalError(objective_infeasible) when nothing finite is found.
OptimizationResult maximize(const Objective& objective, const SearchConfig& config);

/// The Latin-hypercube starting points used by maximize().
std::vector<std::vector<double>> latin_hypercube(const SearchBox& box, std::size_t count,
                                                 std::uint64_t seed);

}  // namespace spef

#endif
