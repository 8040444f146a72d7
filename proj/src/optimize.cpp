#include "spef/optimize.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <random>
#include <stdexcept>

#include "spef/errors.hpp"

namespace spef {

namespace {

constexpr double kNegInf = -std::numeric_limits<double>::infinity();

// Records every evaluation so the reported maximum dominates the trace.
class Recorder {
public:
    explicit Recorder(const Objective& objective) : objective_(objective) {}

    double operator()(std::span<const double> beta) {
        double v = objective_(beta);
        if (std::isnan(v)) v = kNegInf;
        trace_.push_back({std::vector<double>(beta.begin(), beta.end()), v});
        if (v > best_value_) {
            best_value_ = v;
            best_ = trace_.size() - 1;
        }
        return v;
    }

    bool any_finite() const { return std::isfinite(best_value_); }

    OptimizationResult finish(bool converged) && {
        if (!any_finite()) {
            throw NumericalError(ErrorKind::objective_infeasible, "objective infeasible everywhere");
        }
        std::vector<double> argmax = trace_[best_].beta;
        return {std::move(argmax), best_value_, std::move(trace_), converged};
    }

private:
    const Objective& objective_;
    std::vector<TracePoint> trace_;
    double best_value_ = kNegInf;
    std::size_t best_ = 0;
};

OptimizationResult maximize_1d(const Objective& objective, const SearchConfig& config) {
    Recorder f(objective);
    const double lo = config.box.lo[0];
    const double hi = config.box.hi[0];
    const std::size_t points = std::max<std::size_t>(config.grid_points, 3);
    const double step = (hi - lo) / static_cast<double>(points - 1);

    std::vector<double> values(points);
    std::size_t best = 0;
    for (std::size_t i = 0; i < points; ++i) {
        const double b = i + 1 == points ? hi : lo + step * static_cast<double>(i);
        values[i] = f(std::span<const double>(&b, 1));
        if (values[i] > values[best]) best = i;
    }
    if (!f.any_finite()) {
        return std::move(f).finish(false);
    }

    // Golden-section search on the bracket around the best grid point.
    double a = lo + step * static_cast<double>(best == 0 ? 0 : best - 1);
    double b = best + 1 >= points ? hi : lo + step * static_cast<double>(best + 1);
    const double ratio = (std::sqrt(5.0) - 1.0) / 2.0;
    double c = b - ratio * (b - a);
    double d = a + ratio * (b - a);
    double fc = f(std::span<const double>(&c, 1));
    double fd = f(std::span<const double>(&d, 1));
    std::size_t iterations = 0;
    while (b - a > config.golden_tolerance && iterations < config.max_iterations) {
        if (fc >= fd) {
            b = d;
            d = c;
            fd = fc;
            c = b - ratio * (b - a);
            fc = f(std::span<const double>(&c, 1));
        } else {
            a = c;
            c = d;
            fc = fd;
            d = a + ratio * (b - a);
            fd = f(std::span<const double>(&d, 1));
        }
        ++iterations;
    }
    return std::move(f).finish(b - a <= config.golden_tolerance);
}

void project(std::vector<double>& x, const SearchBox& box) {
    for (std::size_t j = 0; j < x.size(); ++j) {
        x[j] = std::clamp(x[j], box.lo[j], box.hi[j]);
    }
}

// Nelder-Mead on -f; returns true when the vertex spread criterion is met.
bool nelder_mead(Recorder& f, std::vector<double> start, const SearchConfig& config) {
    const SearchBox& box = config.box;
    const std::size_t dim = start.size();
    std::vector<std::vector<double>> simplex(dim + 1, start);
    for (std::size_t j = 0; j < dim; ++j) {
        const double delta = 0.1 * (box.hi[j] - box.lo[j]);
        simplex[j + 1][j] += start[j] + delta <= box.hi[j] ? delta : -delta;
        project(simplex[j + 1], box);
    }
    std::vector<double> cost(dim + 1);
    for (std::size_t i = 0; i <= dim; ++i) {
        cost[i] = -f(simplex[i]);
    }

    std::vector<std::size_t> order(dim + 1);
    auto trial = [&](const std::vector<double>& centroid, const std::vector<double>& worst,
                     double coeff) {
        std::vector<double> x(dim);
        for (std::size_t j = 0; j < dim; ++j) {
            x[j] = centroid[j] + coeff * (centroid[j] - worst[j]);
        }
        project(x, box);
        return x;
    };

    for (std::size_t iter = 0; iter < config.max_iterations; ++iter) {
        std::iota(order.begin(), order.end(), 0);
        std::sort(order.begin(), order.end(),
                  [&](std::size_t l, std::size_t r) { return cost[l] < cost[r]; });
        const std::size_t best = order.front();
        const std::size_t worst = order.back();
        const std::size_t second_worst = order[dim - 1];
        const double spread = cost[worst] - cost[best];
        if (std::isfinite(cost[best]) && spread < config.simplex_tolerance) {
            return true;
        }

        std::vector<double> centroid(dim, 0.0);
        for (std::size_t i = 0; i <= dim; ++i) {
            if (i == worst) continue;
            for (std::size_t j = 0; j < dim; ++j) centroid[j] += simplex[i][j];
        }
        for (double& v : centroid) v /= static_cast<double>(dim);

        auto reflected = trial(centroid, simplex[worst], 1.0);
        const double reflected_cost = -f(reflected);
        if (reflected_cost < cost[best]) {
            auto expanded = trial(centroid, simplex[worst], 2.0);
            const double expanded_cost = -f(expanded);
            if (expanded_cost < reflected_cost) {
                simplex[worst] = std::move(expanded);
                cost[worst] = expanded_cost;
            } else {
                simplex[worst] = std::move(reflected);
                cost[worst] = reflected_cost;
            }
            continue;
        }
        if (reflected_cost < cost[second_worst]) {
            simplex[worst] = std::move(reflected);
            cost[worst] = reflected_cost;
            continue;
        }
        const bool outside = reflected_cost < cost[worst];
        auto contracted = trial(centroid, simplex[worst], outside ? 0.5 : -0.5);
        const double contracted_cost = -f(contracted);
        if (contracted_cost < (outside ? reflected_cost : cost[worst])) {
            simplex[worst] = std::move(contracted);
            cost[worst] = contracted_cost;
            continue;
        }
        for (std::size_t i = 0; i <= dim; ++i) {
            if (i == best) continue;
            for (std::size_t j = 0; j < dim; ++j) {
                simplex[i][j] = simplex[best][j] + 0.5 * (simplex[i][j] - simplex[best][j]);
            }
            cost[i] = -f(simplex[i]);
        }
    }
    return false;
}

OptimizationResult maximize_nd(const Objective& objective, const SearchConfig& config) {
    Recorder f(objective);
    const std::size_t dim = config.box.dim();
    const std::size_t starts = config.starts == 0 ? std::max<std::size_t>(3, 2 * dim) : config.starts;
    const auto points = latin_hypercube(config.box, starts, config.seed);

    bool any_converged = false;
    for (const auto& start : points) {
        any_converged = nelder_mead(f, start, config) || any_converged;
    }
    return std::move(f).finish(any_converged);
}

}  // namespace

SearchBox SearchBox::uniform(std::size_t dim, double lo, double hi) {
    return {std::vector<double>(dim, lo), std::vector<double>(dim, hi)};
}

void SearchBox::validate() const {
    if (lo.empty() || lo.size() != hi.size()) {
        throw std::invalid_argument("search box bounds must be nonempty and equally sized");
    }
    for (std::size_t j = 0; j < lo.size(); ++j) {
        if (!std::isfinite(lo[j]) || !std::isfinite(hi[j]) || !(lo[j] < hi[j])) {
            throw std::invalid_argument("search box needs finite bounds with lo < hi");
        }
    }
}

SearchConfig SearchConfig::with_box(std::size_t dim, double lo, double hi) {
    SearchConfig config;
    config.box = SearchBox::uniform(dim, lo, hi);
    return config;
}

std::vector<std::vector<double>> latin_hypercube(const SearchBox& box, std::size_t count,
                                                 std::uint64_t seed) {
    box.validate();
    std::mt19937_64 rng(seed);
    std::uniform_real_distribution<double> unit(0.0, 1.0);
    const std::size_t dim = box.dim();
    std::vector<std::vector<double>> points(count, std::vector<double>(dim));
    std::vector<std::size_t> strata(count);
    for (std::size_t j = 0; j < dim; ++j) {
        std::iota(strata.begin(), strata.end(), 0);
        std::shuffle(strata.begin(), strata.end(), rng);
        const double width = (box.hi[j] - box.lo[j]) / static_cast<double>(count);
        for (std::size_t i = 0; i < count; ++i) {
            points[i][j] = box.lo[j] + width * (static_cast<double>(strata[i]) + unit(rng));
        }
    }
    return points;
}

OptimizationResult maximize(const Objective& objective, const SearchConfig& config) {
    config.box.validate();
    if (config.box.dim() == 1) {
        return maximize_1d(objective, config);
    }
    return maximize_nd(objective, config);
}

}  // namespace spef
