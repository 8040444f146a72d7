#include <cmath>
#include <limits>
#include <stdexcept>
#include <vector>

#include "doctest.h"
#include "spef/quadrature.hpp"

using spef::Interval;
using spef::TrapezoidGrid;

TEST_CASE("trapezoid grid basics") {
    const TrapezoidGrid grid({-1.0, 2.0}, 301);
    CHECK(grid.size() == 301);
    CHECK(grid.nodes().front() == -1.0);
    CHECK(grid.nodes().back() == 2.0);
    std::vector<double> linear(grid.size());
    for (std::size_t i = 0; i < grid.size(); ++i) linear[i] = 3.0 * grid.nodes()[i] + 1.0;
    CHECK(std::abs(grid.integrate(linear) - (1.5 * 3.0 + 3.0)) < 1e-12);
    CHECK_THROWS_AS(TrapezoidGrid({1.0, 1.0}), std::invalid_argument);
    CHECK_THROWS_AS(TrapezoidGrid({0.0, 1.0}, 1), std::invalid_argument);
    CHECK_THROWS_AS(grid.integrate(std::vector<double>(3)), std::invalid_argument);
}

TEST_CASE("log_integrate_exp is stable") {
    const TrapezoidGrid grid({0.0, 1.0}, 101);
    std::vector<double> big(grid.size(), 800.0);
    CHECK(std::abs(grid.log_integrate_exp(big) - 800.0) < 1e-12);
    std::vector<double> none(grid.size(), -std::numeric_limits<double>::infinity());
    CHECK(grid.log_integrate_exp(none) == -std::numeric_limits<double>::infinity());
}

TEST_CASE("tilted integral equals the direct log integral") {
    const TrapezoidGrid grid({-4.3, 6.1}, 2001);
    std::vector<double> v(grid.size());
    for (std::size_t i = 0; i < grid.size(); ++i) {
        const double y = grid.nodes()[i];
        v[i] = -0.5 * y * y + 0.3 * std::sin(3.0 * y);
    }
    v[17] = -std::numeric_limits<double>::infinity();
    const spef::TiltedIntegral tilted(grid, v);
    for (double theta : {-40.0, -7.5, -1.0, 0.0, 0.01, 2.0, 9.0, 25.0, 120.0}) {
        std::vector<double> direct(grid.size());
        for (std::size_t i = 0; i < grid.size(); ++i) direct[i] = theta * grid.nodes()[i] + v[i];
        const double expected = grid.log_integrate_exp(direct);
        CHECK(std::abs(tilted(theta) - expected) < 1e-10 * std::max(1.0, std::abs(expected)));
    }
}

TEST_CASE("log_sum_exp") {
    const std::vector<double> v{1000.0, 1000.0};
    CHECK(std::abs(spef::log_sum_exp(v) - (1000.0 + std::log(2.0))) < 1e-12);
    CHECK(spef::log_sum_exp(std::vector<double>{}) == -std::numeric_limits<double>::infinity());
}
