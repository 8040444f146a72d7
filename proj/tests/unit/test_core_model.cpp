#include <cmath>
#include <numbers>
#include <random>
#include <stdexcept>
#include <vector>

#include "doctest.h"
#include "spef/core_model.hpp"
#include "spef/errors.hpp"

using spef::BaseMeasure;
using spef::Dataset;
using spef::Observation;

namespace {

const double kLogPhi0 = -0.5 * std::log(2.0 * std::numbers::pi);

Dataset normal_draws(std::size_t n, double beta, double mu, std::uint64_t seed) {
    std::mt19937_64 rng(seed);
    std::normal_distribution<double> z(0.0, 1.0);
    std::vector<Observation> obs;
    for (std::size_t i = 0; i < n; ++i) {
        const double x = mu + z(rng);
        obs.push_back({{x}, beta * x + z(rng), true});
    }
    return Dataset(std::move(obs));
}

}  // namespace

TEST_CASE("log_partition matches closed forms") {
    const auto normal = BaseMeasure::standard_normal();
    CHECK(std::abs(spef::log_partition(0.0, normal)) < 1e-6);
    CHECK(std::abs(spef::log_partition(1.5, normal) - 1.125) < 1e-6);
    const auto unit = BaseMeasure::uniform(0.0, 1.0);
    CHECK(std::abs(spef::log_partition(1.0, unit) - std::log(std::numbers::e - 1.0)) < 1e-6);
}

TEST_CASE("log_partition is theta^2/2 for the Gaussian base measure") {
    const auto normal = BaseMeasure::standard_normal();
    for (double theta = -3.0; theta <= 3.0; theta += 0.25) {
        CHECK(std::abs(spef::log_partition(theta, normal) - 0.5 * theta * theta) < 1e-6);
    }
}

TEST_CASE("log_partition errors") {
    CHECK_THROWS_AS(BaseMeasure::uniform(1.0, 1.0), std::invalid_argument);
    const auto unit = BaseMeasure::uniform(0.0, 1.0);
    // Large tilts stay finite because the integral is taken in log space.
    const double big = spef::log_partition(1000.0, unit);
    CHECK(std::abs(big - (1000.0 - std::log(1000.0))) < 0.05);
}

TEST_CASE("log_density examples") {
    const auto normal = BaseMeasure::standard_normal();
    const std::vector<double> zero{0.0};
    CHECK(std::abs(spef::log_density(zero, normal, {{3.7}, 0.0, true}) - kLogPhi0) < 1e-9);
    const std::vector<double> two{2.0};
    CHECK(std::abs(spef::log_density(two, normal, {{1.0}, 2.0, true}) - kLogPhi0) < 1e-6);
    const auto unit = BaseMeasure::uniform(0.0, 1.0);
    const std::vector<double> one{1.0};
    const double expected = 0.5 - std::log(std::numbers::e - 1.0);
    CHECK(std::abs(spef::log_density(one, unit, {{1.0}, 0.5, true}) - expected) < 1e-6);
    CHECK_THROWS_AS(spef::log_density(one, unit, {{1.0}, 2.0, true}), spef::NumericalError);
}

TEST_CASE("score mean is centred under the model and biased under misspecification") {
    const auto normal = BaseMeasure::standard_normal({-15.0, 15.0});
    const Dataset draws = normal_draws(10000, 2.0, 0.0, 11);
    const std::vector<double> beta{2.0};
    const double mean = spef::score_mean(beta, normal, draws)[0];
    double ss = 0.0;
    for (const auto& o : draws) {
        const double s = o.x[0] * (o.y - 2.0 * o.x[0]);
        ss += s * s;
    }
    const double sd = std::sqrt(ss / 10000.0);
    CHECK(std::abs(mean) < 3.0 * sd / 100.0);

    const Dataset shifted = normal_draws(2000, 2.0, 1.0, 12);
    const std::vector<double> zero{0.0};
    CHECK(spef::score_mean(zero, normal, shifted)[0] > 0.5);
}

TEST_CASE("score vanishes at the conditional mean") {
    const auto unit = BaseMeasure::uniform(0.0, 1.0);
    const std::vector<double> beta{0.0};
    const Dataset single({{{1.0}, 0.5, true}, {{1.0}, 0.5, true}});
    CHECK(std::abs(spef::score_mean(beta, unit, single)[0]) < 1e-9);
}

TEST_CASE("functional derivative examples") {
    const auto unit = BaseMeasure::uniform(0.0, 1.0);
    const std::vector<double> zero{0.0};
    const std::vector<double> x{1.0};
    CHECK(std::abs(spef::functional_derivative(zero, unit, x, 0.5)) < 1e-6);
    const std::vector<double> one{1.0};
    const double e = std::numbers::e;
    CHECK(std::abs(spef::functional_derivative(one, unit, x, 1.0) - (1.0 - e / (e - 1.0))) < 1e-5);
}

TEST_CASE("functional derivative agrees with a Gateaux difference quotient") {
    // Perturb f by eps * bump centred at y, bump a narrow normalised Gaussian.
    const std::vector<double> beta{0.7};
    const std::vector<double> x{1.3};
    const double theta = beta[0] * x[0];
    const double y = 0.4;
    const double width = 0.02;
    auto bump = [&](double t) {
        const double u = (t - y) / width;
        return std::exp(-0.5 * u * u) / (width * std::sqrt(2.0 * std::numbers::pi));
    };
    const auto normal = BaseMeasure::standard_normal({-6.0, 6.0});
    const double analytic = spef::functional_derivative(beta, normal, x, y);
    for (double eps : {1e-4, 1e-5, 1e-6}) {
        BaseMeasure perturbed{[&](double t) { return normal.density(t) + eps * bump(t); },
                              normal.support};
        // The partition term is perturbed by a unit-mass bump at y, the
        // point term log f(y) by a unit-height increment at y.
        const double db = (spef::log_partition(theta, perturbed) - spef::log_partition(theta, normal)) / eps;
        const double fy = normal.density(y);
        const double dlog = (std::log(fy + eps) - std::log(fy)) / eps;
        const double quotient = -db + dlog;
        CHECK(std::abs(quotient - analytic) < 1e-3 * std::max(1.0, std::abs(analytic)));
    }
}

TEST_CASE("dataset validation and index") {
    CHECK_THROWS_AS(Dataset({{{1.0}, 1.0, true}}), std::invalid_argument);
    CHECK_THROWS_AS(Dataset({{{1.0}, 1.0, true}, {{1.0, 2.0}, 1.0, true}}), std::invalid_argument);
    CHECK_THROWS_AS(Dataset({{{1.0}, NAN, true}, {{1.0}, 1.0, true}}), std::invalid_argument);
    const Dataset d({{{1.0, 2.0}, 1.0, true}, {{-1.0, 0.5}, 2.0, false}, {{0.0, 1.0}, 3.0, true}});
    const std::vector<double> beta{2.0, -1.0};
    const auto index = d.index(beta);
    CHECK(index == std::vector<double>{0.0, -2.5, -1.0});
    CHECK(d.observed_count() == 2);
    CHECK(d.observed_subset().size() == 2);
    CHECK(d.observed_subset()[1].y == 3.0);
    const std::vector<double> bad{1.0};
    CHECK_THROWS_AS(d.index(bad), std::invalid_argument);
    const Dataset none({{{1.0}, 1.0, false}, {{2.0}, 1.0, false}});
    CHECK_THROWS_AS(none.observed_subset(), spef::NumericalError);
}
