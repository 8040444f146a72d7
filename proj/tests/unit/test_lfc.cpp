#include <algorithm>
#include <cmath>
#include <numbers>
#include <memory>
#include <random>
#include <vector>

#include "doctest.h"
#include "oracles.hpp"
#include "spef/errors.hpp"
#include "spef/lfc.hpp"

using spef::Dataset;
using spef::KernelFamily;
using spef::KernelSpec;
using spef::LfcEvaluator;
using spef::Observation;

namespace {

Dataset toy3() {
    return Dataset({{{0.4}, 1.1, true}, {{-0.7}, -0.3, true}, {{1.5}, 2.2, true}});
}

Dataset exp1_sample(std::size_t n, double beta, double sigma, std::uint64_t seed) {
    std::mt19937_64 rng(seed);
    std::normal_distribution<double> z(0.0, 1.0);
    std::vector<Observation> obs;
    for (std::size_t i = 0; i < n; ++i) {
        const double x = 1.0 + z(rng);
        obs.push_back({{x}, beta * x + sigma * z(rng), true});
    }
    return Dataset(std::move(obs));
}

}  // namespace

TEST_CASE("cumulative index integral") {
    const Dataset data = toy3();
    const std::vector<double> beta{1.3};
    const KernelSpec k(KernelFamily::gaussian, 0.8);
    CHECK(spef::cum_index_integral(beta, data, k, 0.0) == 0.0);

    // Oracle: same lattice, independently summed trapezoids.
    const auto index = data.index(beta);
    const auto ys = data.responses();
    const spef::IndexIntegral integral(index, ys, k, {index[1], index[2]}, 400);
    const double step = (index[2] - index[1]) / 400.0;
    CHECK(std::abs(integral.step() - step) < 1e-15);
    for (double theta : {index[0], index[1], index[2], 0.37, -0.5}) {
        CHECK(std::abs(integral(theta) - oracle::lattice_integral(index, ys, 0.8, step, theta)) < 1e-12);
    }
    // Additivity on the lattice.
    for (double a = -0.8; a < 1.8; a += 0.3) {
        const double b = a + 0.3;
        double direct = 0.0;
        const int pieces = 2000;
        for (int j = 0; j < pieces; ++j) {
            const double t0 = a + (b - a) * j / pieces;
            const double t1 = a + (b - a) * (j + 1) / pieces;
            direct += 0.5 * (t1 - t0) * (integral.regression(t0) + integral.regression(t1));
        }
        CHECK(std::abs(integral(b) - integral(a) - direct) < 1e-4);
    }
    CHECK_THROWS_AS(integral(10.0), std::invalid_argument);
}

TEST_CASE("cumulative integral of the identity regression is theta^2/2") {
    std::vector<Observation> obs;
    for (int i = 0; i <= 400; ++i) {
        const double x = -3.0 + 6.0 * i / 400.0;
        obs.push_back({{x}, x, true});
    }
    const Dataset data(std::move(obs));
    const std::vector<double> beta{1.0};
    const KernelSpec k(KernelFamily::gaussian, 0.05);
    for (double theta : {-2.5, -1.0, 0.5, 1.7, 2.5}) {
        const double value = spef::cum_index_integral(beta, data, k, theta);
        CHECK(std::abs(value / (0.5 * theta * theta) - 1.0) < 0.02);
    }
}

TEST_CASE("beta = 0 collapses the curve to one") {
    const Dataset data = exp1_sample(30, 2.0, 1.0, 5);
    const std::vector<double> zero{0.0};
    const KernelSpec k(KernelFamily::gaussian, 0.5);
    const LfcEvaluator f(zero, data, k, k);
    for (double y : {-1.0, 0.0, 1.3, 3.0}) CHECK(f(y) == doctest::Approx(1.0).epsilon(1e-14));
    for (std::size_t i = 0; i < data.size(); ++i) CHECK(f.at_sample(i) == doctest::Approx(1.0).epsilon(1e-14));
}

TEST_CASE("n = 3 brute-force oracle") {
    const Dataset data = toy3();
    const std::vector<double> beta{0.9};
    const KernelSpec kx(KernelFamily::gaussian, 0.6);
    const KernelSpec ky(KernelFamily::gaussian, 0.7);
    const LfcEvaluator f(beta, data, kx, ky);

    const auto index = data.index(beta);
    const auto ys = data.responses();
    const double lo = *std::min_element(index.begin(), index.end());
    const double hi = *std::max_element(index.begin(), index.end());
    const double step = (std::max(hi, 0.0) - std::min(lo, 0.0)) / 400.0;
    std::vector<double> B;
    for (double t : index) B.push_back(oracle::lattice_integral(index, ys, 0.6, step, t));
    for (std::size_t i = 0; i < 3; ++i) CHECK(std::abs(f.log_denominators()[i] - B[i]) < 1e-12);

    for (double y : {-1.0, 0.0, 0.5, 1.1, 2.5}) {
        CHECK(std::abs(f(y) - oracle::lfc(index, B, ys, 0.7, y)) < 1e-10);
    }
    for (std::size_t k = 0; k < 3; ++k) {
        CHECK(std::abs(f.at_sample(k) - oracle::lfc(index, B, ys, 0.7, ys[k], static_cast<long>(k))) < 1e-10);
        CHECK(spef::lfc_at(f, ys[k], k) == f.at_sample(k));
    }
}

TEST_CASE("full-sample leave-one-out weights keep the full denominator") {
    const Dataset data = toy3();
    const std::vector<double> beta{0.9};
    const KernelSpec k(KernelFamily::gaussian, 0.7);
    const LfcEvaluator renorm(beta, data, k, k, {spef::LooWeights::renormalized, 400});
    const LfcEvaluator full(beta, data, k, k, {spef::LooWeights::full_sample, 400});
    const auto ys = data.responses();
    for (std::size_t j = 0; j < 3; ++j) {
        double all = 0.0;
        double others = 0.0;
        for (std::size_t i = 0; i < 3; ++i) {
            all += oracle::gauss(ys[i] - ys[j], 0.7);
            if (i != j) others += oracle::gauss(ys[i] - ys[j], 0.7);
        }
        CHECK(std::abs(full.at_sample(j) / renorm.at_sample(j) - all / others) < 1e-12);
    }
}

TEST_CASE("scaling every denominator scales the curve") {
    const Dataset data = exp1_sample(25, 2.0, 1.0, 8);
    const std::vector<double> beta{1.7};
    const KernelSpec k(KernelFamily::gaussian, 0.5);
    const LfcEvaluator f(beta, data, k, k);
    const double c = 3.25;
    std::vector<double> logs(f.log_denominators().begin(), f.log_denominators().end());
    for (double& b : logs) b += std::log(c);
    const auto g = LfcEvaluator::from_parts(std::vector<double>(f.index().begin(), f.index().end()), logs,
                                            f.shared_smoother());
    for (double y : {-0.5, 1.0, 2.5, 4.0}) CHECK(std::abs(g(y) / f(y) / c - 1.0) < 1e-12);
    const auto sf = f.standardize();
    const auto sg = g.standardize();
    for (double y : {-0.5, 1.0, 2.5}) CHECK(std::abs(sf(y) / sg(y) - 1.0) < 1e-12);
}

TEST_CASE("curve is positive and the weights are normalised") {
    const Dataset data = exp1_sample(40, 2.0, 1.0, 9);
    const KernelSpec k(KernelFamily::gaussian, 0.45);
    const spef::ResponseSmoother smoother(data.responses(), k);
    for (double y : {-2.0, 0.0, 1.0, 3.5}) {
        const auto w = smoother.log_weights(y);
        double total = 0.0;
        for (double v : w) total += std::exp(v);
        CHECK(std::abs(total - 1.0) < 1e-13);
    }
    for (std::size_t j = 0; j < data.size(); ++j) {
        double total = 0.0;
        for (double v : smoother.log_loo_weights(j)) total += std::exp(v);
        CHECK(std::abs(total - 1.0) < 1e-13);
        CHECK(smoother.log_loo_weights(j)[j] == -INFINITY);
    }
    const std::vector<double> beta{2.3};
    const LfcEvaluator f(beta, data, k, k);
    for (double y = -2.0; y <= 6.0; y += 0.25) CHECK(f(y) > 0.0);
    CHECK_THROWS_AS(f(500.0), spef::NumericalError);
}

TEST_CASE("standardization") {
    // beta = 0 and uniform responses: the normalizer estimates the support length.
    std::mt19937_64 rng(21);
    std::uniform_real_distribution<double> u(0.0, 1.0);
    std::vector<Observation> obs;
    for (int i = 0; i < 2000; ++i) obs.push_back({{u(rng)}, u(rng), true});
    const Dataset data(std::move(obs));
    const std::vector<double> zero{0.0};
    const KernelSpec k(KernelFamily::gaussian, 0.02);
    const LfcEvaluator f(zero, data, k, k);
    CHECK(std::abs(f.normalizer() - 1.0) < 0.05);

    // Gaussian check at the truth.
    const Dataset g = exp1_sample(400, 2.0, 1.0, 31);
    const std::vector<double> beta{2.0};
    const KernelSpec kx(KernelFamily::gaussian, spef::bandwidth_rule(g.index(beta)));
    const KernelSpec ky(KernelFamily::gaussian, spef::bandwidth_rule(g.responses()));
    const auto fhat = LfcEvaluator(beta, g, kx, ky).standardize();
    CHECK(std::abs(fhat(0.0) - 1.0 / std::sqrt(2.0 * std::numbers::pi)) < 0.05);
}
