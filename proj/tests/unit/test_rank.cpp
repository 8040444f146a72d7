#include <cmath>
#include <random>
#include <vector>

#include "doctest.h"
#include "spef/rank_surrogate.hpp"

using spef::Dataset;
using spef::Observation;
using spef::RankObjective;

namespace {

Dataset sample(std::size_t n, double sigma, std::uint64_t seed) {
    std::mt19937_64 rng(seed);
    std::normal_distribution<double> z(0.0, 1.0);
    std::vector<Observation> obs;
    for (std::size_t i = 0; i < n; ++i) {
        const double x = 1.0 + z(rng);
        obs.push_back({{x}, 2.0 * x + sigma * z(rng), true});
    }
    return Dataset(std::move(obs));
}

double brute_force(const Dataset& data, double beta) {
    double acc = 0.0;
    std::size_t pairs = 0;
    for (std::size_t i = 0; i < data.size(); ++i) {
        for (std::size_t j = i + 1; j < data.size(); ++j) {
            const double r = (data[i].y - data[j].y) * beta * (data[i].x[0] - data[j].x[0]);
            acc += std::log(1.0 + std::exp(-r));
            ++pairs;
        }
    }
    return -acc / static_cast<double>(pairs);
}

}  // namespace

TEST_CASE("rank_loglik examples") {
    const std::vector<double> zero{0.0};
    const RankObjective any(sample(15, 1.0, 1));
    CHECK(std::abs(spef::rank_loglik(any, zero) + std::log(2.0)) < 1e-12);
    const RankObjective pair(Dataset({{{0.0}, 0.0, true}, {{1.0}, 2.0, true}}));
    const std::vector<double> one{1.0};
    CHECK(std::abs(spef::rank_loglik(pair, one) + std::log1p(std::exp(-2.0))) < 1e-15);
    CHECK(std::abs(std::log1p(std::exp(-2.0)) - 0.12693) < 1e-5);
}

TEST_CASE("rank_loglik matches the pairwise sum and its invariances") {
    const Dataset data = sample(30, 1.0, 2);
    const RankObjective objective(data);
    for (double beta : {-1.0, 0.3, 2.0, 7.5}) {
        const std::vector<double> b{beta};
        const double v = objective(b);
        CHECK(std::abs(v - brute_force(data, beta)) < 1e-12);
        CHECK(v <= 0.0);
    }
    std::vector<Observation> shifted(data.begin(), data.end());
    for (auto& o : shifted) {
        o.x[0] += 5.0;
        o.y -= 3.0;
    }
    const RankObjective moved{Dataset(std::move(shifted))};
    const std::vector<double> b{1.4};
    CHECK(std::abs(moved(b) - objective(b)) < 1e-12);
}

TEST_CASE("concordant data make the surrogate increasing in beta") {
    std::vector<Observation> obs;
    for (int i = 0; i < 12; ++i) obs.push_back({{0.3 * i}, 1.0 + 0.5 * i + 0.01 * i * i, true});
    const RankObjective objective{Dataset(std::move(obs))};
    double previous = objective(std::vector<double>{0.0});
    for (double beta = 0.5; beta <= 50.0; beta += 0.5) {
        const double v = objective(std::vector<double>{beta});
        CHECK(v > previous);
        previous = v;
    }
    CHECK(objective(std::vector<double>{1e6}) <= 0.0);
}

TEST_CASE("rank fit uses the observed subset only") {
    const Dataset data = sample(40, 1.0, 3);
    std::vector<Observation> flagged(data.begin(), data.end());
    for (std::size_t i = 0; i < flagged.size(); i += 3) flagged[i].observed = false;
    const Dataset with_missing(flagged);
    const RankObjective a(with_missing);
    const RankObjective b(with_missing.observed_subset());
    const std::vector<double> beta{1.7};
    CHECK(a(beta) == b(beta));
    const auto result = spef::rank_fit(a, spef::SearchConfig::with_box(1, -250.0, 250.0));
    CHECK_FALSE(result.base.has_value());
    CHECK(std::abs(result.beta_hat[0] - 2.0) < 1.0);
    for (const auto& p : result.trace) CHECK(result.loglik_at_max >= p.value);
}

TEST_CASE("small noise pushes the rank estimate far out") {
    const RankObjective objective(sample(100, std::sqrt(0.05), 4));
    const auto result = spef::rank_fit(objective, spef::SearchConfig::with_box(1, -250.0, 250.0));
    CHECK(result.beta_hat[0] > 10.0);
}
