#include "spef/rank_surrogate.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace spef {

RankObjective::RankObjective(const Dataset& data) {
    const Dataset observed = data.observed_subset();
    n_ = observed.size();
    dim_ = observed.dim();
    if (n_ < 2) {
        throw std::invalid_argument("rank surrogate needs at least two observed pairs");
    }
    const std::size_t pairs = n_ * (n_ - 1) / 2;
    dy_.reserve(pairs);
    dx_.reserve(pairs * dim_);
    for (std::size_t i = 0; i < n_; ++i) {
        for (std::size_t j = i + 1; j < n_; ++j) {
            dy_.push_back(observed[i].y - observed[j].y);
            for (std::size_t c = 0; c < dim_; ++c) {
                dx_.push_back(observed[i].x[c] - observed[j].x[c]);
            }
        }
    }
}

double RankObjective::operator()(std::span<const double> beta) const {
    if (beta.size() != dim_) {
        throw std::invalid_argument("beta has the wrong dimension");
    }
    double total = 0.0;
    for (std::size_t p = 0; p < dy_.size(); ++p) {
        double lin = 0.0;
        for (std::size_t c = 0; c < dim_; ++c) lin += beta[c] * dx_[p * dim_ + c];
        const double e = std::clamp(-dy_[p] * lin, -kRankExponentClamp, kRankExponentClamp);
        total += std::log1p(std::exp(e));
    }
    return -total / static_cast<double>(dy_.size());
}

double rank_loglik(const RankObjective& objective, std::span<const double> beta) {
    return objective(beta);
}

FitResult rank_fit(const RankObjective& objective, const SearchConfig& search) {
    search.box.validate();
    if (search.box.dim() != objective.dim()) {
        throw std::invalid_argument("search box dimension does not match the covariates");
    }
    auto opt = maximize([&](std::span<const double> beta) { return objective(beta); }, search);
    FitResult out;
    out.beta_hat = std::move(opt.argmax);
    out.loglik_at_max = opt.value;
    out.trace = std::move(opt.trace);
    out.converged = opt.converged;
    return out;
}

}  // namespace spef
