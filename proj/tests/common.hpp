#pragma once

#include "equistop/analytic_gbm.hpp"
#include "equistop/core_model.hpp"

#include <cstdint>
#include <random>

namespace equistop::testing {

// K = 10, r = 0.05, sigma in [0.2, 0.4], alpha = 0.5.
inline gbm::PutGbmProblem benchmark(double alpha = 0.5) {
    gbm::PutGbmProblem p{};
    p.strike = 10.0;
    p.discount = 0.05;
    p.sigma_band = {0.2, 0.4};
    p.alpha = alpha;
    return p;
}

// Benchmark grid over [K/100, 10K].
inline GridPtr benchmark_grid(int n_points = 2000) {
    return build_grid(StateInterval::positive_half_line(), n_points, std::pair{0.1, 100.0});
}

inline std::vector<bool> random_mask(std::mt19937_64& rng, std::size_t n, double p_true) {
    std::bernoulli_distribution coin(p_true);
    std::vector<bool> mask(n);
    for (std::size_t i = 0; i < n; ++i) mask[i] = coin(rng);
    return mask;
}

}  // namespace equistop::testing
