#pragma once

#include <cstdint>

#include "part/core.hpp"
#include "part/smoothing.hpp"

namespace part {

// Each output row averages one draw per subset, chosen independently and
// uniformly with replacement.
DrawMatrix average_aggregate(const SampleSet& samples, std::size_t n, std::uint64_t seed);

// Consensus Monte Carlo: as average_aggregate, but each subset draw is
// weighted by that subset's inverse sample covariance W_i, giving
// (sum_i W_i)^-1 sum_i W_i theta_i.
DrawMatrix weighted_aggregate(const SampleSet& samples, std::size_t n, std::uint64_t seed,
                              const LocalGaussianConfig& lg = {});

// Product of per-subset moment-matched Gaussians.
GaussianDist parametric_product(const SampleSet& samples, const LocalGaussianConfig& lg = {});

// n draws from parametric_product.
DrawMatrix parametric_aggregate(const SampleSet& samples, std::size_t n, std::uint64_t seed,
                                const LocalGaussianConfig& lg = {});

}  // namespace part
