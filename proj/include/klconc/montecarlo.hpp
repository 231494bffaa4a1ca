#pragma once

// Seeded, reproducible sampling of Z for instances too large to enumerate.
//
// Randomness is counter-based (see rng.hpp): draw i is a pure function of
// (seed, i), and estimates reduce over fixed 4096-draw blocks, so results are
// bit-identical for a given (seed, m, instance) regardless of thread count.

#include <cstdint>

#include "klconc/bounds.hpp"
#include "klconc/core_math.hpp"

namespace klconc {

struct McEstimate {
    double estimate = 0.0;
    double std_error = 0.0;
    std::int64_t samples = 0;
    std::uint64_t seed = 0;
};

// Inverse-CDF binomial sampling: values are accumulated mode-outward in
// decreasing-pmf order until the cdf passes u.  Exposed for the sampling tests.
std::int64_t binomial_inverse(std::int64_t n, double r, double u);

// One multinomial outcome via the conditional-binomial chain; stage j of draw
// `index` consumes uniform01(seed, index, j, kStreamMultinomial).
Counts multinomial_draw(std::int64_t n, const Distribution& p, std::uint64_t seed,
                        std::uint64_t index);

// Fraction of m draws with Z >= t; binomial standard error.
McEstimate mc_tail(std::int64_t n, const Distribution& p, double t, std::int64_t m,
                   std::uint64_t seed, int threads = 1);

// Sample moment of (Z - c)^q with c = 2*g(n,p) when centered (the exact mean,
// never the sample mean) and c = 0 otherwise.  Centered needs m >= 2.
McEstimate mc_moment(std::int64_t n, const Distribution& p, int q, bool centered,
                     std::int64_t m, std::uint64_t seed, int threads = 1);

// log of the sample mean of exp(t*(Z - 2g(n,p))); delta-method standard error,
// O(1/m) bias.  Exactly 0 at t = 0.  Requires m >= 100.
McEstimate mc_log_mgf(std::int64_t n, const Distribution& p, double t, std::int64_t m,
                      std::uint64_t seed, int threads = 1);

// Empirical frequency of |Z - 2g(n,p)| <= subgamma_tail_eps(params, delta).
McEstimate mc_coverage(std::int64_t n, const Distribution& p, double delta,
                       SubGammaParams params, std::int64_t m, std::uint64_t seed,
                       int threads = 1);

}  // namespace klconc
