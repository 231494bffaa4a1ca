#pragma once

// Test-only brute-force oracles, kept independent of the library paths they
// check: plain recursion, long-double accumulation, no tables, no kernels.

#include <cmath>
#include <cstdint>
#include <vector>

namespace klconc::test_oracles {

// All outcomes of a multinomial(n, p) with their probabilities.
struct Outcome {
    std::vector<std::int64_t> counts;
    long double prob;
};

inline void enumerate_rec(std::int64_t remaining, std::size_t cell,
                          const std::vector<double>& p, std::vector<std::int64_t>& counts,
                          std::vector<Outcome>& out) {
    if (cell + 1 == p.size()) {
        counts[cell] = remaining;
        long double log_prob = std::lgammal(static_cast<long double>(
            std::accumulate(counts.begin(), counts.end(), std::int64_t{0}) + 1));
        bool possible = true;
        for (std::size_t i = 0; i < p.size(); ++i) {
            log_prob -= std::lgammal(static_cast<long double>(counts[i]) + 1.0L);
            if (counts[i] > 0) {
                if (p[i] == 0.0) {
                    possible = false;
                    break;
                }
                log_prob += static_cast<long double>(counts[i]) *
                            std::logl(static_cast<long double>(p[i]));
            }
        }
        if (possible) out.push_back({counts, std::expl(log_prob)});
        return;
    }
    for (std::int64_t c = 0; c <= remaining; ++c) {
        counts[cell] = c;
        enumerate_rec(remaining - c, cell + 1, p, counts, out);
    }
}

inline std::vector<Outcome> enumerate_outcomes(std::int64_t n, const std::vector<double>& p) {
    std::vector<Outcome> out;
    std::vector<std::int64_t> counts(p.size(), 0);
    enumerate_rec(n, 0, p, counts, out);
    return out;
}

inline long double kl_of_outcome(const std::vector<std::int64_t>& counts, std::int64_t n,
                                 const std::vector<double>& p) {
    long double d = 0.0L;
    for (std::size_t i = 0; i < p.size(); ++i) {
        if (counts[i] == 0) continue;
        long double phat = static_cast<long double>(counts[i]) / static_cast<long double>(n);
        d += phat * std::logl(phat / static_cast<long double>(p[i]));
    }
    return d;
}

// E[D(phat || p)] by direct enumeration.
inline long double mean_kl(std::int64_t n, const std::vector<double>& p) {
    long double acc = 0.0L;
    for (const auto& outcome : enumerate_outcomes(n, p)) {
        acc += outcome.prob * kl_of_outcome(outcome.counts, n, p);
    }
    return acc;
}

// E[(Z - center)^m] by direct enumeration (Z = 2n D).
inline long double moment_z(std::int64_t n, const std::vector<double>& p, int m,
                            long double center) {
    long double acc = 0.0L;
    for (const auto& outcome : enumerate_outcomes(n, p)) {
        long double z = 2.0L * static_cast<long double>(n) *
                        kl_of_outcome(outcome.counts, n, p);
        long double pw = 1.0L;
        for (int j = 0; j < m; ++j) pw *= (z - center);
        acc += outcome.prob * pw;
    }
    return acc;
}

// P(Z >= t) by direct enumeration.
inline long double tail_z(std::int64_t n, const std::vector<double>& p, double t) {
    long double acc = 0.0L;
    for (const auto& outcome : enumerate_outcomes(n, p)) {
        long double z = 2.0L * static_cast<long double>(n) *
                        kl_of_outcome(outcome.counts, n, p);
        if (z >= static_cast<long double>(t)) acc += outcome.prob;
    }
    return acc;
}

// B_n(phi, x) by the defining sum, long double throughout.
inline long double bernstein_phi_direct(std::int64_t n, double x) {
    long double acc = 0.0L;
    long double lx = static_cast<long double>(x);
    for (std::int64_t j = 0; j <= n; ++j) {
        long double ratio = static_cast<long double>(j) / static_cast<long double>(n);
        long double phi = (j == 0 || j == n) ? 0.0L : -ratio * std::logl(ratio);
        if (phi == 0.0L) continue;
        long double log_term = std::lgammal(static_cast<long double>(n + 1)) -
                               std::lgammal(static_cast<long double>(j + 1)) -
                               std::lgammal(static_cast<long double>(n - j + 1)) +
                               static_cast<long double>(j) * std::logl(lx) +
                               static_cast<long double>(n - j) * std::logl(1.0L - lx);
        acc += phi * std::expl(log_term);
    }
    return acc;
}

}  // namespace klconc::test_oracles
