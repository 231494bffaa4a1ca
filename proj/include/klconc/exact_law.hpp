#pragma once

// Brute-force oracle: enumerate every multinomial outcome at small (n,k) to
// obtain the exact law of Z = 2n*D(phat||p), then read moments, tails and the
// (centered) log-MGF off the finite support.

#include <cstdint>
#include <stdexcept>
#include <string>
#include <vector>

#include "klconc/core_math.hpp"

namespace klconc {

class CapExceededError : public std::runtime_error {
  public:
    CapExceededError(std::int64_t support_size, std::int64_t cap)
        : std::runtime_error("support size " + std::to_string(support_size) +
                             " exceeds outcome cap " + std::to_string(cap)),
          support_size_(support_size),
          cap_(cap) {}

    std::int64_t support_size() const { return support_size_; }
    std::int64_t cap() const { return cap_; }

  private:
    std::int64_t support_size_;
    std::int64_t cap_;
};

// Finite support of Z with log-probabilities, sorted ascending by z.
// Atoms closer than the merge tolerance were combined with log-sum-exp.
class ExactLaw {
  public:
    static constexpr double kMergeTolerance = 1e-12;

    ExactLaw(std::vector<double> z_values, std::vector<double> log_probs, std::int64_t n,
             Distribution p, bool merged);

    const std::vector<double>& z_values() const { return z_; }
    const std::vector<double>& log_probs() const { return log_prob_; }
    std::int64_t size() const { return static_cast<std::int64_t>(z_.size()); }
    std::int64_t n() const { return n_; }
    const Distribution& p() const { return p_; }
    bool merged() const { return merged_; }

  private:
    std::vector<double> z_;
    std::vector<double> log_prob_;
    std::int64_t n_;
    Distribution p_;
    bool merged_;
};

// Number of compositions of n into k nonnegative parts, C(n+k-1, k-1),
// saturated at INT64_MAX when it does not fit.
std::int64_t composition_count(std::int64_t n, int k);

// Enumerates the full law.  Zero-probability cells are dropped first; equal Z
// values (within the merge tolerance) are combined.  Throws CapExceededError
// when the support of the reduced alphabet exceeds outcome_cap.
ExactLaw enumerate_law(std::int64_t n, const Distribution& p,
                       std::int64_t outcome_cap = 10'000'000);

// sum_i prob_i * z_i^m, or the central version after an exact mean pass.
double law_moment(const ExactLaw& law, int m, bool centered);

// P(Z >= t); closed inequality, exactly 1 for t <= 0.
double law_tail(const ExactLaw& law, double t);

// psi(t) = log E[exp(t*(Z - centering))]; exactly 0 at t = 0.
double law_log_mgf(const ExactLaw& law, double t, bool centered);

}  // namespace klconc
