#pragma once

// Closed-form tail, moment and MGF-envelope inequalities for Z, plus the
// sub-Gamma toolkit, a best-bound selector and a test-threshold solver.
//
// Leading constants that the source inequalities leave unspecified live in
// ConstantsConfig and are never asserted as tight; assertions elsewhere only
// ever test the proved direction with the configured constant.

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "klconc/core_math.hpp"

namespace klconc {

// MGF envelope parameters: psi(t) <= nu*t^2 / (2*(1 - c*t)) for |t| <= 1/c.
struct SubGammaParams {
    double nu = 0.0;
    double c = 0.0;
};

struct ConstantsConfig {
    double C2 = 14400.0;            // binary centered MGF: psi <= C2*t^2
    double c2 = 240.0;              // ... for |t| <= 1/c2
    double Cg = 1536.0 * 2048.0;    // g concentration, mid range: psi <= Cg*log^2(n)*t^2
    double cg = 288.0;
    double Cg_prime = 1536.0 * 2048.0;  // large-n g concentration; no numeric value is
    double cg_prime = 288.0;            // given, defaulting to (Cg, cg) is a policy
    double C_agrawal_delta = 400.0;     // Z <= C*(k + log(1/delta)) w.p. 1-delta
    double mardia_constant = 1.0;       // leading constant of the sqrt(k/delta) bound

    // Composed defaults: c = max(3*c2, 6*cg, 6*cg'), C = max(3*C2 + 288*Cg,
    // 3*C2 + 36*Cg'); explicit overrides win.
    std::optional<double> C_main_override;
    std::optional<double> c_main_override;

    double C_main() const;
    double c_main() const;
};

struct BoundEntry {
    std::string name;
    double raw_value = 0.0;   // as evaluated (may exceed 1)
    double value = 0.0;       // clamped to [0,1] for reporting
    bool applicable = false;
    std::string reason;       // why not applicable; empty otherwise
};

struct BoundReport {
    std::int64_t n = 0;
    int k = 0;
    double alpha = 0.0;
    double t = 0.0;
    std::vector<BoundEntry> entries;
    std::string best_name;
    double best_value = 1.0;

    const BoundEntry* find(const std::string& name) const;
};

// P(Z >= t) <= C(n+k-1, k-1) * exp(-t/2).
double sanov_tail(std::int64_t n, int k, double t);

// P(Z >= t) <= (e*t / (2(k-1)))^(k-1) * exp(-t/2), valid for t >= 2(k-1);
// equals 1 exactly at the boundary.  Throws std::domain_error below it.
bool agrawal_applicable(int k, double t);
double agrawal_tail(int k, double t);

// Z <= C*(k + log(1/delta)) with probability 1-delta.
double agrawal_delta_bound(int k, double delta, const ConstantsConfig& cfg = {});

// Z - E[Z] <= constant * sqrt(k/delta) with probability 1-delta.
double mardia_chebyshev(int k, double delta, const ConstantsConfig& cfg = {});

// For X sub-Gamma(nu,c): the eps with P(|X| > eps) <= delta, eps = sqrt(2 nu t) + c t
// at t = log(2/delta).
double subgamma_tail_eps(SubGammaParams params, double delta);

// E[X^(2q)] <= q!(8 nu)^q + (2q)!(4c)^(2q).
double subgamma_moment_bound(SubGammaParams params, int q);

// Centering maps: moment hypotheses (A,B) -> Gamma(24A + 36B^2, 6B);
// tail hypotheses (A,B) -> Gamma(1536A + 864B^2, 144B).
SubGammaParams center_from_moments(double A, double B);
SubGammaParams center_from_tails(double A, double B);

struct MainParams {
    double v = 0.0;  // psi_{Z-E[Z]}(t) <= v*t^2 ...
    double c = 0.0;  // ... for |t| <= 1/c
};

// v = C_main * k * log^4(k/alpha), c = c_main.  Requires alpha in (0, 1/k].
MainParams main_theorem_params(int k, double alpha, const ConstantsConfig& cfg = {});

// rho(eps) = 2*exp(-min(eps^2/v, eps/c)).
double rho(double eps, double v, double c);

// ||Z - E[Z]||_m <= constant * (sqrt(m*v) + m*c) with (v,c) from the main theorem.
double centered_moment_bound_main(int k, double alpha, int m,
                                  const ConstantsConfig& cfg = {}, double constant = 1.0);

// ||Z||_m <= constant * (k + m).
double raw_moment_bound(int k, int m, double constant);

// Bounded differences: psi_{Z-E[Z]}(t) <= 27 n log^2(n/alpha) t^2 for all t.
double bdd_diff_variance(std::int64_t n, double alpha);

// f(n) - f(n+1) <= sqrt(k) log(n)/n^(3/2) + 8 k log^2(n)/n^2 for n >= 4.
double disc_grad_bound(std::int64_t n, int k);

// Smallest n with n >= 16 k^2 / (alpha^2 sqrt(alpha)), the hypothesis under
// which |g(n) - (k-1)/2| <= 1.
std::int64_t g_half_df_threshold(int k, double alpha);
bool g_half_df_applies(std::int64_t n, int k, double alpha);

struct RangeThresholds {
    double r1_end;    // 4096 (k-1) log^2(k-1)
    double r2_end;    // 128 (k-1)^2 / (alpha^2 sqrt(alpha))
    double r3_lemma;  // 48 k^2 / (alpha^2 sqrt(alpha))
};
RangeThresholds range_thresholds(int k, double alpha);

// Evaluates every tail bound at t; the main-theorem entry needs p (for the
// exact mean 2g) and alpha in (0, 1/k].  Inapplicability is data, not error.
BoundReport best_tail(std::int64_t n, int k, double alpha, double t,
                      const ConstantsConfig& cfg = {}, const Distribution* p = nullptr);

enum class ThresholdMethod { sanov, agrawal, main, best };

ThresholdMethod parse_threshold_method(const std::string& name);
const char* threshold_method_name(ThresholdMethod method);

// Smallest t with bound(t) <= delta.  Sanov is inverted in closed form; the
// rest by bisection on the monotone region.  The "main" method translates the
// centered bound by the universal mean bound E[Z] = 2g <= 2(k-1).
double threshold_for_test(std::int64_t n, int k, double alpha, double delta,
                          ThresholdMethod method, const ConstantsConfig& cfg = {});

}  // namespace klconc
