#include "klconc/bounds.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

#include "klconc/exact_law.hpp"

namespace klconc {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

void check_alpha(int k, double alpha, const char* where) {
    if (k < 2) throw std::domain_error(std::string(where) + ": k >= 2 required");
    if (!(alpha > 0.0 && alpha <= 1.0 / static_cast<double>(k))) {
        throw std::domain_error(std::string(where) + ": alpha must lie in (0, 1/k]");
    }
}

double pow4(double x) {
    double x2 = x * x;
    return x2 * x2;
}

double factorial_double(int q) {
    double f = 1.0;
    for (int i = 2; i <= q; ++i) f *= static_cast<double>(i);
    return f;
}

}  // namespace

double ConstantsConfig::C_main() const {
    if (C_main_override) return *C_main_override;
    return std::max(3.0 * C2 + 288.0 * Cg, 3.0 * C2 + 36.0 * Cg_prime);
}

double ConstantsConfig::c_main() const {
    if (c_main_override) return *c_main_override;
    return std::max({3.0 * c2, 6.0 * cg, 6.0 * cg_prime});
}

const BoundEntry* BoundReport::find(const std::string& name) const {
    for (const auto& entry : entries) {
        if (entry.name == name) return &entry;
    }
    return nullptr;
}

double sanov_tail(std::int64_t n, int k, double t) {
    if (n < 1 || k < 2) throw std::domain_error("sanov_tail: n >= 1 and k >= 2 required");
    if (!(t >= 0.0)) throw std::domain_error("sanov_tail: t >= 0 required");
    std::int64_t count = composition_count(n, k);
    if (count < INT64_MAX) {
        return static_cast<double>(count) * std::exp(-0.5 * t);
    }
    double log_count = std::lgamma(static_cast<double>(n + k)) -
                       std::lgamma(static_cast<double>(n + 1)) -
                       std::lgamma(static_cast<double>(k));
    return std::exp(log_count - 0.5 * t);
}

bool agrawal_applicable(int k, double t) {
    return k >= 2 && t >= 2.0 * static_cast<double>(k - 1);
}

double agrawal_tail(int k, double t) {
    if (k < 2) throw std::domain_error("agrawal_tail: k >= 2 required");
    if (!agrawal_applicable(k, t)) {
        throw std::domain_error("agrawal_tail: requires t >= 2(k-1)");
    }
    double boundary = 2.0 * static_cast<double>(k - 1);
    double log_val =
        static_cast<double>(k - 1) * (1.0 + std::log(t) - std::log(boundary)) - 0.5 * t;
    return std::exp(log_val);
}

double agrawal_delta_bound(int k, double delta, const ConstantsConfig& cfg) {
    if (k < 2) throw std::domain_error("agrawal_delta_bound: k >= 2 required");
    if (!(delta > 0.0 && delta <= 1.0)) {
        throw std::domain_error("agrawal_delta_bound: delta must lie in (0,1]");
    }
    return cfg.C_agrawal_delta * (static_cast<double>(k) + std::log(1.0 / delta));
}

double mardia_chebyshev(int k, double delta, const ConstantsConfig& cfg) {
    if (k < 1) throw std::domain_error("mardia_chebyshev: k >= 1 required");
    if (!(delta > 0.0 && delta < 1.0 + 1e-15)) {
        throw std::domain_error("mardia_chebyshev: delta must lie in (0,1)");
    }
    return cfg.mardia_constant * std::sqrt(static_cast<double>(k) / delta);
}

double subgamma_tail_eps(SubGammaParams params, double delta) {
    if (!(delta > 0.0 && delta < 2.0)) {
        throw std::domain_error("subgamma_tail_eps: delta must lie in (0,2)");
    }
    if (!(params.nu >= 0.0 && params.c >= 0.0)) {
        throw std::domain_error("subgamma_tail_eps: nu, c must be nonnegative");
    }
    double t = std::log(2.0 / delta);
    return std::sqrt(2.0 * params.nu * t) + params.c * t;
}

double subgamma_moment_bound(SubGammaParams params, int q) {
    if (q < 1) throw std::domain_error("subgamma_moment_bound: q >= 1 required");
    if (!(params.nu >= 0.0 && params.c >= 0.0)) {
        throw std::domain_error("subgamma_moment_bound: nu, c must be nonnegative");
    }
    double term1 = factorial_double(q) * std::pow(8.0 * params.nu, q);
    double term2 = factorial_double(2 * q) * std::pow(4.0 * params.c, 2 * q);
    double value = term1 + term2;
    if (!std::isfinite(value)) {
        throw std::overflow_error("subgamma_moment_bound: value exceeds double range");
    }
    return value;
}

SubGammaParams center_from_moments(double A, double B) {
    if (!(A >= 0.0 && B >= 0.0)) {
        throw std::domain_error("center_from_moments: A, B must be nonnegative");
    }
    return {24.0 * A + 36.0 * B * B, 6.0 * B};
}

SubGammaParams center_from_tails(double A, double B) {
    if (!(A >= 0.0 && B >= 0.0)) {
        throw std::domain_error("center_from_tails: A, B must be nonnegative");
    }
    return {1536.0 * A + 864.0 * B * B, 144.0 * B};
}

MainParams main_theorem_params(int k, double alpha, const ConstantsConfig& cfg) {
    check_alpha(k, alpha, "main_theorem_params");
    double v = cfg.C_main() * static_cast<double>(k) * pow4(std::log(k / alpha));
    return {v, cfg.c_main()};
}

double rho(double eps, double v, double c) {
    if (!(v > 0.0 && c > 0.0)) throw std::domain_error("rho: v, c must be positive");
    if (!(eps >= 0.0)) throw std::domain_error("rho: eps >= 0 required");
    return 2.0 * std::exp(-std::min(eps * eps / v, eps / c));
}

double centered_moment_bound_main(int k, double alpha, int m, const ConstantsConfig& cfg,
                                  double constant) {
    if (m < 1) throw std::domain_error("centered_moment_bound_main: m >= 1 required");
    MainParams mp = main_theorem_params(k, alpha, cfg);
    return constant * (std::sqrt(static_cast<double>(m) * mp.v) +
                       static_cast<double>(m) * mp.c);
}

double raw_moment_bound(int k, int m, double constant) {
    if (k < 2 || m < 1) throw std::domain_error("raw_moment_bound: k >= 2, m >= 1 required");
    return constant * static_cast<double>(k + m);
}

double bdd_diff_variance(std::int64_t n, double alpha) {
    if (n < 1) throw std::domain_error("bdd_diff_variance: n >= 1 required");
    if (!(alpha > 0.0 && alpha <= 0.5)) {
        throw std::domain_error("bdd_diff_variance: alpha must lie in (0, 1/2]");
    }
    double ratio = static_cast<double>(n) / alpha;
    if (!(ratio > 1.0)) throw std::domain_error("bdd_diff_variance: n/alpha must exceed 1");
    double lg = std::log(ratio);
    return 27.0 * static_cast<double>(n) * lg * lg;
}

double disc_grad_bound(std::int64_t n, int k) {
    if (n < 4) throw std::domain_error("disc_grad_bound: n >= 4 required");
    if (k < 0) throw std::domain_error("disc_grad_bound: k >= 0 required");
    double nd = static_cast<double>(n);
    double log_n = std::log(nd);
    return std::sqrt(static_cast<double>(k)) * log_n / (nd * std::sqrt(nd)) +
           8.0 * static_cast<double>(k) * log_n * log_n / (nd * nd);
}

std::int64_t g_half_df_threshold(int k, double alpha) {
    check_alpha(k, alpha, "g_half_df_threshold");
    double raw = 16.0 * static_cast<double>(k) * static_cast<double>(k) /
                 (alpha * alpha * std::sqrt(alpha));
    return static_cast<std::int64_t>(std::ceil(raw));
}

bool g_half_df_applies(std::int64_t n, int k, double alpha) {
    return n >= g_half_df_threshold(k, alpha);
}

RangeThresholds range_thresholds(int k, double alpha) {
    check_alpha(k, alpha, "range_thresholds");
    double km1 = static_cast<double>(k - 1);
    double log_km1 = k == 2 ? 0.0 : std::log(km1);
    double denom = alpha * alpha * std::sqrt(alpha);
    return {4096.0 * km1 * log_km1 * log_km1, 128.0 * km1 * km1 / denom,
            48.0 * static_cast<double>(k) * static_cast<double>(k) / denom};
}

BoundReport best_tail(std::int64_t n, int k, double alpha, double t,
                      const ConstantsConfig& cfg, const Distribution* p) {
    if (n < 1 || k < 2) throw std::domain_error("best_tail: n >= 1 and k >= 2 required");
    if (!(t >= 0.0)) throw std::domain_error("best_tail: t >= 0 required");

    BoundReport report;
    report.n = n;
    report.k = k;
    report.alpha = alpha;
    report.t = t;

    auto add = [&](std::string name, double raw, bool applicable, std::string reason) {
        BoundEntry entry;
        entry.name = std::move(name);
        entry.raw_value = raw;
        entry.value = applicable ? std::min(raw, 1.0) : 1.0;
        entry.applicable = applicable;
        entry.reason = std::move(reason);
        report.entries.push_back(std::move(entry));
    };

    add("sanov", sanov_tail(n, k, t), true, "");

    if (agrawal_applicable(k, t)) {
        add("agrawal", agrawal_tail(k, t), true, "");
    } else {
        add("agrawal", kInf, false, "t < 2(k-1)");
    }

    if (p == nullptr) {
        add("main_rho", kInf, false, "p not supplied");
    } else if (!(alpha > 0.0 && alpha <= 1.0 / static_cast<double>(k))) {
        add("main_rho", kInf, false, "alpha outside (0, 1/k]");
    } else {
        MainParams mp = main_theorem_params(k, alpha, cfg);
        double mean = 2.0 * g_func(n, *p);
        double eps = std::max(t - mean, 0.0);
        add("main_rho", rho(eps, mp.v, mp.c), true, "");
    }

    double best = kInf;
    const BoundEntry* best_entry = nullptr;
    for (const auto& entry : report.entries) {
        if (entry.applicable && entry.raw_value < best) {
            best = entry.raw_value;
            best_entry = &entry;
        }
    }
    report.best_name = best_entry ? best_entry->name : "none";
    report.best_value = best_entry ? std::min(best, 1.0) : 1.0;
    return report;
}

ThresholdMethod parse_threshold_method(const std::string& name) {
    if (name == "sanov") return ThresholdMethod::sanov;
    if (name == "agrawal") return ThresholdMethod::agrawal;
    if (name == "main") return ThresholdMethod::main;
    if (name == "best") return ThresholdMethod::best;
    throw std::invalid_argument("unknown threshold method: " + name);
}

const char* threshold_method_name(ThresholdMethod method) {
    switch (method) {
        case ThresholdMethod::sanov: return "sanov";
        case ThresholdMethod::agrawal: return "agrawal";
        case ThresholdMethod::main: return "main";
        case ThresholdMethod::best: return "best";
    }
    return "?";
}

namespace {

// Smallest t with bound(t) <= delta on [lower, inf); bound must be
// nonincreasing there.  Keeps bound(lo) > delta >= bound(hi) and shrinks the
// bracket below both the 1e-9 relative and 1e-7 absolute tolerance.
template <typename Bound>
double invert_monotone_bound(Bound&& bound, double lower, double delta, int k) {
    if (bound(lower) <= delta) return lower;
    double hi = std::max(lower, 2.0 * (static_cast<double>(k) + std::log(1.0 / delta) + 1.0));
    int doublings = 0;
    while (bound(hi) > delta) {
        hi *= 2.0;
        if (++doublings > 200) {
            throw std::logic_error("threshold_for_test: bound never drops below delta");
        }
    }
    double lo = lower;
    for (int iter = 0; iter < 200; ++iter) {
        if (hi - lo <= std::min(1e-9 * std::max(hi, 1.0), 1e-7)) break;
        double mid = 0.5 * (lo + hi);
        if (bound(mid) <= delta) {
            hi = mid;
        } else {
            lo = mid;
        }
    }
    return hi;
}

double sanov_threshold(std::int64_t n, int k, double delta) {
    std::int64_t count = composition_count(n, k);
    double log_count = count < INT64_MAX
                           ? std::log(static_cast<double>(count))
                           : std::lgamma(static_cast<double>(n + k)) -
                                 std::lgamma(static_cast<double>(n + 1)) -
                                 std::lgamma(static_cast<double>(k));
    double t = 2.0 * (log_count - std::log(delta));
    t = std::max(t, 0.0);
    // Closed form can land an ulp above delta; nudge until the guarantee holds.
    while (sanov_tail(n, k, t) > delta) {
        t = std::nextafter(t, kInf);
    }
    return t;
}

}  // namespace

double threshold_for_test(std::int64_t n, int k, double alpha, double delta,
                          ThresholdMethod method, const ConstantsConfig& cfg) {
    if (!(delta > 0.0 && delta <= 1.0)) {
        throw std::domain_error("threshold_for_test: delta must lie in (0,1]");
    }
    switch (method) {
        case ThresholdMethod::sanov:
            return sanov_threshold(n, k, delta);
        case ThresholdMethod::agrawal: {
            double lower = 2.0 * static_cast<double>(k - 1);
            return invert_monotone_bound([&](double t) { return agrawal_tail(k, t); }, lower,
                                         delta, k);
        }
        case ThresholdMethod::main: {
            MainParams mp = main_theorem_params(k, alpha, cfg);
            double mean_bound = 2.0 * static_cast<double>(k - 1);
            auto bound = [&](double t) {
                return rho(std::max(t - mean_bound, 0.0), mp.v, mp.c);
            };
            return invert_monotone_bound(bound, mean_bound, delta, k);
        }
        case ThresholdMethod::best: {
            double best = sanov_threshold(n, k, delta);
            best = std::min(best, threshold_for_test(n, k, alpha, delta,
                                                     ThresholdMethod::agrawal, cfg));
            best = std::min(best, threshold_for_test(n, k, alpha, delta,
                                                     ThresholdMethod::main, cfg));
            return best;
        }
    }
    throw std::logic_error("threshold_for_test: unreachable");
}

}  // namespace klconc
