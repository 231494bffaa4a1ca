#include "klconc/core_math.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>
#include <string>

#include "klconc/kernels.hpp"
#include "klconc/rng.hpp"
#include "klconc/tables.hpp"

namespace klconc {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();
constexpr double kSimplexTol = 1e-12;

// Largest n for which the Bernstein sum is evaluated in full.
constexpr std::int64_t kBernsteinFullSumLimit = 1'000'000;

}  // namespace

Distribution::Distribution(std::vector<double> probs) : probs_(std::move(probs)) {
    if (probs_.size() < 2) {
        throw std::invalid_argument("Distribution: need k >= 2 cells");
    }
    double min_p = kInf;
    for (double p : probs_) {
        if (!(p >= 0.0 && p <= 1.0)) {
            throw std::invalid_argument("Distribution: probabilities must lie in [0,1]");
        }
        min_p = std::min(min_p, p);
    }
    double total = kernels::sum(probs_);
    if (std::abs(total - 1.0) > kSimplexTol) {
        throw std::invalid_argument("Distribution: probabilities sum to " +
                                    std::to_string(total) + ", not 1");
    }
    alpha_ = min_p;
}

Distribution make_uniform(int k) {
    if (k < 2) throw std::invalid_argument("make_uniform: k >= 2 required");
    return Distribution(std::vector<double>(static_cast<std::size_t>(k), 1.0 / k));
}

Distribution make_geometric(int k, double ratio) {
    if (k < 2) throw std::invalid_argument("make_geometric: k >= 2 required");
    if (!(ratio > 0.0 && ratio < 1.0)) {
        throw std::invalid_argument("make_geometric: ratio must lie in (0,1)");
    }
    std::vector<double> w(static_cast<std::size_t>(k));
    double cur = 1.0;
    for (auto& wi : w) {
        wi = cur;
        cur *= ratio;
    }
    double total = kernels::sum(w);
    for (auto& wi : w) wi /= total;
    return Distribution(std::move(w));
}

Distribution make_two_level(int k) {
    if (k < 2) throw std::invalid_argument("make_two_level: k >= 2 required");
    // floor(k/2) heavy cells at three times the mass of the light cells
    int heavy = k / 2;
    double light_mass = 1.0 / (2.0 * heavy + k);
    std::vector<double> p(static_cast<std::size_t>(k), light_mass);
    for (int i = 0; i < heavy; ++i) p[static_cast<std::size_t>(i)] = 3.0 * light_mass;
    return Distribution(std::move(p));
}

Distribution make_dirichlet(int k, std::uint64_t seed) {
    if (k < 2) throw std::invalid_argument("make_dirichlet: k >= 2 required");
    // Flat Dirichlet via normalized exponentials, floored at 0.01/k so the
    // generated grids keep a workable alpha.
    std::vector<double> e(static_cast<std::size_t>(k));
    for (int i = 0; i < k; ++i) {
        double u = rng::uniform01(seed, static_cast<std::uint64_t>(i), 0, rng::kStreamDirichlet);
        e[static_cast<std::size_t>(i)] = -std::log1p(-u);
    }
    double total = kernels::sum(e);
    double floor_mass = 0.01 / k;
    for (auto& v : e) v = std::max(v / total, floor_mass);
    total = kernels::sum(e);
    for (auto& v : e) v /= total;
    return Distribution(std::move(e));
}

Counts::Counts(std::vector<std::int64_t> values) : values_(std::move(values)) {
    n_ = 0;
    for (std::int64_t c : values_) {
        if (c < 0) throw std::invalid_argument("Counts: negative count");
        n_ += c;
    }
    if (n_ < 1) throw std::invalid_argument("Counts: total count must be >= 1");
}

double phi(double x) {
    if (!(x >= 0.0 && x <= 1.0)) {
        throw std::domain_error("phi: argument outside [0,1]");
    }
    if (x == 0.0 || x == 1.0) return 0.0;
    return -x * std::log(x);
}

double binary_kl(double p, double q) {
    if (!(q > 0.0 && q < 1.0)) {
        throw std::domain_error("binary_kl: q must lie strictly inside (0,1)");
    }
    if (!(p >= 0.0 && p <= 1.0)) {
        throw std::domain_error("binary_kl: p outside [0,1]");
    }
    double d = 0.0;
    if (p > 0.0) d += p * std::log(p / q);
    if (p < 1.0) d += (1.0 - p) * std::log((1.0 - p) / (1.0 - q));
    return d < 0.0 ? 0.0 : d;  // Gibbs; negative values are rounding noise
}

double kl_divergence(std::span<const double> p_hat, const Distribution& p) {
    if (static_cast<int>(p_hat.size()) != p.k()) {
        throw std::invalid_argument("kl_divergence: length mismatch");
    }
    double total = 0.0;
    for (double v : p_hat) {
        if (!(v >= 0.0)) throw std::invalid_argument("kl_divergence: negative frequency");
        total += v;
    }
    if (std::abs(total - 1.0) > 1e-9) {
        throw std::invalid_argument("kl_divergence: frequencies do not sum to 1");
    }
    std::vector<double> terms;
    terms.reserve(p_hat.size());
    for (std::size_t i = 0; i < p_hat.size(); ++i) {
        double ph = p_hat[i];
        if (ph == 0.0) continue;
        double pi = p.prob(static_cast<int>(i));
        if (pi == 0.0) return kInf;
        terms.push_back(ph * std::log(ph / pi));
    }
    double d = kernels::sum(terms);
    return d < 0.0 ? 0.0 : d;
}

double z_statistic(const Counts& x, const Distribution& p) {
    if (x.size() != p.k()) {
        throw std::invalid_argument("z_statistic: length mismatch");
    }
    const double n = static_cast<double>(x.n());
    std::vector<double> terms;
    terms.reserve(x.values().size());
    for (std::size_t i = 0; i < x.values().size(); ++i) {
        std::int64_t c = x.values()[i];
        if (c == 0) continue;
        double pi = p.prob(static_cast<int>(i));
        if (pi == 0.0) return kInf;
        terms.push_back(static_cast<double>(c) * std::log(static_cast<double>(c) / (n * pi)));
    }
    double z = 2.0 * kernels::sum(terms);
    return z < 0.0 ? 0.0 : z;
}

ChainParts chain_decompose(const Counts& x, const Distribution& p) {
    const int k = p.k();
    if (k < 3) throw std::domain_error("chain_decompose: k >= 3 required");
    if (x.size() != k) throw std::invalid_argument("chain_decompose: length mismatch");
    double p_last = p.prob(k - 1);
    if (!(p_last < 1.0)) throw std::domain_error("chain_decompose: p_k must be < 1");

    const std::int64_t n = x.n();
    const std::int64_t c_last = x.values()[static_cast<std::size_t>(k - 1)];
    double phat_last = static_cast<double>(c_last) / static_cast<double>(n);
    double binary_part = 2.0 * static_cast<double>(n) * binary_kl(phat_last, p_last);

    if (c_last == n) {
        return {binary_part, 0.0};
    }
    const std::int64_t n_rest = n - c_last;
    std::vector<double> phat_cond(static_cast<std::size_t>(k - 1));
    std::vector<double> p_cond(static_cast<std::size_t>(k - 1));
    const double denom = 1.0 - p_last;
    for (int i = 0; i < k - 1; ++i) {
        phat_cond[static_cast<std::size_t>(i)] =
            static_cast<double>(x.values()[static_cast<std::size_t>(i)]) /
            static_cast<double>(n_rest);
        p_cond[static_cast<std::size_t>(i)] = std::min(p.prob(i) / denom, 1.0);
    }
    double conditional_part =
        2.0 * static_cast<double>(n_rest) * kl_divergence(phat_cond, Distribution(p_cond));
    return {binary_part, conditional_part};
}

namespace {

// Full-sum branch: table-driven terms, one exp per term via the exp_dot kernel.
double bernstein_phi_full(std::int64_t n, double x) {
    auto lfact = tables::log_factorial_table(static_cast<std::size_t>(n) + 1);
    auto logs = tables::log_table(static_cast<std::size_t>(n) + 1);
    const double* lf = lfact->data();
    const double* lg = logs->data();
    const double log_x = std::log(x);
    const double log_1mx = std::log1p(-x);
    const double log_n = lg[n];
    const double lf_n = lf[n];
    const double inv_n = 1.0 / static_cast<double>(n);

    thread_local std::vector<double> logw, val;
    logw.resize(static_cast<std::size_t>(n - 1));
    val.resize(static_cast<std::size_t>(n - 1));
    for (std::int64_t j = 1; j < n; ++j) {
        double jd = static_cast<double>(j);
        logw[static_cast<std::size_t>(j - 1)] =
            lf_n - lf[j] - lf[n - j] + jd * log_x + static_cast<double>(n - j) * log_1mx;
        val[static_cast<std::size_t>(j - 1)] = jd * inv_n * (log_n - lg[j]);
    }
    return kernels::exp_dot(logw, val);
}

// Truncated branch for very large n; per-term lgamma, window covers all mass
// that is representable at double precision.
double bernstein_phi_truncated(std::int64_t n, double x) {
    const double nd = static_cast<double>(n);
    const double mean = nd * x;
    const double sigma = std::sqrt(nd * x * (1.0 - x));
    const double half_width = std::max(12.0 * sigma, 48.0);
    const std::int64_t lo = std::max<std::int64_t>(1, static_cast<std::int64_t>(mean - half_width));
    const std::int64_t hi =
        std::min<std::int64_t>(n - 1, static_cast<std::int64_t>(mean + half_width) + 1);
    if (lo > hi) return 0.0;
    const double log_x = std::log(x);
    const double log_1mx = std::log1p(-x);
    const double log_n = std::log(nd);
    const double lf_n = std::lgamma(nd + 1.0);
    std::vector<double> logw(static_cast<std::size_t>(hi - lo + 1));
    std::vector<double> val(static_cast<std::size_t>(hi - lo + 1));
    for (std::int64_t j = lo; j <= hi; ++j) {
        double jd = static_cast<double>(j);
        logw[static_cast<std::size_t>(j - lo)] = lf_n - std::lgamma(jd + 1.0) -
                                                 std::lgamma(nd - jd + 1.0) + jd * log_x +
                                                 (nd - jd) * log_1mx;
        val[static_cast<std::size_t>(j - lo)] = jd / nd * (log_n - std::log(jd));
    }
    return kernels::exp_dot(logw, val);
}

}  // namespace

double bernstein_phi(std::int64_t n, double x) {
    if (n < 1) throw std::domain_error("bernstein_phi: n >= 1 required");
    if (!(x >= 0.0 && x <= 1.0)) throw std::domain_error("bernstein_phi: x outside [0,1]");
    if (x == 0.0 || x == 1.0) return 0.0;
    if (n == 1) return 0.0;  // phi(0) = phi(1) = 0
    return n <= kBernsteinFullSumLimit ? bernstein_phi_full(n, x)
                                       : bernstein_phi_truncated(n, x);
}

double g_func(std::int64_t n, const Distribution& p) {
    if (n < 1) throw std::domain_error("g_func: n >= 1 required");
    std::vector<double> terms(static_cast<std::size_t>(p.k()));
    for (int i = 0; i < p.k(); ++i) {
        double pi = p.prob(i);
        terms[static_cast<std::size_t>(i)] =
            static_cast<double>(n) * (phi(pi) - bernstein_phi(n, pi));
    }
    double g = kernels::sum(terms);
    return g < 0.0 ? 0.0 : g;
}

double f_func(std::int64_t n, const Distribution& p) {
    return g_func(n, p) / static_cast<double>(n);
}

double chi2_raw_moment(int df, int m) {
    if (df < 1) throw std::domain_error("chi2_raw_moment: df >= 1 required");
    if (m < 0) throw std::domain_error("chi2_raw_moment: m >= 0 required");
    if (m == 0) return 1.0;
    if (m == 1) return static_cast<double>(df);  // Gamma(x+1) = x*Gamma(x)
    double half_df = 0.5 * static_cast<double>(df);
    double log_val = static_cast<double>(m) * std::log(2.0) +
                     std::lgamma(static_cast<double>(m) + half_df) - std::lgamma(half_df);
    if (log_val > 709.0) {
        throw std::overflow_error("chi2_raw_moment: value exceeds double range");
    }
    return std::exp(log_val);
}

}  // namespace klconc
