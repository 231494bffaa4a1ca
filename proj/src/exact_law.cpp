#include "klconc/exact_law.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "klconc/kernels.hpp"
#include "klconc/tables.hpp"

namespace klconc {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

double log_add_exp(double a, double b) {
    if (a == -kInf) return b;
    if (b == -kInf) return a;
    double hi = std::max(a, b);
    double lo = std::min(a, b);
    return hi + std::log1p(std::exp(lo - hi));
}

// Advance c to the next composition of n into c.size() parts (lexicographic,
// starting from (n,0,...,0)); returns false after the last one (0,...,0,n).
bool next_composition(std::vector<std::int64_t>& c, std::int64_t n) {
    const std::size_t k = c.size();
    if (c[k - 1] == n) return false;
    std::size_t j = k - 2;
    while (c[j] == 0) --j;
    std::int64_t tail = c[k - 1];
    c[j] -= 1;
    if (j + 1 == k - 1) {
        c[k - 1] = tail + 1;
    } else {
        c[j + 1] = tail + 1;
        for (std::size_t i = j + 2; i < k; ++i) c[i] = 0;
    }
    return true;
}

}  // namespace

ExactLaw::ExactLaw(std::vector<double> z_values, std::vector<double> log_probs,
                   std::int64_t n, Distribution p, bool merged)
    : z_(std::move(z_values)), log_prob_(std::move(log_probs)), n_(n), p_(std::move(p)),
      merged_(merged) {
    if (z_.size() != log_prob_.size() || z_.empty()) {
        throw std::invalid_argument("ExactLaw: malformed atom arrays");
    }
    for (std::size_t i = 0; i < z_.size(); ++i) {
        if (!(z_[i] >= 0.0)) throw std::invalid_argument("ExactLaw: negative z value");
        if (i > 0 && z_[i] < z_[i - 1]) {
            throw std::invalid_argument("ExactLaw: atoms not sorted by z");
        }
    }
    double norm = kernels::log_sum_exp(log_prob_);
    if (std::abs(norm) > 1e-10) {
        throw std::invalid_argument("ExactLaw: probabilities sum to exp(" +
                                    std::to_string(norm) + "), not 1");
    }
}

std::int64_t composition_count(std::int64_t n, int k) {
    // C(n+k-1, k-1) built as C(n+i, i) for i = 1..k-1; every step divides exactly.
    unsigned __int128 count = 1;
    constexpr unsigned __int128 kMax = static_cast<unsigned __int128>(INT64_MAX);
    for (std::int64_t i = 1; i <= k - 1; ++i) {
        unsigned __int128 factor = static_cast<unsigned __int128>(n + i);
        if (count > (~static_cast<unsigned __int128>(0)) / factor) return INT64_MAX;
        count = count * factor / static_cast<unsigned __int128>(i);
        if (count > kMax) return INT64_MAX;
    }
    return static_cast<std::int64_t>(count);
}

ExactLaw enumerate_law(std::int64_t n, const Distribution& p, std::int64_t outcome_cap) {
    if (n < 1) throw std::domain_error("enumerate_law: n >= 1 required");

    // Drop zero-probability cells; they cannot appear in any outcome.
    std::vector<double> q;
    for (double pi : p.probs()) {
        if (pi > 0.0) q.push_back(pi);
    }
    const int kq = static_cast<int>(q.size());
    if (kq == 1) {
        // All mass on one cell: phat == p with probability 1.
        return ExactLaw({0.0}, {0.0}, n, p, true);
    }

    std::int64_t support = composition_count(n, kq);
    if (support > outcome_cap) {
        throw CapExceededError(support, outcome_cap);
    }

    auto lfact = tables::log_factorial_table(static_cast<std::size_t>(n) + 1);
    auto logs = tables::log_table(static_cast<std::size_t>(n) + 1);
    const double* lf = lfact->data();
    const double* lg = logs->data();

    // Per-cell tables over c = 0..n:
    //   w[i][c] = c*log(q_i) - log(c!)         (log-mass contribution)
    //   zt[i][c] = 2c*(log c - log n - log q_i) (Z contribution)
    std::vector<std::vector<double>> w(static_cast<std::size_t>(kq));
    std::vector<std::vector<double>> zt(static_cast<std::size_t>(kq));
    for (int i = 0; i < kq; ++i) {
        double log_qi = std::log(q[static_cast<std::size_t>(i)]);
        auto& wi = w[static_cast<std::size_t>(i)];
        auto& zi = zt[static_cast<std::size_t>(i)];
        wi.resize(static_cast<std::size_t>(n) + 1);
        zi.resize(static_cast<std::size_t>(n) + 1);
        wi[0] = 0.0;
        zi[0] = 0.0;
        for (std::int64_t c = 1; c <= n; ++c) {
            wi[static_cast<std::size_t>(c)] = static_cast<double>(c) * log_qi - lf[c];
            zi[static_cast<std::size_t>(c)] =
                2.0 * static_cast<double>(c) * (lg[c] - lg[n] - log_qi);
        }
    }

    std::vector<double> zs, lps;
    zs.reserve(static_cast<std::size_t>(support));
    lps.reserve(static_cast<std::size_t>(support));
    const double lf_n = lf[n];
    std::vector<std::int64_t> c(static_cast<std::size_t>(kq), 0);
    c[0] = n;
    do {
        double lp = lf_n;
        double z = 0.0;
        for (int i = 0; i < kq; ++i) {
            std::int64_t ci = c[static_cast<std::size_t>(i)];
            lp += w[static_cast<std::size_t>(i)][static_cast<std::size_t>(ci)];
            z += zt[static_cast<std::size_t>(i)][static_cast<std::size_t>(ci)];
        }
        zs.push_back(z < 0.0 ? 0.0 : z);
        lps.push_back(lp);
    } while (next_composition(c, n));

    // Sort by z and merge near-equal values with log-sum-exp.
    std::vector<std::size_t> order(zs.size());
    for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
    std::sort(order.begin(), order.end(),
              [&](std::size_t a, std::size_t b) { return zs[a] < zs[b]; });

    std::vector<double> merged_z, merged_lp;
    merged_z.reserve(order.size());
    merged_lp.reserve(order.size());
    for (std::size_t idx = 0; idx < order.size(); ++idx) {
        double z = zs[order[idx]];
        double lp = lps[order[idx]];
        if (!merged_z.empty() && z - zs[order[idx - 1]] <= ExactLaw::kMergeTolerance) {
            merged_lp.back() = log_add_exp(merged_lp.back(), lp);
        } else {
            merged_z.push_back(z);
            merged_lp.push_back(lp);
        }
    }
    return ExactLaw(std::move(merged_z), std::move(merged_lp), n, p, true);
}

double law_moment(const ExactLaw& law, int m, bool centered) {
    if (m < 1) throw std::domain_error("law_moment: m >= 1 required");
    double center = 0.0;
    if (centered) {
        center = kernels::exp_dot(law.log_probs(), law.z_values());
    }
    return kernels::centered_power_exp_dot(law.log_probs(), law.z_values(), center, m);
}

double law_tail(const ExactLaw& law, double t) {
    if (t <= 0.0) return 1.0;
    const auto& zs = law.z_values();
    auto it = std::lower_bound(zs.begin(), zs.end(), t);
    if (it == zs.end()) return 0.0;
    std::size_t idx = static_cast<std::size_t>(it - zs.begin());
    std::span<const double> suffix(law.log_probs().data() + idx, zs.size() - idx);
    double tail = std::exp(kernels::log_sum_exp(suffix));
    return std::min(tail, 1.0);
}

double law_log_mgf(const ExactLaw& law, double t, bool centered) {
    if (t == 0.0) return 0.0;
    double center = 0.0;
    if (centered) {
        center = kernels::exp_dot(law.log_probs(), law.z_values());
    }
    return kernels::log_sum_exp_affine(law.log_probs(), law.z_values(), t, center);
}

}  // namespace klconc
