#include "klconc/montecarlo.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>
#include <thread>
#include <vector>

#include "klconc/kernels.hpp"
#include "klconc/rng.hpp"

namespace klconc {

namespace {

constexpr std::int64_t kDrawsPerBlock = 4096;
constexpr double kInf = std::numeric_limits<double>::infinity();

double binomial_log_pmf(std::int64_t n, std::int64_t c, double log_r, double log_1mr) {
    double nd = static_cast<double>(n);
    double cd = static_cast<double>(c);
    return std::lgamma(nd + 1.0) - std::lgamma(cd + 1.0) - std::lgamma(nd - cd + 1.0) +
           cd * log_r + (nd - cd) * log_1mr;
}

}  // namespace

std::int64_t binomial_inverse(std::int64_t n, double r, double u) {
    if (n < 0) throw std::domain_error("binomial_inverse: n >= 0 required");
    if (n == 0 || r <= 0.0) return 0;
    if (r >= 1.0) return n;

    const double log_r = std::log(r);
    const double log_1mr = std::log1p(-r);
    const double up_ratio = r / (1.0 - r);
    const double down_ratio = (1.0 - r) / r;

    // The mode pmf is at least 1/(n+1); never underflows.
    std::int64_t mode = static_cast<std::int64_t>((static_cast<double>(n) + 1.0) * r);
    mode = std::clamp<std::int64_t>(mode, 0, n);
    double pmf_mode = std::exp(binomial_log_pmf(n, mode, log_r, log_1mr));

    std::int64_t lo = mode, hi = mode;
    double pmf_lo = pmf_mode, pmf_hi = pmf_mode;
    double cum = pmf_mode;
    std::int64_t last = mode;
    while (u >= cum) {
        double next_down = lo > 0
                               ? pmf_lo * (static_cast<double>(lo) /
                                           static_cast<double>(n - lo + 1)) * down_ratio
                               : -1.0;
        double next_up = hi < n
                             ? pmf_hi * (static_cast<double>(n - hi) /
                                         static_cast<double>(hi + 1)) * up_ratio
                             : -1.0;
        if (next_down < 0.0 && next_up < 0.0) break;  // fp leftover below 1 ulp of mass
        if (next_down >= next_up) {
            --lo;
            pmf_lo = next_down;
            cum += next_down;
            last = lo;
        } else {
            ++hi;
            pmf_hi = next_up;
            cum += next_up;
            last = hi;
        }
    }
    return last;
}

Counts multinomial_draw(std::int64_t n, const Distribution& p, std::uint64_t seed,
                        std::uint64_t index) {
    const int k = p.k();
    std::vector<std::int64_t> counts(static_cast<std::size_t>(k), 0);
    std::int64_t remaining = n;
    double tail_mass = 1.0;
    for (int i = 0; i < k - 1 && remaining > 0; ++i) {
        double r = std::clamp(p.prob(i) / tail_mass, 0.0, 1.0);
        double u = rng::uniform01(seed, index, static_cast<std::uint32_t>(i),
                                  rng::kStreamMultinomial);
        std::int64_t c = binomial_inverse(remaining, r, u);
        counts[static_cast<std::size_t>(i)] = c;
        remaining -= c;
        tail_mass -= p.prob(i);
    }
    counts[static_cast<std::size_t>(k - 1)] = remaining;
    return Counts(std::move(counts));
}

namespace {

// Runs fn(draw_index) -> z over all m draws, block by block; blocks are
// distributed round-robin over threads and each per-block accumulator lands in
// a slot indexed by block, which makes the reduction thread-count invariant.
template <typename PerBlock>
void run_blocks(std::int64_t m, int threads, PerBlock&& per_block) {
    const std::int64_t blocks = (m + kDrawsPerBlock - 1) / kDrawsPerBlock;
    int workers = std::max(1, threads);
    workers = static_cast<int>(std::min<std::int64_t>(workers, blocks));
    auto work = [&](int worker) {
        for (std::int64_t b = worker; b < blocks; b += workers) {
            std::int64_t begin = b * kDrawsPerBlock;
            std::int64_t end = std::min(m, begin + kDrawsPerBlock);
            per_block(b, begin, end);
        }
    };
    if (workers == 1) {
        work(0);
        return;
    }
    std::vector<std::thread> pool;
    pool.reserve(static_cast<std::size_t>(workers));
    for (int w = 0; w < workers; ++w) pool.emplace_back(work, w);
    for (auto& th : pool) th.join();
}

class ZSampler {
  public:
    ZSampler(std::int64_t n, const Distribution& p, std::uint64_t seed)
        : n_(n), p_(p), seed_(seed) {
        log_np_.resize(static_cast<std::size_t>(p.k()));
        for (int i = 0; i < p.k(); ++i) {
            log_np_[static_cast<std::size_t>(i)] =
                std::log(static_cast<double>(n) * p.prob(i));
        }
    }

    double z_at(std::uint64_t index, std::vector<std::int64_t>& scratch) const {
        const int k = p_.k();
        scratch.assign(static_cast<std::size_t>(k), 0);
        std::int64_t remaining = n_;
        double tail_mass = 1.0;
        for (int i = 0; i < k - 1 && remaining > 0; ++i) {
            double r = std::clamp(p_.prob(i) / tail_mass, 0.0, 1.0);
            double u = rng::uniform01(seed_, index, static_cast<std::uint32_t>(i),
                                      rng::kStreamMultinomial);
            std::int64_t c = binomial_inverse(remaining, r, u);
            scratch[static_cast<std::size_t>(i)] = c;
            remaining -= c;
            tail_mass -= p_.prob(i);
        }
        scratch[static_cast<std::size_t>(k - 1)] = remaining;

        double z = 0.0;
        for (int i = 0; i < k; ++i) {
            std::int64_t c = scratch[static_cast<std::size_t>(i)];
            if (c == 0) continue;
            double cd = static_cast<double>(c);
            z += cd * (std::log(cd) - log_np_[static_cast<std::size_t>(i)]);
        }
        z *= 2.0;
        return z < 0.0 ? 0.0 : z;
    }

  private:
    std::int64_t n_;
    const Distribution& p_;
    std::uint64_t seed_;
    std::vector<double> log_np_;
};

void validate_mc_args(std::int64_t n, std::int64_t m) {
    if (n < 1) throw std::domain_error("monte carlo: n >= 1 required");
    if (m < 1) throw std::domain_error("monte carlo: m >= 1 required");
}

McEstimate indicator_estimate(std::int64_t n, const Distribution& p, std::int64_t m,
                              std::uint64_t seed, int threads, bool count_if_ge,
                              double threshold, double center) {
    const std::int64_t blocks = (m + kDrawsPerBlock - 1) / kDrawsPerBlock;
    std::vector<std::int64_t> hits(static_cast<std::size_t>(blocks), 0);
    ZSampler sampler(n, p, seed);
    run_blocks(m, threads, [&](std::int64_t b, std::int64_t begin, std::int64_t end) {
        std::vector<std::int64_t> scratch;
        std::int64_t count = 0;
        for (std::int64_t i = begin; i < end; ++i) {
            double z = sampler.z_at(static_cast<std::uint64_t>(i), scratch);
            bool hit = count_if_ge ? (z >= threshold)
                                   : (std::abs(z - center) <= threshold);
            count += hit ? 1 : 0;
        }
        hits[static_cast<std::size_t>(b)] = count;
    });
    std::int64_t total = 0;
    for (std::int64_t h : hits) total += h;
    double est = static_cast<double>(total) / static_cast<double>(m);
    McEstimate out;
    out.estimate = est;
    out.std_error = std::sqrt(est * (1.0 - est) / static_cast<double>(m));
    out.samples = m;
    out.seed = seed;
    return out;
}

}  // namespace

McEstimate mc_tail(std::int64_t n, const Distribution& p, double t, std::int64_t m,
                   std::uint64_t seed, int threads) {
    validate_mc_args(n, m);
    return indicator_estimate(n, p, m, seed, threads, /*count_if_ge=*/true, t, 0.0);
}

McEstimate mc_moment(std::int64_t n, const Distribution& p, int q, bool centered,
                     std::int64_t m, std::uint64_t seed, int threads) {
    validate_mc_args(n, m);
    if (q < 1) throw std::domain_error("mc_moment: q >= 1 required");
    if (centered && m < 2) throw std::domain_error("mc_moment: centered needs m >= 2");
    const double center = centered ? 2.0 * g_func(n, p) : 0.0;

    const std::int64_t blocks = (m + kDrawsPerBlock - 1) / kDrawsPerBlock;
    std::vector<double> sums(static_cast<std::size_t>(blocks), 0.0);
    std::vector<double> sq_sums(static_cast<std::size_t>(blocks), 0.0);
    ZSampler sampler(n, p, seed);
    run_blocks(m, threads, [&](std::int64_t b, std::int64_t begin, std::int64_t end) {
        std::vector<std::int64_t> scratch;
        double s = 0.0, s2 = 0.0;
        for (std::int64_t i = begin; i < end; ++i) {
            double d = sampler.z_at(static_cast<std::uint64_t>(i), scratch) - center;
            double y = 1.0;
            for (int j = 0; j < q; ++j) y *= d;
            s += y;
            s2 += y * y;
        }
        sums[static_cast<std::size_t>(b)] = s;
        sq_sums[static_cast<std::size_t>(b)] = s2;
    });
    double total = kernels::sum(sums);
    double total_sq = kernels::sum(sq_sums);
    double md = static_cast<double>(m);
    double est = total / md;
    double var = m > 1 ? std::max(0.0, (total_sq - md * est * est) / (md - 1.0)) : 0.0;
    McEstimate out;
    out.estimate = est;
    out.std_error = std::sqrt(var / md);
    out.samples = m;
    out.seed = seed;
    return out;
}

McEstimate mc_log_mgf(std::int64_t n, const Distribution& p, double t, std::int64_t m,
                      std::uint64_t seed, int threads) {
    validate_mc_args(n, m);
    if (m < 100) throw std::domain_error("mc_log_mgf: m >= 100 required");
    McEstimate out;
    out.samples = m;
    out.seed = seed;
    if (t == 0.0) return out;  // estimate and std_error exactly 0

    const double center = 2.0 * g_func(n, p);
    const std::int64_t blocks = (m + kDrawsPerBlock - 1) / kDrawsPerBlock;
    // Per block: running max of a_i = t*(Z_i - center) plus sums of
    // exp(a - max) and exp(2(a - max)); blocks recombine in index order.
    std::vector<double> maxes(static_cast<std::size_t>(blocks), -kInf);
    std::vector<double> s1(static_cast<std::size_t>(blocks), 0.0);
    std::vector<double> s2(static_cast<std::size_t>(blocks), 0.0);
    ZSampler sampler(n, p, seed);
    run_blocks(m, threads, [&](std::int64_t b, std::int64_t begin, std::int64_t end) {
        std::vector<std::int64_t> scratch;
        std::vector<double> a(static_cast<std::size_t>(end - begin));
        double mx = -kInf;
        for (std::int64_t i = begin; i < end; ++i) {
            double v = t * (sampler.z_at(static_cast<std::uint64_t>(i), scratch) - center);
            a[static_cast<std::size_t>(i - begin)] = v;
            mx = std::max(mx, v);
        }
        double bs1 = 0.0, bs2 = 0.0;
        for (double v : a) {
            double e = std::exp(v - mx);
            bs1 += e;
            bs2 += e * e;
        }
        maxes[static_cast<std::size_t>(b)] = mx;
        s1[static_cast<std::size_t>(b)] = bs1;
        s2[static_cast<std::size_t>(b)] = bs2;
    });
    double global_max = -kInf;
    for (double v : maxes) global_max = std::max(global_max, v);
    if (!std::isfinite(global_max)) {
        throw std::overflow_error("mc_log_mgf: non-finite exponent encountered");
    }
    double total1 = 0.0, total2 = 0.0;
    for (std::int64_t b = 0; b < blocks; ++b) {
        double shift = std::exp(maxes[static_cast<std::size_t>(b)] - global_max);
        total1 += s1[static_cast<std::size_t>(b)] * shift;
        total2 += s2[static_cast<std::size_t>(b)] * shift * shift;
    }
    double md = static_cast<double>(m);
    double mean_scaled = total1 / md;
    out.estimate = global_max + std::log(mean_scaled);
    double var_scaled =
        std::max(0.0, (total2 / md - mean_scaled * mean_scaled) * md / (md - 1.0));
    out.std_error = std::sqrt(var_scaled / md) / mean_scaled;
    return out;
}

McEstimate mc_coverage(std::int64_t n, const Distribution& p, double delta,
                       SubGammaParams params, std::int64_t m, std::uint64_t seed,
                       int threads) {
    validate_mc_args(n, m);
    if (!(delta > 0.0 && delta < 1.0)) {
        throw std::domain_error("mc_coverage: delta must lie in (0,1)");
    }
    double eps = subgamma_tail_eps(params, delta);
    double center = 2.0 * g_func(n, p);
    return indicator_estimate(n, p, m, seed, threads, /*count_if_ge=*/false, eps, center);
}

}  // namespace klconc
