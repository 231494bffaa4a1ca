// AVX2 + FMA kernel variants.  This translation unit is the only one compiled
// with -mavx2 -mfma; callers reach it through the runtime dispatcher.

#include "klconc/kernels.hpp"

#include <immintrin.h>

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <limits>

namespace klconc::kernels::avx2 {

namespace {

constexpr std::size_t kBlock = 256;

// exp on 4 doubles, Cephes-style: reduce x = n*ln2 + r, evaluate a rational
// approximation of exp(r) on |r| <= ln2/2, scale by 2^n.  The 2^n scale is
// applied in two halves so the intermediate exponents stay in normal range
// for the whole double domain; out-of-range inputs saturate to 0 / +inf.
inline __m256d exp4(__m256d x) {
    const __m256d log2e = _mm256_set1_pd(1.4426950408889634073599);
    const __m256d ln2_hi = _mm256_set1_pd(6.93145751953125e-1);
    const __m256d ln2_lo = _mm256_set1_pd(1.42860682030941723212e-6);
    const __m256d p0 = _mm256_set1_pd(1.26177193074810590878e-4);
    const __m256d p1 = _mm256_set1_pd(3.02994407707441961300e-2);
    const __m256d p2 = _mm256_set1_pd(9.99999999999999999910e-1);
    const __m256d q0 = _mm256_set1_pd(3.00198505138664455042e-6);
    const __m256d q1 = _mm256_set1_pd(2.52448340349684104192e-3);
    const __m256d q2 = _mm256_set1_pd(2.27265548208155028766e-1);
    const __m256d q3 = _mm256_set1_pd(2.00000000000000000005e0);

    x = _mm256_min_pd(x, _mm256_set1_pd(710.0));
    x = _mm256_max_pd(x, _mm256_set1_pd(-746.0));

    __m256d fn = _mm256_floor_pd(_mm256_fmadd_pd(log2e, x, _mm256_set1_pd(0.5)));
    x = _mm256_fnmadd_pd(fn, ln2_hi, x);
    x = _mm256_fnmadd_pd(fn, ln2_lo, x);

    __m256d xx = _mm256_mul_pd(x, x);
    __m256d px = _mm256_fmadd_pd(p0, xx, p1);
    px = _mm256_fmadd_pd(px, xx, p2);
    px = _mm256_mul_pd(px, x);
    __m256d qx = _mm256_fmadd_pd(q0, xx, q1);
    qx = _mm256_fmadd_pd(qx, xx, q2);
    qx = _mm256_fmadd_pd(qx, xx, q3);
    __m256d ratio = _mm256_div_pd(px, _mm256_sub_pd(qx, px));
    __m256d e = _mm256_fmadd_pd(_mm256_set1_pd(2.0), ratio, _mm256_set1_pd(1.0));

    // n1 = n >> 1 (arithmetic), n2 = n - n1; both biased exponents stay normal.
    __m128i n32 = _mm256_cvtpd_epi32(fn);
    __m128i n1_32 = _mm_srai_epi32(n32, 1);
    __m128i n2_32 = _mm_sub_epi32(n32, n1_32);
    const __m256i bias = _mm256_set1_epi64x(1023);
    __m256d s1 = _mm256_castsi256_pd(
        _mm256_slli_epi64(_mm256_add_epi64(_mm256_cvtepi32_epi64(n1_32), bias), 52));
    __m256d s2 = _mm256_castsi256_pd(
        _mm256_slli_epi64(_mm256_add_epi64(_mm256_cvtepi32_epi64(n2_32), bias), 52));
    return _mm256_mul_pd(_mm256_mul_pd(e, s1), s2);
}

inline double hadd4(__m256d v) {
    __m128d lo = _mm256_castpd256_pd128(v);
    __m128d hi = _mm256_extractf128_pd(v, 1);
    lo = _mm_add_pd(lo, hi);
    return _mm_cvtsd_f64(lo) + _mm_cvtsd_f64(_mm_unpackhi_pd(lo, lo));
}

double tree_combine(double* partials, std::size_t count) {
    while (count > 1) {
        std::size_t half = (count + 1) / 2;
        for (std::size_t i = 0; i + half < count; ++i) {
            partials[i] += partials[i + half];
        }
        count = half;
    }
    return count ? partials[0] : 0.0;
}

template <typename BlockFn>
double blocked_reduce(std::size_t n, BlockFn&& block_fn) {
    if (n == 0) return 0.0;
    constexpr std::size_t kMaxPartials = 512;
    double partials[kMaxPartials];
    std::size_t used = 0;
    for (std::size_t start = 0; start < n; start += kBlock) {
        std::size_t len = std::min(kBlock, n - start);
        if (used == kMaxPartials) {
            partials[0] = tree_combine(partials, used);
            used = 1;
        }
        partials[used++] = block_fn(start, len);
    }
    return tree_combine(partials, used);
}

}  // namespace

double sum(std::span<const double> x) {
    const double* data = x.data();
    return blocked_reduce(x.size(), [&](std::size_t start, std::size_t len) {
        __m256d acc = _mm256_setzero_pd();
        std::size_t i = start;
        for (; i + 4 <= start + len; i += 4) {
            acc = _mm256_add_pd(acc, _mm256_loadu_pd(data + i));
        }
        double r = hadd4(acc);
        for (; i < start + len; ++i) r += data[i];
        return r;
    });
}

double log_sum_exp(std::span<const double> x) {
    if (x.empty()) return -std::numeric_limits<double>::infinity();
    const double* data = x.data();
    double max_val = -std::numeric_limits<double>::infinity();
    for (double v : x) max_val = std::max(max_val, v);
    if (!std::isfinite(max_val)) return max_val;
    __m256d vmax = _mm256_set1_pd(max_val);
    double total = blocked_reduce(x.size(), [&](std::size_t start, std::size_t len) {
        __m256d acc = _mm256_setzero_pd();
        std::size_t i = start;
        for (; i + 4 <= start + len; i += 4) {
            __m256d v = _mm256_sub_pd(_mm256_loadu_pd(data + i), vmax);
            acc = _mm256_add_pd(acc, exp4(v));
        }
        double r = hadd4(acc);
        for (; i < start + len; ++i) r += std::exp(data[i] - max_val);
        return r;
    });
    return max_val + std::log(total);
}

double exp_dot(std::span<const double> logw, std::span<const double> v) {
    const double* w = logw.data();
    const double* vv = v.data();
    return blocked_reduce(logw.size(), [&](std::size_t start, std::size_t len) {
        __m256d acc = _mm256_setzero_pd();
        std::size_t i = start;
        for (; i + 4 <= start + len; i += 4) {
            acc = _mm256_fmadd_pd(_mm256_loadu_pd(vv + i), exp4(_mm256_loadu_pd(w + i)), acc);
        }
        double r = hadd4(acc);
        for (; i < start + len; ++i) r += vv[i] * std::exp(w[i]);
        return r;
    });
}

double centered_power_exp_dot(std::span<const double> lp, std::span<const double> z,
                              double center, int m) {
    const double* lpd = lp.data();
    const double* zd = z.data();
    __m256d vc = _mm256_set1_pd(center);
    return blocked_reduce(lp.size(), [&](std::size_t start, std::size_t len) {
        __m256d acc = _mm256_setzero_pd();
        std::size_t i = start;
        for (; i + 4 <= start + len; i += 4) {
            __m256d d = _mm256_sub_pd(_mm256_loadu_pd(zd + i), vc);
            __m256d pw = _mm256_set1_pd(1.0);
            for (int j = 0; j < m; ++j) pw = _mm256_mul_pd(pw, d);
            acc = _mm256_fmadd_pd(pw, exp4(_mm256_loadu_pd(lpd + i)), acc);
        }
        double r = hadd4(acc);
        for (; i < start + len; ++i) {
            double d = zd[i] - center;
            double pw = 1.0;
            for (int j = 0; j < m; ++j) pw *= d;
            r += pw * std::exp(lpd[i]);
        }
        return r;
    });
}

double log_sum_exp_affine(std::span<const double> lp, std::span<const double> z,
                          double t, double center) {
    if (lp.empty()) return -std::numeric_limits<double>::infinity();
    const double* lpd = lp.data();
    const double* zd = z.data();
    double max_val = -std::numeric_limits<double>::infinity();
    for (std::size_t i = 0; i < lp.size(); ++i) {
        max_val = std::max(max_val, lpd[i] + t * (zd[i] - center));
    }
    if (!std::isfinite(max_val)) return max_val;
    __m256d vt = _mm256_set1_pd(t);
    __m256d vc = _mm256_set1_pd(center);
    __m256d vmax = _mm256_set1_pd(max_val);
    double total = blocked_reduce(lp.size(), [&](std::size_t start, std::size_t len) {
        __m256d acc = _mm256_setzero_pd();
        std::size_t i = start;
        for (; i + 4 <= start + len; i += 4) {
            __m256d a = _mm256_fmadd_pd(vt, _mm256_sub_pd(_mm256_loadu_pd(zd + i), vc),
                                        _mm256_loadu_pd(lpd + i));
            acc = _mm256_add_pd(acc, exp4(_mm256_sub_pd(a, vmax)));
        }
        double r = hadd4(acc);
        for (; i < start + len; ++i) {
            r += std::exp(lpd[i] + t * (zd[i] - center) - max_val);
        }
        return r;
    });
    return max_val + std::log(total);
}

}  // namespace klconc::kernels::avx2
