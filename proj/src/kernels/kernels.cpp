#include "klconc/kernels.hpp"

#include <atomic>
#include <cmath>
#include <cstdlib>
#include <cstring>
#include <limits>
#include <stdexcept>
#include <string>

namespace klconc::kernels {

namespace {

constexpr std::size_t kBlock = 256;

// Combine per-block partial results as a balanced tree.
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
    // One partial per block, collapsed whenever the stack fills.
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

namespace scalar {

double sum(std::span<const double> x) {
    return blocked_reduce(x.size(), [&](std::size_t start, std::size_t len) {
        double acc = 0.0;
        for (std::size_t i = start; i < start + len; ++i) acc += x[i];
        return acc;
    });
}

double log_sum_exp(std::span<const double> x) {
    if (x.empty()) return -std::numeric_limits<double>::infinity();
    double max_val = -std::numeric_limits<double>::infinity();
    for (double v : x) max_val = std::max(max_val, v);
    if (!std::isfinite(max_val)) return max_val;  // all -inf, or a +inf/nan input
    double total = blocked_reduce(x.size(), [&](std::size_t start, std::size_t len) {
        double acc = 0.0;
        for (std::size_t i = start; i < start + len; ++i) acc += std::exp(x[i] - max_val);
        return acc;
    });
    return max_val + std::log(total);
}

double exp_dot(std::span<const double> logw, std::span<const double> v) {
    return blocked_reduce(logw.size(), [&](std::size_t start, std::size_t len) {
        double acc = 0.0;
        for (std::size_t i = start; i < start + len; ++i) acc += v[i] * std::exp(logw[i]);
        return acc;
    });
}

double centered_power_exp_dot(std::span<const double> lp, std::span<const double> z,
                              double center, int m) {
    return blocked_reduce(lp.size(), [&](std::size_t start, std::size_t len) {
        double acc = 0.0;
        for (std::size_t i = start; i < start + len; ++i) {
            double d = z[i] - center;
            double pw = 1.0;
            for (int j = 0; j < m; ++j) pw *= d;
            acc += pw * std::exp(lp[i]);
        }
        return acc;
    });
}

double log_sum_exp_affine(std::span<const double> lp, std::span<const double> z,
                          double t, double center) {
    if (lp.empty()) return -std::numeric_limits<double>::infinity();
    double max_val = -std::numeric_limits<double>::infinity();
    for (std::size_t i = 0; i < lp.size(); ++i) {
        max_val = std::max(max_val, lp[i] + t * (z[i] - center));
    }
    if (!std::isfinite(max_val)) return max_val;
    double total = blocked_reduce(lp.size(), [&](std::size_t start, std::size_t len) {
        double acc = 0.0;
        for (std::size_t i = start; i < start + len; ++i) {
            acc += std::exp(lp[i] + t * (z[i] - center) - max_val);
        }
        return acc;
    });
    return max_val + std::log(total);
}

}  // namespace scalar

namespace {

enum class ForceState : int { none = 0, scalar = 1, avx2 = 2 };

std::atomic<ForceState> g_forced{ForceState::none};

Backend env_or_default_backend() {
    if (const char* env = std::getenv("KLCONC_KERNELS")) {
        if (std::strcmp(env, "scalar") == 0) return Backend::scalar;
        if (std::strcmp(env, "avx2") == 0 && avx2_supported()) return Backend::avx2;
        // Unknown or unsupported value: fall through to auto-detection.
    }
    return avx2_supported() ? Backend::avx2 : Backend::scalar;
}

}  // namespace

bool avx2_supported() {
#ifdef KLCONC_HAVE_AVX2
    static const bool supported =
        __builtin_cpu_supports("avx2") && __builtin_cpu_supports("fma");
    return supported;
#else
    return false;
#endif
}

Backend active_backend() {
    switch (g_forced.load(std::memory_order_relaxed)) {
        case ForceState::scalar:
            return Backend::scalar;
        case ForceState::avx2:
            return Backend::avx2;
        case ForceState::none:
            break;
    }
    static const Backend detected = env_or_default_backend();
    return detected;
}

const char* backend_name(Backend backend) {
    return backend == Backend::avx2 ? "avx2" : "scalar";
}

void force_backend(Backend backend) {
    if (backend == Backend::avx2 && !avx2_supported()) {
        throw std::invalid_argument("kernels: avx2 backend not available on this machine");
    }
    g_forced.store(backend == Backend::avx2 ? ForceState::avx2 : ForceState::scalar,
                   std::memory_order_relaxed);
}

void clear_forced_backend() {
    g_forced.store(ForceState::none, std::memory_order_relaxed);
}

#ifdef KLCONC_HAVE_AVX2
#define KLCONC_DISPATCH(fn, ...)                                      \
    (active_backend() == Backend::avx2 ? avx2::fn(__VA_ARGS__)        \
                                       : scalar::fn(__VA_ARGS__))
#else
#define KLCONC_DISPATCH(fn, ...) scalar::fn(__VA_ARGS__)
#endif

double sum(std::span<const double> x) { return KLCONC_DISPATCH(sum, x); }

double log_sum_exp(std::span<const double> x) { return KLCONC_DISPATCH(log_sum_exp, x); }

double exp_dot(std::span<const double> logw, std::span<const double> v) {
    return KLCONC_DISPATCH(exp_dot, logw, v);
}

double centered_power_exp_dot(std::span<const double> lp, std::span<const double> z,
                              double center, int m) {
    return KLCONC_DISPATCH(centered_power_exp_dot, lp, z, center, m);
}

double log_sum_exp_affine(std::span<const double> lp, std::span<const double> z,
                          double t, double center) {
    return KLCONC_DISPATCH(log_sum_exp_affine, lp, z, t, center);
}

#undef KLCONC_DISPATCH

}  // namespace klconc::kernels
