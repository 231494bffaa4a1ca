#pragma once

// Reduction kernels used by the statistic, oracle and Monte Carlo paths.
//
// Every kernel has a scalar reference implementation and, on x86-64, an AVX2
// variant selected at runtime.  The scalar versions define the semantics; the
// vector versions must agree with them to a tight tolerance (see the kernel
// equivalence tests).  Selection can be forced with the KLCONC_KERNELS
// environment variable ("scalar" or "avx2") or programmatically, which the
// tests use to exercise both paths.
//
// Summation is blocked pairwise: elements are accumulated sequentially inside
// fixed-size blocks and the block results are combined as a balanced tree, so
// rounding error grows with log(n) rather than n.

#include <cstddef>
#include <span>

namespace klconc::kernels {

enum class Backend { scalar, avx2 };

// Backend in effect (env override > forced > best supported).
Backend active_backend();
const char* backend_name(Backend backend);
bool avx2_supported();

// Force a backend for the current process; throws std::invalid_argument if
// the requested backend is not available on this machine.
void force_backend(Backend backend);
void clear_forced_backend();

// sum(x) = sum_i x[i]
double sum(std::span<const double> x);

// log_sum_exp(x) = log(sum_i exp(x[i])); -inf on empty input.
double log_sum_exp(std::span<const double> x);

// exp_dot(logw, v) = sum_i v[i] * exp(logw[i])
double exp_dot(std::span<const double> logw, std::span<const double> v);

// centered_power_exp_dot(lp, z, c, m) = sum_i exp(lp[i]) * (z[i] - c)^m
double centered_power_exp_dot(std::span<const double> lp, std::span<const double> z,
                              double center, int m);

// log_sum_exp_affine(lp, z, t, c) = log(sum_i exp(lp[i] + t * (z[i] - c)))
double log_sum_exp_affine(std::span<const double> lp, std::span<const double> z,
                          double t, double center);

namespace scalar {
double sum(std::span<const double> x);
double log_sum_exp(std::span<const double> x);
double exp_dot(std::span<const double> logw, std::span<const double> v);
double centered_power_exp_dot(std::span<const double> lp, std::span<const double> z,
                              double center, int m);
double log_sum_exp_affine(std::span<const double> lp, std::span<const double> z,
                          double t, double center);
}  // namespace scalar

#ifdef KLCONC_HAVE_AVX2
namespace avx2 {
double sum(std::span<const double> x);
double log_sum_exp(std::span<const double> x);
double exp_dot(std::span<const double> logw, std::span<const double> v);
double centered_power_exp_dot(std::span<const double> lp, std::span<const double> z,
                              double center, int m);
double log_sum_exp_affine(std::span<const double> lp, std::span<const double> z,
                          double t, double center);
}  // namespace avx2
#endif

}  // namespace klconc::kernels
