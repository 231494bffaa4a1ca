#include <doctest.h>

#include <cmath>
#include <random>
#include <vector>

#include "klconc/kernels.hpp"

using namespace klconc;

namespace {

// Runs fn under every available backend and checks mutual agreement.
template <typename Fn>
void for_each_backend(Fn&& fn) {
    kernels::force_backend(kernels::Backend::scalar);
    fn(kernels::Backend::scalar);
    if (kernels::avx2_supported()) {
        kernels::force_backend(kernels::Backend::avx2);
        fn(kernels::Backend::avx2);
    }
    kernels::clear_forced_backend();
}

std::vector<double> random_vector(std::size_t n, double lo, double hi, unsigned seed) {
    std::mt19937_64 gen(seed);
    std::uniform_real_distribution<double> dist(lo, hi);
    std::vector<double> out(n);
    for (auto& v : out) v = dist(gen);
    return out;
}

}  // namespace

TEST_CASE("scalar sum matches naive summation") {
    auto x = random_vector(10'001, -1.0, 1.0, 7);
    long double naive = 0.0;
    for (double v : x) naive += v;
    CHECK(kernels::scalar::sum(x) ==
          doctest::Approx(static_cast<double>(naive)).epsilon(1e-14));
    CHECK(kernels::scalar::sum(std::vector<double>{}) == 0.0);
}

TEST_CASE("scalar log_sum_exp against long-double reference") {
    auto x = random_vector(4'097, -30.0, 2.0, 11);
    long double acc = 0.0;
    for (double v : x) acc += std::exp(static_cast<long double>(v));
    double expected = static_cast<double>(std::log(acc));
    CHECK(kernels::scalar::log_sum_exp(x) == doctest::Approx(expected).epsilon(1e-14));
    CHECK(std::isinf(kernels::scalar::log_sum_exp(std::vector<double>{})));
}

TEST_CASE("backends agree on every kernel") {
    const std::size_t n = 5'001;  // odd length exercises the remainder loops
    auto lp = random_vector(n, -40.0, 0.0, 21);
    auto z = random_vector(n, 0.0, 25.0, 22);

    struct Result {
        double sum, lse, expdot, pow2, pow3, mgf;
    };
    std::vector<Result> results;
    for_each_backend([&](kernels::Backend) {
        results.push_back({kernels::sum(z), kernels::log_sum_exp(lp),
                           kernels::exp_dot(lp, z),
                           kernels::centered_power_exp_dot(lp, z, 3.0, 2),
                           kernels::centered_power_exp_dot(lp, z, 3.0, 3),
                           kernels::log_sum_exp_affine(lp, z, 0.3, 8.0)});
    });
    for (std::size_t i = 1; i < results.size(); ++i) {
        CHECK(results[i].sum == doctest::Approx(results[0].sum).epsilon(1e-13));
        CHECK(results[i].lse == doctest::Approx(results[0].lse).epsilon(1e-13));
        CHECK(results[i].expdot == doctest::Approx(results[0].expdot).epsilon(1e-13));
        CHECK(results[i].pow2 == doctest::Approx(results[0].pow2).epsilon(1e-12));
        CHECK(results[i].pow3 == doctest::Approx(results[0].pow3).epsilon(1e-12));
        CHECK(results[i].mgf == doctest::Approx(results[0].mgf).epsilon(1e-13));
    }
}

TEST_CASE("avx2 exp path is accurate across the double range") {
    if (!kernels::avx2_supported()) return;
    // log_sum_exp of a single element is max + log(exp(0)) = the element, so
    // exercise exp through exp_dot with unit weights instead.
    std::vector<double> ones{1.0, 1.0, 1.0, 1.0};
    std::mt19937_64 gen(33);
    std::uniform_real_distribution<double> dist(-700.0, 700.0);
    kernels::force_backend(kernels::Backend::avx2);
    for (int rep = 0; rep < 20'000; ++rep) {
        double x = dist(gen);
        std::vector<double> lanes(4, x);
        double got = kernels::exp_dot(lanes, ones) / 4.0;
        double want = std::exp(x);
        CHECK(got == doctest::Approx(want).epsilon(5e-15));
    }
    // saturation at the ends
    std::vector<double> tiny(4, -800.0);
    CHECK(kernels::exp_dot(tiny, ones) == 0.0);
    std::vector<double> huge(4, 800.0);
    CHECK(std::isinf(kernels::exp_dot(huge, ones)));
    kernels::clear_forced_backend();
}

TEST_CASE("forcing an unsupported backend throws") {
    if (kernels::avx2_supported()) return;
    CHECK_THROWS_AS(kernels::force_backend(kernels::Backend::avx2),
                    std::invalid_argument);
}

TEST_CASE("empty inputs") {
    for_each_backend([&](kernels::Backend) {
        std::vector<double> empty;
        CHECK(kernels::sum(empty) == 0.0);
        CHECK(kernels::exp_dot(empty, empty) == 0.0);
        CHECK(kernels::centered_power_exp_dot(empty, empty, 0.0, 2) == 0.0);
        CHECK(std::isinf(kernels::log_sum_exp_affine(empty, empty, 1.0, 0.0)));
    });
}
