#pragma once

// Inequality certification harness: sweeps parameter grids and checks every
// closed-form inequality in the proved direction against exact enumeration
// (or Monte Carlo where enumeration is infeasible), reporting worst-case slack.

#include <cstdint>
#include <limits>
#include <string>
#include <vector>

#include "klconc/bounds.hpp"
#include "klconc/core_math.hpp"

namespace klconc {

enum class PShape { uniform, geometric, two_level, dirichlet };

PShape parse_p_shape(const std::string& name);
const char* p_shape_name(PShape shape);

enum class Property {
    chain_rule,
    bernstein_mean,
    f_monotone_and_bound,
    disc_gradient,
    sanov_dominates,
    agrawal_dominates,
    main_mgf_envelope,
    binary_mgf,
    g_half_df,
    g_subgaussian_tail,
    bdd_diff_envelope,
    raw_moment_growth,
    centering_maps,
    chi2_limit,
};

Property parse_property(const std::string& name);
const char* property_name(Property property);
const std::vector<Property>& all_properties();

struct GridSpec {
    std::vector<std::int64_t> n_values;
    std::vector<int> k_values;
    std::vector<double> alpha_values;  // extra Delta_alpha cells for g_half_df
    std::vector<PShape> p_shapes;
    std::vector<double> t_grid;  // tail thresholds; auto per-k when empty
    std::int64_t outcome_cap = 10'000'000;
    std::uint64_t shape_seed = 20240817;
    int dirichlet_variants = 2;
    std::int64_t mc_samples = 20'000;  // fallback sample count on non-enumerable cells
    ConstantsConfig constants;
};

// n in {1..12} exact cells plus {50, 200, 1000} sampled cells; k in {2,3,4};
// all four shapes; t-grid auto.
GridSpec default_grid();

// Distributions generated for one k under the grid's shape settings.
std::vector<Distribution> grid_distributions(const GridSpec& grid, int k);

struct VerifyFailure {
    std::string cell;
    double lhs = 0.0;
    double rhs = 0.0;
    double slack = 0.0;  // rhs - lhs; negative means violated
};

struct VerifyReport {
    std::string property;
    std::int64_t cells_checked = 0;
    std::vector<VerifyFailure> failures;
    double min_slack = std::numeric_limits<double>::infinity();

    bool passed() const { return failures.empty(); }
};

VerifyReport verify(Property property, const GridSpec& grid);

// Exact E[exp(Z_{n,2,p}/4)] by binomial summation (used by the binary_mgf
// property and its tests).
double binary_quarter_mgf(std::int64_t n, double p);

// g_{k,p} extended to y = 0 (g(0) = 0), used when g is evaluated along a
// binomial trajectory.
double g_func_extended(std::int64_t y, const Distribution& p);

}  // namespace klconc
