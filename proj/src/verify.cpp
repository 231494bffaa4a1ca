#include "klconc/verify.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <sstream>
#include <stdexcept>

#include "klconc/exact_law.hpp"
#include "klconc/kernels.hpp"
#include "klconc/montecarlo.hpp"
#include "klconc/rng.hpp"
#include "klconc/tables.hpp"

namespace klconc {

namespace {

constexpr double kExactTol = 1e-10;
constexpr double kIdentityTol = 1e-12;

// g evaluation along a binomial trajectory stays affordable up to here.
constexpr std::int64_t kGSweepCap = 12'000;
constexpr std::int64_t kGSingleCap = 2'000'000;

struct Checker {
    VerifyReport report;

    void check(const std::string& cell, double lhs, double rhs, double tol) {
        ++report.cells_checked;
        double slack = rhs - lhs;
        report.min_slack = std::min(report.min_slack, slack);
        if (slack < -tol) {
            report.failures.push_back({cell, lhs, rhs, slack});
        }
    }
};

std::string cell_name(std::initializer_list<std::pair<const char*, std::string>> parts) {
    std::ostringstream os;
    bool first = true;
    for (const auto& [key, value] : parts) {
        if (!first) os << " ";
        os << key << "=" << value;
        first = false;
    }
    return os.str();
}

std::string fmt(double v) {
    std::ostringstream os;
    os.precision(9);
    os << v;
    return os.str();
}

std::vector<double> linspace(double lo, double hi, int count) {
    std::vector<double> out(static_cast<std::size_t>(count));
    for (int i = 0; i < count; ++i) {
        out[static_cast<std::size_t>(i)] =
            lo + (hi - lo) * static_cast<double>(i) / static_cast<double>(count - 1);
    }
    return out;
}

std::vector<double> tail_grid_for(const GridSpec& grid, int k) {
    if (!grid.t_grid.empty()) return grid.t_grid;
    return linspace(0.0, agrawal_delta_bound(k, 0.01, grid.constants), 21);
}

bool enumerable(const GridSpec& grid, std::int64_t n, int k) {
    return composition_count(n, k) <= grid.outcome_cap;
}

// Sampled Z values of one cell, sorted ascending (empirical tail evaluation).
std::vector<double> sampled_z_sorted(std::int64_t n, const Distribution& p,
                                     std::int64_t m, std::uint64_t seed) {
    std::vector<double> z(static_cast<std::size_t>(m));
    for (std::int64_t i = 0; i < m; ++i) {
        Counts counts = multinomial_draw(n, p, seed, static_cast<std::uint64_t>(i));
        z[static_cast<std::size_t>(i)] = z_statistic(counts, p);
    }
    std::sort(z.begin(), z.end());
    return z;
}

double empirical_tail(const std::vector<double>& sorted_z, double t) {
    auto it = std::lower_bound(sorted_z.begin(), sorted_z.end(), t);
    return static_cast<double>(sorted_z.end() - it) / static_cast<double>(sorted_z.size());
}

void domination_property(Checker& ch, const GridSpec& grid, bool agrawal) {
    for (int k : grid.k_values) {
        auto ts = tail_grid_for(grid, k);
        for (const auto& p : grid_distributions(grid, k)) {
            for (std::int64_t n : grid.n_values) {
                std::string base = cell_name({{"n", std::to_string(n)},
                                              {"k", std::to_string(k)},
                                              {"alpha", fmt(p.alpha())}});
                if (enumerable(grid, n, k)) {
                    ExactLaw law = enumerate_law(n, p, grid.outcome_cap);
                    for (double t : ts) {
                        if (agrawal && !agrawal_applicable(k, t)) continue;
                        double bound = agrawal ? agrawal_tail(k, t) : sanov_tail(n, k, t);
                        ch.check(base + " t=" + fmt(t), law_tail(law, t), bound,
                                 kIdentityTol);
                    }
                } else {
                    auto z = sampled_z_sorted(n, p, grid.mc_samples, grid.shape_seed);
                    for (double t : ts) {
                        if (agrawal && !agrawal_applicable(k, t)) continue;
                        double est = empirical_tail(z, t);
                        double se = std::sqrt(est * (1.0 - est) /
                                              static_cast<double>(grid.mc_samples));
                        double bound = agrawal ? agrawal_tail(k, t) : sanov_tail(n, k, t);
                        ch.check(base + " t=" + fmt(t) + " (mc)", est, bound, 5.0 * se);
                    }
                }
            }
        }
    }
}

}  // namespace

PShape parse_p_shape(const std::string& name) {
    if (name == "uniform") return PShape::uniform;
    if (name == "geometric") return PShape::geometric;
    if (name == "two-level" || name == "two_level") return PShape::two_level;
    if (name == "dirichlet") return PShape::dirichlet;
    throw std::invalid_argument("unknown p shape: " + name);
}

const char* p_shape_name(PShape shape) {
    switch (shape) {
        case PShape::uniform: return "uniform";
        case PShape::geometric: return "geometric";
        case PShape::two_level: return "two-level";
        case PShape::dirichlet: return "dirichlet";
    }
    return "?";
}

const std::vector<Property>& all_properties() {
    static const std::vector<Property> props = {
        Property::chain_rule,        Property::bernstein_mean,
        Property::f_monotone_and_bound, Property::disc_gradient,
        Property::sanov_dominates,   Property::agrawal_dominates,
        Property::main_mgf_envelope, Property::binary_mgf,
        Property::g_half_df,         Property::g_subgaussian_tail,
        Property::bdd_diff_envelope, Property::raw_moment_growth,
        Property::centering_maps,    Property::chi2_limit,
    };
    return props;
}

const char* property_name(Property property) {
    switch (property) {
        case Property::chain_rule: return "chain_rule";
        case Property::bernstein_mean: return "bernstein_mean";
        case Property::f_monotone_and_bound: return "f_monotone_and_bound";
        case Property::disc_gradient: return "disc_gradient";
        case Property::sanov_dominates: return "sanov_dominates";
        case Property::agrawal_dominates: return "agrawal_dominates";
        case Property::main_mgf_envelope: return "main_mgf_envelope";
        case Property::binary_mgf: return "binary_mgf";
        case Property::g_half_df: return "g_half_df";
        case Property::g_subgaussian_tail: return "g_subgaussian_tail";
        case Property::bdd_diff_envelope: return "bdd_diff_envelope";
        case Property::raw_moment_growth: return "raw_moment_growth";
        case Property::centering_maps: return "centering_maps";
        case Property::chi2_limit: return "chi2_limit";
    }
    return "?";
}

Property parse_property(const std::string& name) {
    for (Property prop : all_properties()) {
        if (name == property_name(prop)) return prop;
    }
    throw std::invalid_argument("unknown property: " + name);
}

GridSpec default_grid() {
    GridSpec grid;
    for (std::int64_t n = 1; n <= 12; ++n) grid.n_values.push_back(n);
    grid.n_values.insert(grid.n_values.end(), {50, 200, 1000});
    grid.k_values = {2, 3, 4};
    grid.p_shapes = {PShape::uniform, PShape::geometric, PShape::two_level,
                     PShape::dirichlet};
    return grid;
}

std::vector<Distribution> grid_distributions(const GridSpec& grid, int k) {
    std::vector<Distribution> out;
    for (PShape shape : grid.p_shapes) {
        switch (shape) {
            case PShape::uniform:
                out.push_back(make_uniform(k));
                break;
            case PShape::geometric:
                out.push_back(make_geometric(k));
                break;
            case PShape::two_level:
                out.push_back(make_two_level(k));
                break;
            case PShape::dirichlet:
                for (int v = 0; v < grid.dirichlet_variants; ++v) {
                    out.push_back(make_dirichlet(
                        k, grid.shape_seed + 1000 * static_cast<std::uint64_t>(k) +
                               static_cast<std::uint64_t>(v)));
                }
                break;
        }
    }
    return out;
}

double g_func_extended(std::int64_t y, const Distribution& p) {
    return y == 0 ? 0.0 : g_func(y, p);
}

double binary_quarter_mgf(std::int64_t n, double p) {
    if (n < 1) throw std::domain_error("binary_quarter_mgf: n >= 1 required");
    if (!(p > 0.0 && p < 1.0)) {
        throw std::domain_error("binary_quarter_mgf: p must lie in (0,1)");
    }
    auto lfact = tables::log_factorial_table(static_cast<std::size_t>(n) + 1);
    auto logs = tables::log_table(static_cast<std::size_t>(n) + 1);
    const double* lf = lfact->data();
    const double* lg = logs->data();
    const double log_p = std::log(p);
    const double log_1mp = std::log1p(-p);
    const double nd = static_cast<double>(n);
    std::vector<double> terms(static_cast<std::size_t>(n) + 1);
    for (std::int64_t j = 0; j <= n; ++j) {
        double jd = static_cast<double>(j);
        double log_pmf = lf[n] - lf[j] - lf[n - j] + jd * log_p + (nd - jd) * log_1mp;
        // n*d(j/n || p)/2, with 0 log 0 = 0 at the ends
        double nd_half = 0.0;
        if (j > 0) nd_half += jd * (lg[j] - lg[n] - log_p);
        if (j < n) nd_half += (nd - jd) * (lg[n - j] - lg[n] - log_1mp);
        terms[static_cast<std::size_t>(j)] = log_pmf + 0.5 * std::max(nd_half, 0.0);
    }
    return std::exp(kernels::log_sum_exp(terms));
}

namespace {

void chain_rule_property(Checker& ch, const GridSpec& grid) {
    for (int k : grid.k_values) {
        if (k < 3) continue;
        for (const auto& p : grid_distributions(grid, k)) {
            for (std::int64_t n : grid.n_values) {
                for (std::uint64_t rep = 0; rep < 3; ++rep) {
                    Counts counts = multinomial_draw(
                        n, p, grid.shape_seed + rep,
                        static_cast<std::uint64_t>(n) * 977 + static_cast<std::uint64_t>(k));
                    ChainParts parts = chain_decompose(counts, p);
                    double z = z_statistic(counts, p);
                    double lhs = std::abs(parts.binary_part + parts.conditional_part - z);
                    ch.check(cell_name({{"n", std::to_string(n)},
                                        {"k", std::to_string(k)},
                                        {"alpha", fmt(p.alpha())},
                                        {"rep", std::to_string(rep)}}),
                             lhs, kIdentityTol, 0.0);
                }
            }
        }
    }
}

void bernstein_mean_property(Checker& ch, const GridSpec& grid) {
    for (int k : grid.k_values) {
        for (const auto& p : grid_distributions(grid, k)) {
            for (std::int64_t n : grid.n_values) {
                double two_g = 2.0 * g_func(n, p);
                std::string cell = cell_name({{"n", std::to_string(n)},
                                              {"k", std::to_string(k)},
                                              {"alpha", fmt(p.alpha())}});
                if (enumerable(grid, n, k)) {
                    ExactLaw law = enumerate_law(n, p, grid.outcome_cap);
                    double mean = law_moment(law, 1, false);
                    ch.check(cell, std::abs(two_g - mean), kExactTol, 0.0);
                } else {
                    McEstimate mean = mc_moment(n, p, 1, false, grid.mc_samples,
                                                grid.shape_seed);
                    ch.check(cell + " (mc)", std::abs(two_g - mean.estimate),
                             5.0 * mean.std_error, 0.0);
                }
            }
        }
    }
}

void f_monotone_property(Checker& ch, const GridSpec& grid) {
    for (int k : grid.k_values) {
        for (const auto& p : grid_distributions(grid, k)) {
            std::vector<std::int64_t> ns = grid.n_values;
            std::sort(ns.begin(), ns.end());
            ns.erase(std::unique(ns.begin(), ns.end()), ns.end());
            double prev_f = 0.0;
            bool have_prev = false;
            for (std::int64_t n : ns) {
                double f = f_func(n, p);
                std::string cell = cell_name({{"n", std::to_string(n)},
                                              {"k", std::to_string(k)},
                                              {"alpha", fmt(p.alpha())}});
                ch.check(cell + " f<=(k-1)/n", f,
                         static_cast<double>(k - 1) / static_cast<double>(n), kExactTol);
                if (have_prev) {
                    // f nonincreasing along the sweep
                    ch.check(cell + " f nonincreasing", f, prev_f, kExactTol);
                }
                prev_f = f;
                have_prev = true;
            }
        }
    }
}

void disc_gradient_property(Checker& ch, const GridSpec& grid) {
    for (int k : grid.k_values) {
        for (const auto& p : grid_distributions(grid, k)) {
            for (std::int64_t n : grid.n_values) {
                if (n < 4) continue;
                double diff = f_func(n, p) - f_func(n + 1, p);
                std::string cell = cell_name({{"n", std::to_string(n)},
                                              {"k", std::to_string(k)},
                                              {"alpha", fmt(p.alpha())}});
                ch.check(cell + " diff>=0", 0.0, diff, kExactTol);
                ch.check(cell + " diff<=bound", diff, disc_grad_bound(n, k), kExactTol);
            }
        }
    }
}

void main_mgf_property(Checker& ch, const GridSpec& grid) {
    const double c_main = grid.constants.c_main();
    auto ts = linspace(-0.5 / c_main, 0.5 / c_main, 21);
    for (int k : grid.k_values) {
        for (const auto& p : grid_distributions(grid, k)) {
            double alpha = p.alpha();
            if (!(alpha > 0.0)) continue;
            MainParams mp = main_theorem_params(k, alpha, grid.constants);
            for (std::int64_t n : grid.n_values) {
                if (!enumerable(grid, n, k)) continue;
                ExactLaw law = enumerate_law(n, p, grid.outcome_cap);
                for (double t : ts) {
                    ch.check(cell_name({{"n", std::to_string(n)},
                                        {"k", std::to_string(k)},
                                        {"alpha", fmt(alpha)},
                                        {"t", fmt(t)}}),
                             law_log_mgf(law, t, true), mp.v * t * t, kExactTol);
                }
            }
        }
    }
}

void binary_mgf_property(Checker& ch, const GridSpec& grid) {
    for (std::int64_t n : grid.n_values) {
        for (int i = 1; i <= 19; ++i) {
            double p = 0.05 * static_cast<double>(i);
            ch.check(cell_name({{"n", std::to_string(n)}, {"p", fmt(p)}}),
                     binary_quarter_mgf(n, p), 2.0, kExactTol);
        }
    }
}

void g_half_df_property(Checker& ch, const GridSpec& grid) {
    auto check_cell = [&](int k, const Distribution& p) {
        double alpha = p.alpha();
        if (!(alpha > 0.0)) return;
        std::int64_t n_star = g_half_df_threshold(k, alpha);
        if (n_star > kGSingleCap) return;  // infeasible cell, skipped
        double g = g_func(n_star, p);
        ch.check(cell_name({{"k", std::to_string(k)},
                            {"alpha", fmt(alpha)},
                            {"n", std::to_string(n_star)}}),
                 std::abs(g - 0.5 * static_cast<double>(k - 1)), 1.0, kExactTol);
    };
    for (int k : grid.k_values) {
        for (const auto& p : grid_distributions(grid, k)) check_cell(k, p);
        for (double alpha : grid.alpha_values) {
            if (!(alpha > 0.0 && alpha <= 1.0 / static_cast<double>(k))) continue;
            // canonical Delta_alpha member: one heavy cell, the rest at alpha
            std::vector<double> probs(static_cast<std::size_t>(k), alpha);
            probs[0] = 1.0 - alpha * static_cast<double>(k - 1);
            check_cell(k, Distribution(std::move(probs)));
        }
    }
}

void g_subgaussian_property(Checker& ch, const GridSpec& grid) {
    for (int k : grid.k_values) {
        Distribution p = make_uniform(k);
        double alpha = p.alpha();
        RangeThresholds ranges = range_thresholds(k, alpha);
        std::int64_t n = static_cast<std::int64_t>(std::ceil(ranges.r3_lemma));
        if (n > kGSweepCap) continue;  // g sweep too costly, cell skipped
        double r = 1.0 - 1.0 / static_cast<double>(k);

        auto lfact = tables::log_factorial_table(static_cast<std::size_t>(n) + 1);
        const double* lf = lfact->data();
        const double log_r = std::log(r);
        const double log_1mr = std::log1p(-r);
        const double nd = static_cast<double>(n);

        // pmf of Bin(n,r) and |g(y) - (k-1)/2| for every y carrying mass
        std::vector<double> pmf(static_cast<std::size_t>(n) + 1);
        std::vector<double> dev(static_cast<std::size_t>(n) + 1, 0.0);
        const double half_df = 0.5 * static_cast<double>(k - 1);
        for (std::int64_t y = 0; y <= n; ++y) {
            double yd = static_cast<double>(y);
            double lp = lf[n] - lf[y] - lf[n - y] + yd * log_r + (nd - yd) * log_1mr;
            double mass = std::exp(lp);
            pmf[static_cast<std::size_t>(y)] = mass;
            if (mass > 0.0) {
                dev[static_cast<std::size_t>(y)] =
                    std::abs(g_func_extended(y, p) - half_df);
            }
        }
        for (double t : linspace(0.0, static_cast<double>(k) + 1.0, 10)) {
            std::vector<double> violating;
            for (std::int64_t y = 0; y <= n; ++y) {
                if (pmf[static_cast<std::size_t>(y)] > 0.0 &&
                    dev[static_cast<std::size_t>(y)] > t) {
                    violating.push_back(pmf[static_cast<std::size_t>(y)]);
                }
            }
            double prob = kernels::sum(violating);
            ch.check(cell_name({{"k", std::to_string(k)},
                                {"n", std::to_string(n)},
                                {"t", fmt(t)}}),
                     prob, 2.0 * std::exp(-t * t / 4.0), kIdentityTol);
        }
    }
}

void bdd_diff_property(Checker& ch, const GridSpec& grid) {
    auto ts = linspace(-2.0, 2.0, 21);
    for (int k : grid.k_values) {
        for (const auto& p : grid_distributions(grid, k)) {
            double alpha = p.alpha();
            if (!(alpha > 0.0)) continue;
            for (std::int64_t n : grid.n_values) {
                if (!enumerable(grid, n, k)) continue;
                double v = bdd_diff_variance(n, alpha);
                ExactLaw law = enumerate_law(n, p, grid.outcome_cap);
                for (double t : ts) {
                    if (t == 0.0) continue;
                    ch.check(cell_name({{"n", std::to_string(n)},
                                        {"k", std::to_string(k)},
                                        {"alpha", fmt(alpha)},
                                        {"t", fmt(t)}}),
                             law_log_mgf(law, t, true), v * t * t, kExactTol);
                }
            }
        }
    }
}

void raw_moment_property(Checker& ch, const GridSpec& grid) {
    for (int k : grid.k_values) {
        for (const auto& p : grid_distributions(grid, k)) {
            for (std::int64_t n : grid.n_values) {
                if (!enumerable(grid, n, k)) continue;
                ExactLaw law = enumerate_law(n, p, grid.outcome_cap);
                for (int m = 1; m <= 10; ++m) {
                    double norm = std::pow(law_moment(law, m, false),
                                           1.0 / static_cast<double>(m));
                    ch.check(cell_name({{"n", std::to_string(n)},
                                        {"k", std::to_string(k)},
                                        {"alpha", fmt(p.alpha())},
                                        {"m", std::to_string(m)}}),
                             norm,
                             raw_moment_bound(k, m, grid.constants.C_agrawal_delta),
                             kExactTol);
                }
            }
        }
    }
}

void centering_maps_property(Checker& ch, const GridSpec& grid) {
    (void)grid;
    // Two-point variables that satisfy the hypotheses exactly:
    //   moment route: X = +-sqrt(A) and X = +-sqrt(2)*B both satisfy
    //     E[X^(2q)] <= q! A^q + (2q)! B^(2q);
    //   tail route: |X| = sqrt(2A) + B satisfies the tail hypothesis for all
    //     delta outright.
    // Each mapped (nu,c) must then dominate psi(t) = log cosh(s t).
    const std::vector<std::pair<double, double>> ab_pairs = {
        {0.0, 20.0}, {1.0, 0.0}, {0.0, 1.0}, {2.0, 3.0}, {5.0, 0.5}};
    auto check_envelope = [&](const std::string& cell, double s, SubGammaParams sg) {
        double t_max = sg.c > 0.0 ? 0.9 / sg.c : 1.0;
        for (double t : linspace(-t_max, t_max, 21)) {
            if (t == 0.0) continue;
            double lhs = std::log(std::cosh(s * t));
            double rhs = sg.nu * t * t / (2.0 * (1.0 - sg.c * std::abs(t)));
            ch.check(cell + " t=" + fmt(t), lhs, rhs, kExactTol);
        }
    };
    for (const auto& [A, B] : ab_pairs) {
        std::string base = cell_name({{"A", fmt(A)}, {"B", fmt(B)}});
        SubGammaParams from_moments = center_from_moments(A, B);
        check_envelope(base + " map=moments sA", std::sqrt(A), from_moments);
        check_envelope(base + " map=moments sB", std::sqrt(2.0) * B, from_moments);
        SubGammaParams from_tails = center_from_tails(A, B);
        check_envelope(base + " map=tails", std::sqrt(2.0 * A) + B, from_tails);
    }
}

void chi2_limit_property(Checker& ch, const GridSpec& grid) {
    for (int k : grid.k_values) {
        std::int64_t n = 10'000 * static_cast<std::int64_t>(k);
        Distribution p = make_uniform(k);
        ch.check(cell_name({{"k", std::to_string(k)}, {"n", std::to_string(n)}}),
                 std::abs(2.0 * g_func(n, p) - static_cast<double>(k - 1)), 0.05, 0.0);
    }
}

}  // namespace

VerifyReport verify(Property property, const GridSpec& grid) {
    if (grid.n_values.empty() || grid.k_values.empty()) {
        throw std::invalid_argument("verify: grid needs n and k values");
    }
    Checker ch;
    ch.report.property = property_name(property);
    switch (property) {
        case Property::chain_rule: chain_rule_property(ch, grid); break;
        case Property::bernstein_mean: bernstein_mean_property(ch, grid); break;
        case Property::f_monotone_and_bound: f_monotone_property(ch, grid); break;
        case Property::disc_gradient: disc_gradient_property(ch, grid); break;
        case Property::sanov_dominates: domination_property(ch, grid, false); break;
        case Property::agrawal_dominates: domination_property(ch, grid, true); break;
        case Property::main_mgf_envelope: main_mgf_property(ch, grid); break;
        case Property::binary_mgf: binary_mgf_property(ch, grid); break;
        case Property::g_half_df: g_half_df_property(ch, grid); break;
        case Property::g_subgaussian_tail: g_subgaussian_property(ch, grid); break;
        case Property::bdd_diff_envelope: bdd_diff_property(ch, grid); break;
        case Property::raw_moment_growth: raw_moment_property(ch, grid); break;
        case Property::centering_maps: centering_maps_property(ch, grid); break;
        case Property::chi2_limit: chi2_limit_property(ch, grid); break;
    }
    return ch.report;
}

}  // namespace klconc
