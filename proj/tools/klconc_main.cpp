// klconc: compute the multinomial KL statistic exactly and by simulation,
// evaluate concentration bounds, solve test thresholds and run the
// inequality-verification sweeps.  Emits canonical JSON / CSV.

#include <CLI11.hpp>

#include <cstdlib>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "klconc/bounds.hpp"
#include "klconc/core_math.hpp"
#include "klconc/exact_law.hpp"
#include "klconc/montecarlo.hpp"
#include "klconc/serialize.hpp"
#include "klconc/verify.hpp"

namespace {

using namespace klconc;

constexpr int kExitOk = 0;
constexpr int kExitValidation = 1;
constexpr int kExitResourceCap = 2;
constexpr int kExitVerifyFailure = 3;

std::vector<double> parse_double_csv(const std::string& text) {
    std::vector<double> out;
    std::stringstream ss(text);
    std::string item;
    while (std::getline(ss, item, ',')) {
        out.push_back(std::stod(item));
    }
    return out;
}

std::vector<std::int64_t> parse_int_csv(const std::string& text) {
    std::vector<std::int64_t> out;
    std::stringstream ss(text);
    std::string item;
    while (std::getline(ss, item, ',')) {
        out.push_back(std::stoll(item));
    }
    return out;
}

struct OutputOptions {
    std::string format = "json";
    std::string out_path;
    bool annotate = false;
};

void add_output_options(CLI::App* cmd, OutputOptions& opts) {
    cmd->add_option("--format", opts.format, "Output format")
        ->check(CLI::IsMember({"json", "csv"}));
    cmd->add_option("--out", opts.out_path, "Write output to this file instead of stdout");
    cmd->add_flag("--annotate", opts.annotate,
                  "Write a non-canonical side metadata file next to --out");
}

void emit(const std::string& content, const OutputOptions& opts) {
    if (opts.out_path.empty()) {
        std::cout << content;
        return;
    }
    std::ofstream file(opts.out_path, std::ios::binary);
    if (!file) throw std::runtime_error("cannot open output file: " + opts.out_path);
    file << content;
    if (opts.annotate) {
        std::ofstream meta(opts.out_path + ".meta.json");
        meta << "{\"written_at_unix\": " << std::time(nullptr) << "}\n";
    }
}

// Instance selection shared by exact/bound/mc: explicit --p or a named shape.
struct InstanceOptions {
    int k = 0;
    std::string p_csv;
    std::string p_shape;
    std::uint64_t shape_seed = 1;
};

void add_instance_options(CLI::App* cmd, InstanceOptions& opts) {
    cmd->add_option("--k", opts.k, "Alphabet size")->required();
    auto* p = cmd->add_option("--p", opts.p_csv, "Explicit probabilities, comma separated");
    auto* shape = cmd->add_option("--p-shape", opts.p_shape,
                                  "uniform | geometric | two-level | dirichlet")
                      ->check(CLI::IsMember({"uniform", "geometric", "two-level",
                                             "two_level", "dirichlet"}));
    cmd->add_option("--shape-seed", opts.shape_seed, "Seed for dirichlet shapes");
    p->excludes(shape);
}

Distribution resolve_distribution(const InstanceOptions& opts) {
    if (!opts.p_csv.empty()) {
        auto probs = parse_double_csv(opts.p_csv);
        if (static_cast<int>(probs.size()) != opts.k) {
            throw std::invalid_argument("--p has " + std::to_string(probs.size()) +
                                        " entries but --k is " + std::to_string(opts.k));
        }
        return Distribution(std::move(probs));
    }
    if (opts.p_shape.empty()) {
        throw std::invalid_argument("one of --p / --p-shape is required");
    }
    switch (parse_p_shape(opts.p_shape)) {
        case PShape::uniform: return make_uniform(opts.k);
        case PShape::geometric: return make_geometric(opts.k);
        case PShape::two_level: return make_two_level(opts.k);
        case PShape::dirichlet: return make_dirichlet(opts.k, opts.shape_seed);
    }
    throw std::logic_error("unreachable");
}

ConstantsConfig load_constants(const std::string& flag_path) {
    std::string path = flag_path;
    if (path.empty()) {
        if (const char* env = std::getenv("KLCONC_CONSTANTS")) path = env;
    }
    if (path.empty()) return {};
    std::ifstream file(path);
    if (!file) throw std::invalid_argument("cannot open constants file: " + path);
    nlohmann::json parsed = nlohmann::json::parse(file);
    return constants_from_json(parsed);
}

// ---- exact ---------------------------------------------------------------

struct ExactArgs {
    InstanceOptions instance;
    std::int64_t n = 0;
    double t = 0.0;
    bool has_t = false;
    std::string moments_csv = "1,2";
    std::int64_t cap = 10'000'000;
    bool emit_law = false;
    OutputOptions output;
};

int run_exact(const ExactArgs& args) {
    Distribution p = resolve_distribution(args.instance);
    ExactLaw law = enumerate_law(args.n, p, args.cap);
    double mean = law_moment(law, 1, false);
    double two_g = 2.0 * g_func(args.n, p);
    double variance = law_moment(law, 2, true);

    nlohmann::json moments = nlohmann::json::array();
    for (std::int64_t m : parse_int_csv(args.moments_csv)) {
        moments.push_back({{"m", m},
                           {"raw", law_moment(law, static_cast<int>(m), false)},
                           {"centered", law_moment(law, static_cast<int>(m), true)}});
    }

    nlohmann::json out = {{"n", args.n},
                          {"k", p.k()},
                          {"p", p.probs()},
                          {"alpha", p.alpha()},
                          {"atoms", law.size()},
                          {"mean", mean},
                          {"two_g", two_g},
                          {"variance", variance},
                          {"moments", std::move(moments)}};
    double tail = 0.0;
    if (args.has_t) {
        tail = law_tail(law, args.t);
        out["tail"] = {{"t", args.t}, {"value", tail}};
    }
    if (args.emit_law) out["law"] = law_to_json(law);

    if (args.output.format == "csv") {
        std::ostringstream os;
        os << "n,k,alpha,t,tail,mean,two_g,variance\n"
           << args.n << "," << p.k() << "," << csv_format(p.alpha()) << ","
           << (args.has_t ? csv_format(args.t) : "") << ","
           << (args.has_t ? csv_format(tail) : "") << "," << csv_format(mean) << ","
           << csv_format(two_g) << "," << csv_format(variance) << "\n";
        emit(os.str(), args.output);
    } else {
        emit(canonical_dump(out), args.output);
    }
    return kExitOk;
}

// ---- bound ----------------------------------------------------------------

struct BoundArgs {
    InstanceOptions instance;
    std::int64_t n = 0;
    double alpha = 0.0;
    double t = 0.0;
    std::string constants_path;
    bool with_p = false;
    OutputOptions output;
};

int run_bound(const BoundArgs& args) {
    ConstantsConfig cfg = load_constants(args.constants_path);
    std::optional<Distribution> p;
    if (!args.instance.p_csv.empty() || !args.instance.p_shape.empty()) {
        p = resolve_distribution(args.instance);
    }
    BoundReport report =
        best_tail(args.n, args.instance.k, args.alpha, args.t, cfg, p ? &*p : nullptr);
    if (args.output.format == "csv") {
        emit(bound_report_csv_header() + "\n" + bound_report_csv_row(report) + "\n",
             args.output);
    } else {
        emit(canonical_dump(bound_report_to_json(report)), args.output);
    }
    return kExitOk;
}

// ---- mc --------------------------------------------------------------------

struct McArgs {
    InstanceOptions instance;
    std::string op;
    std::int64_t n = 0;
    std::int64_t m = 100'000;
    std::uint64_t seed = 0;
    int threads = 1;
    double t = 0.0;
    int q = 1;
    bool centered = false;
    double delta = 0.1;
    double nu = 0.0;
    double c = 0.0;
    bool allow_large_t = false;
    std::string constants_path;
    OutputOptions output;
};

int run_mc(const McArgs& args) {
    Distribution p = resolve_distribution(args.instance);
    McEstimate estimate;
    nlohmann::json params;
    if (args.op == "tail") {
        estimate = mc_tail(args.n, p, args.t, args.m, args.seed, args.threads);
        params = {{"t", args.t}};
    } else if (args.op == "moment") {
        estimate =
            mc_moment(args.n, p, args.q, args.centered, args.m, args.seed, args.threads);
        params = {{"q", args.q}, {"centered", args.centered}};
    } else if (args.op == "logmgf") {
        ConstantsConfig cfg = load_constants(args.constants_path);
        double t_limit = 0.5 / cfg.c_main();
        if (!args.allow_large_t && std::abs(args.t) > t_limit) {
            throw std::invalid_argument(
                "logmgf: |t| exceeds the envelope regime 1/(2*c_main) = " +
                std::to_string(t_limit) + "; pass --allow-large-t to override");
        }
        estimate = mc_log_mgf(args.n, p, args.t, args.m, args.seed, args.threads);
        params = {{"t", args.t}};
    } else if (args.op == "coverage") {
        estimate = mc_coverage(args.n, p, args.delta, {args.nu, args.c}, args.m,
                               args.seed, args.threads);
        params = {{"delta", args.delta}, {"nu", args.nu}, {"c", args.c}};
    } else {
        throw std::invalid_argument("unknown mc op: " + args.op);
    }

    nlohmann::json out = {{"op", args.op},     {"n", args.n},
                          {"k", p.k()},        {"p", p.probs()},
                          {"alpha", p.alpha()}, {"params", std::move(params)}};
    out.update(mc_estimate_to_json(estimate));
    if (args.output.format == "csv") {
        std::ostringstream os;
        os << "op,n,k,estimate,std_error,samples,seed\n"
           << args.op << "," << args.n << "," << p.k() << ","
           << csv_format(estimate.estimate) << "," << csv_format(estimate.std_error)
           << "," << estimate.samples << "," << estimate.seed << "\n";
        emit(os.str(), args.output);
    } else {
        emit(canonical_dump(out), args.output);
    }
    return kExitOk;
}

// ---- threshold --------------------------------------------------------------

struct ThresholdArgs {
    std::int64_t n = 0;
    int k = 0;
    double alpha = 0.0;
    bool has_alpha = false;
    double delta = 0.0;
    std::string method = "best";
    std::string constants_path;
    OutputOptions output;
};

int run_threshold(const ThresholdArgs& args) {
    ConstantsConfig cfg = load_constants(args.constants_path);
    ThresholdMethod method = parse_threshold_method(args.method);
    bool needs_alpha =
        method == ThresholdMethod::main || method == ThresholdMethod::best;
    if (needs_alpha && !args.has_alpha) {
        throw std::invalid_argument("--alpha is required for method " + args.method);
    }
    nlohmann::json out = {{"n", args.n},
                          {"k", args.k},
                          {"delta", args.delta},
                          {"method", args.method}};
    if (args.has_alpha) out["alpha"] = args.alpha;
    if (method == ThresholdMethod::best) {
        nlohmann::json per_method;
        double best = std::numeric_limits<double>::infinity();
        for (ThresholdMethod m : {ThresholdMethod::sanov, ThresholdMethod::agrawal,
                                  ThresholdMethod::main}) {
            double t = threshold_for_test(args.n, args.k, args.alpha, args.delta, m, cfg);
            per_method[threshold_method_name(m)] = t;
            best = std::min(best, t);
        }
        out["per_method"] = std::move(per_method);
        out["t"] = best;
    } else {
        out["t"] = threshold_for_test(args.n, args.k, args.alpha, args.delta, method, cfg);
    }
    emit(canonical_dump(out), args.output);
    return kExitOk;
}

// ---- verify -----------------------------------------------------------------

struct VerifyArgs {
    std::string property = "all";
    std::string n_values, k_values, alpha_values, t_grid, p_shapes;
    std::int64_t cap = 0;
    std::uint64_t shape_seed = 0;
    bool has_seed = false;
    std::int64_t mc_samples = 0;
    int dirichlet_variants = 0;
    std::string constants_path;
    OutputOptions output;
};

int run_verify(const VerifyArgs& args) {
    GridSpec grid = default_grid();
    if (!args.n_values.empty()) grid.n_values = parse_int_csv(args.n_values);
    if (!args.k_values.empty()) {
        grid.k_values.clear();
        for (std::int64_t k : parse_int_csv(args.k_values)) {
            grid.k_values.push_back(static_cast<int>(k));
        }
    }
    if (!args.alpha_values.empty()) grid.alpha_values = parse_double_csv(args.alpha_values);
    if (!args.t_grid.empty()) grid.t_grid = parse_double_csv(args.t_grid);
    if (!args.p_shapes.empty()) {
        grid.p_shapes.clear();
        std::stringstream ss(args.p_shapes);
        std::string item;
        while (std::getline(ss, item, ',')) grid.p_shapes.push_back(parse_p_shape(item));
    }
    if (args.cap > 0) grid.outcome_cap = args.cap;
    if (args.has_seed) grid.shape_seed = args.shape_seed;
    if (args.mc_samples > 0) grid.mc_samples = args.mc_samples;
    if (args.dirichlet_variants > 0) grid.dirichlet_variants = args.dirichlet_variants;
    grid.constants = load_constants(args.constants_path);

    std::vector<Property> props;
    if (args.property == "all") {
        props = all_properties();
    } else {
        props.push_back(parse_property(args.property));
    }

    std::vector<VerifyReport> reports;
    reports.reserve(props.size());
    bool all_passed = true;
    for (Property prop : props) {
        reports.push_back(verify(prop, grid));
        all_passed = all_passed && reports.back().passed();
    }

    if (args.output.format == "json" || !args.output.out_path.empty()) {
        nlohmann::json out = nlohmann::json::array();
        for (const auto& report : reports) out.push_back(verify_report_to_json(report));
        if (args.output.format == "json") {
            emit(canonical_dump(out), args.output);
        } else {
            std::cout << verify_report_table(reports);
            OutputOptions json_out = args.output;
            json_out.format = "json";
            emit(canonical_dump(out), json_out);
        }
    } else {
        std::cout << verify_report_table(reports);
    }
    return all_passed ? kExitOk : kExitVerifyFailure;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"multinomial KL-divergence statistic, exact law oracle, "
                 "concentration bounds and certification sweeps"};
    app.require_subcommand(1);

    ExactArgs exact_args;
    auto* exact_cmd = app.add_subcommand("exact", "Enumerate the exact law of Z");
    exact_cmd->add_option("--n", exact_args.n, "Sample size")->required();
    add_instance_options(exact_cmd, exact_args.instance);
    exact_cmd->add_option("--t", exact_args.t, "Tail threshold")
        ->each([&](const std::string&) { exact_args.has_t = true; });
    exact_cmd->add_option("--moments", exact_args.moments_csv,
                          "Comma list of moment orders (default 1,2)");
    exact_cmd->add_option("--cap", exact_args.cap, "Outcome cap (default 1e7)");
    exact_cmd->add_flag("--emit-law", exact_args.emit_law, "Include the full atom list");
    add_output_options(exact_cmd, exact_args.output);

    BoundArgs bound_args;
    auto* bound_cmd = app.add_subcommand("bound", "Evaluate every tail bound at t");
    bound_cmd->add_option("--n", bound_args.n, "Sample size")->required();
    add_instance_options(bound_cmd, bound_args.instance);
    bound_cmd->add_option("--alpha", bound_args.alpha, "Minimum cell probability")
        ->required();
    bound_cmd->add_option("--t", bound_args.t, "Tail threshold")->required();
    bound_cmd->add_option("--constants", bound_args.constants_path,
                          "Constants override file (JSON)");
    add_output_options(bound_cmd, bound_args.output);

    McArgs mc_args;
    auto* mc_cmd = app.add_subcommand("mc", "Monte Carlo estimates of Z functionals");
    mc_cmd->add_option("--op", mc_args.op, "tail | moment | logmgf | coverage")
        ->required()
        ->check(CLI::IsMember({"tail", "moment", "logmgf", "coverage"}));
    mc_cmd->add_option("--n", mc_args.n, "Sample size")->required();
    add_instance_options(mc_cmd, mc_args.instance);
    mc_cmd->add_option("--m", mc_args.m, "Number of draws (default 1e5)");
    mc_cmd->add_option("--seed", mc_args.seed, "RNG seed")->required();
    mc_cmd->add_option("--threads", mc_args.threads, "Worker threads (default 1)");
    mc_cmd->add_option("--t", mc_args.t, "Threshold (tail) or MGF argument (logmgf)");
    mc_cmd->add_option("--q", mc_args.q, "Moment order");
    mc_cmd->add_flag("--centered", mc_args.centered, "Center at the exact mean 2g");
    mc_cmd->add_option("--delta", mc_args.delta, "Coverage level");
    mc_cmd->add_option("--nu", mc_args.nu, "Sub-gamma variance factor");
    mc_cmd->add_option("--c", mc_args.c, "Sub-gamma scale");
    mc_cmd->add_flag("--allow-large-t", mc_args.allow_large_t,
                     "Allow |t| beyond the envelope regime for logmgf");
    mc_cmd->add_option("--constants", mc_args.constants_path,
                       "Constants override file (JSON)");
    add_output_options(mc_cmd, mc_args.output);

    ThresholdArgs threshold_args;
    auto* threshold_cmd =
        app.add_subcommand("threshold", "Solve bound(t) <= delta for the test threshold");
    threshold_cmd->add_option("--n", threshold_args.n, "Sample size")->required();
    threshold_cmd->add_option("--k", threshold_args.k, "Alphabet size")->required();
    threshold_cmd->add_option("--alpha", threshold_args.alpha, "Minimum cell probability")
        ->each([&](const std::string&) { threshold_args.has_alpha = true; });
    threshold_cmd->add_option("--delta", threshold_args.delta, "Significance level")
        ->required();
    threshold_cmd->add_option("--method", threshold_args.method,
                              "sanov | agrawal | main | best")
        ->check(CLI::IsMember({"sanov", "agrawal", "main", "best"}));
    threshold_cmd->add_option("--constants", threshold_args.constants_path,
                              "Constants override file (JSON)");
    add_output_options(threshold_cmd, threshold_args.output);

    VerifyArgs verify_args;
    auto* verify_cmd = app.add_subcommand("verify", "Run inequality certification sweeps");
    verify_cmd->add_option("--property", verify_args.property,
                           "Property name or 'all' (default)");
    verify_cmd->add_option("--n-values", verify_args.n_values, "Comma list of n");
    verify_cmd->add_option("--k-values", verify_args.k_values, "Comma list of k");
    verify_cmd->add_option("--alpha-values", verify_args.alpha_values,
                           "Comma list of alpha");
    verify_cmd->add_option("--t-grid", verify_args.t_grid, "Comma list of thresholds");
    verify_cmd->add_option("--p-shapes", verify_args.p_shapes, "Comma list of shapes");
    verify_cmd->add_option("--cap", verify_args.cap, "Outcome cap");
    verify_cmd->add_option("--shape-seed", verify_args.shape_seed, "Grid seed")
        ->each([&](const std::string&) { verify_args.has_seed = true; });
    verify_cmd->add_option("--mc-samples", verify_args.mc_samples,
                           "Draws per non-enumerable cell");
    verify_cmd->add_option("--dirichlet-variants", verify_args.dirichlet_variants,
                           "Dirichlet shapes per k");
    verify_cmd->add_option("--constants", verify_args.constants_path,
                           "Constants override file (JSON)");
    add_output_options(verify_cmd, verify_args.output);

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::CallForAllHelp& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        app.exit(e);
        return kExitValidation;
    }

    try {
        if (exact_cmd->parsed()) return run_exact(exact_args);
        if (bound_cmd->parsed()) return run_bound(bound_args);
        if (mc_cmd->parsed()) return run_mc(mc_args);
        if (threshold_cmd->parsed()) return run_threshold(threshold_args);
        if (verify_cmd->parsed()) return run_verify(verify_args);
    } catch (const CapExceededError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitResourceCap;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitValidation;
    }
    return kExitValidation;
}
