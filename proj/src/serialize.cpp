#include "klconc/serialize.hpp"

#include <cmath>
#include <cstdio>
#include <sstream>

namespace klconc {

namespace {

std::string format_double(double v) {
    if (!std::isfinite(v)) return "null";
    char buf[40];
    std::snprintf(buf, sizeof(buf), "%.17g", v);
    return buf;
}

void dump_value(const nlohmann::json& value, std::string& out, int indent, int depth) {
    const std::string pad(static_cast<std::size_t>(indent * (depth + 1)), ' ');
    const std::string close_pad(static_cast<std::size_t>(indent * depth), ' ');
    switch (value.type()) {
        case nlohmann::json::value_t::object: {
            if (value.empty()) {
                out += "{}";
                return;
            }
            out += "{\n";
            bool first = true;
            for (auto it = value.begin(); it != value.end(); ++it) {
                if (!first) out += ",\n";
                first = false;
                out += pad;
                out += nlohmann::json(it.key()).dump();
                out += ": ";
                dump_value(it.value(), out, indent, depth + 1);
            }
            out += "\n" + close_pad + "}";
            return;
        }
        case nlohmann::json::value_t::array: {
            if (value.empty()) {
                out += "[]";
                return;
            }
            out += "[\n";
            bool first = true;
            for (const auto& item : value) {
                if (!first) out += ",\n";
                first = false;
                out += pad;
                dump_value(item, out, indent, depth + 1);
            }
            out += "\n" + close_pad + "]";
            return;
        }
        case nlohmann::json::value_t::number_float:
            out += format_double(value.get<double>());
            return;
        default:
            out += value.dump();
            return;
    }
}

}  // namespace

std::string canonical_dump(const nlohmann::json& value, int indent) {
    std::string out;
    dump_value(value, out, indent, 0);
    out += "\n";
    return out;
}

std::string csv_quote(const std::string& field) {
    if (field.find_first_of(",\"\n\r") == std::string::npos) return field;
    std::string quoted = "\"";
    for (char c : field) {
        if (c == '"') quoted += '"';
        quoted += c;
    }
    quoted += '"';
    return quoted;
}

std::string csv_format(double value) {
    if (!std::isfinite(value)) return "";
    char buf[40];
    std::snprintf(buf, sizeof(buf), "%.17g", value);
    return buf;
}

nlohmann::json law_to_json(const ExactLaw& law) {
    nlohmann::json atoms = nlohmann::json::array();
    for (std::int64_t i = 0; i < law.size(); ++i) {
        atoms.push_back({{"z", law.z_values()[static_cast<std::size_t>(i)]},
                         {"log_prob", law.log_probs()[static_cast<std::size_t>(i)]}});
    }
    return {{"n", law.n()}, {"p", law.p().probs()}, {"atoms", std::move(atoms)}};
}

nlohmann::json bound_report_to_json(const BoundReport& report) {
    nlohmann::json entries = nlohmann::json::array();
    for (const auto& entry : report.entries) {
        nlohmann::json j = {{"name", entry.name},
                            {"value", entry.value},
                            {"raw_value", entry.raw_value},
                            {"applicable", entry.applicable}};
        if (!entry.reason.empty()) j["reason"] = entry.reason;
        entries.push_back(std::move(j));
    }
    return {{"n", report.n},          {"k", report.k},
            {"alpha", report.alpha},  {"t", report.t},
            {"entries", std::move(entries)}, {"best_name", report.best_name},
            {"best_value", report.best_value}};
}

nlohmann::json mc_estimate_to_json(const McEstimate& estimate) {
    return {{"estimate", estimate.estimate},
            {"std_error", estimate.std_error},
            {"samples", estimate.samples},
            {"seed", estimate.seed}};
}

nlohmann::json verify_report_to_json(const VerifyReport& report) {
    nlohmann::json failures = nlohmann::json::array();
    for (const auto& failure : report.failures) {
        failures.push_back({{"cell", failure.cell},
                            {"lhs", failure.lhs},
                            {"rhs", failure.rhs},
                            {"slack", failure.slack}});
    }
    return {{"property", report.property},
            {"cells_checked", report.cells_checked},
            {"failures", std::move(failures)},
            {"min_slack", report.min_slack},
            {"passed", report.passed()}};
}

std::string bound_report_csv_header() {
    return "n,k,alpha,t,sanov,agrawal,agrawal_applicable,main_rho,best_name,best_value";
}

std::string bound_report_csv_row(const BoundReport& report) {
    auto entry_value = [&](const char* name) -> std::string {
        const BoundEntry* entry = report.find(name);
        if (entry == nullptr || !entry->applicable) return "";
        return csv_format(entry->value);
    };
    const BoundEntry* agrawal = report.find("agrawal");
    std::ostringstream os;
    os << report.n << "," << report.k << "," << csv_format(report.alpha) << ","
       << csv_format(report.t) << "," << entry_value("sanov") << ","
       << entry_value("agrawal") << ","
       << ((agrawal != nullptr && agrawal->applicable) ? "true" : "false") << ","
       << entry_value("main_rho") << "," << csv_quote(report.best_name) << ","
       << csv_format(report.best_value);
    return os.str();
}

std::string verify_report_table(const std::vector<VerifyReport>& reports) {
    std::ostringstream os;
    for (const auto& report : reports) {
        char line[160];
        std::snprintf(line, sizeof(line), "%-22s cells=%-7lld min_slack=%-13.4g %s\n",
                      report.property.c_str(),
                      static_cast<long long>(report.cells_checked), report.min_slack,
                      report.passed() ? "PASS" : "FAIL");
        os << line;
        for (const auto& failure : report.failures) {
            os << "    violated: " << failure.cell << "  lhs=" << csv_format(failure.lhs)
               << " rhs=" << csv_format(failure.rhs)
               << " slack=" << csv_format(failure.slack) << "\n";
        }
    }
    return os.str();
}

ConstantsConfig constants_from_json(const nlohmann::json& value) {
    if (!value.is_object()) {
        throw std::invalid_argument("constants: expected a JSON object");
    }
    ConstantsConfig cfg;
    for (auto it = value.begin(); it != value.end(); ++it) {
        const std::string& key = it.key();
        double v = it.value().get<double>();
        if (key == "C2") cfg.C2 = v;
        else if (key == "c2") cfg.c2 = v;
        else if (key == "Cg") cfg.Cg = v;
        else if (key == "cg") cfg.cg = v;
        else if (key == "Cg_prime") cfg.Cg_prime = v;
        else if (key == "cg_prime") cfg.cg_prime = v;
        else if (key == "C_agrawal_delta") cfg.C_agrawal_delta = v;
        else if (key == "mardia_constant") cfg.mardia_constant = v;
        else if (key == "C_main") cfg.C_main_override = v;
        else if (key == "c_main") cfg.c_main_override = v;
        else throw std::invalid_argument("constants: unknown key '" + key + "'");
    }
    return cfg;
}

nlohmann::json constants_to_json(const ConstantsConfig& cfg) {
    return {{"C2", cfg.C2},
            {"c2", cfg.c2},
            {"Cg", cfg.Cg},
            {"cg", cfg.cg},
            {"Cg_prime", cfg.Cg_prime},
            {"cg_prime", cfg.cg_prime},
            {"C_agrawal_delta", cfg.C_agrawal_delta},
            {"mardia_constant", cfg.mardia_constant},
            {"C_main", cfg.C_main()},
            {"c_main", cfg.c_main()}};
}

}  // namespace klconc
