#pragma once

// Canonical serialization: keys sorted, floats printed with 17 significant
// digits, no timestamps or host data, so identical runs produce byte-identical
// files.  Non-finite floats serialize as null.

#include <string>

#include <json.hpp>

#include "klconc/bounds.hpp"
#include "klconc/exact_law.hpp"
#include "klconc/montecarlo.hpp"
#include "klconc/verify.hpp"

namespace klconc {

std::string canonical_dump(const nlohmann::json& value, int indent = 2);

// RFC 4180 field quoting (quotes doubled, field wrapped when needed).
std::string csv_quote(const std::string& field);
std::string csv_format(double value);

nlohmann::json law_to_json(const ExactLaw& law);
nlohmann::json bound_report_to_json(const BoundReport& report);
nlohmann::json mc_estimate_to_json(const McEstimate& estimate);
nlohmann::json verify_report_to_json(const VerifyReport& report);

std::string bound_report_csv_header();
std::string bound_report_csv_row(const BoundReport& report);

// Human-readable verify summary (one line per report plus failure details).
std::string verify_report_table(const std::vector<VerifyReport>& reports);

// Constants overrides from a JSON object; unknown keys are rejected.
ConstantsConfig constants_from_json(const nlohmann::json& value);
nlohmann::json constants_to_json(const ConstantsConfig& cfg);

}  // namespace klconc
