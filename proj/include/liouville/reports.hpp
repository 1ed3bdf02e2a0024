#pragma once

#include <string>

#include "json.hpp"
#include "liouville/algebra.hpp"
#include "liouville/bubbling.hpp"
#include "liouville/linearized.hpp"
#include "liouville/radial.hpp"
#include "liouville/torus_green.hpp"

namespace liouville {

// All emitted JSON carries this schema tag and stable key order.
inline constexpr const char* json_schema = "liouville-lab/1";

using ordered_json = nlohmann::ordered_json;

ordered_json report_json(const h1_report& rep);
ordered_json report_json(const h2_report& rep);
ordered_json report_json(const gamma1_report& rep);
ordered_json report_json(const energy_summary& s);
ordered_json report_json(const uniqueness_report& rep);
ordered_json report_json(const tail_report& rep);
ordered_json report_json(const leading_term_report& rep);

/// Profile CSV: header r,u_1..u_n,u'_1..u'_n, 17 significant digits.
std::string profile_csv(const radial_profile& p);
/// Mode-solution CSV: header r,phi_1..phi_n,phi'_1..phi'_n.
std::string mode_solution_csv(const mode_solution& sol);
/// Series CSV with the given value column name.
std::string series_csv(const std::vector<std::pair<double, double>>& series,
                       const std::string& value_name);

/// Writes content atomically (temp file + rename).
void write_file_atomic(const std::string& path, const std::string& content);

}  // namespace liouville
