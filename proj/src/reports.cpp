#include "liouville/reports.hpp"

#include <cstdio>
#include <fstream>

#include "liouville/errors.hpp"

namespace liouville {

namespace {

std::string fmt17(double v) {
    char buf[64];
    std::snprintf(buf, sizeof(buf), "%.17g", v);
    return buf;
}

std::string subset_label(std::uint32_t mask, int n) {
    std::string out;
    for (int i = 0; i < n; ++i)
        if (mask & (1u << i)) {
            if (!out.empty()) out += ",";
            out += std::to_string(i + 1);
        }
    return out;
}

}  // namespace

ordered_json report_json(const h1_report& rep) {
    return ordered_json{{"symmetric", rep.symmetric},
                        {"nonnegative", rep.nonnegative},
                        {"irreducible", rep.irreducible},
                        {"invertible", rep.invertible},
                        {"holds", rep.holds()}};
}

ordered_json report_json(const h2_report& rep) {
    return ordered_json{{"diagonal_nonpositive", rep.diagonal_nonpositive},
                        {"offdiagonal_nonnegative", rep.offdiagonal_nonnegative},
                        {"row_sums_nonnegative", rep.row_sums_nonnegative},
                        {"holds", rep.holds()}};
}

ordered_json report_json(const gamma1_report& rep) {
    const int n = static_cast<int>(rep.masses.size());
    ordered_json subsets = ordered_json::object();
    for (const auto& [mask, value] : rep.lambda_subsets)
        subsets[subset_label(mask, n)] = value;
    return ordered_json{{"lambda_I", rep.lambda_i},
                        {"lambda_subsets", subsets},
                        {"masses", rep.masses},
                        {"is_member", rep.is_member},
                        {"normal", rep.normal},
                        {"tolerance_abs", rep.tolerance_abs}};
}

ordered_json report_json(const energy_summary& s) {
    ordered_json sigma_r = ordered_json::object();
    for (const auto& [r, v] : s.sigma_R) sigma_r[fmt17(r)] = v;
    return ordered_json{{"sigma", s.sigma},
                        {"sigma_R", sigma_r},
                        {"l", s.l},
                        {"l_direct", s.l_direct},
                        {"m_min", s.m_min},
                        {"c", s.c},
                        {"c_fit", s.c_fit},
                        {"i_min", s.i_min},
                        {"R_max", s.r_max},
                        {"fit_rms", s.fit_rms},
                        {"c_route_gap", s.c_route_gap}};
}

ordered_json report_json(const uniqueness_report& rep) {
    ordered_json dims = ordered_json::object();
    for (const auto& [thr, dim] : rep.dim_by_threshold)
        dims[fmt17(thr)] = dim;
    return ordered_json{{"ell", rep.ell},
                        {"growth_exponents", rep.exponents},
                        {"min_exponent", rep.min_exponent},
                        {"bounded_dim", rep.bounded_dim},
                        {"dim_by_threshold", dims},
                        {"uprime_alignment", rep.uprime_alignment}};
}

ordered_json report_json(const tail_report& rep) {
    return ordered_json{{"route_a", rep.route_a},
                        {"route_b", rep.route_b},
                        {"difference", rep.difference},
                        {"agree", rep.agree},
                        {"delta0", rep.delta0},
                        {"raw_a", rep.raw_a},
                        {"raw_b", rep.raw_b},
                        {"extrapolated_a", rep.extrap_a},
                        {"extrapolated_b", rep.extrap_b},
                        {"plateau_gap_a", rep.plateau_gap_a},
                        {"plateau_gap_b", rep.plateau_gap_b}};
}

ordered_json report_json(const leading_term_report& rep) {
    ordered_json predicted = ordered_json::object();
    for (const auto& [eps, value] : rep.predicted)
        predicted[fmt17(eps)] = value;
    ordered_json j{{"regime", to_string(rep.regime)},
                   {"leading_order_only", rep.leading_order_only},
                   {"masses", rep.mass},
                   {"m", rep.m},
                   {"i_min", rep.i_min},
                   {"c", rep.c},
                   {"coefficients", rep.coefficients},
                   {"predicted_lambda", predicted},
                   {"fitted_exponent", rep.fitted_exponent},
                   {"fitted_constant", rep.fitted_constant},
                   {"fit_rms", rep.fit_rms},
                   {"location_residual",
                    std::vector<double>{rep.location_residual_at_p.x,
                                        rep.location_residual_at_p.y}}};
    if (rep.regime == bubble_regime::subcritical) {
        j["D_route_a"] = rep.d_route_a;
        j["D_route_b"] = rep.d_route_b;
        j["D_routes_agree"] = rep.d_routes_agree;
    } else {
        j["b"] = rep.b;
        if (rep.mass_window_sup >= 0) {
            j["mass_window_sup"] = rep.mass_window_sup;
            j["mass_window_ok"] = rep.mass_window_ok;
        }
    }
    return j;
}

std::string profile_csv(const radial_profile& p) {
    std::string out = "r";
    for (int i = 1; i <= p.n(); ++i) out += ",u_" + std::to_string(i);
    for (int i = 1; i <= p.n(); ++i) out += ",u'_" + std::to_string(i);
    out += "\n";
    for (std::size_t k = 0; k < p.grid().size(); ++k) {
        out += fmt17(p.grid()[k]);
        for (int i = 0; i < p.n(); ++i) out += "," + fmt17(p.u_node(i, k));
        for (int i = 0; i < p.n(); ++i) out += "," + fmt17(p.du_node(i, k));
        out += "\n";
    }
    return out;
}

std::string mode_solution_csv(const mode_solution& sol) {
    std::string out = "r";
    for (int i = 1; i <= sol.n(); ++i) out += ",phi_" + std::to_string(i);
    for (int i = 1; i <= sol.n(); ++i) out += ",phi'_" + std::to_string(i);
    out += "\n";
    for (std::size_t k = 0; k < sol.grid().size(); ++k) {
        out += fmt17(sol.grid()[k]);
        for (int i = 0; i < sol.n(); ++i)
            out += "," + fmt17(sol.phi_node(i, k));
        for (int i = 0; i < sol.n(); ++i)
            out += "," + fmt17(sol.dphi_node(i, k));
        out += "\n";
    }
    return out;
}

std::string series_csv(const std::vector<std::pair<double, double>>& series,
                       const std::string& value_name) {
    std::string out = "eps," + value_name + "\n";
    for (const auto& [eps, value] : series)
        out += fmt17(eps) + "," + fmt17(value) + "\n";
    return out;
}

void write_file_atomic(const std::string& path, const std::string& content) {
    const std::string tmp = path + ".tmp";
    {
        std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
        if (!out) throw numeric_error("cannot write " + tmp);
        out << content;
    }
    if (std::rename(tmp.c_str(), path.c_str()) != 0)
        throw numeric_error("cannot rename " + tmp + " to " + path);
}

}  // namespace liouville
