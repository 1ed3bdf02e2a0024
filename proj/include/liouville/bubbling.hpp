#pragma once

#include <optional>
#include <string>
#include <vector>

#include "liouville/algebra.hpp"
#include "liouville/radial.hpp"
#include "liouville/torus_green.hpp"

namespace liouville {

enum class bubble_regime { subcritical, critical };

std::string to_string(bubble_regime r);

/// Flat-torus data attached to a blowup scenario: the cell, the weight
/// functions (one per component; empty slot means h == 1), the candidate
/// concentration point and the ambient curvature at that point.
struct torus_geometry {
    lattice2 lat = lattice2::make({1, 0}, {0, 1});
    double eta = 0.0;  // Ewald splitting override, 0 = default
    std::vector<std::optional<fourier_series2>> h;
    vec2 p;
    double curvature = 0.0;
};

struct bubble_scenario {
    coupling_matrix a;
    std::vector<double> rho;
    bubble_regime regime = bubble_regime::critical;
    std::vector<double> mass;      // m_i of (a, rho)
    double m = 0;                  // min mass
    std::vector<int> i_min;        // indices attaining m (tol 1e-6)
    radial_profile profile;        // realizes sigma = rho / (2 pi)
    energy_summary summary;
    std::vector<double> c;         // asymptotic constants of the profile
    torus_geometry geom;
    std::vector<double> eps_list;  // strictly decreasing, in (0, 0.1]
    /// Critical regime with a parameter sequence: sup_k,i of
    /// |m_i^k - 4| log(1/eps_k), the input-validity window for the
    /// log-corrected expansion. Negative when no sequence was given.
    double mass_window_sup = -1.0;
    bool mass_window_ok = true;
};

struct scenario_options {
    /// Componentwise energy tolerance for the profile shoot. The attainable
    /// floor is the tail-correction bias of the energy map, roughly
    /// r_max^{-2(m-2)}; the default is safe for r_max = 1e4 and m >= 2.8.
    double shoot_tol = 1e-6;
    double r_max = 1e4;
    double ode_tol = 1e-10;
    std::vector<double> weights;  // profile weights, default all 1
    /// Optional parameter sequence rho^k paired with eps_list; validated for
    /// sign-coherent componentwise approach to rho.
    std::vector<std::vector<double>> rho_sequence;
    /// Acceptance constant for the critical-regime window
    /// |m_i^k - 4| <= C / log(1/eps_k); checked, never re-derived.
    double mass_window_constant = 10.0;
};

/// Builds and validates a scenario: rho on the constraint surface
/// (membership report), regime from the masses, profile from energy
/// shooting with gauge u_1(0) = 0.
bubble_scenario make_scenario(const coupling_matrix& a,
                              const std::vector<double>& rho,
                              torus_geometry geom,
                              std::vector<double> eps_list,
                              const scenario_options& opts = {});

/// eps = e^{-M/2} for a peak height M.
double eps_from_height(double peak_height);

/// b_i = (1/4)(lap log h_i(p) - 2 K(p) + 8 pi
///             + |grad log h_i(p) + 8 pi grad_1 gamma(p,p)|^2).
/// `masses_ok` is the caller's assertion that all masses equal 4.
std::vector<double> b_coefficients(const torus_geometry& geom,
                                   const torus_green& tg, bool masses_ok);

/// 8 pi^2 sum_{i in I_min} e^{c_i} D_i eps^{m-2}  (leading order only).
double lambda_leading_subcritical(const bubble_scenario& sc,
                                  const std::vector<double>& d_coeffs,
                                  double eps);

/// -16 pi^2 (sum_i b_i e^{c_i}) eps^2 log(1/eps)  (leading order only).
double lambda_leading_critical(const bubble_scenario& sc,
                               const std::vector<double>& b, double eps);

/// sum_i (grad log h_i(p) + 2 pi m_tilde grad_1 gamma(p,p)) rho_i,
/// with m_tilde = m in the subcritical regime and 4 at the critical point.
vec2 location_residual(const torus_geometry& geom, const torus_green& tg,
                       const std::vector<double>& rho, double m_tilde,
                       vec2 p);

struct location_solve_result {
    vec2 root;
    bool converged = false;
    bool degenerate = false;  // singular Jacobian (flat residual field)
    int iterations = 0;
};

location_solve_result location_solve(const torus_geometry& geom,
                                     const torus_green& tg,
                                     const std::vector<double>& rho,
                                     double m_tilde, vec2 seed);

struct leading_term_report {
    bubble_regime regime = bubble_regime::critical;
    bool leading_order_only = true;
    std::vector<double> mass;
    double m = 0;
    std::vector<int> i_min;
    std::vector<double> c;
    /// e^{c_i} D_i on i_min (subcritical) or b_i e^{c_i} on all i (critical).
    std::vector<double> coefficients;
    std::vector<double> d_route_a, d_route_b;  // subcritical only
    bool d_routes_agree = true;
    std::vector<double> b;                     // critical only
    std::vector<std::pair<double, double>> predicted;  // (eps, lambda)
    double fitted_exponent = 0;   // subcritical: ~ m - 2
    double fitted_constant = 0;   // critical: ~ 16 pi^2 sum b e^c
    double fit_rms = 0;
    vec2 location_residual_at_p;
    double mass_window_sup = -1.0;  // negative: no sequence supplied
    bool mass_window_ok = true;
};

leading_term_report scenario_report(const bubble_scenario& sc);

}  // namespace liouville
