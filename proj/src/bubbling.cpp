#include "liouville/bubbling.hpp"

#include <algorithm>
#include <cmath>

#include "liouville/errors.hpp"
#include "liouville/fitting.hpp"

namespace liouville {

namespace {

constexpr double mass_tie_tol = 1e-6;

}  // namespace

std::string to_string(bubble_regime r) {
    return r == bubble_regime::subcritical ? "subcritical" : "critical";
}

double eps_from_height(double peak_height) {
    return std::exp(-0.5 * peak_height);
}

bubble_scenario make_scenario(const coupling_matrix& a,
                              const std::vector<double>& rho,
                              torus_geometry geom,
                              std::vector<double> eps_list,
                              const scenario_options& opts) {
    const int n = a.n();
    require_h1(a);
    require_positive_rho(rho, n);

    bubble_scenario sc;
    sc.a = a;
    sc.rho = rho;

    // Membership: the scaled constraint residual doubles as the quadric
    // check for sigma = rho / (2 pi).
    const gamma1_report membership = gamma1(a, rho);
    std::vector<double> sigma(n);
    for (int i = 0; i < n; ++i) sigma[i] = rho[i] / (2 * pi);
    if (std::abs(pohozaev_residual(sigma, a)) > 1e-6)
        throw validation_error(
            "make_scenario: rho is not on the constraint surface "
            "(energy identity violated beyond 1e-6)");
    if (!membership.is_member)
        throw validation_error(
            "make_scenario: rho fails proper-subset positivity");

    sc.mass = membership.masses;
    sc.m = min_mass(sc.mass);
    for (int i = 0; i < n; ++i)
        if (sc.mass[i] <= sc.m + mass_tie_tol) sc.i_min.push_back(i);

    bool all_four = true;
    for (double mi : sc.mass)
        if (std::abs(mi - 4.0) > mass_tie_tol) all_four = false;
    if (all_four)
        sc.regime = bubble_regime::critical;
    else if (sc.m < 4.0 - mass_tie_tol)
        sc.regime = bubble_regime::subcritical;
    else
        throw validation_error("make_scenario: masses straddle the critical "
                               "value without matching it");

    if (eps_list.size() < 4)
        throw validation_error("make_scenario: need at least 4 eps values");
    for (std::size_t k = 0; k < eps_list.size(); ++k) {
        if (!(eps_list[k] > 0) || eps_list[k] > 0.1)
            throw validation_error(
                "make_scenario: eps values must lie in (0, 0.1]");
        if (k > 0 && !(eps_list[k] < eps_list[k - 1]))
            throw validation_error(
                "make_scenario: eps values must be strictly decreasing");
    }
    sc.eps_list = std::move(eps_list);

    if (!opts.rho_sequence.empty()) {
        // The expansions assume a one-sided, sign-coherent approach to rho.
        int sign = 0;
        for (const auto& rk : opts.rho_sequence) {
            if (static_cast<int>(rk.size()) != n)
                throw validation_error(
                    "make_scenario: rho sequence dimension mismatch");
            for (int i = 0; i < n; ++i) {
                const double d = rk[i] - rho[i];
                if (d == 0) continue;
                const int s = d > 0 ? 1 : -1;
                if (sign == 0) sign = s;
                if (s != sign)
                    throw validation_error(
                        "make_scenario: mixed-sign rho sequence rejected");
            }
        }
        if (sc.regime == bubble_regime::critical) {
            // Input-validity window for the log-corrected expansion.
            sc.mass_window_sup = 0.0;
            const std::size_t pairs =
                std::min(opts.rho_sequence.size(), sc.eps_list.size());
            for (std::size_t k = 0; k < pairs; ++k) {
                const auto mk = masses(a, opts.rho_sequence[k]);
                const double logk = std::log(1.0 / sc.eps_list[k]);
                for (double mi : mk)
                    sc.mass_window_sup = std::max(
                        sc.mass_window_sup, std::abs(mi - 4.0) * logk);
            }
            sc.mass_window_ok =
                sc.mass_window_sup <= opts.mass_window_constant;
        }
    }

    if (static_cast<int>(geom.h.size()) > n)
        throw validation_error("make_scenario: too many weight functions");
    geom.h.resize(n);
    sc.geom = std::move(geom);

    shooting_options shoot;
    shoot.tol = opts.shoot_tol;
    shoot.r_max = opts.r_max;
    shoot.ode_tol = opts.ode_tol;
    std::vector<double> weights =
        opts.weights.empty() ? std::vector<double>(n, 1.0) : opts.weights;
    sc.profile = shoot_for_energies(a, weights, sigma, shoot);

    // Blowup normalization: the peak component has center value zero. The
    // shoot gauges u_1(0) = 0 instead, so slide along the scaling family
    // (which keeps the energies) before extracting the constants; this keeps
    // the report equivariant under component relabeling.
    const auto& u0 = sc.profile.center_values();
    const double shift = *std::max_element(u0.begin(), u0.end());
    if (shift != 0.0) {
        std::vector<double> shifted(u0);
        for (double& v : shifted) v -= shift;
        sc.profile =
            integrate_entire(a, weights, shifted, opts.r_max, opts.ode_tol);
    }
    sc.summary = energy_total(sc.profile);
    sc.c = sc.summary.c;
    return sc;
}

std::vector<double> b_coefficients(const torus_geometry& geom,
                                   const torus_green& tg, bool masses_ok) {
    if (!masses_ok)
        throw validation_error(
            "b_coefficients: only defined when every mass equals 4");
    const vec2 g1 = tg.grad1_gamma(geom.p);
    std::vector<double> b;
    b.reserve(geom.h.size());
    for (const auto& h : geom.h) {
        const double lap_log = h ? h->laplacian_log(geom.p) : 0.0;
        const vec2 grad_log = h ? h->grad_log(geom.p) : vec2{0, 0};
        const vec2 v = grad_log + g1 * (8 * pi);
        b.push_back(0.25 * (lap_log - 2 * geom.curvature + 8 * pi + v.norm2()));
    }
    return b;
}

double lambda_leading_subcritical(const bubble_scenario& sc,
                                  const std::vector<double>& d_coeffs,
                                  double eps) {
    if (sc.regime != bubble_regime::subcritical)
        throw validation_error(
            "lambda_leading_subcritical: scenario is not subcritical");
    if (d_coeffs.size() != sc.i_min.size())
        throw validation_error(
            "lambda_leading_subcritical: one tail coefficient per minimal "
            "index required");
    double acc = 0;
    for (std::size_t t = 0; t < sc.i_min.size(); ++t)
        acc += std::exp(sc.c[sc.i_min[t]]) * d_coeffs[t];
    return 8 * pi * pi * acc * std::pow(eps, sc.m - 2.0);
}

double lambda_leading_critical(const bubble_scenario& sc,
                               const std::vector<double>& b, double eps) {
    if (sc.regime != bubble_regime::critical)
        throw validation_error(
            "lambda_leading_critical: scenario is not critical");
    if (b.size() != sc.c.size())
        throw validation_error("lambda_leading_critical: dimension mismatch");
    double acc = 0;
    for (std::size_t i = 0; i < b.size(); ++i)
        acc += b[i] * std::exp(sc.c[i]);
    return -16 * pi * pi * acc * eps * eps * std::log(1.0 / eps);
}

vec2 location_residual(const torus_geometry& geom, const torus_green& tg,
                       const std::vector<double>& rho, double m_tilde,
                       vec2 p) {
    const vec2 g1 = tg.grad1_gamma(p);
    vec2 acc;
    for (std::size_t i = 0; i < rho.size(); ++i) {
        const vec2 grad_log = (i < geom.h.size() && geom.h[i])
                                  ? geom.h[i]->grad_log(p)
                                  : vec2{0, 0};
        acc = acc + (grad_log + g1 * (2 * pi * m_tilde)) * rho[i];
    }
    return acc;
}

location_solve_result location_solve(const torus_geometry& geom,
                                     const torus_green& tg,
                                     const std::vector<double>& rho,
                                     double m_tilde, vec2 seed) {
    location_solve_result out;
    out.root = seed;
    const double fd_step = 1e-6;
    double rho_scale = 0;
    for (double r : rho) rho_scale += std::abs(r);

    for (out.iterations = 0; out.iterations < 60; ++out.iterations) {
        const vec2 f = location_residual(geom, tg, rho, m_tilde, out.root);

        // Finite-difference Jacobian of the 2-vector field; the Newton step
        // uses its pseudo-inverse since root sets may be curves (rank 1) or
        // the whole torus (rank 0).
        const vec2 fxp = location_residual(geom, tg, rho, m_tilde,
                                           out.root + vec2{fd_step, 0});
        const vec2 fxm = location_residual(geom, tg, rho, m_tilde,
                                           out.root - vec2{fd_step, 0});
        const vec2 fyp = location_residual(geom, tg, rho, m_tilde,
                                           out.root + vec2{0, fd_step});
        const vec2 fym = location_residual(geom, tg, rho, m_tilde,
                                           out.root - vec2{0, fd_step});
        Eigen::Matrix2d jac;
        jac << (fxp.x - fxm.x) / (2 * fd_step), (fyp.x - fym.x) / (2 * fd_step),
            (fxp.y - fxm.y) / (2 * fd_step), (fyp.y - fym.y) / (2 * fd_step);
        Eigen::JacobiSVD<Eigen::Matrix2d> svd(
            jac, Eigen::ComputeFullU | Eigen::ComputeFullV);
        const double s_max = svd.singularValues()(0);

        if (s_max < 1e-9 * std::max(1.0, rho_scale)) {
            // Flat field: every direction is neutral at this point.
            out.degenerate = true;
            out.converged = f.norm() < 1e-10;
            return out;
        }
        if (f.norm() < 1e-10) {
            out.converged = true;
            return out;
        }

        Eigen::Vector2d rhs(-f.x, -f.y);
        Eigen::Vector2d z = svd.matrixU().transpose() * rhs;
        Eigen::Vector2d w = Eigen::Vector2d::Zero();
        for (int k = 0; k < 2; ++k)
            if (svd.singularValues()(k) > 1e-8 * s_max)
                w(k) = z(k) / svd.singularValues()(k);
        const Eigen::Vector2d dx = svd.matrixV() * w;

        double lambda = 1.0;
        const double base = f.norm();
        bool moved = false;
        for (int half = 0; half < 40; ++half) {
            const vec2 trial = out.root + vec2{dx(0), dx(1)} * lambda;
            if (location_residual(geom, tg, rho, m_tilde, trial).norm() <
                base) {
                out.root = trial;
                moved = true;
                break;
            }
            lambda /= 2;
        }
        if (!moved) return out;
    }
    return out;
}

leading_term_report scenario_report(const bubble_scenario& sc) {
    leading_term_report rep;
    rep.regime = sc.regime;
    rep.mass = sc.mass;
    rep.m = sc.m;
    rep.i_min = sc.i_min;
    rep.c = sc.c;

    const torus_green tg(sc.geom.lat, sc.geom.eta);

    std::vector<double> d_or_b;
    if (sc.regime == bubble_regime::subcritical) {
        for (int i : sc.i_min) {
            tail_coefficient_input in;
            in.m = sc.m;
            in.p = sc.geom.p;
            in.h = sc.geom.h[i] ? &*sc.geom.h[i] : nullptr;
            const tail_report tr = tail_coefficient(in, tg);
            rep.d_route_a.push_back(tr.route_a);
            rep.d_route_b.push_back(tr.route_b);
            rep.d_routes_agree = rep.d_routes_agree && tr.agree;
            d_or_b.push_back(tr.route_a);
            rep.coefficients.push_back(std::exp(sc.c[i]) * tr.route_a);
        }
        for (double eps : sc.eps_list)
            rep.predicted.emplace_back(
                eps, lambda_leading_subcritical(sc, d_or_b, eps));
    } else {
        rep.b = b_coefficients(sc.geom, tg, true);
        for (std::size_t i = 0; i < rep.b.size(); ++i)
            rep.coefficients.push_back(rep.b[i] * std::exp(sc.c[i]));
        for (double eps : sc.eps_list)
            rep.predicted.emplace_back(eps,
                                       lambda_leading_critical(sc, rep.b, eps));
    }

    const bool log_corrected = sc.regime == bubble_regime::critical;
    const auto fit = order_fit(rep.predicted, log_corrected);
    rep.fitted_exponent = fit.exponent;
    rep.fitted_constant = fit.constant;
    rep.fit_rms = fit.rms;

    const double m_tilde =
        sc.regime == bubble_regime::critical ? 4.0 : sc.m;
    rep.location_residual_at_p =
        location_residual(sc.geom, tg, sc.rho, m_tilde, sc.geom.p);
    rep.mass_window_sup = sc.mass_window_sup;
    rep.mass_window_ok = sc.mass_window_ok;
    return rep;
}

}  // namespace liouville
