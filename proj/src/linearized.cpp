#include "liouville/linearized.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "liouville/errors.hpp"
#include "liouville/fitting.hpp"
#include "liouville/ode.hpp"

namespace liouville {

namespace {

double hermite(double x, double x0, double x1, double f0, double f1, double d0,
               double d1) {
    const double h = x1 - x0;
    const double t = (x - x0) / h;
    const double t2 = t * t, t3 = t2 * t;
    return (2 * t3 - 3 * t2 + 1) * f0 + (t3 - 2 * t2 + t) * h * d0 +
           (-2 * t3 + 3 * t2) * f1 + (t3 - t2) * h * d1;
}

// Shared launch geometry with the profile integration.
double launch_radius(const radial_profile& p) {
    const int n = p.n();
    double f_max = 0;
    for (int i = 0; i < n; ++i) {
        double f = 0;
        for (int j = 0; j < n; ++j)
            f += p.matrix()(i, j) * p.weights()[j] *
                 std::exp(p.center_values()[j]);
        f_max = std::max(f_max, f);
    }
    return std::min(1e-6, 1e-2 / std::sqrt(std::max(f_max, 1.0)));
}

// State layout for co-integrated solves: [u(n), w(n), columns...] where each
// column is (phi(n), psi(n)) with psi = r phi'. The background (u, w) is
// re-integrated alongside so the potential is exact at every stage.
struct mode_workspace {
    const radial_profile* p;
    int n;
    int ell;
    int cols;

    void seed_background(std::vector<double>& y, double r0) const {
        const auto& a = p->matrix();
        std::vector<double> dens0(n), f0(n);
        for (int j = 0; j < n; ++j)
            dens0[j] = p->weights()[j] * std::exp(p->center_values()[j]);
        for (int i = 0; i < n; ++i) {
            double acc = 0;
            for (int j = 0; j < n; ++j) acc += a(i, j) * dens0[j];
            f0[i] = acc;
        }
        const double r2 = r0 * r0;
        for (int i = 0; i < n; ++i) {
            double acc = 0;
            for (int j = 0; j < n; ++j) acc += a(i, j) * dens0[j] * f0[j];
            const double a2 = -f0[i] / 4.0, a4 = acc / 64.0;
            y[i] = p->center_values()[i] + a2 * r2 + a4 * r2 * r2;
            y[n + i] = 2 * a2 * r2 + 4 * a4 * r2 * r2;
        }
    }

    // rhs with an optional per-component forcing f_i(r, dens).
    template <typename Forcing>
    void eval(double r, const std::vector<double>& y, std::vector<double>& dy,
              const Forcing& forcing) const {
        const auto& a = p->matrix();
        std::vector<double> dens(n);
        for (int j = 0; j < n; ++j) {
            const double uj = y[j];
            if (uj > 700.0)
                throw numeric_error("mode solve: exp overflow at r=" +
                                    std::to_string(r));
            dens[j] = p->weights()[j] * std::exp(uj);
        }
        for (int i = 0; i < n; ++i) {
            double f = 0;
            for (int j = 0; j < n; ++j) f += a(i, j) * dens[j];
            dy[i] = y[n + i] / r;
            dy[n + i] = -r * f;
        }
        const double l2 = static_cast<double>(ell) * ell;
        for (int c = 0; c < cols; ++c) {
            const int base = 2 * n + 2 * n * c;
            for (int i = 0; i < n; ++i) {
                const double phi = y[base + i];
                const double psi = y[base + n + i];
                double coupling = 0;  // sum_j a_ij h_j e^{u_j} phi_j
                for (int j = 0; j < n; ++j)
                    coupling += a(i, j) * dens[j] * y[base + j];
                dy[base + i] = psi / r;
                dy[base + n + i] =
                    l2 * phi / r - r * coupling + r * forcing(c, i, r, dens);
            }
        }
    }
};

struct no_forcing {
    double operator()(int, int, double, const std::vector<double>&) const {
        return 0.0;
    }
};

}  // namespace

mode_solution::mode_solution(std::vector<double> grid, Eigen::MatrixXd phi,
                             Eigen::MatrixXd dphi, int ell)
    : grid_(std::move(grid)), phi_(std::move(phi)), dphi_(std::move(dphi)),
      ell_(ell) {}

double mode_solution::value(int i, double r) const {
    if (r < grid_.front() || r > grid_.back() * (1 + 1e-12))
        throw validation_error("mode_solution: radius outside stored grid");
    auto it = std::upper_bound(grid_.begin(), grid_.end(), r);
    std::size_t k = static_cast<std::size_t>(it - grid_.begin());
    if (k == 0) k = 1;
    if (k >= grid_.size()) k = grid_.size() - 1;
    --k;
    return hermite(r, grid_[k], grid_[k + 1], phi_(i, k), phi_(i, k + 1),
                   dphi_(i, k), dphi_(i, k + 1));
}

// The pointwise operator would differentiate the sampled data twice and
// amplify integrator jitter by 1/h^2, so the residual is measured in flux
// form instead:
//   r phi' |_{r_a}^{r} - int_{r_a}^{r} ( ell^2 phi/s - s sum_j P_ij phi_j ) ds,
// which differentiates the data once and smooths the rest by quadrature.
double mode_operator_residual(const radial_profile& p, int ell,
                              const mode_sampler& phi, double r_lo,
                              double r_hi) {
    const int n = p.n();
    if (!(r_hi > 4 * r_lo) || !(r_lo > 0))
        throw validation_error("mode_operator_residual: window too thin");

    const int big_n = 3001;  // odd for pairwise Simpson
    const double t_lo = std::log(r_lo), t_hi = std::log(r_hi);
    const double ht = (t_hi - t_lo) / (big_n - 1);
    Eigen::MatrixXd vals(n, big_n);
    std::vector<double> radii(big_n);
    for (int k = 0; k < big_n; ++k) {
        radii[k] = std::exp(t_lo + k * ht);
        for (int i = 0; i < n; ++i) vals(i, k) = phi(i, radii[k]);
    }

    // r phi' = dphi/dt by 4th-order differences in t = log r.
    Eigen::MatrixXd flux(n, big_n);
    for (int k = 2; k < big_n - 2; ++k)
        for (int i = 0; i < n; ++i)
            flux(i, k) = (-vals(i, k + 2) + 8 * vals(i, k + 1) -
                          8 * vals(i, k - 1) + vals(i, k - 2)) /
                         (12 * ht);

    // g_i(s) = ell^2 phi_i / s - s sum_j P_ij phi_j, times ds = s dt.
    Eigen::MatrixXd integrand(n, big_n);
    for (int k = 0; k < big_n; ++k) {
        const double r = radii[k];
        for (int i = 0; i < n; ++i) {
            double coupling = 0;
            for (int j = 0; j < n; ++j)
                coupling += p.matrix()(i, j) * p.density(j, r) * vals(j, k);
            integrand(i, k) = static_cast<double>(ell) * ell * vals(i, k) -
                              r * r * coupling;
        }
    }

    const int k_a = 2;
    double worst = 0;
    std::vector<double> acc(n, 0.0);
    for (int k = k_a + 2; k < big_n - 2; k += 2) {
        for (int i = 0; i < n; ++i) {
            acc[i] += ht / 3.0 *
                      (integrand(i, k - 2) + 4 * integrand(i, k - 1) +
                       integrand(i, k));
            const double res = flux(i, k) - flux(i, k_a) - acc[i];
            worst = std::max(worst, std::abs(res));
        }
    }
    return worst;
}

kernel_check known_kernel_mode1(const radial_profile& p) {
    const int n = p.n();
    const auto& grid = p.grid();
    Eigen::MatrixXd phi(n, grid.size()), dphi(n, grid.size());
    for (std::size_t k = 0; k < grid.size(); ++k) {
        const double r = grid[k];
        for (int i = 0; i < n; ++i) {
            double f = 0;
            for (int j = 0; j < n; ++j)
                f += p.matrix()(i, j) * p.density(j, r);
            const double du = p.du_node(i, k);
            phi(i, k) = du;
            dphi(i, k) = (k == 0) ? -f / 2.0 : -du / r - f;
        }
    }
    kernel_check out{mode_solution(grid, phi, dphi, 1), 0.0};
    // Sample straight from the profile interpolant (C^2 across nodes).
    out.residual = mode_operator_residual(
        p, 1, [&p](int i, double r) { return p.deriv(i, r); }, 1e-2,
        std::min(1e3, 0.9 * p.r_max()));
    return out;
}

kernel_check known_kernel_mode0(const radial_profile& p) {
    const int n = p.n();
    const auto& grid = p.grid();
    Eigen::MatrixXd phi(n, grid.size()), dphi(n, grid.size());
    for (std::size_t k = 0; k < grid.size(); ++k) {
        const double r = grid[k];
        for (int i = 0; i < n; ++i) {
            double f = 0;
            for (int j = 0; j < n; ++j)
                f += p.matrix()(i, j) * p.density(j, r);
            const double du = p.du_node(i, k);
            const double ddu = (k == 0) ? -f / 2.0 : -du / r - f;
            phi(i, k) = r * du + 2.0;
            dphi(i, k) = du + r * ddu;
        }
    }
    kernel_check out{mode_solution(grid, phi, dphi, 0), 0.0};
    out.residual = mode_operator_residual(
        p, 0, [&p](int i, double r) { return p.ru_prime(i, r) + 2.0; }, 1e-2,
        std::min(1e3, 0.9 * p.r_max()));
    return out;
}

regular_basis_result regular_basis(const mode_system& ms, double r_max) {
    const radial_profile& p = *ms.profile;
    const int n = p.n();
    const int ell = ms.ell;
    if (ell < 1) throw validation_error("regular_basis: ell must be >= 1");
    if (ell > 16) throw validation_error("regular_basis: ell too large");
    if (!(r_max > 1.0)) throw validation_error("regular_basis: r_max too small");

    mode_workspace ws{&p, n, ell, n};
    const double r0 = launch_radius(p);

    std::vector<double> y(2 * n + 2 * n * n, 0.0);
    ws.seed_background(y, r0);
    // Normalized regular launch: phi^{(s)}_i = delta_is, psi = ell * phi.
    for (int s = 0; s < n; ++s) {
        y[2 * n + 2 * n * s + s] = 1.0;
        y[2 * n + 2 * n * s + n + s] = static_cast<double>(ell);
    }

    ode_options opts;
    opts.rtol = std::max(p.tolerance(), 1e-12);
    opts.atol = opts.rtol * 1e-2;
    opts.initial_step = r0;

    regular_basis_result out;
    out.ell = ell;
    out.log_growth.assign(n, {});

    // Half-decade renormalization checkpoints.
    std::vector<double> stops;
    for (double r = r0 * std::sqrt(10.0); r < r_max; r *= std::sqrt(10.0))
        stops.push_back(r);
    stops.push_back(r_max);

    std::vector<double> cumulative(n, 0.0);
    double r_cur = r0;
    auto rhs = [&](double r, const std::vector<double>& s,
                   std::vector<double>& ds) { ws.eval(r, s, ds, no_forcing{}); };
    for (double r_stop : stops) {
        integrate_ode(rhs, r_cur, r_stop, y, opts, nullptr);
        r_cur = r_stop;

        Eigen::MatrixXd basis(2 * n, n);
        for (int s = 0; s < n; ++s)
            for (int i = 0; i < 2 * n; ++i)
                basis(i, s) = y[2 * n + 2 * n * s + i];
        Eigen::HouseholderQR<Eigen::MatrixXd> qr(basis);
        Eigen::MatrixXd q = qr.householderQ() * Eigen::MatrixXd::Identity(2 * n, n);
        Eigen::MatrixXd r_fact =
            qr.matrixQR().topRows(n).triangularView<Eigen::Upper>();
        // Fix signs so the diagonal is positive.
        for (int s = 0; s < n; ++s)
            if (r_fact(s, s) < 0) {
                r_fact.row(s) *= -1.0;
                q.col(s) *= -1.0;
            }
        for (int s = 0; s < n; ++s) {
            cumulative[s] += std::log(std::abs(r_fact(s, s)));
            out.log_growth[s].push_back(cumulative[s]);
        }
        out.checkpoints.push_back(r_stop);
        for (int s = 0; s < n; ++s)
            for (int i = 0; i < 2 * n; ++i)
                y[2 * n + 2 * n * s + i] = q(i, s);
        out.final_frame = q;
    }

    // Fit growth exponents on the asymptotic window.
    const double window_lo = std::sqrt(r_max);
    std::vector<double> xs;
    std::vector<std::size_t> idx;
    for (std::size_t k = 0; k < out.checkpoints.size(); ++k)
        if (out.checkpoints[k] >= window_lo * (1 - 1e-9)) {
            xs.push_back(std::log(out.checkpoints[k]));
            idx.push_back(k);
        }
    if (xs.size() < 3)
        throw numeric_error("regular_basis: growth window too thin");
    out.exponents.resize(n);
    for (int s = 0; s < n; ++s) {
        std::vector<double> ys;
        for (std::size_t k : idx) ys.push_back(out.log_growth[s][k]);
        out.exponents[s] = fit_line(xs, ys).slope;
    }
    return out;
}

uniqueness_report uniqueness_probe(const mode_system& ms, double r_max) {
    const regular_basis_result basis = regular_basis(ms, r_max);
    const radial_profile& p = *ms.profile;
    const int n = p.n();

    uniqueness_report rep;
    rep.ell = ms.ell;
    rep.exponents = basis.exponents;
    std::sort(rep.exponents.begin(), rep.exponents.end());
    rep.min_exponent = rep.exponents.front();
    for (double thr : {0.25, 0.5, 1.0}) {
        int dim = 0;
        for (double q : rep.exponents)
            if (q < thr) ++dim;
        rep.dim_by_threshold[thr] = dim;
    }
    rep.bounded_dim = rep.dim_by_threshold[0.5];

    if (ms.ell == 1) {
        // Direction of (u', r u'') at r_max in the final orthonormal frame.
        Eigen::VectorXd v(2 * n);
        const double r = r_max;
        for (int i = 0; i < n; ++i) {
            double f = 0;
            for (int j = 0; j < n; ++j)
                f += p.matrix()(i, j) * p.density(j, r);
            const double du = p.deriv(i, r);
            v(i) = du;
            v(n + i) = r * (-du / r - f);
        }
        v.normalize();
        // Column with the smallest fitted exponent.
        int s_min = 0;
        for (int s = 1; s < n; ++s)
            if (basis.exponents[s] < basis.exponents[s_min]) s_min = s;
        rep.uprime_alignment =
            std::abs(basis.final_frame.col(s_min).dot(v));
    }
    return rep;
}

std::vector<double> decay_check_mode1(const mode_solution& sol) {
    const double r_hi = sol.grid().back();
    const double r_lo = std::sqrt(r_hi);
    std::vector<double> xs;
    std::vector<std::size_t> idx;
    for (std::size_t k = 0; k < sol.grid().size(); ++k)
        if (sol.grid()[k] >= r_lo) {
            xs.push_back(std::log(sol.grid()[k]));
            idx.push_back(k);
        }
    if (xs.size() < 8)
        throw numeric_error("decay_check_mode1: window too thin");
    std::vector<double> out(sol.n());
    for (int i = 0; i < sol.n(); ++i) {
        std::vector<double> ys;
        for (std::size_t k : idx)
            ys.push_back(std::log(std::abs(sol.phi_node(i, k))));
        out[i] = -fit_line(xs, ys).slope;
    }
    return out;
}

namespace {

struct forced_solve {
    std::vector<double> grid;
    Eigen::MatrixXd phi, dphi;
};

// Inhomogeneous co-integrated solve with forcing
//   f_i(r) = r^pow * sum_j a_ij q_j e^{u_j(r)}
// launched with the matching regular series at r0.
forced_solve solve_forced(const radial_profile& p, int ell, int pow,
                          const std::vector<double>& q, double r_max) {
    const int n = p.n();
    mode_workspace ws{&p, n, ell, 1};
    const double r0 = launch_radius(p);

    std::vector<double> beta(n, 0.0);
    for (int i = 0; i < n; ++i)
        for (int j = 0; j < n; ++j)
            beta[i] += p.matrix()(i, j) * q[j] * std::exp(p.center_values()[j]);

    std::vector<double> y(2 * n + 2 * n, 0.0);
    ws.seed_background(y, r0);
    // Particular series g = beta r^{pow+2} / ((pow+2)^2 - ell^2).
    const double denom =
        static_cast<double>((pow + 2) * (pow + 2) - ell * ell);
    for (int i = 0; i < n; ++i) {
        const double g0 = beta[i] * std::pow(r0, pow + 2) / denom;
        y[2 * n + i] = g0;
        y[2 * n + n + i] = (pow + 2) * g0;
    }

    auto forcing = [&](int, int i, double r,
                       const std::vector<double>& dens) {
        double f = 0;
        for (int j = 0; j < n; ++j)
            f += p.matrix()(i, j) * q[j] * dens[j] / p.weights()[j];
        return f * std::pow(r, pow);
    };
    auto rhs = [&](double r, const std::vector<double>& s,
                   std::vector<double>& ds) { ws.eval(r, s, ds, forcing); };

    ode_options opts;
    opts.rtol = std::max(p.tolerance(), 1e-12);
    opts.atol = opts.rtol * 1e-4;
    opts.initial_step = r0;

    std::vector<double> grid{r0};
    std::vector<std::vector<double>> nodes{
        {y.begin() + 2 * n, y.end()}};
    integrate_ode(rhs, r0, r_max, y, opts,
                  [&](double r, const std::vector<double>& s, double) {
                      grid.push_back(r);
                      nodes.emplace_back(s.begin() + 2 * n, s.end());
                  });

    Eigen::MatrixXd phi(n, grid.size()), dphi(n, grid.size());
    for (std::size_t k = 0; k < grid.size(); ++k)
        for (int i = 0; i < n; ++i) {
            phi(i, k) = nodes[k][i];
            dphi(i, k) = nodes[k][n + i] / grid[k];
        }
    return {std::move(grid), std::move(phi), std::move(dphi)};
}

}  // namespace

correction_result radial_correction(const radial_profile& p,
                                    const std::vector<double>& lap_h,
                                    double eps) {
    const int n = p.n();
    if (static_cast<int>(lap_h.size()) != n)
        throw validation_error("radial_correction: dimension mismatch");
    if (!(eps > 0)) throw validation_error("radial_correction: eps must be positive");

    std::vector<double> q(n);
    for (int i = 0; i < n; ++i) q[i] = -(eps * eps / 4.0) * lap_h[i];

    correction_result out;
    out.m = energy_total(p).m_min;
    out.delta = 0.1;
    auto raw = solve_forced(p, 0, 2, q, p.r_max());
    out.sol = mode_solution(std::move(raw.grid), std::move(raw.phi),
                            std::move(raw.dphi), 0);

    const double e2 = eps * eps;
    for (std::size_t k = 0; k < out.sol.grid().size(); ++k) {
        const double r = out.sol.grid()[k];
        const double poly = e2 * std::pow(1.0 + r, 4.0 - out.m + out.delta);
        const double logb = e2 * std::pow(std::log(2.0 + r), 2.0);
        for (int i = 0; i < n; ++i) {
            const double g = std::abs(out.sol.phi_node(i, k));
            out.bound_constant = std::max(out.bound_constant, g / poly);
            out.bound_constant_log = std::max(out.bound_constant_log, g / logb);
        }
    }
    return out;
}

std::array<correction_result, 2> mode1_correction(
    const radial_profile& p,
    const std::vector<std::array<double, 2>>& grad_h) {
    const int n = p.n();
    if (static_cast<int>(grad_h.size()) != n)
        throw validation_error("mode1_correction: dimension mismatch");

    const double m = energy_total(p).m_min;
    std::array<correction_result, 2> out;
    for (int t = 0; t < 2; ++t) {
        std::vector<double> q(n);
        for (int i = 0; i < n; ++i) q[i] = -grad_h[i][t];
        out[t].m = m;
        out[t].delta = 0.0;
        auto raw = solve_forced(p, 1, 1, q, p.r_max());

        // The zero-data solution carries the growing homogeneous mode
        // (~ c r at infinity); the bounded representative removes it.
        // Fit G = A r + B / r at two outer radii per component.
        const std::size_t last = raw.grid.size() - 1;
        std::size_t mid = last;
        while (mid > 0 && raw.grid[mid] > raw.grid[last] / 4.0) --mid;
        out[t].growing_coefficient.resize(n);
        for (int i = 0; i < n; ++i) {
            const double r1 = raw.grid[mid], r2 = raw.grid[last];
            const double g1 = raw.phi(i, mid), g2 = raw.phi(i, last);
            const double a_coef = (r2 * g2 - r1 * g1) / (r2 * r2 - r1 * r1);
            out[t].growing_coefficient[i] = a_coef;
            for (std::size_t k = 0; k < raw.grid.size(); ++k) {
                raw.phi(i, k) -= a_coef * raw.grid[k];
                raw.dphi(i, k) -= a_coef;
            }
        }
        out[t].sol = mode_solution(std::move(raw.grid), std::move(raw.phi),
                                   std::move(raw.dphi), 1);

        for (std::size_t k = 0; k < out[t].sol.grid().size(); ++k) {
            const double r = out[t].sol.grid()[k];
            const double bound = r * std::pow(1.0 + r, 2.0 - m);
            for (int i = 0; i < n; ++i)
                out[t].bound_constant =
                    std::max(out[t].bound_constant,
                             std::abs(out[t].sol.phi_node(i, k)) / bound);
        }
    }
    return out;
}

}  // namespace liouville
