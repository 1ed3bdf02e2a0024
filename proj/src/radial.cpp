#include "liouville/radial.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "liouville/errors.hpp"
#include "liouville/fitting.hpp"
#include "liouville/ode.hpp"

namespace liouville {

namespace {

constexpr double exp_cap = 700.0;  // past this e^u overflows

double safe_exp(double x, double r) {
    if (x > exp_cap)
        throw numeric_error("exp overflow in radial system at r=" +
                            std::to_string(r));
    return std::exp(x);
}

// Cubic Hermite on [x0,x1] given endpoint values and derivatives.
double hermite(double x, double x0, double x1, double f0, double f1, double d0,
               double d1) {
    const double h = x1 - x0;
    const double t = (x - x0) / h;
    const double t2 = t * t, t3 = t2 * t;
    return (2 * t3 - 3 * t2 + 1) * f0 + (t3 - 2 * t2 + t) * h * d0 +
           (-2 * t3 + 3 * t2) * f1 + (t3 - t2) * h * d1;
}

// Quintic Hermite using values and the first two derivatives at both ends;
// keeps interpolation error far below the integrator tolerance even on the
// wide steps taken in the far field.
double hermite5(double x, double x0, double x1, double f0, double f1,
                double d0, double d1, double s0, double s1) {
    const double h = x1 - x0;
    const double t = (x - x0) / h;
    const double t2 = t * t, t3 = t2 * t, t4 = t3 * t, t5 = t4 * t;
    const double h00 = 1 - 10 * t3 + 15 * t4 - 6 * t5;
    const double h10 = t - 6 * t3 + 8 * t4 - 3 * t5;
    const double h20 = 0.5 * (t2 - 3 * t3 + 3 * t4 - t5);
    const double h01 = 10 * t3 - 15 * t4 + 6 * t5;
    const double h11 = -4 * t3 + 7 * t4 - 3 * t5;
    const double h21 = 0.5 * (t3 - 2 * t4 + t5);
    return h00 * f0 + h10 * h * d0 + h20 * h * h * s0 + h01 * f1 +
           h11 * h * d1 + h21 * h * h * s1;
}

}  // namespace

std::size_t radial_profile::interval(double r) const {
    if (r < 0 || r > grid_.back() * (1 + 1e-12))
        throw validation_error("radius outside the stored grid");
    auto it = std::upper_bound(grid_.begin(), grid_.end(), r);
    std::size_t k = static_cast<std::size_t>(it - grid_.begin());
    if (k == 0) k = 1;
    if (k >= grid_.size()) k = grid_.size() - 1;
    return k - 1;
}

double radial_profile::value(int i, double r) const {
    const std::size_t k = interval(r);
    return hermite5(r, grid_[k], grid_[k + 1], u_(i, k), u_(i, k + 1),
                    du_(i, k), du_(i, k + 1), ddu_(i, k), ddu_(i, k + 1));
}

double radial_profile::deriv(int i, double r) const {
    const std::size_t k = interval(r);
    return hermite5(r, grid_[k], grid_[k + 1], du_(i, k), du_(i, k + 1),
                    ddu_(i, k), ddu_(i, k + 1), dddu_(i, k), dddu_(i, k + 1));
}

double radial_profile::ru_prime(int i, double r) const {
    const std::size_t k = interval(r);
    const double r0 = grid_[k], r1 = grid_[k + 1];
    auto w = [&](std::size_t kk) { return grid_[kk] * du_(i, kk); };
    auto dw = [&](std::size_t kk) {
        return du_(i, kk) + grid_[kk] * ddu_(i, kk);
    };
    auto ddw = [&](std::size_t kk) {
        return 2.0 * ddu_(i, kk) + grid_[kk] * dddu_(i, kk);
    };
    return hermite5(r, r0, r1, w(k), w(k + 1), dw(k), dw(k + 1), ddw(k),
                    ddw(k + 1));
}

double radial_profile::density(int i, double r) const {
    return weights_[i] * std::exp(value(i, r));
}

std::vector<double> radial_profile::sigma_at(double r) const {
    const std::size_t k = interval(r);
    std::vector<double> out(n());
    for (int i = 0; i < n(); ++i)
        out[i] = hermite5(r, grid_[k], grid_[k + 1], sig_(i, k), sig_(i, k + 1),
                          dsig_(i, k), dsig_(i, k + 1), ddsig_(i, k),
                          ddsig_(i, k + 1));
    return out;
}

double radial_profile::logweight_at(int i, double r) const {
    const std::size_t k = interval(r);
    return hermite(r, grid_[k], grid_[k + 1], logw_(i, k), logw_(i, k + 1),
                   dlogw_(i, k), dlogw_(i, k + 1));
}

radial_profile integrate_entire(const coupling_matrix& a,
                                const std::vector<double>& h0,
                                const std::vector<double>& u0, double r_max,
                                double tol) {
    const int n = a.n();
    require_h1(a);
    if (static_cast<int>(h0.size()) != n || static_cast<int>(u0.size()) != n)
        throw validation_error("integrate_entire: dimension mismatch");
    for (double h : h0)
        if (!(h > 0) || !std::isfinite(h))
            throw validation_error("integrate_entire: weights must be positive");
    for (double u : u0)
        if (!std::isfinite(u))
            throw validation_error("integrate_entire: center values must be finite");
    if (!(r_max > 0) || !(tol > 0))
        throw validation_error("integrate_entire: r_max and tol must be positive");
    tol = std::max(tol, 1e-13);

    // Density and total source at the center.
    std::vector<double> dens0(n), f0(n);
    for (int j = 0; j < n; ++j) dens0[j] = h0[j] * safe_exp(u0[j], 0.0);
    double f0_max = 0;
    for (int i = 0; i < n; ++i) {
        double acc = 0;
        for (int j = 0; j < n; ++j) acc += a(i, j) * dens0[j];
        f0[i] = acc;
        f0_max = std::max(f0_max, acc);
    }

    // Series launch radius: small enough that the quadratic term is tiny.
    const double r_start = std::min(1e-6, 1e-2 / std::sqrt(std::max(f0_max, 1.0)));
    if (!(r_max > 10 * r_start))
        throw validation_error("integrate_entire: r_max too small");

    // u_i = u0_i + a2_i r^2 + a4_i r^4 + O(r^6) from the equation.
    std::vector<double> a2(n), a4(n);
    for (int i = 0; i < n; ++i) a2[i] = -f0[i] / 4.0;
    for (int i = 0; i < n; ++i) {
        double acc = 0;
        for (int j = 0; j < n; ++j) acc += a(i, j) * dens0[j] * f0[j];
        a4[i] = acc / 64.0;
    }

    radial_profile p;
    p.a_ = a;
    p.weights_ = h0;
    p.u0_ = u0;
    p.tol_ = tol;

    // State: [u, w = r u', sigma_R, logweight], 4n entries.
    std::vector<double> y(4 * n);
    const double r2 = r_start * r_start, r4 = r2 * r2;
    for (int i = 0; i < n; ++i) {
        y[i] = u0[i] + a2[i] * r2 + a4[i] * r4;
        y[n + i] = 2 * a2[i] * r2 + 4 * a4[i] * r4;
        y[2 * n + i] = dens0[i] * (r2 / 2 + a2[i] * r4 / 4);
        y[3 * n + i] = dens0[i] * r2 * (2 * std::log(r_start) - 1) / 4;
    }

    std::vector<std::vector<double>> cols;  // packed node data
    std::vector<double> grid;
    auto push_node = [&](double r, const std::vector<double>& state) {
        grid.push_back(r);
        cols.push_back(state);
    };

    // Node at the origin (exact by construction).
    std::vector<double> origin(4 * n, 0.0);
    for (int i = 0; i < n; ++i) origin[i] = u0[i];
    push_node(0.0, origin);
    push_node(r_start, y);

    auto rhs = [&](double r, const std::vector<double>& s,
                   std::vector<double>& ds) {
        std::vector<double> dens(n);
        for (int j = 0; j < n; ++j) dens[j] = h0[j] * safe_exp(s[j], r);
        for (int i = 0; i < n; ++i) {
            double f = 0;
            for (int j = 0; j < n; ++j) f += a(i, j) * dens[j];
            ds[i] = s[n + i] / r;
            ds[n + i] = -r * f;
            ds[2 * n + i] = r * dens[i];
            ds[3 * n + i] = r * std::log(r) * dens[i];
        }
    };

    ode_options opts;
    opts.rtol = tol;
    opts.atol = tol * 1e-2;
    opts.initial_step = r_start;
    opts.max_step_rel = 0.04;  // keeps Hermite interpolation error below tol

    integrate_ode(
        rhs, r_start, r_max, y, opts,
        [&](double r, const std::vector<double>& s, double err) {
            push_node(r, s);
            // err is the embedded-pair estimate scaled by the tolerance, so
            // err * rtol is the achieved relative local error of the step.
            p.max_local_error_ =
                std::max(p.max_local_error_, err * opts.rtol);
            // Drift of the first integral w_i + sum_j a_ij sigma_j (== 0).
            for (int i = 0; i < n; ++i) {
                double d = s[n + i];
                for (int j = 0; j < n; ++j) d += a(i, j) * s[2 * n + j];
                p.invariant_drift_ = std::max(p.invariant_drift_, std::abs(d));
            }
        });

    // Pack nodes into matrices and fill derived rates.
    const std::size_t m = grid.size();
    p.grid_ = std::move(grid);
    p.u_.resize(n, m);
    p.du_.resize(n, m);
    p.ddu_.resize(n, m);
    p.dddu_.resize(n, m);
    p.sig_.resize(n, m);
    p.dsig_.resize(n, m);
    p.ddsig_.resize(n, m);
    p.logw_.resize(n, m);
    p.dlogw_.resize(n, m);
    for (std::size_t k = 0; k < m; ++k) {
        const double r = p.grid_[k];
        const auto& s = cols[k];
        std::vector<double> dens(n), f(n, 0.0), fp(n, 0.0);
        for (int j = 0; j < n; ++j) dens[j] = h0[j] * std::exp(s[j]);
        for (int i = 0; i < n; ++i)
            for (int j = 0; j < n; ++j) f[i] += a(i, j) * dens[j];
        for (int i = 0; i < n; ++i) {
            p.u_(i, k) = s[i];
            if (k == 0) {
                // Even function of r: odd derivatives vanish at the origin.
                p.du_(i, k) = 0.0;
                p.ddu_(i, k) = -f[i] / 2.0;
                p.dddu_(i, k) = 0.0;
                p.sig_(i, k) = 0.0;
                p.dsig_(i, k) = 0.0;
                p.ddsig_(i, k) = dens[i];
                p.logw_(i, k) = 0.0;
                p.dlogw_(i, k) = 0.0;
            } else {
                p.du_(i, k) = s[n + i] / r;
                p.ddu_(i, k) = -p.du_(i, k) / r - f[i];
                p.sig_(i, k) = s[2 * n + i];
                p.dsig_(i, k) = r * dens[i];
                p.ddsig_(i, k) = dens[i] * (1.0 + r * p.du_(i, k));
                p.logw_(i, k) = s[3 * n + i];
                p.dlogw_(i, k) = r * std::log(r) * dens[i];
            }
        }
        if (k > 0) {
            for (int i = 0; i < n; ++i)
                for (int j = 0; j < n; ++j)
                    fp[i] += a(i, j) * dens[j] * p.du_(j, k);
            for (int i = 0; i < n; ++i)
                p.dddu_(i, k) =
                    -p.ddu_(i, k) / r + p.du_(i, k) / (r * r) - fp[i];
        }
    }

    // Strict radial decrease away from the origin.
    for (std::size_t k = 1; k < m; ++k)
        for (int i = 0; i < n; ++i)
            if (!(p.du_(i, k) < 0))
                throw numeric_error("radial profile lost monotonicity at r=" +
                                    std::to_string(p.grid_[k]));
    return p;
}

std::vector<double> energy_partial(const radial_profile& p, double r) {
    if (!(r > 0) || r > p.r_max() * (1 + 1e-12))
        throw validation_error("energy_partial: R outside (0, r_max]");
    return p.sigma_at(r);
}

namespace {

// Window used by asymptotic fits: [sqrt(r_max), r_max].
std::vector<std::size_t> fit_window(const radial_profile& p) {
    const double lo = std::sqrt(p.r_max());
    std::vector<std::size_t> idx;
    for (std::size_t k = 0; k < p.grid().size(); ++k)
        if (p.grid()[k] >= lo) idx.push_back(k);
    if (idx.size() < 8)
        throw numeric_error("decay window too thin; increase r_max");
    return idx;
}

struct decay_fit_core {
    std::vector<double> slope;
    double max_rms = 0;
};

decay_fit_core fit_decay(const radial_profile& p) {
    const auto idx = fit_window(p);
    std::vector<double> xs(idx.size());
    for (std::size_t t = 0; t < idx.size(); ++t)
        xs[t] = std::log(p.grid()[idx[t]]);
    decay_fit_core out;
    out.slope.resize(p.n());
    for (int i = 0; i < p.n(); ++i) {
        std::vector<double> ys(idx.size());
        for (std::size_t t = 0; t < idx.size(); ++t)
            ys[t] = p.u_node(i, idx[t]);
        const line_fit f = fit_line(xs, ys);
        out.slope[i] = -f.slope;
        out.max_rms = std::max(out.max_rms, f.rms_residual);
    }
    return out;
}

}  // namespace

energy_summary energy_total(const radial_profile& p, double margin) {
    const int n = p.n();
    const double R = p.r_max();
    const auto& a = p.matrix();

    energy_summary s;
    s.r_max = R;
    s.sigma = p.sigma_at(R);

    std::vector<double> c_best(n, 0.0);
    bool have_c = false;
    std::vector<double> l_dir(n, 0.0);

    // Limit fit of u_i + log h_i + l_i log r at three nested radii.
    auto c_fit_at = [&](int i, double l) {
        auto f = [&](double r) {
            return p.value(i, r) + std::log(p.weights()[i]) + l * std::log(r);
        };
        return richardson3(f(R), f(R / 4.0), f(R / 16.0), 4.0).first;
    };

    const int max_pass = 200;
    int pass = 0;
    for (; pass < max_pass; ++pass) {
        for (int i = 0; i < n; ++i) {
            double acc = 0;
            for (int j = 0; j < n; ++j) acc += a(i, j) * s.sigma[j];
            l_dir[i] = acc;
        }
        for (int i = 0; i < n; ++i)
            if (!(l_dir[i] > 2.0 + margin))
                throw numeric_error(
                    "energy_total: decay exponent too close to 2 "
                    "(r_max too small or non-integrable data)");

        if (!have_c) {
            for (int i = 0; i < n; ++i) c_best[i] = c_fit_at(i, l_dir[i]);
            have_c = true;
        }

        // Integral route for c, with the analytic tail beyond r_max.
        std::vector<double> c_int(n);
        for (int i = 0; i < n; ++i) {
            double acc = 0;
            for (int j = 0; j < n; ++j) {
                const double lj = l_dir[j];
                const double tail =
                    std::exp(c_best[j]) *
                    (std::pow(R, 2 - lj) * std::log(R) / (lj - 2) +
                     std::pow(R, 2 - lj) / ((lj - 2) * (lj - 2)));
                acc += a(i, j) * (p.logweight_at(j, R) + tail);
            }
            c_int[i] = p.center_values()[i] + std::log(p.weights()[i]) + acc;
        }
        c_best = c_int;

        const auto s_r = p.sigma_at(R);
        double delta = 0;
        for (int i = 0; i < n; ++i) {
            const double tail = std::exp(c_int[i]) / (l_dir[i] - 2) *
                                std::pow(R, 2 - l_dir[i]);
            const double next = s_r[i] + tail;
            delta = std::max(delta, std::abs(next - s.sigma[i]));
            s.sigma[i] = next;
        }
        if (delta < 1e-13 * std::max(1.0, s.sigma[0])) {
            ++pass;
            break;
        }
        if (pass == max_pass - 1)
            throw numeric_error(
                "energy_total: self-consistency loop did not converge");
    }
    s.iterations = pass;

    s.c = c_best;
    s.l_direct = l_dir;
    s.m_min = *std::min_element(l_dir.begin(), l_dir.end());
    for (int i = 0; i < n; ++i)
        if (l_dir[i] <= s.m_min + 1e-6) s.i_min.push_back(i);

    s.c_fit.resize(n);
    for (int i = 0; i < n; ++i) s.c_fit[i] = c_fit_at(i, l_dir[i]);
    for (int i = 0; i < n; ++i)
        s.c_route_gap = std::max(s.c_route_gap, std::abs(s.c[i] - s.c_fit[i]));

    const auto decay = fit_decay(p);
    s.l = decay.slope;
    s.fit_rms = decay.max_rms;

    for (double r = R; r >= 10.0 && s.sigma_R.size() < 16; r /= 2.0)
        s.sigma_R.emplace_back(r, p.sigma_at(r));

    return s;
}

std::pair<std::vector<double>, std::vector<double>> c_constants(
    const radial_profile& p) {
    const energy_summary s = energy_total(p);
    if (s.c_route_gap > 1e-3)
        throw numeric_error(
            "c_constants: the two routes disagree beyond 1e-3 "
            "(under-resolved tails)");
    return {s.c, s.c_fit};
}

decay_fit_result decay_fit(const radial_profile& p) {
    const energy_summary s = energy_total(p);
    return {s.l, s.l_direct, s.fit_rms, s.fit_rms > 1e-2};
}

double pohozaev_residual(const std::vector<double>& sigma,
                         const coupling_matrix& a) {
    if (static_cast<int>(sigma.size()) != a.n())
        throw validation_error("pohozaev_residual: dimension mismatch");
    double lin = 0, quad = 0;
    for (int i = 0; i < a.n(); ++i) {
        lin += sigma[i];
        for (int j = 0; j < a.n(); ++j) quad += a(i, j) * sigma[i] * sigma[j];
    }
    return 4.0 * lin - quad;
}

double pohozaev_residual(const energy_summary& s, const coupling_matrix& a) {
    return pohozaev_residual(s.sigma, a);
}

double finite_r_pohozaev_check(const radial_profile& p,
                               const energy_summary& s, double r) {
    const auto sr = p.sigma_at(r);
    double value = pohozaev_residual(sr, p.matrix());
    for (int i = 0; i < p.n(); ++i)
        value -= 2.0 * std::exp(s.c[i]) * std::pow(r, 2.0 - s.l_direct[i]);
    return value;
}

double finite_r_pohozaev_check(const radial_profile& p, double r) {
    return finite_r_pohozaev_check(p, energy_total(p), r);
}

radial_profile shoot_for_energies(const coupling_matrix& a,
                                  const std::vector<double>& h0,
                                  const std::vector<double>& target_sigma,
                                  const shooting_options& opts) {
    const int n = a.n();
    require_h1(a);
    if (static_cast<int>(target_sigma.size()) != n)
        throw validation_error("shoot_for_energies: dimension mismatch");
    for (double t : target_sigma)
        if (!(t > 0))
            throw validation_error("shoot_for_energies: target energies must be positive");

    double tsum = 0;
    for (double t : target_sigma) tsum += 4 * t;
    const double quadric_gap = std::abs(pohozaev_residual(target_sigma, a));
    if (quadric_gap > 10 * opts.tol * std::max(1.0, tsum))
        throw validation_error("shoot_for_energies: target is off the quadric");
    for (int i = 0; i < n; ++i) {
        double acc = 0;
        for (int j = 0; j < n; ++j) acc += a(i, j) * target_sigma[j];
        if (!(acc > 2.0))
            throw validation_error(
                "shoot_for_energies: target decay exponents must exceed 2");
    }

    auto solve = [&](const std::vector<double>& offsets) {
        std::vector<double> u0(n, 0.0);
        for (int i = 1; i < n; ++i) u0[i] = offsets[i - 1];
        return integrate_entire(a, h0, u0, opts.r_max, opts.ode_tol);
    };
    auto energies = [&](const std::vector<double>& offsets,
                        radial_profile* keep) -> std::vector<double> {
        radial_profile p = solve(offsets);
        energy_summary s = energy_total(p);
        if (keep) *keep = std::move(p);
        return s.sigma;
    };

    if (n == 1) {
        radial_profile p = solve({});
        const auto sig = energy_total(p).sigma;
        if (std::abs(sig[0] - target_sigma[0]) > opts.tol)
            throw numeric_error("shoot_for_energies: scalar target unreachable");
        return p;
    }

    // Warm start from the energy ratios.
    std::vector<double> x(n - 1);
    for (int i = 1; i < n; ++i)
        x[i - 1] = std::log(target_sigma[i] / target_sigma[0]);

    auto mismatch = [&](const std::vector<double>& sig) {
        double m = 0;
        for (int i = 0; i < n; ++i)
            m = std::max(m, std::abs(sig[i] - target_sigma[i]));
        return m;
    };
    auto norm2 = [&](const std::vector<double>& sig) {
        double m = 0;
        for (int i = 0; i < n; ++i)
            m += (sig[i] - target_sigma[i]) * (sig[i] - target_sigma[i]);
        return m;
    };

    radial_profile best;
    std::vector<double> sig = energies(x, &best);
    for (int iter = 0; iter < opts.max_iterations; ++iter) {
        if (mismatch(sig) < opts.tol) return best;

        Eigen::MatrixXd jac(n, n - 1);
        for (int k = 0; k < n - 1; ++k) {
            const double step = 1e-6 * std::max(1.0, std::abs(x[k]));
            std::vector<double> xp = x;
            xp[k] += step;
            const auto sp = energies(xp, nullptr);
            for (int i = 0; i < n; ++i)
                jac(i, k) = (sp[i] - sig[i]) / step;
        }
        Eigen::VectorXd f(n);
        for (int i = 0; i < n; ++i) f(i) = sig[i] - target_sigma[i];
        Eigen::VectorXd dx = jac.colPivHouseholderQr().solve(-f);
        if (!dx.allFinite())
            throw numeric_error("shoot_for_energies: singular Jacobian");

        // Step halving on residual increase.
        const double base = norm2(sig);
        double lambda = 1.0;
        bool accepted = false;
        for (int half = 0; half <= opts.max_halvings; ++half) {
            std::vector<double> xt = x;
            for (int k = 0; k < n - 1; ++k) xt[k] += lambda * dx(k);
            try {
                radial_profile ptrial;
                const auto st = energies(xt, &ptrial);
                if (norm2(st) < base || mismatch(st) < opts.tol) {
                    x = xt;
                    sig = st;
                    best = std::move(ptrial);
                    accepted = true;
                    break;
                }
            } catch (const numeric_error&) {
                // fall through to a shorter step
            }
            lambda /= 2.0;
        }
        if (!accepted) {
            if (mismatch(sig) < opts.tol) return best;
            throw numeric_error(
                "shoot_for_energies: stalled with componentwise mismatch " +
                std::to_string(mismatch(sig)) +
                " (tail-correction floor of the energy map?)");
        }
    }
    if (mismatch(sig) < opts.tol) return best;
    throw numeric_error("shoot_for_energies: no convergence within iteration "
                        "budget");
}

}  // namespace liouville
