#include "liouville/torus_green.hpp"

#include <algorithm>
#include <array>
#include <limits>
#include <mutex>

#include "liouville/errors.hpp"

namespace liouville {

namespace {

constexpr double euler_gamma = 0.57721566490153286061;

// Exponential integral E1 on (0, inf): power series below 1, modified-Lentz
// continued fraction above.
double expint_e1(double x) {
    if (!(x > 0)) throw validation_error("expint_e1: argument must be positive");
    if (x <= 1.0) {
        double sum = 0, term = 1.0;
        for (int k = 1; k < 40; ++k) {
            term *= -x / k;
            const double add = -term / k;
            sum += add;
            if (std::abs(add) < 1e-18 * (std::abs(sum) + 1e-30)) break;
        }
        return -euler_gamma - std::log(x) + sum;
    }
    if (x > 700.0) return 0.0;
    double b = x + 1.0;
    double c = 1e308, d = 1.0 / b, h = d;
    for (int i = 1; i < 200; ++i) {
        const double a = -static_cast<double>(i) * i;
        b += 2.0;
        d = 1.0 / (b + a * d);
        c = b + a / c;
        const double del = c * d;
        h *= del;
        if (std::abs(del - 1.0) < 1e-16) break;
    }
    return h * std::exp(-x);
}

// E1(z) + log(z), analytic at z = 0 (value -euler_gamma).
double expint_e1_plus_log(double z) {
    if (z < 1.0) {
        double sum = 0, term = 1.0;
        for (int k = 1; k < 40; ++k) {
            term *= -z / k;
            const double add = -term / k;
            sum += add;
            if (std::abs(add) < 1e-18 * (std::abs(sum) + 1e-30)) break;
        }
        return -euler_gamma + sum;
    }
    return expint_e1(z) + std::log(z);
}

// (1 - e^{-z})/z, analytic at 0.
double one_minus_exp_over(double z) {
    if (std::abs(z) < 1e-8) return 1.0 - z / 2.0 + z * z / 6.0;
    return (1.0 - std::exp(-z)) / z;
}

// Gauss-Legendre nodes/weights on [-1, 1] by Newton on the recurrence.
struct gauss_rule {
    std::vector<double> node, weight;
};

const gauss_rule& legendre_rule(int order) {
    static std::vector<gauss_rule> cache(64);
    static std::mutex cache_mutex;  // quadratures may run concurrently
    if (order < 2 || order >= 64)
        throw validation_error("legendre_rule: unsupported order");
    std::lock_guard<std::mutex> lock(cache_mutex);
    gauss_rule& rule = cache[order];
    if (!rule.node.empty()) return rule;
    rule.node.resize(order);
    rule.weight.resize(order);
    for (int i = 0; i < order; ++i) {
        double x = std::cos(pi * (i + 0.75) / (order + 0.5));
        for (int it = 0; it < 100; ++it) {
            double p0 = 1.0, p1 = x;
            for (int k = 2; k <= order; ++k) {
                const double p2 = ((2 * k - 1) * x * p1 - (k - 1) * p0) / k;
                p0 = p1;
                p1 = p2;
            }
            const double dp = order * (x * p1 - p0) / (x * x - 1.0);
            const double dx = p1 / dp;
            x -= dx;
            if (std::abs(dx) < 1e-15) break;
        }
        double p0 = 1.0, p1 = x;
        for (int k = 2; k <= order; ++k) {
            const double p2 = ((2 * k - 1) * x * p1 - (k - 1) * p0) / k;
            p0 = p1;
            p1 = p2;
        }
        const double dp = order * (x * p1 - p0) / (x * x - 1.0);
        rule.node[i] = x;
        rule.weight[i] = 2.0 / ((1.0 - x * x) * dp * dp);
    }
    return rule;
}

}  // namespace

lattice2 lattice2::make(vec2 e1, vec2 e2) {
    lattice2 lat;
    lat.e1_ = e1;
    lat.e2_ = e2;
    lat.det_ = e1.x * e2.y - e1.y * e2.x;
    if (std::abs(std::abs(lat.det_) - 1.0) > 1e-12)
        throw validation_error("lattice2: cell must have unit area");
    const double d = lat.det_;
    lat.b1_ = vec2(2 * pi * e2.y / d, -2 * pi * e2.x / d);
    lat.b2_ = vec2(-2 * pi * e1.y / d, 2 * pi * e1.x / d);
    return lat;
}

vec2 lattice2::wrap_centered(vec2 d) const {
    double s1 = (e2_.y * d.x - e2_.x * d.y) / det_;
    double s2 = (-e1_.y * d.x + e1_.x * d.y) / det_;
    s1 -= std::round(s1);
    s2 -= std::round(s2);
    return e1_ * s1 + e2_ * s2;
}

double lattice2::boundary_radius(double theta) const {
    const vec2 u(std::cos(theta), std::sin(theta));
    const double c1 = (e2_.y * u.x - e2_.x * u.y) / det_;
    const double c2 = (-e1_.y * u.x + e1_.x * u.y) / det_;
    const double m = std::max(std::abs(c1), std::abs(c2));
    return 0.5 / m;
}

std::vector<double> lattice2::corner_angles() const {
    std::vector<double> angles;
    for (double s1 : {-0.5, 0.5})
        for (double s2 : {-0.5, 0.5}) {
            const vec2 c = e1_ * s1 + e2_ * s2;
            double a = std::atan2(c.y, c.x);
            if (a < 0) a += 2 * pi;
            angles.push_back(a);
        }
    std::sort(angles.begin(), angles.end());
    return angles;
}

double lattice2::circumradius() const {
    double r = 0;
    for (double s1 : {-0.5, 0.5})
        for (double s2 : {-0.5, 0.5})
            r = std::max(r, (e1_ * s1 + e2_ * s2).norm());
    return r;
}

fourier_series2::fourier_series2(const lattice2& lat, std::vector<term> terms)
    : lat_(lat), terms_(std::move(terms)) {
    waves_.reserve(terms_.size());
    for (const auto& t : terms_)
        waves_.push_back(lat_.b1() * static_cast<double>(t.m1) +
                         lat_.b2() * static_cast<double>(t.m2));
    // Positivity is the caller's duty; verify on a sample grid.
    sampled_min_ = std::numeric_limits<double>::infinity();
    const int grid = 64;
    for (int i = 0; i < grid; ++i)
        for (int j = 0; j < grid; ++j) {
            const vec2 x = lat_.e1() * (static_cast<double>(i) / grid) +
                           lat_.e2() * (static_cast<double>(j) / grid);
            sampled_min_ = std::min(sampled_min_, value(x));
        }
    if (!(sampled_min_ > 0))
        throw validation_error(
            "fourier_series2: sampled values are not strictly positive");
}

fourier_series2 fourier_series2::constant(const lattice2& lat, double value) {
    return fourier_series2(lat, {term{0, 0, value, 0.0}});
}

double fourier_series2::value(vec2 x) const {
    double v = 0;
    for (std::size_t t = 0; t < terms_.size(); ++t) {
        const double phase = waves_[t].dot(x);
        v += terms_[t].c_cos * std::cos(phase) +
             terms_[t].c_sin * std::sin(phase);
    }
    return v;
}

vec2 fourier_series2::grad(vec2 x) const {
    vec2 g;
    for (std::size_t t = 0; t < terms_.size(); ++t) {
        const double phase = waves_[t].dot(x);
        const double amp = -terms_[t].c_cos * std::sin(phase) +
                           terms_[t].c_sin * std::cos(phase);
        g = g + waves_[t] * amp;
    }
    return g;
}

double fourier_series2::laplacian(vec2 x) const {
    double v = 0;
    for (std::size_t t = 0; t < terms_.size(); ++t) {
        const double phase = waves_[t].dot(x);
        v -= waves_[t].norm2() * (terms_[t].c_cos * std::cos(phase) +
                                  terms_[t].c_sin * std::sin(phase));
    }
    return v;
}

vec2 fourier_series2::grad_log(vec2 x) const {
    return grad(x) * (1.0 / value(x));
}

double fourier_series2::laplacian_log(vec2 x) const {
    const double v = value(x);
    const vec2 g = grad(x);
    return laplacian(x) / v - g.norm2() / (v * v);
}

torus_green::torus_green(const lattice2& lat, double eta) : lat_(lat) {
    eta_ = (eta > 0) ? eta : std::sqrt(pi);
    // Term budgets: keep everything decaying below 1e-16.
    const double cutoff = 38.0;

    const double rho_c = lat_.circumradius();
    const double r_reach = rho_c + std::sqrt(cutoff) / eta_;
    const double e_min = std::min(lat_.e1().norm(), lat_.e2().norm());
    const int mr = static_cast<int>(std::ceil(r_reach / (e_min * 0.5))) + 2;
    std::vector<vec2> shifts;
    for (int m1 = -mr; m1 <= mr; ++m1)
        for (int m2 = -mr; m2 <= mr; ++m2) {
            if (m1 == 0 && m2 == 0) continue;
            const vec2 big_r = lat_.e1() * static_cast<double>(m1) +
                               lat_.e2() * static_cast<double>(m2);
            if (big_r.norm() <= r_reach) shifts.push_back(big_r);
        }
    std::sort(shifts.begin(), shifts.end(), [](const vec2& a, const vec2& b) {
        if (a.norm2() != b.norm2()) return a.norm2() < b.norm2();
        if (a.x != b.x) return a.x < b.x;
        return a.y < b.y;
    });
    real_shifts_ = std::move(shifts);

    const double k_reach = 2.0 * eta_ * std::sqrt(cutoff);
    const double b_min = std::min(lat_.b1().norm(), lat_.b2().norm());
    const int mk = static_cast<int>(std::ceil(k_reach / (b_min * 0.5))) + 2;
    for (int m1 = -mk; m1 <= mk; ++m1)
        for (int m2 = -mk; m2 <= mk; ++m2) {
            if (m1 == 0 && m2 == 0) continue;
            const vec2 k = lat_.b1() * static_cast<double>(m1) +
                           lat_.b2() * static_cast<double>(m2);
            const double k2 = k.norm2();
            if (k2 > k_reach * k_reach) continue;
            recip_.push_back({k, std::exp(-k2 / (4 * eta_ * eta_)) / k2});
        }
    std::sort(recip_.begin(), recip_.end(),
              [](const recip_term& a, const recip_term& b) {
                  if (a.k.norm2() != b.k.norm2())
                      return a.k.norm2() < b.k.norm2();
                  if (a.k.x != b.k.x) return a.k.x < b.k.x;
                  return a.k.y < b.k.y;
              });
    constant_ = -1.0 / (4 * eta_ * eta_);
}

double torus_green::gamma_hat(vec2 d) const {
    const double z = eta_ * eta_ * d.norm2();
    double v = expint_e1_plus_log(z) / (4 * pi) - std::log(eta_) / (2 * pi);
    for (const vec2& big_r : real_shifts_) {
        const double zz = eta_ * eta_ * (d - big_r).norm2();
        if (zz < 700.0) v += expint_e1(zz) / (4 * pi);
    }
    for (const auto& [k, w] : recip_) v += w * std::cos(k.dot(d));
    return v + constant_;
}

vec2 torus_green::grad_gamma_hat(vec2 d) const {
    const double z = eta_ * eta_ * d.norm2();
    vec2 g = d * ((eta_ * eta_ / (2 * pi)) * one_minus_exp_over(z));
    for (const vec2& big_r : real_shifts_) {
        const vec2 dd = d - big_r;
        const double zz = eta_ * eta_ * dd.norm2();
        if (zz < 700.0) g = g - dd * (std::exp(-zz) / (2 * pi * dd.norm2()));
    }
    for (const auto& [k, w] : recip_) g = g - k * (w * std::sin(k.dot(d)));
    return g;
}

double torus_green::green(vec2 x, vec2 y) const {
    const vec2 d = lat_.wrap_centered(x - y);
    const double r = d.norm();
    if (r < 1e-12)
        throw validation_error("green: coincident points");
    return gamma_hat(d) - std::log(r) / (2 * pi);
}

double torus_green::gamma(vec2 x, vec2 y) const {
    return gamma_hat(lat_.wrap_centered(x - y));
}

double torus_green::gamma_diag() const { return gamma_hat(vec2(0, 0)); }

vec2 torus_green::grad1_gamma(vec2 x, vec2 y) const {
    return grad_gamma_hat(lat_.wrap_centered(x - y));
}

double integrate_centered_cell(const lattice2& lat,
                               const std::function<double(vec2)>& f,
                               double r_inner, int theta_panels,
                               int gl_order) {
    const auto& rule = legendre_rule(gl_order);
    auto corners = lat.corner_angles();
    corners.push_back(corners.front() + 2 * pi);

    double total = 0;
    for (std::size_t arc = 0; arc + 1 < corners.size(); ++arc) {
        const double a0 = corners[arc], a1 = corners[arc + 1];
        for (int tp = 0; tp < theta_panels; ++tp) {
            const double t0 = a0 + (a1 - a0) * tp / theta_panels;
            const double t1 = a0 + (a1 - a0) * (tp + 1) / theta_panels;
            for (int ti = 0; ti < gl_order; ++ti) {
                const double theta =
                    0.5 * (t0 + t1) + 0.5 * (t1 - t0) * rule.node[ti];
                const double wt = 0.5 * (t1 - t0) * rule.weight[ti];
                const double r_out = lat.boundary_radius(theta);
                const vec2 u(std::cos(theta), std::sin(theta));

                double radial = 0;
                if (r_inner > 0) {
                    // log-spaced panels resolve power-law integrands
                    const double span = std::log(r_out / r_inner);
                    const int panels =
                        std::max(4, static_cast<int>(std::ceil(span / 0.35)));
                    for (int pnl = 0; pnl < panels; ++pnl) {
                        const double s0 = std::log(r_inner) + span * pnl / panels;
                        const double s1 =
                            std::log(r_inner) + span * (pnl + 1) / panels;
                        for (int ri = 0; ri < gl_order; ++ri) {
                            const double s = 0.5 * (s0 + s1) +
                                             0.5 * (s1 - s0) * rule.node[ri];
                            const double wr =
                                0.5 * (s1 - s0) * rule.weight[ri];
                            const double r = std::exp(s);
                            radial += wr * r * r * f(u * r);
                        }
                    }
                } else {
                    // geometric stack toward the center; innermost panel is
                    // closed with plain Gauss on [0, r_lo]
                    const int depth = 14;
                    double hi = r_out;
                    for (int pnl = 0; pnl < depth; ++pnl) {
                        const double lo = (pnl == depth - 1) ? 0.0 : hi / 2;
                        for (int ri = 0; ri < gl_order; ++ri) {
                            const double r = 0.5 * (lo + hi) +
                                             0.5 * (hi - lo) * rule.node[ri];
                            const double wr =
                                0.5 * (hi - lo) * rule.weight[ri];
                            radial += wr * r * f(u * r);
                        }
                        hi = lo;
                    }
                }
                total += wt * radial;
            }
        }
    }
    return total;
}

double h_factor(const tail_coefficient_input& in, const torus_green& tg,
                vec2 x) {
    const double hx = in.h ? in.h->value(x) : 1.0;
    const double hp = in.h ? in.h->value(in.p) : 1.0;
    const double g = tg.gamma(x, in.p) - tg.gamma_diag();
    return hx / hp * std::exp(2 * pi * in.m * g) - 1.0;
}

namespace {

// Richardson step for F(delta) = F* + K delta^{4-m} sampled at (delta, delta/2).
double extrapolate_pair(double f_coarse, double f_fine, double m) {
    const double q = std::pow(2.0, m - 4.0);
    return f_coarse - (f_coarse - f_fine) / (1.0 - q);
}

}  // namespace

tail_report tail_coefficient(const tail_coefficient_input& in,
                             const torus_green& tg) {
    if (!(in.m > 2.0) || !(in.m < 4.0 - 0.01))
        throw validation_error(
            "tail_coefficient: m must lie in (2, 4 - 0.01)");
    const lattice2& lat = tg.lat();
    const double m = in.m;
    const double cm = (m - 2.0) / (2 * pi);
    const double gdiag = tg.gamma_diag();
    const double hp = in.h ? in.h->value(in.p) : 1.0;

    tail_report rep;
    rep.delta0 = {0.02, 0.01, 0.005};

    // Route A integrand: (h/h(p)) e^{2 pi m (G(x,p) - gamma(p,p))}, via G.
    auto f_a = [&](vec2 d) {
        const double hx = in.h ? in.h->value(in.p + d) : 1.0;
        const double g = tg.green(in.p + d, in.p);
        return hx / hp * std::exp(2 * pi * m * (g - gdiag));
    };
    // Route B integrand: H(x,p) |x-p|^{-m}, via the regular part.
    auto f_b = [&](vec2 d) {
        const double hx = in.h ? in.h->value(in.p + d) : 1.0;
        const double g = tg.gamma(in.p + d, in.p);
        const double h_fac = hx / hp * std::exp(2 * pi * m * (g - gdiag)) - 1.0;
        return h_fac * std::pow(d.norm(), -m);
    };

    for (double d0 : rep.delta0) {
        const double ia = integrate_centered_cell(lat, f_a, d0);
        rep.raw_a.push_back(std::pow(d0, 2.0 - m) - cm * ia);
        rep.raw_b.push_back(integrate_centered_cell(lat, f_b, d0));
    }
    for (std::size_t k = 0; k + 1 < rep.delta0.size(); ++k) {
        rep.extrap_a.push_back(extrapolate_pair(rep.raw_a[k], rep.raw_a[k + 1], m));
        rep.extrap_b.push_back(extrapolate_pair(rep.raw_b[k], rep.raw_b[k + 1], m));
    }

    // Exterior integral of |x-p|^{-m} over the complement of the cell,
    // exact in r: (1/(m-2)) R(theta)^{2-m} integrated over angles.
    const auto& rule = legendre_rule(12);
    auto corners = lat.corner_angles();
    corners.push_back(corners.front() + 2 * pi);
    double exterior = 0;
    for (std::size_t arc = 0; arc + 1 < corners.size(); ++arc) {
        for (int tp = 0; tp < 12; ++tp) {
            const double t0 =
                corners[arc] + (corners[arc + 1] - corners[arc]) * tp / 12.0;
            const double t1 = corners[arc] +
                              (corners[arc + 1] - corners[arc]) * (tp + 1) / 12.0;
            for (int ti = 0; ti < 12; ++ti) {
                const double theta =
                    0.5 * (t0 + t1) + 0.5 * (t1 - t0) * rule.node[ti];
                const double wt = 0.5 * (t1 - t0) * rule.weight[ti];
                exterior +=
                    wt * std::pow(lat.boundary_radius(theta), 2.0 - m) / (m - 2.0);
            }
        }
    }

    rep.route_a = rep.extrap_a.back();
    rep.route_b = cm * (exterior - rep.extrap_b.back());
    rep.difference = rep.route_a - rep.route_b;
    rep.plateau_gap_a = std::abs(rep.extrap_a.back() - rep.extrap_a.front());
    rep.plateau_gap_b =
        cm * std::abs(rep.extrap_b.back() - rep.extrap_b.front());
    const double scale =
        std::max({std::abs(rep.route_a), std::abs(rep.route_b), 1e-12});
    rep.agree = std::abs(rep.difference) <= 1e-3 * scale;
    return rep;
}

}  // namespace liouville
