#pragma once

#include <cmath>
#include <functional>
#include <optional>
#include <vector>

namespace liouville {

struct vec2 {
    double x = 0, y = 0;
    vec2() = default;
    vec2(double xx, double yy) : x(xx), y(yy) {}
    vec2 operator+(const vec2& o) const { return {x + o.x, y + o.y}; }
    vec2 operator-(const vec2& o) const { return {x - o.x, y - o.y}; }
    vec2 operator*(double s) const { return {x * s, y * s}; }
    vec2 operator-() const { return {-x, -y}; }
    double dot(const vec2& o) const { return x * o.x + y * o.y; }
    double norm2() const { return x * x + y * y; }
    double norm() const { return std::sqrt(norm2()); }
};

/// Unit-area lattice spanned by two cell vectors.
class lattice2 {
  public:
    static lattice2 make(vec2 e1, vec2 e2);

    const vec2& e1() const { return e1_; }
    const vec2& e2() const { return e2_; }
    const vec2& b1() const { return b1_; }  // duals: b_i . e_j = 2 pi delta_ij
    const vec2& b2() const { return b2_; }

    /// Representative of d modulo the lattice inside the centered cell.
    vec2 wrap_centered(vec2 d) const;
    /// Distance from the cell center to the boundary along direction theta.
    double boundary_radius(double theta) const;
    /// Directions of the four cell corners (sorted, in [0, 2pi)).
    std::vector<double> corner_angles() const;
    /// Circumradius of the centered cell.
    double circumradius() const;

  private:
    vec2 e1_, e2_, b1_, b2_;
    double det_ = 0;
};

/// Smooth positive periodic function given by a finite Fourier series
/// over the dual lattice: sum of c cos(k.x) + s sin(k.x), k = m1 b1 + m2 b2.
class fourier_series2 {
  public:
    struct term {
        int m1 = 0, m2 = 0;
        double c_cos = 0, c_sin = 0;
    };

    fourier_series2(const lattice2& lat, std::vector<term> terms);
    static fourier_series2 constant(const lattice2& lat, double value = 1.0);

    double value(vec2 x) const;
    vec2 grad(vec2 x) const;
    double laplacian(vec2 x) const;
    vec2 grad_log(vec2 x) const;
    double laplacian_log(vec2 x) const;
    double sampled_min() const { return sampled_min_; }

  private:
    lattice2 lat_;
    std::vector<term> terms_;
    std::vector<vec2> waves_;
    double sampled_min_ = 0;
};

/// Mean-zero Green's function of -Laplace on the unit-area flat torus,
/// evaluated by Ewald splitting with Gaussian screening. All sums are
/// truncated at 1e-14 term size and accumulated in a fixed order.
class torus_green {
  public:
    explicit torus_green(const lattice2& lat, double eta = 0.0);

    const lattice2& lat() const { return lat_; }
    double eta() const { return eta_; }

    /// G(x, y); throws validation_error at coincident points.
    double green(vec2 x, vec2 y) const;
    /// Regular part gamma(x, y) = G + (1/2pi) log|x-y|, smooth at x = y.
    double gamma(vec2 x, vec2 y) const;
    double gamma_diag() const;  // gamma(p, p), p-independent
    /// Gradient of gamma in the first argument.
    vec2 grad1_gamma(vec2 x, vec2 y) const;
    vec2 grad1_gamma(vec2 p) const { return grad1_gamma(p, p); }

  private:
    double gamma_hat(vec2 d) const;
    vec2 grad_gamma_hat(vec2 d) const;

    lattice2 lat_;
    double eta_ = 0;
    std::vector<vec2> real_shifts_;  // nonzero lattice vectors in the sum
    struct recip_term {
        vec2 k;
        double w;
    };
    std::vector<recip_term> recip_;
    double constant_ = 0;  // -1/(4 eta^2)
};

/// Integral of f over the centered fundamental cell minus the disk of
/// radius r_inner, in polar coordinates (exact angular splitting at the
/// cell corners, Gauss panels radially on a log scale).
double integrate_centered_cell(const lattice2& lat,
                               const std::function<double(vec2)>& f,
                               double r_inner = 0.0, int theta_panels = 8,
                               int gl_order = 10);

struct tail_coefficient_input {
    double m = 3.0;                        // in (2, 4)
    vec2 p;                                // expansion point
    const fourier_series2* h = nullptr;    // null means h == 1
};

/// H_i(x, p) = h(x)/h(p) e^{2 pi m (gamma(x,p) - gamma(p,p))} - 1.
double h_factor(const tail_coefficient_input& in, const torus_green& tg,
                vec2 x);

struct tail_report {
    double route_a = 0;       // annulus-compensated limit via G
    double route_b = 0;       // exterior-integral form via H
    double difference = 0;
    bool agree = false;       // within 1e-3 relative
    std::vector<double> delta0;     // shrinking cut radii
    std::vector<double> raw_a;      // route A before extrapolation
    std::vector<double> raw_b;      // route B interior integral
    std::vector<double> extrap_a;   // pairwise Richardson values
    std::vector<double> extrap_b;
    double plateau_gap_a = 0;  // spread of successive extrapolants
    double plateau_gap_b = 0;
};

/// Tail coefficient by two independent formulas; throws validation_error
/// when m is outside (2, 4 - 0.01).
tail_report tail_coefficient(const tail_coefficient_input& in,
                             const torus_green& tg);

}  // namespace liouville
