#pragma once

#include <Eigen/Dense>
#include <array>
#include <functional>
#include <map>
#include <vector>

#include "liouville/radial.hpp"

namespace liouville {

/// Linearization of the radial system around a profile, restricted to the
/// Fourier mode of index ell:
///   phi_i'' + phi_i'/r - (ell^2/r^2) phi_i + sum_j a_ij h_j e^{u_j} phi_j = f_i.
struct mode_system {
    const radial_profile* profile = nullptr;
    int ell = 0;
};

/// Sampled mode function (n components on a shared radial grid).
class mode_solution {
  public:
    mode_solution() = default;
    mode_solution(std::vector<double> grid, Eigen::MatrixXd phi,
                  Eigen::MatrixXd dphi, int ell);

    const std::vector<double>& grid() const { return grid_; }
    int n() const { return static_cast<int>(phi_.rows()); }
    int ell() const { return ell_; }
    double phi_node(int i, std::size_t k) const { return phi_(i, k); }
    double dphi_node(int i, std::size_t k) const { return dphi_(i, k); }
    double value(int i, double r) const;

  private:
    std::vector<double> grid_;
    Eigen::MatrixXd phi_, dphi_;
    int ell_ = 0;
};

/// Max absolute residual of the mode-ell operator applied to a sampled
/// function, measured by high-order finite differences on a log-uniform
/// auxiliary grid (so it reflects data consistency, not the solver's own
/// algebra).
using mode_sampler = std::function<double(int component, double r)>;
double mode_operator_residual(const radial_profile& p, int ell,
                              const mode_sampler& phi, double r_lo,
                              double r_hi);

struct kernel_check {
    mode_solution sol;
    double residual = 0;
};

/// phi_i = u_i' solves the ell = 1 system exactly.
kernel_check known_kernel_mode1(const radial_profile& p);
/// phi_i = r u_i' + 2 solves the ell = 0 system exactly.
kernel_check known_kernel_mode0(const radial_profile& p);

/// Basis of the n-dimensional space of mode solutions regular at the origin
/// (phi ~ r^ell), integrated with periodic QR renormalization.
struct regular_basis_result {
    int ell = 0;
    std::vector<double> checkpoints;               // renormalization radii
    std::vector<std::vector<double>> log_growth;   // per direction, cumulative
    std::vector<double> exponents;                 // fitted on [sqrt(R), R]
    Eigen::MatrixXd final_frame;                   // 2n x n, orthonormal
};
regular_basis_result regular_basis(const mode_system& ms, double r_max);

struct uniqueness_report {
    int ell = 0;
    std::vector<double> exponents;       // ascending
    double min_exponent = 0;
    int bounded_dim = 0;                 // exponents below 0.5
    std::map<double, int> dim_by_threshold;  // {0.25, 0.5, 1.0}
    double uprime_alignment = 0;         // |cos| against u' (ell = 1 only)
};
uniqueness_report uniqueness_probe(const mode_system& ms, double r_max);

/// Fitted decay exponents q_i of |phi_i| ~ r^{-q_i} on [sqrt(R), R].
std::vector<double> decay_check_mode1(const mode_solution& sol);

struct correction_result {
    mode_solution sol;
    /// sup_r |g_i(r)| / (eps^2 (1+r)^{4-m+delta}) for the radial solve,
    /// sup_r |G_i(r)| / (r (1+r)^{2-m}) for the mode-1 solve.
    double bound_constant = 0;
    /// sup_r |g_i(r)| / (eps^2 log(2+r)^2); meaningful when m is near 4.
    double bound_constant_log = 0;
    double delta = 0;
    double m = 0;  // smallest decay exponent of the underlying profile
    /// Mode-1 only: per-component coefficient of the far-field linear
    /// homogeneous mode removed from the reported solution. The raw
    /// zero-data solution is sol + coeff * r.
    std::vector<double> growing_coefficient;
};

/// Solves the radially symmetric inhomogeneous system
///   L_0 g_i = -(eps^2/4) sum_j a_ij lap_h_j r^2 e^{u_j},  g(0) = g'(0) = 0.
correction_result radial_correction(const radial_profile& p,
                                    const std::vector<double>& lap_h,
                                    double eps);

/// Solves the two ell = 1 inhomogeneous systems
///   L_1 G_{t,i} = - sum_j a_ij grad_h[j][t] r e^{u_j},  regular launch,
/// one per gradient direction t.
std::array<correction_result, 2> mode1_correction(
    const radial_profile& p,
    const std::vector<std::array<double, 2>>& grad_h);

}  // namespace liouville
