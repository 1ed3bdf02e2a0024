#pragma once

#include <Eigen/Dense>
#include <utility>
#include <vector>

#include "liouville/algebra.hpp"

namespace liouville {

/// Sampled entire radial solution of
///     u_i'' + u_i'/r + sum_j a_ij h_j e^{u_j} = 0,  u_i'(0) = 0,
/// with constant weights h_i > 0, on [0, r_max]. Immutable after
/// construction; evaluation between nodes is cubic Hermite.
class radial_profile {
  public:
    const coupling_matrix& matrix() const { return a_; }
    const std::vector<double>& weights() const { return weights_; }
    const std::vector<double>& center_values() const { return u0_; }
    int n() const { return static_cast<int>(weights_.size()); }

    const std::vector<double>& grid() const { return grid_; }
    double r_max() const { return grid_.back(); }
    double tolerance() const { return tol_; }

    /// u_i at grid node k / at arbitrary radius.
    double u_node(int i, std::size_t k) const { return u_(i, k); }
    double du_node(int i, std::size_t k) const { return du_(i, k); }
    double value(int i, double r) const;
    double deriv(int i, double r) const;
    /// r u_i'(r), interpolated from the integrator state directly.
    double ru_prime(int i, double r) const;
    /// Weighted density h_i e^{u_i}.
    double density(int i, double r) const;
    /// Partial energies sigma_{iR} = int_0^R h_i e^{u_i} r dr.
    std::vector<double> sigma_at(double r) const;
    /// int_0^R log(s) h_i e^{u_i} s ds.
    double logweight_at(int i, double r) const;

    /// Largest estimated local truncation error among accepted steps
    /// (embedded-pair estimate, absolute scale).
    double max_local_error() const { return max_local_error_; }
    /// Accumulated drift of the exact first integral
    /// r u_i' + sum_j a_ij sigma_{jR} = 0. Runge-Kutta preserves linear
    /// invariants, so this sits at roundoff unless the wiring is wrong.
    double invariant_drift() const { return invariant_drift_; }

    friend radial_profile integrate_entire(const coupling_matrix&,
                                           const std::vector<double>&,
                                           const std::vector<double>&, double,
                                           double);

  private:
    std::size_t interval(double r) const;

    coupling_matrix a_;
    std::vector<double> weights_, u0_;
    std::vector<double> grid_;
    Eigen::MatrixXd u_, du_, ddu_, dddu_;   // values and first three derivatives
    Eigen::MatrixXd sig_, dsig_, ddsig_;    // sigma_{iR} and its rates
    Eigen::MatrixXd logw_, dlogw_;          // log-weighted integral and its rate
    double tol_ = 0;
    double max_local_error_ = 0, invariant_drift_ = 0;
};

/// Integrates the entire radial system from a series launch at the origin.
/// Throws numeric_error on exp overflow or step failure (message carries the
/// offending radius).
radial_profile integrate_entire(const coupling_matrix& a,
                                const std::vector<double>& h0,
                                const std::vector<double>& u0,
                                double r_max = 1e4, double tol = 1e-10);

std::vector<double> energy_partial(const radial_profile& p, double r);

struct energy_summary {
    std::vector<double> sigma;       // tail-corrected total energies
    std::vector<std::pair<double, std::vector<double>>> sigma_R;  // checkpoints
    std::vector<double> l;           // fitted decay exponents
    std::vector<double> l_direct;    // sum_j a_ij sigma_j
    double m_min = 0;                // min of l_direct
    std::vector<double> c;           // asymptotic constants, integral route
    std::vector<double> c_fit;       // asymptotic constants, limit-fit route
    std::vector<int> i_min;          // indices attaining m_min (tol 1e-6)
    double r_max = 0;
    double fit_rms = 0;              // worst decay-fit residual
    double c_route_gap = 0;          // max |c - c_fit|
    int iterations = 0;              // self-consistency passes
};

/// Self-consistent energies/exponents/constants. `margin` guards the fitted
/// exponents away from the integrability boundary l = 2.
energy_summary energy_total(const radial_profile& p, double margin = 0.05);

/// Both routes to the asymptotic constants: (integral formula, limit fit).
/// Throws numeric_error when the two disagree beyond 1e-3.
std::pair<std::vector<double>, std::vector<double>> c_constants(
    const radial_profile& p);

struct decay_fit_result {
    std::vector<double> fitted;
    std::vector<double> direct;
    double max_rms = 0;
    bool window_too_small = false;  // fit residual above 1e-2
};
decay_fit_result decay_fit(const radial_profile& p);

double pohozaev_residual(const std::vector<double>& sigma,
                         const coupling_matrix& a);
double pohozaev_residual(const energy_summary& s, const coupling_matrix& a);

/// 4 sum sigma_iR - sum a_ij sigma_iR sigma_jR - 2 sum e^{c_i} R^{2-l_i}.
double finite_r_pohozaev_check(const radial_profile& p,
                               const energy_summary& s, double r);
double finite_r_pohozaev_check(const radial_profile& p, double r);

struct shooting_options {
    double tol = 1e-8;        // componentwise energy mismatch
    double r_max = 1e4;
    double ode_tol = 1e-10;
    int max_iterations = 50;
    int max_halvings = 30;
};

/// Finds the profile with gauge u_1(0) = 0 whose total energies match
/// `target_sigma` (damped Gauss-Newton over the remaining center values).
radial_profile shoot_for_energies(const coupling_matrix& a,
                                  const std::vector<double>& h0,
                                  const std::vector<double>& target_sigma,
                                  const shooting_options& opts = {});

}  // namespace liouville
