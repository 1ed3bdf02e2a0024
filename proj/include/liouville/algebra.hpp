#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <vector>

namespace liouville {

/// Symmetric nonnegative interaction matrix together with its inverse.
/// Construction is permissive (any square finite matrix); hypothesis
/// checks report violations instead of refusing them, so that degenerate
/// inputs can still be diagnosed. Modules that require the standing
/// hypotheses call require_h1().
class coupling_matrix {
  public:
    static coupling_matrix make(const Eigen::MatrixXd& entries);

    int n() const { return static_cast<int>(entries_.rows()); }
    const Eigen::MatrixXd& entries() const { return entries_; }
    /// Inverse entries; throws validation_error when the matrix is singular.
    const Eigen::MatrixXd& inverse() const;
    bool invertible() const { return invertible_; }
    double condition() const { return condition_; }

    double operator()(int i, int j) const { return entries_(i, j); }

  private:
    Eigen::MatrixXd entries_;
    Eigen::MatrixXd inverse_;
    bool invertible_ = false;
    double condition_ = 0;
};

struct h1_report {
    bool symmetric = false;
    bool nonnegative = false;
    bool irreducible = false;
    bool invertible = false;
    bool holds() const {
        return symmetric && nonnegative && irreducible && invertible;
    }
};

struct h2_report {
    bool diagonal_nonpositive = false;    // a^{ii} <= 0
    bool offdiagonal_nonnegative = false; // a^{ij} >= 0, i != j
    bool row_sums_nonnegative = false;    // sum_j a^{ij} >= 0
    bool holds() const {
        return diagonal_nonpositive && offdiagonal_nonnegative &&
               row_sums_nonnegative;
    }
};

h1_report check_h1(const coupling_matrix& a);
h2_report check_h2(const coupling_matrix& a);

/// Throws validation_error unless every H1 flag holds.
void require_h1(const coupling_matrix& a);

/// Throws validation_error unless all components are strictly positive.
void require_positive_rho(const std::vector<double>& rho, int n);

/// 8*pi * sum_{i in J} rho_i - sum_{i,j in J} a_ij rho_i rho_j.
/// `subset` holds 0-based indices; must be nonempty.
double lambda_subset(const coupling_matrix& a, const std::vector<double>& rho,
                     const std::vector<int>& subset);

/// Convenience: J = full index set.
double lambda_full(const coupling_matrix& a, const std::vector<double>& rho);

/// m_i = (1/2pi) sum_j a_ij rho_j.
std::vector<double> masses(const coupling_matrix& a,
                           const std::vector<double>& rho);
double min_mass(const std::vector<double>& m);

/// The distinguished parameter point with all masses equal to 4:
/// rho = 8*pi * A^{-1} * (1,...,1). Verifies positivity and membership
/// (proper-subset positivity); throws validation_error on failure.
std::vector<double> find_q(const coupling_matrix& a);

struct gamma1_report {
    double lambda_i = 0;
    /// Proper nonempty subsets encoded as bitmasks over 0-based indices,
    /// ascending, paired with their lambda values.
    std::vector<std::pair<std::uint32_t, double>> lambda_subsets;
    std::vector<double> masses;
    bool is_member = false;
    std::vector<double> normal;  // sum_j a_ij rho_j - 4*pi
    double tolerance_abs = 0;    // absolute membership threshold used
};

/// Full membership report; enumerates all 2^n - 2 proper subsets (n <= 12).
/// `tol` is relative to 8*pi*sum(rho).
gamma1_report gamma1(const coupling_matrix& a, const std::vector<double>& rho,
                     double tol = 1e-8);

/// (1/N!) * prod_{k=1..N} (-chi + k).
double degree_formula(int chi, int big_n);

}  // namespace liouville
