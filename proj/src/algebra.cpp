#include "liouville/algebra.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <queue>

#include "liouville/errors.hpp"

namespace liouville {

namespace {

constexpr double positivity_eps = 1e-14;  // "positive entry" threshold
constexpr double symmetry_eps = 1e-12;
constexpr double condition_limit = 1e12;

bool graph_connected(const Eigen::MatrixXd& a) {
    const int n = static_cast<int>(a.rows());
    if (n == 1) return true;
    std::vector<char> seen(n, 0);
    std::queue<int> q;
    q.push(0);
    seen[0] = 1;
    int count = 1;
    while (!q.empty()) {
        const int i = q.front();
        q.pop();
        for (int j = 0; j < n; ++j) {
            if (!seen[j] && i != j && a(i, j) > positivity_eps) {
                seen[j] = 1;
                ++count;
                q.push(j);
            }
        }
    }
    return count == n;
}

}  // namespace

coupling_matrix coupling_matrix::make(const Eigen::MatrixXd& entries) {
    if (entries.rows() != entries.cols() || entries.rows() == 0)
        throw validation_error("coupling_matrix: matrix must be square and nonempty");
    if (!entries.allFinite())
        throw validation_error("coupling_matrix: entries must be finite");

    coupling_matrix m;
    m.entries_ = entries;

    Eigen::JacobiSVD<Eigen::MatrixXd> svd(entries, Eigen::ComputeFullU |
                                                       Eigen::ComputeFullV);
    const double smax = svd.singularValues()(0);
    const double smin = svd.singularValues()(entries.rows() - 1);
    m.condition_ = (smin > 0) ? smax / smin
                              : std::numeric_limits<double>::infinity();
    m.invertible_ = smin > 0 && m.condition_ < condition_limit;
    if (m.invertible_) m.inverse_ = entries.inverse();
    return m;
}

const Eigen::MatrixXd& coupling_matrix::inverse() const {
    if (!invertible_)
        throw validation_error("coupling_matrix: matrix is singular");
    return inverse_;
}

h1_report check_h1(const coupling_matrix& a) {
    const auto& m = a.entries();
    h1_report rep;
    const double scale = std::max(1.0, m.cwiseAbs().maxCoeff());
    rep.symmetric = ((m - m.transpose()).cwiseAbs().maxCoeff() <=
                     symmetry_eps * scale);
    rep.nonnegative = (m.minCoeff() >= 0.0);
    rep.irreducible = graph_connected(m);
    rep.invertible = a.invertible();
    return rep;
}

h2_report check_h2(const coupling_matrix& a) {
    const auto& inv = a.inverse();  // throws when singular
    const int n = a.n();
    h2_report rep;
    rep.diagonal_nonpositive = true;
    rep.offdiagonal_nonnegative = true;
    rep.row_sums_nonnegative = true;
    for (int i = 0; i < n; ++i) {
        if (inv(i, i) > 0) rep.diagonal_nonpositive = false;
        double row = 0;
        for (int j = 0; j < n; ++j) {
            row += inv(i, j);
            if (i != j && inv(i, j) < 0) rep.offdiagonal_nonnegative = false;
        }
        if (row < 0) rep.row_sums_nonnegative = false;
    }
    return rep;
}

void require_h1(const coupling_matrix& a) {
    const h1_report rep = check_h1(a);
    if (!rep.holds())
        throw validation_error(
            "coupling matrix fails the standing hypotheses (symmetric, "
            "nonnegative, irreducible, invertible)");
}

void require_positive_rho(const std::vector<double>& rho, int n) {
    if (static_cast<int>(rho.size()) != n)
        throw validation_error("rho has wrong dimension");
    for (double v : rho)
        if (!(v > 0) || !std::isfinite(v))
            throw validation_error("rho components must be strictly positive");
}

double lambda_subset(const coupling_matrix& a, const std::vector<double>& rho,
                     const std::vector<int>& subset) {
    require_positive_rho(rho, a.n());
    if (subset.empty())
        throw validation_error("lambda_subset: subset must be nonempty");
    double linear = 0, quadratic = 0;
    for (int i : subset) {
        if (i < 0 || i >= a.n())
            throw validation_error("lambda_subset: index out of range");
        linear += rho[i];
        for (int j : subset) quadratic += a(i, j) * rho[i] * rho[j];
    }
    return 8.0 * pi * linear - quadratic;
}

double lambda_full(const coupling_matrix& a, const std::vector<double>& rho) {
    std::vector<int> all(a.n());
    for (int i = 0; i < a.n(); ++i) all[i] = i;
    return lambda_subset(a, rho, all);
}

std::vector<double> masses(const coupling_matrix& a,
                           const std::vector<double>& rho) {
    require_positive_rho(rho, a.n());
    std::vector<double> m(a.n(), 0.0);
    for (int i = 0; i < a.n(); ++i) {
        double acc = 0;
        for (int j = 0; j < a.n(); ++j) acc += a(i, j) * rho[j];
        m[i] = acc / (2.0 * pi);
    }
    return m;
}

double min_mass(const std::vector<double>& m) {
    return *std::min_element(m.begin(), m.end());
}

std::vector<double> find_q(const coupling_matrix& a) {
    require_h1(a);
    const int n = a.n();
    Eigen::VectorXd ones = Eigen::VectorXd::Ones(n);
    Eigen::VectorXd q = 8.0 * pi * (a.inverse() * ones);
    std::vector<double> rho(q.data(), q.data() + n);
    for (double v : rho)
        if (!(v > 0))
            throw validation_error("find_q: Q has a nonpositive component");
    const gamma1_report rep = gamma1(a, rho);
    for (const auto& [mask, value] : rep.lambda_subsets)
        if (!(value > 0))
            throw validation_error(
                "find_q: Q fails proper-subset positivity");
    return rho;
}

gamma1_report gamma1(const coupling_matrix& a, const std::vector<double>& rho,
                     double tol) {
    const int n = a.n();
    require_positive_rho(rho, n);
    if (!(tol > 0)) throw validation_error("gamma1: tol must be positive");
    if (n > 12)
        throw validation_error("gamma1: subset enumeration capped at n = 12");

    gamma1_report rep;
    rep.masses = masses(a, rho);
    rep.lambda_i = lambda_full(a, rho);

    double rho_sum = 0;
    for (double v : rho) rho_sum += v;
    rep.tolerance_abs = tol * 8.0 * pi * rho_sum;

    rep.normal.resize(n);
    for (int i = 0; i < n; ++i)
        rep.normal[i] = 2.0 * pi * rep.masses[i] - 4.0 * pi;

    bool subsets_positive = true;
    const std::uint32_t full = (n >= 32) ? 0 : ((1u << n) - 1u);
    for (std::uint32_t mask = 1; mask < full; ++mask) {
        std::vector<int> subset;
        for (int i = 0; i < n; ++i)
            if (mask & (1u << i)) subset.push_back(i);
        const double value = lambda_subset(a, rho, subset);
        rep.lambda_subsets.emplace_back(mask, value);
        if (!(value > 0)) subsets_positive = false;
    }
    rep.is_member =
        std::abs(rep.lambda_i) <= rep.tolerance_abs && subsets_positive;
    return rep;
}

double degree_formula(int chi, int big_n) {
    if (big_n < 1) throw validation_error("degree_formula: N must be >= 1");
    double value = 1.0;
    for (int k = 1; k <= big_n; ++k) {
        value *= static_cast<double>(-chi + k);
        value /= static_cast<double>(k);
    }
    return value;
}

}  // namespace liouville
