#include "liouville/algebra.hpp"

#include <cmath>
#include <random>

#include "doctest.h"
#include "liouville/errors.hpp"

using namespace liouville;

namespace {

coupling_matrix mat2(double a11, double a12, double a21, double a22) {
    Eigen::MatrixXd m(2, 2);
    m << a11, a12, a21, a22;
    return coupling_matrix::make(m);
}

coupling_matrix scalar(double a) {
    Eigen::MatrixXd m(1, 1);
    m << a;
    return coupling_matrix::make(m);
}

}  // namespace

TEST_CASE("h1 flags") {
    SUBCASE("standard coupled pair") {
        const auto rep = check_h1(mat2(1, 0.5, 0.5, 1));
        CHECK(rep.symmetric);
        CHECK(rep.nonnegative);
        CHECK(rep.irreducible);
        CHECK(rep.invertible);
        CHECK(rep.holds());
    }
    SUBCASE("identity is reducible") {
        const auto rep = check_h1(mat2(1, 0, 0, 1));
        CHECK(rep.symmetric);
        CHECK(rep.nonnegative);
        CHECK_FALSE(rep.irreducible);
        CHECK(rep.invertible);
        CHECK_FALSE(rep.holds());
    }
    SUBCASE("large off-diagonal still passes") {
        const auto rep = check_h1(mat2(1, 2, 2, 1));  // det = -3
        CHECK(rep.holds());
    }
    SUBCASE("asymmetric and negative flagged") {
        const auto rep = check_h1(mat2(1, -0.5, 0.5, 1));
        CHECK_FALSE(rep.symmetric);
        CHECK_FALSE(rep.nonnegative);
    }
}

TEST_CASE("h2 clauses evaluated literally on the inverse") {
    SUBCASE("positive definite pair violates the diagonal clause") {
        // inverse of [[1,.5],[.5,1]] = (4/3, -2/3; -2/3, 4/3)
        const auto rep = check_h2(mat2(1, 0.5, 0.5, 1));
        CHECK_FALSE(rep.diagonal_nonpositive);
        CHECK_FALSE(rep.offdiagonal_nonnegative);
        CHECK(rep.row_sums_nonnegative);  // 2/3 per row
        CHECK_FALSE(rep.holds());
    }
    SUBCASE("antidiagonal pair satisfies all clauses") {
        const auto rep = check_h2(mat2(0, 1, 1, 0));  // self-inverse
        CHECK(rep.diagonal_nonpositive);
        CHECK(rep.offdiagonal_nonnegative);
        CHECK(rep.row_sums_nonnegative);
        CHECK(rep.holds());
    }
    SUBCASE("the scalar case fails the printed diagonal clause") {
        const auto rep = check_h2(scalar(1));
        CHECK_FALSE(rep.diagonal_nonpositive);
        CHECK_FALSE(rep.holds());
    }
    SUBCASE("singular input rejected") {
        CHECK_THROWS_AS(check_h2(mat2(1, 1, 1, 1)), validation_error);
    }
}

TEST_CASE("lambda on subsets") {
    SUBCASE("scalar at 8pi vanishes") {
        const auto a = scalar(1);
        CHECK(lambda_subset(a, {8 * pi}, {0}) == doctest::Approx(0).epsilon(1e-14));
    }
    const auto a = mat2(1, 0.5, 0.5, 1);
    const std::vector<double> rho{16 * pi / 3, 16 * pi / 3};
    SUBCASE("full set at the balanced point vanishes") {
        CHECK(std::abs(lambda_full(a, rho)) < 1e-10);
    }
    SUBCASE("proper subset is positive") {
        const double expected = 128.0 * pi * pi / 9.0;
        CHECK(lambda_subset(a, rho, {0}) == doctest::Approx(expected).epsilon(1e-12));
    }
    SUBCASE("empty subset rejected") {
        CHECK_THROWS_AS(lambda_subset(a, rho, {}), validation_error);
    }
}

TEST_CASE("masses") {
    SUBCASE("scalar") {
        CHECK(masses(scalar(1), {8 * pi})[0] == doctest::Approx(4.0));
    }
    SUBCASE("balanced two-component point") {
        const auto m = masses(mat2(1, 0.5, 0.5, 1), {16 * pi / 3, 16 * pi / 3});
        CHECK(m[0] == doctest::Approx(4.0));
        CHECK(m[1] == doctest::Approx(4.0));
    }
    SUBCASE("asymmetric point on the constraint set") {
        const double rho2 = pi * (3.0 + std::sqrt(21.0));
        const auto m = masses(mat2(1, 0.5, 0.5, 1), {2 * pi, rho2});
        CHECK(m[0] == doctest::Approx(1.0 + (3.0 + std::sqrt(21.0)) / 4.0)
                          .epsilon(1e-12));
        CHECK(m[0] == doctest::Approx(2.8956).epsilon(1e-4));
        CHECK(m[1] == doctest::Approx(4.2913).epsilon(1e-4));
        CHECK(min_mass(m) == doctest::Approx(m[0]));
    }
}

TEST_CASE("distinguished point q") {
    SUBCASE("scalar") {
        CHECK(find_q(scalar(1))[0] == doctest::Approx(8 * pi));
    }
    SUBCASE("standard pair") {
        const auto q = find_q(mat2(1, 0.5, 0.5, 1));
        CHECK(q[0] == doctest::Approx(16 * pi / 3).epsilon(1e-13));
        CHECK(q[1] == doctest::Approx(16 * pi / 3).epsilon(1e-13));
    }
    SUBCASE("off-diagonal dominant pair") {
        const auto a = mat2(1, 2, 2, 1);
        const auto q = find_q(a);
        CHECK(q[0] == doctest::Approx(8 * pi / 3).epsilon(1e-13));
        CHECK(q[1] == doctest::Approx(8 * pi / 3).epsilon(1e-13));
        CHECK(lambda_subset(a, q, {0}) ==
              doctest::Approx(128 * pi * pi / 9).epsilon(1e-12));
    }
    SUBCASE("masses at q are all 4") {
        std::mt19937 rng(4321);
        std::uniform_real_distribution<double> off(0.1, 1.0), diag(0.5, 2.0);
        for (int trial = 0; trial < 25; ++trial) {
            const int n = 2 + static_cast<int>(rng() % 3);
            Eigen::MatrixXd m(n, n);
            for (int i = 0; i < n; ++i)
                for (int j = i; j < n; ++j)
                    m(i, j) = m(j, i) = (i == j) ? diag(rng) : off(rng);
            const auto a = coupling_matrix::make(m);
            if (!check_h1(a).holds()) continue;
            std::vector<double> q;
            try {
                q = find_q(a);
            } catch (const validation_error&) {
                continue;  // Q outside the admissible cone for this draw
            }
            for (double mi : masses(a, q))
                CHECK(mi == doctest::Approx(4.0).epsilon(1e-10));
        }
    }
}

TEST_CASE("gamma1 membership report") {
    SUBCASE("scalar at 8pi") {
        const auto rep = gamma1(scalar(1), {8 * pi});
        CHECK(rep.is_member);
        CHECK(rep.normal[0] == doctest::Approx(4 * pi));
        CHECK(rep.lambda_subsets.empty());
    }
    SUBCASE("asymmetric member") {
        const double rho2 = pi * (3.0 + std::sqrt(21.0));
        const auto rep = gamma1(mat2(1, 0.5, 0.5, 1), {2 * pi, rho2});
        CHECK(rep.is_member);
        REQUIRE(rep.lambda_subsets.size() == 2);
        for (const auto& [mask, value] : rep.lambda_subsets) CHECK(value > 0);
        for (double nc : rep.normal) CHECK(nc > 0);
    }
    SUBCASE("interior point is not a member") {
        const auto rep = gamma1(mat2(1, 0.5, 0.5, 1), {8 * pi, 8 * pi});
        CHECK_FALSE(rep.is_member);
        CHECK(rep.lambda_i == doctest::Approx(-64 * pi * pi).epsilon(1e-12));
    }
    SUBCASE("size cap") {
        Eigen::MatrixXd m = Eigen::MatrixXd::Ones(13, 13) +
                            12.0 * Eigen::MatrixXd::Identity(13, 13);
        const auto a = coupling_matrix::make(m);
        CHECK_THROWS_AS(gamma1(a, std::vector<double>(13, 1.0)),
                        validation_error);
    }
}

TEST_CASE("degree formula") {
    CHECK(degree_formula(2, 1) == doctest::Approx(-1.0));
    CHECK(degree_formula(0, 1) == doctest::Approx(1.0));
    CHECK(degree_formula(2, 2) == doctest::Approx(0.0));
    CHECK(degree_formula(-2, 3) == doctest::Approx(10.0));  // C(4+..): (3*4*5)/6
    CHECK_THROWS_AS(degree_formula(0, 0), validation_error);
}

TEST_CASE("lambda is invariant under consistent relabeling") {
    std::mt19937 rng(98765);
    std::uniform_real_distribution<double> entry(0.05, 1.5);
    std::uniform_real_distribution<double> rho_d(0.5, 10.0);
    for (int trial = 0; trial < 30; ++trial) {
        const int n = 2 + static_cast<int>(rng() % 3);
        Eigen::MatrixXd m(n, n);
        for (int i = 0; i < n; ++i)
            for (int j = i; j < n; ++j) m(i, j) = m(j, i) = entry(rng);
        std::vector<double> rho(n);
        for (auto& v : rho) v = rho_d(rng);

        std::vector<int> perm(n);
        for (int i = 0; i < n; ++i) perm[i] = i;
        std::shuffle(perm.begin(), perm.end(), rng);

        Eigen::MatrixXd mp(n, n);
        std::vector<double> rhop(n);
        for (int i = 0; i < n; ++i) {
            rhop[i] = rho[perm[i]];
            for (int j = 0; j < n; ++j) mp(i, j) = m(perm[i], perm[j]);
        }
        const auto a = coupling_matrix::make(m);
        const auto ap = coupling_matrix::make(mp);

        CHECK(lambda_full(a, rho) ==
              doctest::Approx(lambda_full(ap, rhop)).epsilon(1e-12));

        // A random subset, mapped through the relabeling.
        std::vector<int> subset, subset_p;
        for (int i = 0; i < n; ++i)
            if (rng() % 2) subset.push_back(i);
        if (subset.empty()) subset.push_back(0);
        for (int i = 0; i < n; ++i)
            for (int s : subset)
                if (perm[i] == s) subset_p.push_back(i);
        CHECK(lambda_subset(a, rho, subset) ==
              doctest::Approx(lambda_subset(ap, rhop, subset_p)).epsilon(1e-12));
    }
}

TEST_CASE("lambda_I equals the mass-weighted identity") {
    std::mt19937 rng(1337);
    std::uniform_real_distribution<double> entry(0.05, 1.5);
    std::uniform_real_distribution<double> rho_d(0.5, 10.0);
    for (int trial = 0; trial < 30; ++trial) {
        const int n = 1 + static_cast<int>(rng() % 4);
        Eigen::MatrixXd m(n, n);
        for (int i = 0; i < n; ++i)
            for (int j = i; j < n; ++j) m(i, j) = m(j, i) = entry(rng);
        std::vector<double> rho(n);
        for (auto& v : rho) v = rho_d(rng);
        const auto a = coupling_matrix::make(m);
        const auto mass = masses(a, rho);
        double expect = 0;
        for (int i = 0; i < n; ++i)
            expect += rho[i] * (8 * pi - 2 * pi * mass[i]);
        const double got = lambda_full(a, rho);
        CHECK(got == doctest::Approx(expect).epsilon(1e-9));
    }
}

TEST_CASE("membership forces positive normals") {
    // Solve the quadratic constraint along random rays through random
    // positive directions; whenever the report grants membership, every
    // normal component must be positive.
    std::mt19937 rng(31415);
    std::uniform_real_distribution<double> entry(0.0, 1.2), dir(0.2, 2.0);
    int members = 0;
    for (int trial = 0; trial < 200 && members < 40; ++trial) {
        const int n = 2 + static_cast<int>(rng() % 2);
        Eigen::MatrixXd m(n, n);
        for (int i = 0; i < n; ++i)
            for (int j = i; j < n; ++j) m(i, j) = m(j, i) = entry(rng);
        const auto a = coupling_matrix::make(m);
        if (!check_h1(a).holds()) continue;
        std::vector<double> d(n);
        for (auto& v : d) v = dir(rng);
        // Largest t > 0 with lambda_I(t d) = 0: t = 8 pi sum(d) / (d' A d).
        double lin = 0, quad = 0;
        for (int i = 0; i < n; ++i) {
            lin += d[i];
            for (int j = 0; j < n; ++j) quad += a(i, j) * d[i] * d[j];
        }
        const double t = 8 * pi * lin / quad;
        std::vector<double> rho(n);
        for (int i = 0; i < n; ++i) rho[i] = t * d[i];
        const auto rep = gamma1(a, rho);
        CHECK(std::abs(rep.lambda_i) <= rep.tolerance_abs);
        if (!rep.is_member) continue;
        ++members;
        for (double nc : rep.normal) CHECK(nc > 0);
    }
    CHECK(members >= 20);  // the draw produces plenty of genuine members
}

TEST_CASE("inverse-sign hypotheses force full membership on the surface") {
    // Two-component matrices built from an inverse with nonpositive
    // diagonal, nonnegative off-diagonal and nonnegative row sums: every
    // point of the constraint surface then passes the proper-subset test.
    std::mt19937 rng(515151);
    std::uniform_real_distribution<double> bd(0.5, 2.0), frac(0.0, 0.9),
        dird(0.2, 2.0);
    for (int trial = 0; trial < 40; ++trial) {
        const double b = bd(rng);
        const double a11 = -frac(rng) * b;  // inverse diagonal
        const double a22 = -frac(rng) * b;
        Eigen::MatrixXd inv(2, 2);
        inv << a11, b, b, a22;
        Eigen::MatrixXd m = inv.inverse();
        const auto a = coupling_matrix::make(m);
        REQUIRE(check_h1(a).holds());
        REQUIRE(check_h2(a).holds());

        std::vector<double> dir{dird(rng), dird(rng)};
        double lin = 0, quad = 0;
        for (int i = 0; i < 2; ++i) {
            lin += dir[i];
            for (int j = 0; j < 2; ++j) quad += m(i, j) * dir[i] * dir[j];
        }
        const double t = 8 * pi * lin / quad;
        const std::vector<double> rho{t * dir[0], t * dir[1]};
        const auto rep = gamma1(a, rho);
        CHECK(rep.is_member);
        for (const auto& [mask, value] : rep.lambda_subsets)
            CHECK(value > 0);
    }
}
