#include "liouville/torus_green.hpp"

#include <cmath>

#include "doctest.h"
#include "liouville/errors.hpp"

using namespace liouville;

namespace {

const lattice2& unit_square() {
    static lattice2 lat = lattice2::make({1, 0}, {0, 1});
    return lat;
}

const torus_green& unit_green() {
    static torus_green tg(unit_square());
    return tg;
}

}  // namespace

TEST_CASE("lattice construction and wrapping") {
    const auto& lat = unit_square();
    CHECK(lat.b1().x == doctest::Approx(2 * pi));
    CHECK(lat.b1().y == doctest::Approx(0.0));
    const vec2 w = lat.wrap_centered({1.3, -2.6});
    CHECK(w.x == doctest::Approx(0.3).epsilon(1e-14));
    CHECK(w.y == doctest::Approx(0.4).epsilon(1e-14));
    CHECK(lat.boundary_radius(0.0) == doctest::Approx(0.5));
    CHECK(lat.boundary_radius(pi / 4) == doctest::Approx(std::sqrt(0.5)));
    CHECK_THROWS_AS(lattice2::make({2, 0}, {0, 1}), validation_error);
}

TEST_CASE("green function symmetries") {
    const auto& tg = unit_green();
    const vec2 x{0.13, 0.62}, y{0.58, 0.21};
    SUBCASE("symmetry in the arguments") {
        CHECK(tg.green(x, y) == doctest::Approx(tg.green(y, x)).epsilon(1e-13));
    }
    SUBCASE("lattice periodicity") {
        CHECK(tg.green({x.x + 1, x.y}, y) ==
              doctest::Approx(tg.green(x, y)).epsilon(1e-13));
        CHECK(tg.green({x.x - 2, x.y + 3}, y) ==
              doctest::Approx(tg.green(x, y)).epsilon(1e-13));
    }
    SUBCASE("coincidence rejected") {
        CHECK_THROWS_AS(tg.green(x, x), validation_error);
    }
}

TEST_CASE("green function mean is zero") {
    const auto& tg = unit_green();
    const vec2 y{0.37, 0.81};
    // Split off the ball of radius eps around the singularity; its integral
    // is eps^2 (1 - 2 log eps)/4 for the log part plus pi eps^2 gamma(0).
    const double eps = 1e-4;
    const double mean_outside = integrate_centered_cell(
        unit_square(), [&](vec2 d) { return tg.green(y + d, y); }, eps);
    const double ball = eps * eps * (1 - 2 * std::log(eps)) / 4.0 +
                        pi * eps * eps * tg.gamma_diag();
    CHECK(mean_outside + ball == doctest::Approx(0.0).epsilon(1).scale(1e-8));
}

TEST_CASE("spectral coefficients of the green function") {
    const auto& tg = unit_green();
    // |k|^2 * Ghat(k) must be 1 for low nonzero modes.
    const double eps = 1e-4;
    for (auto [m1, m2] : {std::pair{1, 0}, std::pair{1, 1}, std::pair{2, 1}}) {
        const vec2 k = unit_square().b1() * double(m1) +
                       unit_square().b2() * double(m2);
        double re = integrate_centered_cell(
            unit_square(),
            [&](vec2 d) { return tg.green(d, {0, 0}) * std::cos(k.dot(d)); },
            eps);
        // ball contribution of the log part (cosine is 1 + O(|k d|^2))
        re += eps * eps * (1 - 2 * std::log(eps)) / 4.0 +
              pi * eps * eps * tg.gamma_diag();
        CHECK(re * k.norm2() == doctest::Approx(1.0).epsilon(1).scale(1e-8));
    }
}

TEST_CASE("regular part") {
    const auto& tg = unit_green();
    SUBCASE("translation invariance") {
        const vec2 x{0.2, 0.33}, y{0.41, 0.9}, v{0.17, -0.29};
        CHECK(tg.gamma(x, y) ==
              doctest::Approx(tg.gamma(x + v, y + v)).epsilon(1e-13));
        CHECK(tg.gamma_diag() ==
              doctest::Approx(tg.gamma({0.8, 0.1}, {0.8, 0.1})).epsilon(1e-13));
    }
    SUBCASE("consistency with the subtracted logarithm") {
        const vec2 y{0.5, 0.5};
        const double g3 =
            tg.green({0.5 + 1e-3, 0.5}, y) + std::log(1e-3) / (2 * pi);
        const double g4 =
            tg.green({0.5 + 1e-4, 0.5}, y) + std::log(1e-4) / (2 * pi);
        CHECK(g3 == doctest::Approx(g4).epsilon(1).scale(1e-6));
        CHECK(g4 == doctest::Approx(tg.gamma_diag()).epsilon(1).scale(1e-6));
    }
    SUBCASE("bounded gradient near the diagonal") {
        for (double r : {1e-2, 1e-3, 1e-4, 1e-5}) {
            const vec2 g = tg.grad1_gamma({0.3 + r, 0.4}, {0.3, 0.4});
            CHECK(g.norm() < 10.0);
        }
    }
}

TEST_CASE("gradient of the regular part") {
    const auto& tg = unit_green();
    SUBCASE("vanishes at coincidence") {
        for (vec2 p : {vec2{0.1, 0.2}, vec2{0.77, 0.51}, vec2{0.5, 0.5}}) {
            const vec2 g = tg.grad1_gamma(p);
            CHECK(std::abs(g.x) < 1e-10);
            CHECK(std::abs(g.y) < 1e-10);
        }
    }
    SUBCASE("finite differences confirm the analytic gradient") {
        const vec2 x{0.31, 0.57}, y{0.11, 0.73};
        const double step = 1e-5;
        const vec2 g = tg.grad1_gamma(x, y);
        const double fdx = (tg.gamma({x.x + step, x.y}, y) -
                            tg.gamma({x.x - step, x.y}, y)) /
                           (2 * step);
        const double fdy = (tg.gamma({x.x, x.y + step}, y) -
                            tg.gamma({x.x, x.y - step}, y)) /
                           (2 * step);
        CHECK(g.x == doctest::Approx(fdx).epsilon(1).scale(1e-6));
        CHECK(g.y == doctest::Approx(fdy).epsilon(1).scale(1e-6));
    }
    SUBCASE("lattice translation invariance") {
        const vec2 p{0.21, 0.34};
        const vec2 a = tg.grad1_gamma(p);
        const vec2 b = tg.grad1_gamma({p.x + 3, p.y - 2});
        CHECK(a.x == doctest::Approx(b.x).epsilon(1).scale(1e-12));
        CHECK(a.y == doctest::Approx(b.y).epsilon(1).scale(1e-12));
    }
}

TEST_CASE("splitting parameter independence") {
    const torus_green tg1(unit_square());
    const torus_green tg2(unit_square(), 2.0 * std::sqrt(pi));
    const vec2 x{0.15, 0.42}, y{0.73, 0.35};
    CHECK(std::abs(tg1.green(x, y) - tg2.green(x, y)) < 1e-10);
    CHECK(std::abs(tg1.gamma_diag() - tg2.gamma_diag()) < 1e-10);
    const vec2 g1 = tg1.grad1_gamma(x, y), g2 = tg2.grad1_gamma(x, y);
    CHECK(std::abs(g1.x - g2.x) < 1e-10);
    CHECK(std::abs(g1.y - g2.y) < 1e-10);
}

TEST_CASE("rectangular-ish skewed cell still works") {
    // Unit-area skewed lattice.
    const auto lat = lattice2::make({1.25, 0.0}, {0.31, 0.8});
    const torus_green tg(lat);
    const vec2 x{0.4, 0.1}, y{0.9, 0.55};
    CHECK(tg.green(x, y) == doctest::Approx(tg.green(y, x)).epsilon(1e-12));
    const vec2 shift = lat.e1() + lat.e2() * -2.0;
    CHECK(tg.green(x + shift, y) ==
          doctest::Approx(tg.green(x, y)).epsilon(1e-12));
    const vec2 g = tg.grad1_gamma({0.3, 0.3});
    CHECK(std::abs(g.x) < 1e-10);
    CHECK(std::abs(g.y) < 1e-10);
}

TEST_CASE("fourier series on the torus") {
    const auto& lat = unit_square();
    // h = 1 + 0.1 cos(2 pi x1)
    fourier_series2 h(lat, {{0, 0, 1.0, 0.0}, {1, 0, 0.1, 0.0}});
    CHECK(h.value({0.0, 0.7}) == doctest::Approx(1.1));
    CHECK(h.value({0.5, 0.2}) == doctest::Approx(0.9));
    CHECK(h.grad({0.25, 0.0}).x ==
          doctest::Approx(-0.1 * 2 * pi).epsilon(1e-12));
    CHECK(h.laplacian({0.0, 0.0}) ==
          doctest::Approx(-0.1 * 4 * pi * pi).epsilon(1e-12));
    // log-derivative identities at a generic point
    const vec2 x{0.13, 0.77};
    const double step = 1e-6;
    const double fd = (std::log(h.value({x.x + step, x.y})) -
                       std::log(h.value({x.x - step, x.y}))) /
                      (2 * step);
    CHECK(h.grad_log(x).x == doctest::Approx(fd).epsilon(1e-8));
    CHECK_THROWS_AS(
        fourier_series2(lat, {{0, 0, 1.0, 0.0}, {1, 0, 1.5, 0.0}}),
        validation_error);
}

TEST_CASE("h factor") {
    const auto& tg = unit_green();
    fourier_series2 h(unit_square(), {{0, 0, 1.0, 0.0}, {1, 0, 0.1, 0.0}});
    tail_coefficient_input in;
    in.m = 3.0;
    in.p = {0.25, 0.5};
    in.h = &h;
    SUBCASE("vanishes at the expansion point") {
        CHECK(h_factor(in, tg, in.p) == doctest::Approx(0.0));
    }
    SUBCASE("reduces to the exponential factor for constant h") {
        tail_coefficient_input flat = in;
        flat.h = nullptr;
        const vec2 x{0.6, 0.3};
        const double expect =
            std::exp(2 * pi * 3.0 * (tg.gamma(x, flat.p) - tg.gamma_diag())) -
            1.0;
        CHECK(h_factor(flat, tg, x) == doctest::Approx(expect).epsilon(1e-12));
    }
    SUBCASE("stays above -1") {
        for (double t = 0.05; t < 1.0; t += 0.13)
            CHECK(h_factor(in, tg, {t, 0.4 * t}) > -1.0);
    }
}

TEST_CASE("tail coefficient dual routes") {
    const auto& tg = unit_green();
    SUBCASE("m sweep with constant h") {
        for (double m : {2.5, 3.0, 3.5}) {
            tail_coefficient_input in;
            in.m = m;
            in.p = {0.5, 0.5};
            const auto rep = tail_coefficient(in, tg);
            INFO("m = ", m, " A = ", rep.route_a, " B = ", rep.route_b);
            CHECK(rep.agree);
            const double scale = std::max(std::abs(rep.route_a), 1e-12);
            CHECK(std::abs(rep.difference) / scale < 1e-3);
        }
    }
    SUBCASE("translation invariance of the coefficient") {
        tail_coefficient_input a, b;
        a.m = b.m = 3.0;
        a.p = {0.5, 0.5};
        b.p = {0.17, 0.83};
        const auto ra = tail_coefficient(a, tg);
        const auto rb = tail_coefficient(b, tg);
        CHECK(ra.route_a == doctest::Approx(rb.route_a).epsilon(1e-6));
        CHECK(ra.route_b == doctest::Approx(rb.route_b).epsilon(1e-6));
    }
    SUBCASE("extrapolation plateau") {
        tail_coefficient_input in;
        in.m = 3.5;
        in.p = {0.5, 0.5};
        const auto rep = tail_coefficient(in, tg);
        const double scale = std::max(std::abs(rep.route_a), 1e-12);
        CHECK(rep.plateau_gap_a / scale < 1e-3);
        CHECK(rep.plateau_gap_b / scale < 1e-3);
    }
    SUBCASE("nontrivial weight") {
        fourier_series2 h(unit_square(),
                          {{0, 0, 1.0, 0.0}, {1, 0, 0.1, 0.0}, {0, 1, 0.0, 0.05}});
        tail_coefficient_input in;
        in.m = 3.0;
        in.p = {0.3, 0.6};
        in.h = &h;
        const auto rep = tail_coefficient(in, tg);
        CHECK(rep.agree);
    }
    SUBCASE("m out of range rejected") {
        tail_coefficient_input in;
        in.m = 4.0;
        in.p = {0.5, 0.5};
        CHECK_THROWS_AS(tail_coefficient(in, tg), validation_error);
        in.m = 1.9;
        CHECK_THROWS_AS(tail_coefficient(in, tg), validation_error);
    }
}

TEST_CASE("tail coefficient routes agree on a skewed cell") {
    const auto lat = lattice2::make({1.25, 0.0}, {0.31, 0.8});
    const torus_green tg(lat);
    fourier_series2 h(lat, {{0, 0, 1.0, 0.0}, {1, 0, 0.08, 0.0}});
    tail_coefficient_input in;
    in.m = 3.2;
    in.p = {0.6, 0.35};
    in.h = &h;
    const auto rep = tail_coefficient(in, tg);
    INFO("A = ", rep.route_a, " B = ", rep.route_b);
    CHECK(rep.agree);
    // Translation invariance holds on the skewed cell too.
    tail_coefficient_input in2 = in;
    in2.h = nullptr;
    in.h = nullptr;
    in2.p = in.p + lat.e1() * 0.23 + lat.e2() * -0.41;
    // Constant weight: the coefficient only sees the relative geometry.
    const auto r1 = tail_coefficient(in, tg);
    const auto r2 = tail_coefficient(in2, tg);
    CHECK(r1.route_a == doctest::Approx(r2.route_a).epsilon(1e-6));
}
