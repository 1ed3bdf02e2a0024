#include <cmath>

#include "doctest.h"
#include "liouville/errors.hpp"
#include "liouville/fitting.hpp"
#include "liouville/ode.hpp"

using namespace liouville;

TEST_CASE("integrator reproduces a stiff-free exponential") {
    // y' = -y, y(0) = 1.
    std::vector<double> y{1.0};
    ode_options opts;
    opts.rtol = 1e-11;
    opts.atol = 1e-13;
    integrate_ode([](double, const std::vector<double>& s,
                     std::vector<double>& d) { d[0] = -s[0]; },
                  0.0, 5.0, y, opts, nullptr);
    CHECK(y[0] == doctest::Approx(std::exp(-5.0)).epsilon(1e-9));
}

TEST_CASE("integrator lands exactly on the endpoint") {
    std::vector<double> y{0.0};
    double t_last = 0;
    integrate_ode([](double t, const std::vector<double>&,
                     std::vector<double>& d) { d[0] = std::cos(t); },
                  0.0, 3.1, y, {},
                  [&](double t, const std::vector<double>&, double) {
                      t_last = t;
                  });
    CHECK(t_last == 3.1);
    CHECK(y[0] == doctest::Approx(std::sin(3.1)).epsilon(1e-9));
}

TEST_CASE("order_fit recovers exact power laws") {
    std::vector<std::pair<double, double>> series;
    for (double e = 1e-1; e > 1e-5; e /= 2) series.emplace_back(e, 3 * e * e);
    const auto fit = order_fit(series, false);
    CHECK(fit.exponent == doctest::Approx(2.0).epsilon(1e-9));
    CHECK(fit.constant == doctest::Approx(3.0).epsilon(1e-9));
    CHECK_FALSE(fit.sign_warning);
}

TEST_CASE("order_fit log-corrected form") {
    std::vector<std::pair<double, double>> series;
    for (double e = 1e-2; e > 1e-5; e /= 2)
        series.emplace_back(e, e * e * std::log(1.0 / e));
    const auto fit = order_fit(series, true);
    CHECK(fit.constant == doctest::Approx(1.0).epsilon(1e-6));
    CHECK(fit.rms < 1e-10);
}

TEST_CASE("order_fit on a perturbed power law") {
    std::vector<std::pair<double, double>> series;
    for (double e = 1e-2; e >= 0.9e-4; e /= 2)
        series.emplace_back(e, std::pow(e, 1.5) * (1 + 0.1 * e));
    const auto fit = order_fit(series, false);
    CHECK(fit.exponent == doctest::Approx(1.5).epsilon(0.02 / 1.5));
}

TEST_CASE("order_fit input validation") {
    std::vector<std::pair<double, double>> s{{1e-1, 1.0}, {1e-2, 0.1},
                                             {1e-3, 0.01}};
    CHECK_THROWS_AS(order_fit(s, false), validation_error);  // too short
    s.emplace_back(1e-3, 1e-3);  // not strictly decreasing
    CHECK_THROWS_AS(order_fit(s, false), validation_error);
    std::vector<std::pair<double, double>> zero{
        {1e-1, 1.0}, {1e-2, 0.0}, {1e-3, 0.01}, {1e-4, 1e-3}};
    CHECK_THROWS_AS(order_fit(zero, false), validation_error);

    std::vector<std::pair<double, double>> mixed{
        {1e-1, 1e-2}, {1e-2, -1e-4}, {1e-3, 1e-6}, {1e-4, -1e-8}};
    const auto fit = order_fit(mixed, false);
    CHECK(fit.sign_warning);
    CHECK(fit.exponent == doctest::Approx(2.0).epsilon(1e-9));
}

TEST_CASE("richardson limit extraction") {
    const auto f = [](double r) { return 2.5 + 3.0 * std::pow(r, -1.5); };
    const auto [c, q] = richardson3(f(100.0), f(25.0), f(6.25), 4.0);
    CHECK(c == doctest::Approx(2.5).epsilon(1e-12));
    CHECK(q == doctest::Approx(1.5).epsilon(1e-12));
}
