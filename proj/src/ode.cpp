#include "liouville/ode.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "liouville/errors.hpp"

namespace liouville {

namespace {

// Dormand-Prince 5(4) tableau.
constexpr double c2 = 1.0 / 5, c3 = 3.0 / 10, c4 = 4.0 / 5, c5 = 8.0 / 9;

constexpr double a21 = 1.0 / 5;
constexpr double a31 = 3.0 / 40, a32 = 9.0 / 40;
constexpr double a41 = 44.0 / 45, a42 = -56.0 / 15, a43 = 32.0 / 9;
constexpr double a51 = 19372.0 / 6561, a52 = -25360.0 / 2187,
                 a53 = 64448.0 / 6561, a54 = -212.0 / 729;
constexpr double a61 = 9017.0 / 3168, a62 = -355.0 / 33, a63 = 46732.0 / 5247,
                 a64 = 49.0 / 176, a65 = -5103.0 / 18656;
constexpr double b1 = 35.0 / 384, b3 = 500.0 / 1113, b4 = 125.0 / 192,
                 b5 = -2187.0 / 6784, b6 = 11.0 / 84;
// y5 - y4 error weights.
constexpr double e1 = 71.0 / 57600, e3 = -71.0 / 16695, e4 = 71.0 / 1920,
                 e5 = -17253.0 / 339200, e6 = 22.0 / 525, e7 = -1.0 / 40;

}  // namespace

void integrate_ode(const ode_rhs& rhs, double t0, double t1,
                   std::vector<double>& y, const ode_options& opts,
                   const ode_observer& on_accept) {
    if (!(t1 > t0)) throw validation_error("integrate_ode: t1 must exceed t0");
    const std::size_t dim = y.size();
    std::vector<double> k1(dim), k2(dim), k3(dim), k4(dim), k5(dim), k6(dim),
        k7(dim), ytmp(dim), ynew(dim), yerr(dim);

    double t = t0;
    rhs(t, y, k1);

    double h = opts.initial_step;
    if (h <= 0.0) {
        // Crude initial step from the RHS magnitude at t0.
        double d0 = 0, d1 = 0;
        for (std::size_t i = 0; i < dim; ++i) {
            const double sc = opts.atol + opts.rtol * std::abs(y[i]);
            d0 = std::max(d0, std::abs(y[i]) / sc);
            d1 = std::max(d1, std::abs(k1[i]) / sc);
        }
        h = (d1 > 1e-10) ? 0.01 * d0 / d1 : 1e-6;
        h = std::max(h, 1e-12 * (t1 - t0));
        h = std::min(h, t1 - t0);
    }
    if (opts.max_step > 0) h = std::min(h, opts.max_step);

    auto cap_step = [&](double t, double step) {
        if (opts.max_step > 0) step = std::min(step, opts.max_step);
        if (opts.max_step_rel > 0 && t > 0)
            step = std::min(step, opts.max_step_rel * t);
        return step;
    };
    h = cap_step(t, h);

    long steps = 0;
    bool fsal_valid = true;  // k1 holds rhs(t, y)
    while (t < t1) {
        if (++steps > opts.max_steps)
            throw numeric_error("integrate_ode: step budget exhausted at t=" +
                                std::to_string(t));
        if (h < 1e-14 * std::max(1.0, std::abs(t)))
            throw numeric_error("integrate_ode: step-size underflow at t=" +
                                std::to_string(t));
        bool last = false;
        if (t + h >= t1) {
            h = t1 - t;
            last = true;
        }

        if (!fsal_valid) rhs(t, y, k1);
        for (std::size_t i = 0; i < dim; ++i) ytmp[i] = y[i] + h * a21 * k1[i];
        rhs(t + c2 * h, ytmp, k2);
        for (std::size_t i = 0; i < dim; ++i)
            ytmp[i] = y[i] + h * (a31 * k1[i] + a32 * k2[i]);
        rhs(t + c3 * h, ytmp, k3);
        for (std::size_t i = 0; i < dim; ++i)
            ytmp[i] = y[i] + h * (a41 * k1[i] + a42 * k2[i] + a43 * k3[i]);
        rhs(t + c4 * h, ytmp, k4);
        for (std::size_t i = 0; i < dim; ++i)
            ytmp[i] = y[i] + h * (a51 * k1[i] + a52 * k2[i] + a53 * k3[i] +
                                  a54 * k4[i]);
        rhs(t + c5 * h, ytmp, k5);
        for (std::size_t i = 0; i < dim; ++i)
            ytmp[i] = y[i] + h * (a61 * k1[i] + a62 * k2[i] + a63 * k3[i] +
                                  a64 * k4[i] + a65 * k5[i]);
        rhs(t + h, ytmp, k6);
        for (std::size_t i = 0; i < dim; ++i)
            ynew[i] = y[i] + h * (b1 * k1[i] + b3 * k3[i] + b4 * k4[i] +
                                  b5 * k5[i] + b6 * k6[i]);
        rhs(t + h, ynew, k7);

        double err = 0.0;
        for (std::size_t i = 0; i < dim; ++i) {
            yerr[i] = h * (e1 * k1[i] + e3 * k3[i] + e4 * k4[i] + e5 * k5[i] +
                           e6 * k6[i] + e7 * k7[i]);
            const double sc = opts.atol + opts.rtol * std::max(std::abs(y[i]),
                                                               std::abs(ynew[i]));
            const double q = yerr[i] / sc;
            err += q * q;
        }
        err = std::sqrt(err / static_cast<double>(dim));

        if (err <= 1.0) {
            t = last ? t1 : t + h;
            y.swap(ynew);
            k1.swap(k7);  // FSAL
            fsal_valid = true;
            if (on_accept) on_accept(t, y, err);
        }
        // On rejection k1 still matches (t, y), so FSAL stays valid.

        double fac = 0.9 * std::pow(std::max(err, 1e-16), -0.2);
        fac = std::clamp(fac, 0.2, 5.0);
        h = cap_step(t, h * fac);
    }
}

}  // namespace liouville
