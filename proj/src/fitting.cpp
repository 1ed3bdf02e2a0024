#include "liouville/fitting.hpp"

#include <cmath>
#include <limits>

#include "liouville/errors.hpp"

namespace liouville {

line_fit fit_line(const std::vector<double>& x, const std::vector<double>& y) {
    if (x.size() != y.size() || x.size() < 2)
        throw validation_error("fit_line: need >= 2 points");
    const double n = static_cast<double>(x.size());
    double sx = 0, sy = 0;
    for (std::size_t i = 0; i < x.size(); ++i) {
        sx += x[i];
        sy += y[i];
    }
    const double mx = sx / n, my = sy / n;
    double sxx = 0, sxy = 0;
    for (std::size_t i = 0; i < x.size(); ++i) {
        sxx += (x[i] - mx) * (x[i] - mx);
        sxy += (x[i] - mx) * (y[i] - my);
    }
    if (sxx == 0) throw validation_error("fit_line: degenerate abscissae");
    line_fit f;
    f.slope = sxy / sxx;
    f.intercept = my - f.slope * mx;
    double ss = 0;
    for (std::size_t i = 0; i < x.size(); ++i) {
        const double r = y[i] - (f.intercept + f.slope * x[i]);
        ss += r * r;
    }
    f.rms_residual = std::sqrt(ss / n);
    return f;
}

order_fit_result order_fit(const std::vector<std::pair<double, double>>& series,
                           bool log_correction) {
    if (series.size() < 4)
        throw validation_error("order_fit: need at least 4 points");
    for (std::size_t i = 0; i < series.size(); ++i) {
        const auto& [eps, value] = series[i];
        if (!(eps > 0)) throw validation_error("order_fit: eps must be positive");
        if (value == 0) throw validation_error("order_fit: zero value in series");
        if (i > 0 && !(eps < series[i - 1].first))
            throw validation_error("order_fit: eps must be strictly decreasing");
    }

    order_fit_result res;
    res.log_corrected = log_correction;
    const bool first_negative = series.front().second < 0;
    for (const auto& [eps, value] : series)
        if ((value < 0) != first_negative) res.sign_warning = true;

    std::vector<double> xs, ys;
    xs.reserve(series.size());
    ys.reserve(series.size());
    for (const auto& [eps, value] : series) {
        const double base =
            log_correction ? std::log(eps * eps * std::log(1.0 / eps))
                           : std::log(eps);
        xs.push_back(base);
        ys.push_back(std::log(std::abs(value)));
    }

    if (log_correction) {
        // Slope pinned to 1 by the model; fit the constant only.
        double acc = 0;
        for (std::size_t i = 0; i < xs.size(); ++i) acc += ys[i] - xs[i];
        const double logc = acc / static_cast<double>(xs.size());
        double ss = 0;
        for (std::size_t i = 0; i < xs.size(); ++i) {
            const double r = ys[i] - xs[i] - logc;
            ss += r * r;
        }
        res.constant = std::exp(logc);
        res.exponent = 1.0;
        res.rms = std::sqrt(ss / static_cast<double>(xs.size()));
        return res;
    }

    const line_fit f = fit_line(xs, ys);
    res.exponent = f.slope;
    res.constant = std::exp(f.intercept);
    res.rms = f.rms_residual;
    return res;
}

std::pair<double, double> richardson3(double f1, double f2, double f3,
                                      double s) {
    const double d1 = f2 - f1;
    const double d2 = f3 - f2;
    constexpr double inf = std::numeric_limits<double>::infinity();
    if (d1 == 0 || d2 == 0) return {f1, inf};
    const double ratio = d2 / d1;
    if (!(ratio > 1.0)) return {f1, inf};  // not a decaying power-law tail
    const double q = std::log(ratio) / std::log(s);
    const double c = f1 - d1 / (ratio - 1.0);
    return {c, q};
}

}  // namespace liouville
