#pragma once

#include <utility>
#include <vector>

namespace liouville {

struct line_fit {
    double slope = 0;
    double intercept = 0;
    double rms_residual = 0;
};

/// Ordinary least squares of y against x.
line_fit fit_line(const std::vector<double>& x, const std::vector<double>& y);

struct order_fit_result {
    double exponent = 0;   // slope of log|value| vs log(eps)
    double constant = 0;   // multiplicative constant of the fitted form
    double rms = 0;        // rms residual of the fit in log space
    bool sign_warning = false;
    bool log_corrected = false;
};

/// Fits value ~ C * eps^q (log_correction=false) or value ~ C * eps^2 log(1/eps)
/// (log_correction=true) from a series of (eps, value) pairs.
/// Requires >= 4 points, eps strictly decreasing, all values nonzero.
/// Mixed signs are fitted on |value| with sign_warning set.
order_fit_result order_fit(const std::vector<std::pair<double, double>>& series,
                           bool log_correction);

/// Three-point limit extraction for f(R) = c + K R^{-q}, sampled at radii
/// R, R/s, R/s^2 (f1 at the largest radius). Returns (c, q). Falls back to
/// (f1, +inf) when the samples show no resolvable power-law trend.
std::pair<double, double> richardson3(double f1, double f2, double f3, double s);

}  // namespace liouville
