#pragma once

#include <functional>
#include <vector>

namespace liouville {

/// Right-hand side of y' = f(t, y); writes dy/dt into `dydt` (same length as y).
using ode_rhs = std::function<void(double t, const std::vector<double>& y,
                                   std::vector<double>& dydt)>;

/// Called after every accepted step with the new (t, y) and the local error
/// estimate of that step (scaled, <= 1 by construction).
using ode_observer =
    std::function<void(double t, const std::vector<double>& y, double err)>;

struct ode_options {
    double rtol = 1e-10;
    double atol = 1e-12;
    double initial_step = 0.0;  // 0 -> heuristic
    double max_step = 0.0;      // 0 -> unlimited
    double max_step_rel = 0.0;  // cap h <= max_step_rel * t (t > 0 only)
    long max_steps = 4'000'000;
};

/// Embedded Dormand-Prince 5(4) with standard PI-free step control.
/// Integrates y from t0 to t1 (t1 > t0), mutating y in place and invoking
/// the observer after each accepted step. The final step lands on t1 exactly.
/// Throws numeric_error on step-size underflow or step-count exhaustion,
/// reporting the offending t.
void integrate_ode(const ode_rhs& rhs, double t0, double t1,
                   std::vector<double>& y, const ode_options& opts,
                   const ode_observer& on_accept);

}  // namespace liouville
