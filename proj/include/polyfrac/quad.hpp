#pragma once

#include <functional>

namespace polyfrac {

struct QuadResult {
    double value = 0.0;
    double error_estimate = 0.0;
    bool converged = false;
};

/// Adaptive Gauss-Kronrod (7-15) integration of f on [a, b].
/// Subdivides until the Kronrod error estimate meets abs_tol + rel_tol * |I|.
QuadResult integrate(const std::function<double(double)>& f, double a, double b,
                     double abs_tol = 1e-12, double rel_tol = 1e-12,
                     int max_intervals = 4096);

}  // namespace polyfrac
