#pragma once
// Adaptive Gauss-Kronrod (7,15) quadrature on finite intervals, plus a
// semi-infinite driver with certified exponential-tail truncation.

#include <functional>
#include <stdexcept>

namespace calabi {

struct QuadratureOptions {
    double abs_tol = 1e-12;
    double rel_tol = 1e-12;
    int max_depth = 48;          // max bisection depth per branch
    std::size_t max_intervals = 200000;
};

struct QuadratureResult {
    double value = 0.0;
    double error_estimate = 0.0;
    std::size_t evaluations = 0;
    bool converged = false;
};

// Integrate f over [a, b] (a < b required) adaptively.
QuadratureResult integrate(const std::function<double(double)>& f, double a,
                           double b, const QuadratureOptions& opt = {});

// Integrate f over [a, +infinity) for integrands with an eventually
// exponential envelope |f(x)| <= M * exp(-rate * x) for x >= some x0.
// Panels of geometrically growing width are accumulated until the analytic
// tail bound M * exp(-rate * x) / rate for the current endpoint drops below
// the tolerance; the bound uses the observed panel magnitudes, with `rate`
// supplied by the caller (a certified lower bound on the true decay rate).
QuadratureResult integrate_to_infinity(const std::function<double(double)>& f,
                                       double a, double rate,
                                       const QuadratureOptions& opt = {});

}  // namespace calabi
