#pragma once
// Damped-Newton solver for the radial Monge-Ampere equation on a truncated
// z-window: find a potential phi (vanishing at both window ends) so that the
// composite metric obtained by adding the t-Hessian of phi to the state has
// unit determinant ratio against the reference cone.
//
// The composite state adds dphi/dt to the shear A and d^2phi/dt^2 to the
// fiber coefficient B.  Derivatives of the grid-sampled potential use 3-point
// stencils written in difference form, so constants are exactly in the kernel
// and the linearized step is a tridiagonal system (the radial Laplacian of
// the current composite metric).  The Jacobian is exact for that discrete
// residual, which is what makes the final iterates contract quadratically.

#include <vector>

#include "calabi/decay_iteration.h"
#include "calabi/fitting.h"
#include "calabi/grid.h"

namespace calabi {

struct NewtonConfig {
    double z_min = 5.0;
    double z_max = 50.0;
    double tolerance = 1e-11;  // on the max interior residual
    int max_iterations = 12;
    int max_halvings = 30;  // damping budget per Newton step
};

// Per-iteration record; the residual history is kept even when the solve
// fails, so a failed run can still be inspected.
struct ConvergenceTrace {
    std::vector<double> residual;   // max |F|, one entry per iterate (k+1)
    std::vector<double> step_norm;  // sup |delta phi| of each accepted step
    std::vector<double> damping;    // step fraction actually used
    bool converged = false;
};

struct NewtonResult {
    RadialMetricState state;  // window restriction of the input state
    RadialFunction phi;       // solution potential, zero at both ends
    RadialFunction residual;  // defect of the composite metric
    ConvergenceTrace trace;
};

// Restriction of a state to the grid points with z in [z_min, z_max].
// Throws std::invalid_argument if fewer than 8 points survive.
RadialMetricState restrict_to_window(const RadialMetricState& state,
                                     double z_min, double z_max);

// The state with the t-Hessian of phi absorbed into (A, B).  phi must live
// on the state's grid.
RadialMetricState compose_with_potential(const RadialMetricState& state,
                                         const RadialFunction& phi);

// Determinant-ratio defect of the composite metric.  Throws when the
// composite degenerates (inherits the location-reporting error of the
// plain ratio).
RadialFunction ma_residual(const RadialMetricState& state,
                           const RadialFunction& phi);

// Directional derivative of ma_residual at phi in direction v (the analytic
// linearization; the Newton matrix applies the same coefficients).
std::vector<double> linearized_residual(const RadialMetricState& state,
                                        const RadialFunction& phi,
                                        const RadialFunction& v);

// Damped Newton iteration with Dirichlet phi = 0 at the window ends.
// Each step solves the tridiagonal linearized system and backtracks (step
// halving) until the composite stays positive and the residual decreases.
// Never throws on slow convergence: the trace reports converged = false.
NewtonResult newton_solve(const RadialMetricState& state,
                          const NewtonConfig& config);

// Decay summary of a solved potential: fitted orders of |phi| and of its
// normalized metric contribution, plus the fitted order of the composite
// metric's distance to the cone.
struct PhiDecayReport {
    DecayReport phi;        // |phi|, generic target z^{-2}
    DecayReport metric;     // Hessian contribution, target z^{-(n+2)}
    PowerLawFit closeness;  // composite metric distance to the cone
};

PhiDecayReport phi_decay_report(const RadialMetricState& state,
                                const RadialFunction& phi, double fit_lo,
                                double fit_hi);

}  // namespace calabi
