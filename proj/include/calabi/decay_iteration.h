#pragma once
// Radial Monge-Ampere toy on the model end: the exact determinant ratio of
// the perturbed metric against the reference cone, the decaying-correction
// iteration driven by radial Green solves, the compatibility constant that
// kills the volume defect, and the final improvement step.

#include <vector>

#include "calabi/fitting.h"
#include "calabi/grid.h"

namespace calabi {

// Radial ansatz state.  The divisor contribution is encoded by the constant
// wedge ratios c_1..c_{n-1} (c_0 = 1 implicitly); the accumulated radial
// potential enters through A = sum du_i/dt (horizontal shear) and
// B = sum d^2 u_i/dt^2 (fiber stretch), both sampled on a shared grid.
struct RadialMetricState {
    int n = 3;
    std::vector<double> c;
    RadialFunction A;
    RadialFunction B;

    const GridPtr& grid() const { return A.grid(); }
};

// Fresh state with A = B = 0 on the given grid.  c must have n-1 entries.
RadialMetricState make_initial_state(int n, std::vector<double> c,
                                     GridPtr grid);

// Volume defect of the perturbed metric against the reference cone:
//   F(z) = 1 - (1 + n z^{n-1} B) * sum_j binom(n-1,j) (z+A)^{n-1-j} c_j
//              / z^{n-1}.
// Throws std::runtime_error naming the first z where the determinant ratio
// fails to be positive (degenerate metric).
RadialFunction ma_ratio(const RadialMetricState& state);

// Non-throwing positivity probe; z_bad (if non-null) receives the first
// offending grid point when the ratio is not positive everywhere.
bool positivity_ok(const RadialMetricState& state, double* z_bad = nullptr);

// The short first-order sum sum_{j>=1} (n-j)/(n z^j) c_j, kept only for
// side-by-side comparison with the determinant ratio at A = B = 0.  The two
// disagree in the per-term weights; the determinant ratio is the ground
// truth everywhere else in this module, and the comparison is reported, not
// asserted.  Requires A = B = 0.
RadialFunction first_order_sum(const RadialMetricState& state);

// Real roots s_i with prod_i (x + s_i) = sum_j binom(n-1,j) c_j x^{n-1-j},
// i.e. the eigenvalues of the divisor form against the reference.  Sorted
// ascending.
std::vector<double> horizontal_eigenvalues(int n, const std::vector<double>& c);

// Sup-eigenvalue distance of the state's metric from the reference cone:
//   max( max_i |A + s_i| / z,  n z^{n-1} |B| ).
RadialFunction metric_closeness(const RadialMetricState& state);

struct IterationResult {
    std::vector<RadialFunction> F;         // F_0 .. F_m
    std::vector<RadialFunction> u;         // u_1 .. u_m
    std::vector<RadialFunction> gradient;  // |grad u_j| = |u_j'| / (sqrt(n) z^{(n-1)/2})
    std::vector<RadialMetricState> states; // state after 0 .. m solves
    std::vector<double> source_decay;      // tail exponent used to anchor step j
    RadialMetricState state;               // final state (== states.back())
};

// steps Green solves of u_j'' = n z^{n-1} F_{j-1}, each followed by
// A += du_j/dt, B += d^2u_j/dt^2 and a full nonlinear recomputation of F.
// Antiderivatives are anchored at infinity exactly when the measured tail
// exponent clears the integrability threshold.  Requires steps <= n+2.
IterationResult iterate(const RadialMetricState& initial, int steps);

// Decay fits of F_0..F_m against the schedule target -(j+1), computed on the
// window [window_lo, window_hi] with the standard protocol (upper log-half,
// measurement floor).
std::vector<DecayReport> decay_reports(const IterationResult& result,
                                       double window_lo, double window_hi);

// int F dVol over the end in units of (divisor volume x fiber length):
// grid quadrature of F n z^{n-1} dz plus an extrapolated tail.
struct EndIntegral {
    double value = 0.0;      // includes the tail
    double tail = 0.0;       // extrapolated [z_back, infinity) contribution
    double tolerance = 0.0;  // quadrature + evaluation-noise + tail error bound
};
EndIntegral end_volume_integral(const RadialMetricState& state);

// Compatibility constant of the linear volume equation
//   0 = lambda * Vol_D * fiber_normalization + C,   C = -int F dVol,
// i.e. lambda = -C / (Vol_D * fiber_normalization).  Both volume factors
// scale C and the lambda coefficient alike, so the result equals the
// normalized end integral of the state.
double compatibility_lambda(const RadialMetricState& state, double vol_d,
                            double fiber_normalization = 1.0);

// Same constant refined by Newton steps on the full nonlinear end integral
// (unit slope): returns lambda with end_volume_integral(apply_linear_z(state,
// lambda)) zero within its tolerance.  Collapses to the linear value when
// the defect is already at quadrature noise.
double compatibility_lambda_refined(const RadialMetricState& state,
                                    double vol_d,
                                    double fiber_normalization = 1.0);

// Add the cut-off harmonic direction lambda * chi(t) z, where chi is a
// quintic smoothstep in t between z_front and 3 z_front and identically 1
// beyond; past the ramp this is exactly A += lambda z^{1-n}/n,
// B += lambda (1/n)(1/n - 1) t^{1/n-2}.  The added direction is annihilated
// by the linearized operator outside the ramp, so only the ramp flux moves
// the end integral: by -lambda per unit (Vol_D x fiber length).
RadialMetricState apply_linear_z(const RadialMetricState& state,
                                 double lambda);

struct FinalStepResult {
    RadialMetricState state;
    RadialFunction F;       // defect after the extra solve
    DecayReport report;     // fit with target -(n+2) on the given window
    PowerLawFit closeness;  // fitted order of the metric distance to the cone
};

// One more Green solve after the compatibility adjustment.  Throws only when
// the window contains fewer than two grid points; a window whose samples all
// sit below the measurement floor yields a report with fit.measurable =
// false and the weighted sup as the remaining certificate.
FinalStepResult final_step(const RadialMetricState& state, double window_lo,
                           double window_hi);

}  // namespace calabi
