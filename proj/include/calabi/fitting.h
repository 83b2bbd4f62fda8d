#pragma once
// Log-log power-law fits with the project-wide measurement protocol.
//
// Fitted decay exponents are the currency of the whole laboratory: every
// decay claim is checked by least-squares fitting log|F| against log z.
// The shared protocol:
//   * default window = upper half of the grid (in log z),
//   * points with |F| < 1000 * machine epsilon are excluded (below that the
//     values come from catastrophic cancellation and carry no exponent
//     information),
//   * if fewer than `min_points` measurable points survive, the window is
//     widened downward until enough do (reported), and
//   * if nothing is measurable the report says so instead of fitting noise.

#include <cstddef>
#include <string>
#include <vector>

namespace calabi {

// Floor below which |values| are treated as unmeasurable (1000 * eps).
double measurement_floor();

struct PowerLawFit {
    bool measurable = false;   // enough points above the floor
    double exponent = 0.0;     // fitted slope of log|f| vs log x
    double log_coeff = 0.0;    // fitted intercept
    double residual = 0.0;     // RMS deviation of log|f| from the fit line
    double window_lo = 0.0;    // actual window used (may be widened)
    double window_hi = 0.0;
    std::size_t points = 0;    // points used
    bool widened = false;      // window was widened to reach min_points
};

// Fit log|f| vs log x over [window_lo, window_hi] with the floor exclusion
// and the widening guard.
PowerLawFit fit_power_law(const std::vector<double>& x,
                          const std::vector<double>& f, double window_lo,
                          double window_hi, std::size_t min_points = 20);

// Protocol default window: upper half of the grid in log scale.
PowerLawFit fit_power_law_protocol(const std::vector<double>& x,
                                   const std::vector<double>& f,
                                   std::size_t min_points = 20);

// Decay-rate report for one stage of the iteration.
struct DecayReport {
    int index = 0;             // which stage (j for F_j)
    double target = 0.0;       // expected exponent for a generic stage
    PowerLawFit fit;
    // Supremum of |f| * x^{-target} over the protocol window: a decay
    // certificate that stays meaningful when everything measurable has
    // already dropped below the fit floor.
    double weighted_sup = 0.0;

    std::string summary() const;
};

DecayReport make_decay_report(int index, double target,
                              const std::vector<double>& x,
                              const std::vector<double>& f);

// Simple least squares y = a + b*x; returns (a, b).
std::pair<double, double> linear_fit(const std::vector<double>& x,
                                     const std::vector<double>& y);

// Extrapolated tail int_{x_back}^infinity g dx for an algebraically decaying
// integrand sampled on an increasing grid.  The local log-log slope is
// measured on the top quarter and the top half of the grid and extrapolated
// linearly in 1/x to the asymptotic exponent p; then a two-term model
// (a + b/x) x^p is least-squares fitted on the top half and integrated in
// closed form.  When the samples are below the measurement floor, change
// sign in the fit region, or the model looks untrustworthy, the estimate
// falls back to the one-term model g_back * (x/x_back)^{fallback_exponent}.
// Requires an exponent < -1 (else the tail diverges: not_integrable is set
// and value is meaningless).
struct TailEstimate {
    double value = 0.0;
    double error = 0.0;        // crude bound: model distrust + fit residual
    double exponent = 0.0;     // exponent actually used
    bool extrapolated = false; // two-term slope-extrapolated model was used
    bool not_integrable = false;
};
// noise_floor is an absolute amplitude below which samples are treated as
// unmeasured (evaluation noise can carry a systematic, slope-like bias, so
// a purely relative floor cannot detect it); 0 disables the guard.
TailEstimate integral_tail(const std::vector<double>& x,
                           const std::vector<double>& g,
                           double fallback_exponent,
                           double noise_floor = 0.0);

// Slope-extrapolated asymptotic exponent of |f| at the back of the grid:
// log-log slopes on [x_back/4, x_back/2] and [x_back/2, x_back] extrapolated
// linearly in 1/x.  Returns quiet NaN when the back of the grid carries no
// usable signal (sign change, too few points above the noise floor, or a
// wild extrapolation).
double tail_exponent(const std::vector<double>& x,
                     const std::vector<double>& f,
                     double noise_floor = 0.0);

}  // namespace calabi
