#pragma once
// Special functions evaluated from their defining integral representations:
// modified Bessel K and I, the confluent (Kummer-type) flat/sharp pair, the
// Gamma function, and the Laplace-method critical data used by the two-sided
// envelope checks.
//
// Everything exponentially large or small is handled in log space: the
// primitives are log-valued; the plain-valued wrappers exponentiate and are
// only safe where the caller knows the result fits in double range.

#include <vector>

#include "calabi/quadrature.h"

namespace calabi {

// --- Gamma -----------------------------------------------------------------

// Signed Gamma (poles rejected); ~1e-14 relative.
double gamma_fn(double x);
// log |Gamma(x)| and sign of Gamma(x); poles rejected.
double log_abs_gamma(double x);
int gamma_sign(double x);

// --- Modified Bessel functions ----------------------------------------------

// Scaled logs: Khat = e^{y} K_nu(y),  Ihat = e^{-y} I_nu(y).
double log_bessel_K_scaled(double nu, double y,
                           const QuadratureOptions& opt = {});
double log_bessel_I_scaled(double nu, double y,
                           const QuadratureOptions& opt = {});

// Plain values. bessel_K requires y >= 0.05 (the representation is only
// used — and only accurate enough — away from 0); bessel_I requires nu > -1.
double bessel_K(double nu, double y);
double bessel_I(double nu, double y);

// K'_{1/n}(y) = -(K_{(n+1)/n}(y) + K_{(n-1)/n}(y)) / 2; always negative.
double bessel_K_prime_over_n(int n, double y);

// High-resolution tabulation of log Ihat(nu, y) over y in [1e-6, 1e8] with
// exact small/large-argument asymptotics outside; built lazily per order and
// cached process-wide. Used inside nested quadratures where a fresh adaptive
// Bessel evaluation per integrand point would be prohibitive.
class ScaledBesselICache {
  public:
    explicit ScaledBesselICache(double nu);
    // log( e^{-y} I_nu(y) ), y > 0; ~1e-12 relative accuracy.
    double log_scaled(double y) const;
    double order() const { return nu_; }

  private:
    double nu_;
    double log_lo_, log_hi_, step_;
    std::vector<double> table_;
};

const ScaledBesselICache& scaled_bessel_I_cache(double nu);

// --- Confluent pair ----------------------------------------------------------

// Parameters of the confluent pair for complex dimension n, cross-section
// eigenvalue lambda and fiber frequency j >= 1.
struct KummerParams {
    int n = 0;
    double alpha = 0.0;    // 1 - 1/n
    double beta = 0.0;     // (n-1)/(2n) - lambda/(n j)
    double Q = 0.0;        // alpha - beta - 1
    double gamma_n = 0.0;  // 1/2 + 1/n

    static KummerParams from_mode(int n, double lambda, int j);
};

// Flat (decaying) and sharp (growing) solutions at y <= -1, from
//   psi_flat(y)  = e^y / Gamma(alpha-beta) * Int_0^inf e^{ys} s^{alpha-beta-1} (1+s)^{beta-1} ds
//   phi_sharp(y) = Gamma(alpha)/Gamma(alpha-beta) * e^y (-y)^{beta-alpha}
//                  * Int_0^inf e^{s/y} s^{(alpha-1)/2-beta} I_{alpha-1}(2 sqrt s) ds
double log_psi_flat(const KummerParams& p, double y);
double log_phi_sharp(const KummerParams& p, double y);
double psi_flat(const KummerParams& p, double y);
double phi_sharp(const KummerParams& p, double y);

// log(e^{-y} psi_flat(y)) = log_psi_flat - y computed without forming the
// large cancelling pair; slowly varying in log(-y), which makes it the right
// quantity to tabulate and interpolate.
double log_psi_flat_shifted(const KummerParams& p, double y);

// --- Laplace-method critical data --------------------------------------------

// Critical points/values of F(t) = y t + Q log(t/(t+1)) on t > 0 and
// G(u) = -u^2 + 2 sqrt(-y) u + (2Q + gamma_n) log u on u > 0.
struct LaplaceCritical {
    double t0;
    double u0;
    double F_t0;
    double G_u0;
};
LaplaceCritical laplace_critical(double Q, double gamma_n, double y);

// Two-sided envelope shapes (log scale, all order-one constants set to 1)
// for the flat/sharp pair, switching branch at Q = 1. Empirical envelope
// constants are certified by the test harness, not assumed here.
struct EnvelopePair {
    double log_lo;
    double log_hi;
};
EnvelopePair psi_flat_envelope(const KummerParams& p, double y);
EnvelopePair phi_sharp_envelope(const KummerParams& p, double y);

}  // namespace calabi
