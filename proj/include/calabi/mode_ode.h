#pragma once
// Radial mode ODE machinery: fundamental solution pairs for the separated
// equation
//     u'' - q(z) u = n z^{n-1} v(z),
//     q(z) = n lambda z^{n-2} + (j^2 n^2 / 4) z^{2n-2},
// the Green-representation solver built from them, the double-integration
// solver for the q = 0 fiber mode, and a finite-difference boundary-value
// solver used as an independent cross-check.

#include <cmath>
#include <functional>
#include <memory>
#include <vector>

#include "calabi/grid.h"
#include "calabi/model_space.h"

namespace calabi {

// Decaying (D) and growing (G) solutions of u'' = q(z) u on [1, infinity),
// normalized so that the Wronskian W = D' G - D G' is the mode constant
// below (always negative):
//   j = 0, lambda > 0:  D = sqrt(z) K_{1/n}(2 sqrt(lambda/n) z^{n/2}),
//                       G = sqrt(z) I_{1/n}(...),        W = -n/2.
//   j >= 1:             D = e^{j z^n/2} psi_flat(-j z^n),
//                       G = e^{j z^n/2} phi_sharp(-j z^n),
//                       W = Gamma(alpha-1)/Gamma(alpha-beta) j^{1/n}.
// Evaluation is in log space throughout; prepare() tabulates the slowly
// varying parts (the exact exponent is kept analytic) so that later
// evaluations cost O(1).
class FundamentalPair {
public:
    static FundamentalPair zero_mode(int n, double lambda);
    static FundamentalPair nonzero_mode(int n, double lambda, int j);

    double log_D(double z) const;
    double log_G(double z) const;
    double D(double z) const { return std::exp(log_D(z)); }
    double G(double z) const { return std::exp(log_G(z)); }

    // The mode constant W = D' G - D G' (z-independent, negative).
    double expected_wronskian() const;
    // W evaluated from the functions themselves by centered differences of
    // the log values at z; agreement with expected_wronskian() certifies the
    // pair.
    double numeric_wronskian(double z, double relative_step = 2e-3) const;

    // Local decay rate rho(z) ~ -d/dz log D (also ~ +d/dz log G): used for
    // quadrature subpanel sizing and for tail certificates.
    double decay_rate(double z) const;

    // Tabulate the smooth parts on [z_lo, z_hi] (log-uniform, `points`
    // samples, interpolated with 6-point polynomials).  log_D/log_G
    // automatically use the table inside the range afterwards.
    void prepare(double z_lo, double z_hi, std::size_t points = 600);
    bool prepared() const { return !table_sigma_d_.empty(); }

    int n() const { return n_; }
    double lambda_value() const { return lambda_; }
    int fiber_j() const { return j_; }

private:
    FundamentalPair() = default;

    // Exact (quadrature-backed) smooth parts: log D = sigma_D - y and
    // log G = sigma_G + y with y = the analytic exponent (see .cpp).
    double sigma_d_exact(double z) const;
    double sigma_g_exact(double z) const;
    double exponent(double z) const;
    double sigma_interp(const std::vector<double>& table, double z) const;

    int n_ = 3;
    double lambda_ = 0.0;
    int j_ = 0;  // 0 selects the Bessel pair, >= 1 the confluent pair

    double table_lo_ = 0.0, table_hi_ = 0.0, table_dx_ = 0.0;
    std::vector<double> table_sigma_d_;
    std::vector<double> table_sigma_g_;
};

// Result of a Green-representation solve against a decaying source.
struct GreenSolution {
    RadialFunction u;      // on the source grid
    Mode mode;
    double source_decay = 0.0;  // declared decay order delta of the source
    // The integral of D s^{n-1} v beyond the grid end is closed with its
    // first-order Laplace approximation; this bounds the error of that
    // closure propagated to u, at the grid end where it is largest (it is
    // suppressed by e^{-(E(z_N)-E(z))} further in).
    double tail_remainder_bound = 0.0;
    // max_i |u'' - q u - n z^{n-1} v| / (|q u| + |n z^{n-1} v|) over interior
    // nodes, with u'' from grid finite differences.
    double max_relative_residual = 0.0;
    // sup_z |u(z)| * lambda / z^{delta+1} and
    // sup_z |u(z)| * (n lambda + j^2 n^2 z^n / 4) / z^{delta+1}.
    double weighted_sup_lambda = 0.0;
    double weighted_sup_full = 0.0;
};

// Solve u'' - q u = n z^{n-1} v on the grid of `v` by the Green
// representation
//   u(z) = (n/W) [ D(z) Int_1^z G s^{n-1} v ds + G(z) Int_z^infty D s^{n-1} v ds ],
// with the upward tail beyond the grid end estimated from the decay rate of
// D and certified in tail_remainder_bound.  `v_exact`, when given, is used
// inside quadrature panels instead of interpolating the samples.
GreenSolution green_solve(FundamentalPair& pair, const RadialFunction& v,
                          double source_decay,
                          const std::function<double(double)>* v_exact = nullptr);

// Solve u'' = n z^{n-1} v (the q = 0 fiber mode) by explicit double
// integration.  Integration constants are fixed by the decay order delta of
// v: each antiderivative starts at infinity when the integrand decays fast
// enough for the tail to converge (inner: delta < -n, outer: delta < -n-1)
// and at z = 1 otherwise.  Tails beyond the grid end are extrapolated with
// the declared power law.  The result carries exact first/second derivative
// samples.
RadialFunction fiber_mode_solve(const RadialFunction& v, double source_decay);

// Independent check: solve u'' - q u = n z^{n-1} v on [z_lo, z_hi] with
// Dirichlet values by 4th-order finite differences (5-point interior
// stencils, 6-point one-sided rows next to the boundary) and a dense LU
// solve.  Returns the solution on the uniform (m+1)-node grid.
RadialFunction brute_force_bvp(int n, const Mode& mode,
                               const std::function<double(double)>& v,
                               double z_lo, double z_hi, double u_lo,
                               double u_hi, std::size_t m);

}  // namespace calabi
