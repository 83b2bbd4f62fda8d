#pragma once
// Full Poisson solves u = u0 + sum_k u_k psi_k over a surrogate cross-section
// spectrum.  The cross-section is modeled as a flat torus of real dimension
// 2(n-1) times the circle fiber, with real Fourier modes as the eigenbasis:
// this reproduces exactly the (lambda_k, j_k) mode structure and the Weyl
// growth Lambda_k ~ k^{2/(2n-1)} that the per-mode radial analysis rests on.

#include <cstddef>
#include <vector>

#include "calabi/fitting.h"
#include "calabi/grid.h"
#include "calabi/mode_ode.h"
#include "calabi/model_space.h"

namespace calabi {

// One real eigenfunction of the surrogate cross-section:
//   psi(y) = norm * cos/sin(kappa . y_torus + j * y_fiber),
// with norm 1 for the constant mode and sqrt(2) otherwise.
struct SurrogateMode {
    std::vector<int> kappa;  // torus frequencies, size 2(n-1)
    int j = 0;               // fiber frequency (signed)
    bool sine = false;       // false: cosine branch, true: sine branch
    double lambda = 0.0;     // |kappa|^2
};

// Enumerates the real Fourier modes with |kappa_i| <= max_torus_freq and
// |j| <= max_fiber_freq, sorted by Lambda_k(z0) = lambda_k/z0 + n z0^{n-1}
// j_k^2 (ties broken deterministically).  Mode 0 is the constant with
// Lambda_0 = 0 and multiplicity 1.
class SpectrumProvider {
public:
    SpectrumProvider(int n, int max_torus_freq, int max_fiber_freq,
                     double z0 = 1.0);

    int n() const { return n_; }
    double z0() const { return z0_; }
    std::size_t size() const { return modes_.size(); }
    std::size_t torus_dims() const { return static_cast<std::size_t>(2 * (n_ - 1)); }
    const SurrogateMode& mode(std::size_t k) const { return modes_.at(k); }

    // psi_k at the point y (torus angles first, fiber angle last).
    double psi(std::size_t k, const std::vector<double>& y) const;

    // Indices of the modes exactly representable on a tensor y-grid with the
    // given per-dimension sizes (2|freq|+1 <= size in every dimension).
    std::vector<std::size_t> supported_on(
        const std::vector<std::size_t>& y_sizes) const;

private:
    int n_;
    double z0_;
    std::vector<SurrogateMode> modes_;
};

// Lambda_k at level z0: z0^{-1} lambda_k + n z0^{n-1} j_k^2.
double eigenvalue_at_level(const SpectrumProvider& provider, std::size_t k,
                           double z0);

// A sample field on the tensor product of a radial grid and a uniform
// periodic y-grid (torus dimensions then fiber); value(i, flat) with flat
// running over the y-grid in row-major order.
struct TensorField {
    GridPtr grid;
    std::vector<std::size_t> y_sizes;
    std::vector<double> values;  // grid->size() * prod(y_sizes)

    std::size_t slice_size() const;
    double& at(std::size_t z_index, std::size_t y_flat);
    double at(std::size_t z_index, std::size_t y_flat) const;
};

// Sample f(z, y) on the tensor grid; y has torus_dims + 1 components.
TensorField sample_tensor_field(
    GridPtr grid, std::vector<std::size_t> y_sizes,
    const std::function<double(double, const std::vector<double>&)>& f);

// Per-slice projection P_k(v)(z_i) = mean over the y-grid of v * psi_k
// (periodic trapezoid; exact for band-limited v).  Throws with a Nyquist
// diagnostic when psi_k is not representable on v's y-grid.
RadialFunction project(const SpectrumProvider& provider, const TensorField& v,
                       std::size_t k);

struct PoissonReport {
    std::size_t truncation = 0;       // number of modes considered
    std::size_t active_modes = 0;     // modes whose projection is nonzero
    PowerLawFit u_order;              // fitted growth order of sup_y |u(z,.)|
    PowerLawFit centered_order;       // same for u - u0
    // Empirical mode-norm decay sup|v_k| ~ C Lambda_k^{-K0} and the implied
    // truncation error estimate for u.
    double mode_norm_coefficient = 0.0;
    double mode_norm_exponent = 0.0;   // -K0 (negative when decaying)
    double tail_estimate = 0.0;
    bool band_limited = true;          // no rejected/unrepresented content
    double max_mode_residual = 0.0;    // worst per-mode ODE residual
};

struct PoissonSolution {
    RadialFunction u0;                          // constant-mode part
    std::vector<std::size_t> mode_indices;      // active k >= 1
    std::vector<RadialFunction> mode_solutions; // u_k matching mode_indices
    TensorField u;                              // assembled on v's grid
    PoissonReport report;
};

// Solve Delta u = v with the first `truncation` modes of the provider.
// source_decay is the declared polynomial order of v in z (used for the
// integration-limit choices and the weighted reports).  Throws when the
// empirical mode norms fail to decay in Lambda_k.
PoissonSolution solve_poisson(const SpectrumProvider& provider,
                              const TensorField& v, std::size_t truncation,
                              double source_decay);

struct ResidualReport {
    std::vector<double> slice_norms;  // per z-slice L2(Y) residual norm
    double max_norm = 0.0;
};

// Mode-by-mode check that Delta u = v: projects both fields on the first
// `truncation` modes, applies the separated radial Laplacian to each u_k,
// and reports per-slice L2 residual norms.
ResidualReport laplace_residual(const TensorField& u, const TensorField& v,
                                const SpectrumProvider& provider,
                                std::size_t truncation);

// Weyl growth diagnostic: sorts all Lambda values of the (2(n-1)+1)-torus
// box spectrum |kappa_i| <= max_torus_freq, |j| <= max_fiber_freq at level
// z0 and fits log Lambda_k against log k over sorted indices [k_lo, k_hi].
// The expected exponent is 2/(2n-1).
PowerLawFit weyl_growth_fit(int n, int max_torus_freq, int max_fiber_freq,
                            double z0, std::size_t k_lo, std::size_t k_hi);

}  // namespace calabi
