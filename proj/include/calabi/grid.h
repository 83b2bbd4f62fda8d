#pragma once
// Radial grids and grid-sampled radial functions for the model end.
//
// The model geometry is a circle bundle over a compact divisor with a radial
// coordinate t > 0 and its n-th root z = t^{1/n}.  Everything radial in this
// codebase is sampled on a shared strictly increasing grid of t-values; the
// z-values are derived once and stored alongside.

#include <cstddef>
#include <functional>
#include <memory>
#include <stdexcept>
#include <vector>

namespace calabi {

// Strictly increasing radial grid.  Stores both t and z = t^{1/n}.
class RadialGrid {
public:
    // Grid from explicit z samples (must be strictly increasing, all > 0).
    RadialGrid(int n, std::vector<double> z_samples);

    // Log-uniform grid in z on [z_lo, z_hi] with `count` points.
    static std::shared_ptr<const RadialGrid> log_uniform(int n, double z_lo,
                                                         double z_hi,
                                                         std::size_t count);

    int n() const { return n_; }
    std::size_t size() const { return z_.size(); }
    const std::vector<double>& z() const { return z_; }
    const std::vector<double>& t() const { return t_; }
    double z(std::size_t i) const { return z_[i]; }
    double t(std::size_t i) const { return t_[i]; }
    double z_front() const { return z_.front(); }
    double z_back() const { return z_.back(); }

    // Index of the first grid point with z >= value (clamped to valid range).
    std::size_t lower_index(double z_value) const;

private:
    int n_;
    std::vector<double> z_;
    std::vector<double> t_;
};

using GridPtr = std::shared_ptr<const RadialGrid>;

// A function sampled on a RadialGrid.  Derivative samples with respect to z
// may be attached when the producer knows them analytically (e.g. a solver
// that constructed u' and u'' exactly); otherwise finite differences on the
// grid are used.
class RadialFunction {
public:
    RadialFunction() = default;
    RadialFunction(GridPtr grid, std::vector<double> values);

    static RadialFunction zero(GridPtr grid);
    static RadialFunction sample(GridPtr grid,
                                 const std::function<double(double)>& f_of_z);

    const GridPtr& grid() const { return grid_; }
    std::size_t size() const { return values_.size(); }
    const std::vector<double>& values() const { return values_; }
    std::vector<double>& values() { return values_; }
    double operator[](std::size_t i) const { return values_[i]; }
    double& operator[](std::size_t i) { return values_[i]; }

    // Attach analytic first/second derivative samples (with respect to z).
    void set_dz(std::vector<double> d1);
    void set_dzz(std::vector<double> d2);
    bool has_dz() const { return !d1_.empty(); }
    bool has_dzz() const { return !d2_.empty(); }

    // First/second derivative samples with respect to z: attached analytic
    // values if present, else 4th-order finite differences on the grid.
    std::vector<double> dz() const;
    std::vector<double> dzz() const;

    // Cubic interpolation of the sampled values at an arbitrary z inside the
    // grid range.
    double eval(double z_value) const;

    double sup_norm() const;

private:
    GridPtr grid_;
    std::vector<double> values_;
    std::vector<double> d1_;
    std::vector<double> d2_;
};

// Finite-difference weights for the m-th derivative at point x0 from
// arbitrary nodes (Fornberg's algorithm).  Returns weights for derivatives
// 0..m_max at x0; weights[d][j] multiplies f(nodes[j]) for the d-th
// derivative.
std::vector<std::vector<double>> fd_weights(double x0,
                                            const std::vector<double>& nodes,
                                            int m_max);

// 4th-order (5-point stencil) derivative of samples on an arbitrary
// increasing grid; one-sided stencils near the boundary.
std::vector<double> derivative_samples(const std::vector<double>& x,
                                       const std::vector<double>& f,
                                       int order);

// Cumulative integral \int_{x[0]}^{x[i]} f dx on an increasing grid using
// local cubic interpolation through the four nearest samples (O(h^5) local
// error).  out[0] = 0.
std::vector<double> cumulative_integral(const std::vector<double>& x,
                                        const std::vector<double>& f);

// Full integral over the grid (last entry of cumulative_integral).
double grid_integral(const std::vector<double>& x,
                     const std::vector<double>& f);

}  // namespace calabi
