#include "calabi/grid.h"

#include <algorithm>
#include <cmath>

namespace calabi {

RadialGrid::RadialGrid(int n, std::vector<double> z_samples)
    : n_(n), z_(std::move(z_samples)) {
    if (n_ < 2) throw std::invalid_argument("RadialGrid: n must be >= 2");
    if (z_.size() < 5)
        throw std::invalid_argument("RadialGrid: need at least 5 samples");
    for (std::size_t i = 0; i < z_.size(); ++i) {
        if (!(z_[i] > 0.0))
            throw std::invalid_argument("RadialGrid: z samples must be > 0");
        if (i > 0 && !(z_[i] > z_[i - 1]))
            throw std::invalid_argument(
                "RadialGrid: z samples must be strictly increasing");
    }
    t_.resize(z_.size());
    for (std::size_t i = 0; i < z_.size(); ++i)
        t_[i] = std::pow(z_[i], static_cast<double>(n_));
}

GridPtr RadialGrid::log_uniform(int n, double z_lo, double z_hi,
                                std::size_t count) {
    if (!(z_lo > 0.0) || !(z_hi > z_lo))
        throw std::invalid_argument("log_uniform: need 0 < z_lo < z_hi");
    if (count < 5) throw std::invalid_argument("log_uniform: count too small");
    std::vector<double> z(count);
    const double la = std::log(z_lo), lb = std::log(z_hi);
    for (std::size_t i = 0; i < count; ++i) {
        const double s = static_cast<double>(i) / static_cast<double>(count - 1);
        z[i] = std::exp(la + s * (lb - la));
    }
    z.front() = z_lo;
    z.back() = z_hi;
    return std::make_shared<RadialGrid>(n, std::move(z));
}

std::size_t RadialGrid::lower_index(double z_value) const {
    auto it = std::lower_bound(z_.begin(), z_.end(), z_value);
    if (it == z_.end()) return z_.size() - 1;
    return static_cast<std::size_t>(it - z_.begin());
}

RadialFunction::RadialFunction(GridPtr grid, std::vector<double> values)
    : grid_(std::move(grid)), values_(std::move(values)) {
    if (!grid_) throw std::invalid_argument("RadialFunction: null grid");
    if (values_.size() != grid_->size())
        throw std::invalid_argument("RadialFunction: size mismatch");
}

RadialFunction RadialFunction::zero(GridPtr grid) {
    std::vector<double> v(grid->size(), 0.0);
    return RadialFunction(std::move(grid), std::move(v));
}

RadialFunction RadialFunction::sample(
    GridPtr grid, const std::function<double(double)>& f_of_z) {
    std::vector<double> v(grid->size());
    for (std::size_t i = 0; i < grid->size(); ++i) v[i] = f_of_z(grid->z(i));
    return RadialFunction(std::move(grid), std::move(v));
}

void RadialFunction::set_dz(std::vector<double> d1) {
    if (d1.size() != values_.size())
        throw std::invalid_argument("set_dz: size mismatch");
    d1_ = std::move(d1);
}

void RadialFunction::set_dzz(std::vector<double> d2) {
    if (d2.size() != values_.size())
        throw std::invalid_argument("set_dzz: size mismatch");
    d2_ = std::move(d2);
}

std::vector<double> RadialFunction::dz() const {
    if (!d1_.empty()) return d1_;
    return derivative_samples(grid_->z(), values_, 1);
}

std::vector<double> RadialFunction::dzz() const {
    if (!d2_.empty()) return d2_;
    return derivative_samples(grid_->z(), values_, 2);
}

double RadialFunction::eval(double z_value) const {
    const auto& zg = grid_->z();
    const std::size_t m = zg.size();
    if (z_value <= zg.front()) return values_.front();
    if (z_value >= zg.back()) return values_.back();
    std::size_t k = grid_->lower_index(z_value);
    // Cubic through the four samples surrounding z_value.
    std::size_t lo = (k >= 2) ? k - 2 : 0;
    if (lo + 4 > m) lo = m - 4;
    double result = 0.0;
    for (std::size_t i = lo; i < lo + 4; ++i) {
        double li = 1.0;
        for (std::size_t jj = lo; jj < lo + 4; ++jj) {
            if (jj == i) continue;
            li *= (z_value - zg[jj]) / (zg[i] - zg[jj]);
        }
        result += li * values_[i];
    }
    return result;
}

double RadialFunction::sup_norm() const {
    double m = 0.0;
    for (double v : values_) m = std::max(m, std::abs(v));
    return m;
}

std::vector<std::vector<double>> fd_weights(double x0,
                                            const std::vector<double>& nodes,
                                            int m_max) {
    // B. Fornberg, "Generation of finite difference formulas on arbitrarily
    // spaced grids", Math. Comp. 51 (1988).
    const int nn = static_cast<int>(nodes.size()) - 1;
    std::vector<std::vector<double>> c(
        static_cast<std::size_t>(m_max) + 1,
        std::vector<double>(nodes.size(), 0.0));
    double c1 = 1.0;
    double c4 = nodes[0] - x0;
    c[0][0] = 1.0;
    for (int i = 1; i <= nn; ++i) {
        const int mn = std::min(i, m_max);
        double c2 = 1.0;
        const double c5 = c4;
        c4 = nodes[static_cast<std::size_t>(i)] - x0;
        for (int j = 0; j <= i - 1; ++j) {
            const double c3 = nodes[static_cast<std::size_t>(i)] -
                              nodes[static_cast<std::size_t>(j)];
            c2 *= c3;
            if (j == i - 1) {
                for (int k = mn; k >= 1; --k)
                    c[static_cast<std::size_t>(k)][static_cast<std::size_t>(i)] =
                        c1 *
                        (k * c[static_cast<std::size_t>(k - 1)]
                               [static_cast<std::size_t>(i - 1)] -
                         c5 * c[static_cast<std::size_t>(k)]
                                [static_cast<std::size_t>(i - 1)]) /
                        c2;
                c[0][static_cast<std::size_t>(i)] =
                    -c1 * c5 * c[0][static_cast<std::size_t>(i - 1)] / c2;
            }
            for (int k = mn; k >= 1; --k)
                c[static_cast<std::size_t>(k)][static_cast<std::size_t>(j)] =
                    (c4 * c[static_cast<std::size_t>(k)]
                            [static_cast<std::size_t>(j)] -
                     k * c[static_cast<std::size_t>(k - 1)]
                           [static_cast<std::size_t>(j)]) /
                    c3;
            c[0][static_cast<std::size_t>(j)] =
                c4 * c[0][static_cast<std::size_t>(j)] / c3;
        }
        c1 = c2;
    }
    return c;
}

std::vector<double> derivative_samples(const std::vector<double>& x,
                                       const std::vector<double>& f,
                                       int order) {
    const std::size_t m = x.size();
    if (f.size() != m) throw std::invalid_argument("derivative_samples: sizes");
    if (m < 5)
        throw std::invalid_argument("derivative_samples: need >= 5 points");
    std::vector<double> out(m, 0.0);
    for (std::size_t i = 0; i < m; ++i) {
        std::size_t lo = (i >= 2) ? i - 2 : 0;
        if (lo + 5 > m) lo = m - 5;
        std::vector<double> nodes(x.begin() + static_cast<std::ptrdiff_t>(lo),
                                  x.begin() + static_cast<std::ptrdiff_t>(lo + 5));
        auto w = fd_weights(x[i], nodes, order);
        double acc = 0.0;
        for (std::size_t j = 0; j < 5; ++j)
            acc += w[static_cast<std::size_t>(order)][j] * f[lo + j];
        out[i] = acc;
    }
    return out;
}

std::vector<double> cumulative_integral(const std::vector<double>& x,
                                        const std::vector<double>& f) {
    const std::size_t m = x.size();
    if (f.size() != m) throw std::invalid_argument("cumulative_integral: sizes");
    if (m < 4)
        throw std::invalid_argument("cumulative_integral: need >= 4 points");
    std::vector<double> out(m, 0.0);
    for (std::size_t i = 0; i + 1 < m; ++i) {
        // Integrate the cubic through four samples surrounding [x_i, x_{i+1}].
        std::size_t lo = (i >= 1) ? i - 1 : 0;
        if (lo + 4 > m) lo = m - 4;
        const double a = x[i], b = x[i + 1];
        double piece = 0.0;
        for (std::size_t k = lo; k < lo + 4; ++k) {
            // Integral over [a,b] of the Lagrange basis polynomial at node k,
            // via 4-point Gauss-Legendre (exact for cubics).
            static const double gx[4] = {-0.8611363115940526, -0.3399810435848563,
                                         0.3399810435848563, 0.8611363115940526};
            static const double gw[4] = {0.3478548451374538, 0.6521451548625461,
                                         0.6521451548625461, 0.3478548451374538};
            double integ = 0.0;
            for (int g = 0; g < 4; ++g) {
                const double xx = 0.5 * (a + b) + 0.5 * (b - a) * gx[g];
                double li = 1.0;
                for (std::size_t jj = lo; jj < lo + 4; ++jj) {
                    if (jj == k) continue;
                    li *= (xx - x[jj]) / (x[k] - x[jj]);
                }
                integ += gw[g] * li;
            }
            piece += 0.5 * (b - a) * integ * f[k];
        }
        out[i + 1] = out[i] + piece;
    }
    return out;
}

double grid_integral(const std::vector<double>& x,
                     const std::vector<double>& f) {
    return cumulative_integral(x, f).back();
}

}  // namespace calabi
