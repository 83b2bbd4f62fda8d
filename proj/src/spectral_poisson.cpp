#include "calabi/spectral_poisson.h"

#include <algorithm>
#include <cmath>
#include <map>
#include <sstream>
#include <stdexcept>

#include "calabi/parallel.h"

namespace calabi {

namespace {

constexpr double kTwoPi = 6.283185307179586476925286766559;

// Deterministic ordering: Lambda(z0), then lambda, |j|, frequencies, branch.
struct ModeOrder {
    double level;
    const SpectrumProvider* provider = nullptr;
};

double mode_level(const SurrogateMode& m, int n, double z0) {
    return m.lambda / z0 +
           n * std::pow(z0, n - 1.0) * static_cast<double>(m.j) * m.j;
}

bool mode_less(const SurrogateMode& a, const SurrogateMode& b, int n,
               double z0) {
    const double la = mode_level(a, n, z0);
    const double lb = mode_level(b, n, z0);
    if (la != lb) return la < lb;
    if (a.lambda != b.lambda) return a.lambda < b.lambda;
    if (std::abs(a.j) != std::abs(b.j)) return std::abs(a.j) < std::abs(b.j);
    if (a.j != b.j) return a.j > b.j;
    if (a.kappa != b.kappa) return a.kappa < b.kappa;
    return a.sine < b.sine;
}

}  // namespace

SpectrumProvider::SpectrumProvider(int n, int max_torus_freq,
                                   int max_fiber_freq, double z0)
    : n_(n), z0_(z0) {
    if (n < 2) throw std::domain_error("spectrum: need n >= 2");
    if (max_torus_freq < 0 || max_fiber_freq < 0 || !(z0 > 0.0)) {
        throw std::domain_error("spectrum: bad enumeration bounds");
    }
    const std::size_t dims = torus_dims();
    std::vector<int> kappa(dims, -max_torus_freq);

    // Enumerate canonical representatives of the +/- frequency pairs: the
    // first nonzero component of (kappa, j) is positive.  Each representative
    // yields a cosine and a sine mode; the all-zero vector yields only the
    // constant.
    auto canonical = [&](const std::vector<int>& k, int j) {
        for (int c : k) {
            if (c != 0) return c > 0;
        }
        return j >= 0;
    };
    bool done = dims == 0;
    std::vector<std::vector<int>> torus_points;
    if (dims == 0) {
        torus_points.push_back({});
    } else {
        while (true) {
            torus_points.push_back(kappa);
            std::size_t d = 0;
            while (d < dims && kappa[d] == max_torus_freq) {
                kappa[d] = -max_torus_freq;
                ++d;
            }
            if (d == dims) break;
            ++kappa[d];
        }
    }
    (void)done;
    for (const auto& k : torus_points) {
        double lambda = 0.0;
        for (int c : k) lambda += static_cast<double>(c) * c;
        for (int j = -max_fiber_freq; j <= max_fiber_freq; ++j) {
            if (!canonical(k, j)) continue;
            const bool zero = lambda == 0.0 && j == 0;
            SurrogateMode cosine{k, j, false, lambda};
            modes_.push_back(cosine);
            if (!zero) {
                SurrogateMode sine{k, j, true, lambda};
                modes_.push_back(sine);
            }
        }
    }
    std::sort(modes_.begin(), modes_.end(),
              [&](const SurrogateMode& a, const SurrogateMode& b) {
                  return mode_less(a, b, n_, z0_);
              });
}

double SpectrumProvider::psi(std::size_t k, const std::vector<double>& y) const {
    const auto& m = modes_.at(k);
    if (y.size() != torus_dims() + 1) {
        throw std::invalid_argument("psi: wrong point dimension");
    }
    double dot = 0.0;
    for (std::size_t d = 0; d < torus_dims(); ++d) dot += m.kappa[d] * y[d];
    dot += m.j * y.back();
    const bool constant = m.lambda == 0.0 && m.j == 0;
    const double norm = constant ? 1.0 : std::sqrt(2.0);
    return norm * (m.sine ? std::sin(dot) : std::cos(dot));
}

std::vector<std::size_t> SpectrumProvider::supported_on(
    const std::vector<std::size_t>& y_sizes) const {
    if (y_sizes.size() != torus_dims() + 1) {
        throw std::invalid_argument("supported_on: wrong y-grid rank");
    }
    std::vector<std::size_t> out;
    for (std::size_t k = 0; k < modes_.size(); ++k) {
        const auto& m = modes_[k];
        bool ok = 2 * static_cast<std::size_t>(std::abs(m.j)) + 1 <=
                  y_sizes.back();
        for (std::size_t d = 0; ok && d < torus_dims(); ++d) {
            ok = 2 * static_cast<std::size_t>(std::abs(m.kappa[d])) + 1 <=
                 y_sizes[d];
        }
        if (ok) out.push_back(k);
    }
    return out;
}

double eigenvalue_at_level(const SpectrumProvider& provider, std::size_t k,
                           double z0) {
    if (!(z0 > 0.0)) throw std::domain_error("eigenvalue_at_level: z0 > 0");
    return mode_level(provider.mode(k), provider.n(), z0);
}

// --- Tensor fields --------------------------------------------------------------

std::size_t TensorField::slice_size() const {
    std::size_t s = 1;
    for (std::size_t d : y_sizes) s *= d;
    return s;
}

double& TensorField::at(std::size_t z_index, std::size_t y_flat) {
    return values[z_index * slice_size() + y_flat];
}

double TensorField::at(std::size_t z_index, std::size_t y_flat) const {
    return values[z_index * slice_size() + y_flat];
}

namespace {

// y-point of the flat index (row-major over y_sizes).
std::vector<double> y_point(const std::vector<std::size_t>& y_sizes,
                            std::size_t flat) {
    std::vector<double> y(y_sizes.size());
    for (std::size_t d = y_sizes.size(); d-- > 0;) {
        const std::size_t s = y_sizes[d];
        y[d] = kTwoPi * static_cast<double>(flat % s) / static_cast<double>(s);
        flat /= s;
    }
    return y;
}

}  // namespace

TensorField sample_tensor_field(
    GridPtr grid, std::vector<std::size_t> y_sizes,
    const std::function<double(double, const std::vector<double>&)>& f) {
    if (!grid) throw std::invalid_argument("sample_tensor_field: null grid");
    for (std::size_t s : y_sizes) {
        if (s == 0) throw std::invalid_argument("sample_tensor_field: zero size");
    }
    TensorField out;
    out.grid = grid;
    out.y_sizes = std::move(y_sizes);
    const std::size_t slice = out.slice_size();
    out.values.assign(grid->size() * slice, 0.0);
    std::vector<std::vector<double>> points(slice);
    for (std::size_t flat = 0; flat < slice; ++flat) {
        points[flat] = y_point(out.y_sizes, flat);
    }
    for (std::size_t i = 0; i < grid->size(); ++i) {
        for (std::size_t flat = 0; flat < slice; ++flat) {
            out.at(i, flat) = f(grid->z(i), points[flat]);
        }
    }
    return out;
}

RadialFunction project(const SpectrumProvider& provider, const TensorField& v,
                       std::size_t k) {
    if (!v.grid) throw std::invalid_argument("project: field has no grid");
    if (v.y_sizes.size() != provider.torus_dims() + 1) {
        throw std::invalid_argument("project: field/provider rank mismatch");
    }
    const auto& m = provider.mode(k);
    for (std::size_t d = 0; d < provider.torus_dims(); ++d) {
        if (2 * static_cast<std::size_t>(std::abs(m.kappa[d])) + 1 >
            v.y_sizes[d]) {
            std::ostringstream msg;
            msg << "project: mode " << k << " has torus frequency "
                << m.kappa[d] << " in dimension " << d
                << " but the y-grid has only " << v.y_sizes[d]
                << " samples (need >= " << 2 * std::abs(m.kappa[d]) + 1
                << " to avoid aliasing)";
            throw std::domain_error(msg.str());
        }
    }
    if (2 * static_cast<std::size_t>(std::abs(m.j)) + 1 > v.y_sizes.back()) {
        std::ostringstream msg;
        msg << "project: mode " << k << " has fiber frequency " << m.j
            << " but the y-grid has only " << v.y_sizes.back()
            << " samples (need >= " << 2 * std::abs(m.j) + 1
            << " to avoid aliasing)";
        throw std::domain_error(msg.str());
    }

    const std::size_t slice = v.slice_size();
    std::vector<double> psi_values(slice);
    for (std::size_t flat = 0; flat < slice; ++flat) {
        psi_values[flat] = provider.psi(k, y_point(v.y_sizes, flat));
    }
    std::vector<double> out(v.grid->size(), 0.0);
    const double inv = 1.0 / static_cast<double>(slice);
    for (std::size_t i = 0; i < v.grid->size(); ++i) {
        double acc = 0.0;
        for (std::size_t flat = 0; flat < slice; ++flat) {
            acc += v.at(i, flat) * psi_values[flat];
        }
        out[i] = acc * inv;
    }
    return RadialFunction(v.grid, std::move(out));
}

// --- Poisson solve --------------------------------------------------------------

PoissonSolution solve_poisson(const SpectrumProvider& provider,
                              const TensorField& v, std::size_t truncation,
                              double source_decay) {
    if (!v.grid) throw std::invalid_argument("solve_poisson: field has no grid");
    truncation = std::min(truncation, provider.size());
    if (truncation == 0) throw std::invalid_argument("solve_poisson: no modes");

    // Restrict to the modes representable on the field's y-grid (the sampled
    // field carries no content in unsampled directions).
    auto supported = provider.supported_on(v.y_sizes);
    std::vector<std::size_t> considered;
    for (std::size_t k : supported) {
        if (k < truncation) considered.push_back(k);
    }
    if (considered.empty() || considered[0] != 0) {
        throw std::runtime_error("solve_poisson: constant mode missing");
    }

    // Project the source on every considered mode.
    std::vector<RadialFunction> projections(considered.size());
    parallel_for_index(considered.size(), [&](std::size_t idx) {
        projections[idx] = project(provider, v, considered[idx]);
    });

    double v_scale = 0.0;
    std::vector<double> sup_norm(considered.size(), 0.0);
    for (std::size_t idx = 0; idx < considered.size(); ++idx) {
        sup_norm[idx] = projections[idx].sup_norm();
        v_scale = std::max(v_scale, sup_norm[idx]);
    }
    const double active_floor = v_scale * 1e-13;

    PoissonSolution out;
    out.report.truncation = truncation;

    // Constant mode: double integration.
    if (sup_norm[0] > active_floor) {
        out.u0 = fiber_mode_solve(projections[0], source_decay);
        out.report.active_modes += 1;
    } else {
        out.u0 = RadialFunction::zero(v.grid);
    }

    // Remaining active modes: Green solves, sharing prepared fundamental
    // pairs across equal (lambda, |j|).
    std::vector<std::size_t> active_idx;
    for (std::size_t idx = 1; idx < considered.size(); ++idx) {
        if (sup_norm[idx] > active_floor) active_idx.push_back(idx);
    }
    out.report.active_modes += active_idx.size();

    std::map<std::pair<double, int>, std::size_t> pair_slot;
    std::vector<std::pair<double, int>> pair_keys;
    for (std::size_t idx : active_idx) {
        const auto& m = provider.mode(considered[idx]);
        const auto key = std::make_pair(m.lambda, std::abs(m.j));
        if (pair_slot.emplace(key, pair_keys.size()).second) {
            pair_keys.push_back(key);
        }
    }
    std::vector<FundamentalPair> pairs;
    pairs.reserve(pair_keys.size());
    for (const auto& key : pair_keys) {
        pairs.push_back(key.second == 0
                            ? FundamentalPair::zero_mode(provider.n(), key.first)
                            : FundamentalPair::nonzero_mode(provider.n(),
                                                            key.first,
                                                            key.second));
    }
    parallel_for_index(pairs.size(), [&](std::size_t p) {
        pairs[p].prepare(v.grid->z_front(), v.grid->z_back());
    });

    std::vector<GreenSolution> solutions(active_idx.size());
    parallel_for_index(active_idx.size(), [&](std::size_t a) {
        const std::size_t idx = active_idx[a];
        const auto& m = provider.mode(considered[idx]);
        auto& pair = pairs[pair_slot.at({m.lambda, std::abs(m.j)})];
        solutions[a] = green_solve(pair, projections[idx], source_decay);
    });

    for (std::size_t a = 0; a < active_idx.size(); ++a) {
        out.mode_indices.push_back(considered[active_idx[a]]);
        out.mode_solutions.push_back(solutions[a].u);
        out.report.max_mode_residual = std::max(
            out.report.max_mode_residual, solutions[a].max_relative_residual);
    }

    // Empirical mode-norm decay in Lambda and the implied truncation tail.
    {
        std::vector<double> xs, fs;
        for (std::size_t a = 0; a < active_idx.size(); ++a) {
            const std::size_t k = considered[active_idx[a]];
            xs.push_back(eigenvalue_at_level(provider, k, provider.z0()));
            fs.push_back(sup_norm[active_idx[a]]);
        }
        std::vector<double> distinct = xs;
        std::sort(distinct.begin(), distinct.end());
        distinct.erase(std::unique(distinct.begin(), distinct.end()),
                       distinct.end());
        if (distinct.size() >= 3) {
            std::vector<double> lx, lf;
            for (std::size_t i = 0; i < xs.size(); ++i) {
                lx.push_back(std::log(xs[i]));
                lf.push_back(std::log(fs[i]));
            }
            auto [intercept, slope] = linear_fit(lx, lf);
            if (slope >= 0.0) {
                throw std::runtime_error(
                    "solve_poisson: empirical mode norms do not decay in "
                    "Lambda; refusing to truncate");
            }
            out.report.mode_norm_exponent = slope;
            out.report.mode_norm_coefficient = std::exp(intercept);
            double tail = 0.0;
            for (std::size_t k = truncation; k < provider.size(); ++k) {
                const double level =
                    eigenvalue_at_level(provider, k, provider.z0());
                if (level <= 0.0) continue;
                // Solution gain for a unit source at level Lambda is ~1/Lambda.
                tail += out.report.mode_norm_coefficient *
                        std::pow(level, slope - 1.0);
            }
            out.report.tail_estimate = tail;
        }
        // Band-limited check: the top Lambda-quartile of considered modes
        // carries no content.
        double top_mass = 0.0;
        if (!xs.empty()) {
            std::vector<double> sorted = xs;
            std::sort(sorted.begin(), sorted.end());
            const double cutoff = sorted[(sorted.size() * 3) / 4];
            for (std::size_t i = 0; i < xs.size(); ++i) {
                if (xs[i] >= cutoff) top_mass = std::max(top_mass, fs[i]);
            }
        }
        // Content in the highest shell means the truncation genuinely cut.
        out.report.band_limited =
            active_idx.empty() || top_mass <= 1e-12 * std::max(v_scale, 1e-300);
        if (!active_idx.empty() && out.report.tail_estimate == 0.0) {
            // All measured shells decayed to nothing before the cut.
            out.report.band_limited = true;
        }
    }

    // Assemble u on the tensor grid in fixed mode order.
    out.u.grid = v.grid;
    out.u.y_sizes = v.y_sizes;
    const std::size_t slice = v.slice_size();
    out.u.values.assign(v.grid->size() * slice, 0.0);
    for (std::size_t i = 0; i < v.grid->size(); ++i) {
        for (std::size_t flat = 0; flat < slice; ++flat) {
            out.u.at(i, flat) = out.u0[i];
        }
    }
    for (std::size_t s = 0; s < out.mode_indices.size(); ++s) {
        const std::size_t k = out.mode_indices[s];
        std::vector<double> psi_values(slice);
        for (std::size_t flat = 0; flat < slice; ++flat) {
            psi_values[flat] = provider.psi(k, y_point(v.y_sizes, flat));
        }
        const auto& uk = out.mode_solutions[s];
        for (std::size_t i = 0; i < v.grid->size(); ++i) {
            for (std::size_t flat = 0; flat < slice; ++flat) {
                out.u.at(i, flat) += uk[i] * psi_values[flat];
            }
        }
    }

    // Fitted growth orders of sup_y |u| and of the centered part u - u0.
    std::vector<double> sup_u(v.grid->size(), 0.0);
    std::vector<double> sup_centered(v.grid->size(), 0.0);
    for (std::size_t i = 0; i < v.grid->size(); ++i) {
        for (std::size_t flat = 0; flat < slice; ++flat) {
            const double value = out.u.at(i, flat);
            sup_u[i] = std::max(sup_u[i], std::abs(value));
            sup_centered[i] =
                std::max(sup_centered[i], std::abs(value - out.u0[i]));
        }
    }
    out.report.u_order = fit_power_law_protocol(v.grid->z(), sup_u);
    out.report.centered_order = fit_power_law_protocol(v.grid->z(), sup_centered);
    return out;
}

ResidualReport laplace_residual(const TensorField& u, const TensorField& v,
                                const SpectrumProvider& provider,
                                std::size_t truncation) {
    if (!u.grid || !v.grid || u.grid != v.grid || u.y_sizes != v.y_sizes) {
        throw std::invalid_argument("laplace_residual: fields on different grids");
    }
    truncation = std::min(truncation, provider.size());
    auto supported = provider.supported_on(u.y_sizes);
    std::vector<std::size_t> considered;
    for (std::size_t k : supported) {
        if (k < truncation) considered.push_back(k);
    }
    const ModelParams params{provider.n(), 1.0, 1.0};

    ResidualReport out;
    out.slice_norms.assign(u.grid->size(), 0.0);
    std::vector<std::vector<double>> residual_sq(considered.size());
    parallel_for_index(considered.size(), [&](std::size_t idx) {
        const std::size_t k = considered[idx];
        auto u_k = project(provider, u, k);
        auto v_k = project(provider, v, k);
        const auto& m = provider.mode(k);
        auto lap = laplacian_separated(params, u_k, Mode{m.lambda, std::abs(m.j)});
        std::vector<double> sq(u.grid->size());
        for (std::size_t i = 0; i < u.grid->size(); ++i) {
            const double r = lap[i] - v_k[i];
            sq[i] = r * r;
        }
        residual_sq[idx] = std::move(sq);
    });
    for (std::size_t i = 0; i < u.grid->size(); ++i) {
        double acc = 0.0;
        for (std::size_t idx = 0; idx < considered.size(); ++idx) {
            acc += residual_sq[idx][i];
        }
        out.slice_norms[i] = std::sqrt(acc);
        out.max_norm = std::max(out.max_norm, out.slice_norms[i]);
    }
    return out;
}

PowerLawFit weyl_growth_fit(int n, int max_torus_freq, int max_fiber_freq,
                            double z0, std::size_t k_lo, std::size_t k_hi) {
    if (n < 2 || !(z0 > 0.0)) throw std::domain_error("weyl_growth_fit: bad input");
    const std::size_t dims = static_cast<std::size_t>(2 * (n - 1));
    std::vector<double> levels;
    std::vector<int> kappa(dims, -max_torus_freq);
    const double fiber_factor = n * std::pow(z0, n - 1.0);
    while (true) {
        double lambda = 0.0;
        for (int c : kappa) lambda += static_cast<double>(c) * c;
        for (int j = -max_fiber_freq; j <= max_fiber_freq; ++j) {
            levels.push_back(lambda / z0 +
                             fiber_factor * static_cast<double>(j) * j);
        }
        std::size_t d = 0;
        while (d < dims && kappa[d] == max_torus_freq) {
            kappa[d] = -max_torus_freq;
            ++d;
        }
        if (d == dims) break;
        ++kappa[d];
    }
    std::sort(levels.begin(), levels.end());
    if (k_hi >= levels.size() || k_lo >= k_hi) {
        throw std::domain_error("weyl_growth_fit: index window out of range");
    }
    std::vector<double> ks, ls;
    for (std::size_t k = k_lo; k <= k_hi; ++k) {
        ks.push_back(static_cast<double>(k));
        ls.push_back(levels[k]);
    }
    return fit_power_law(ks, ls, static_cast<double>(k_lo),
                         static_cast<double>(k_hi));
}

}  // namespace calabi
