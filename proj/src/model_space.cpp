#include "calabi/model_space.h"

#include <cmath>
#include <stdexcept>

namespace calabi {

void ModelParams::validate() const {
    if (n < 2) throw std::invalid_argument("ModelParams: need n >= 2");
    if (!(base_volume > 0.0)) {
        throw std::invalid_argument("ModelParams: base_volume must be > 0");
    }
    if (!(fiber_normalization > 0.0)) {
        throw std::invalid_argument(
            "ModelParams: fiber_normalization must be > 0");
    }
}

std::pair<double, double> metric_coefficients(const ModelParams& params,
                                              double z) {
    params.validate();
    if (!(z > 0.0)) {
        throw std::invalid_argument("metric_coefficients: need z > 0");
    }
    const double np = static_cast<double>(params.n);
    return {z, 1.0 / (np * std::pow(z, np - 1.0))};
}

RadialFunction laplacian_separated(const ModelParams& params,
                                   const RadialFunction& u, const Mode& mode) {
    params.validate();
    if (mode.lambda < 0.0 || mode.j < 0) {
        throw std::invalid_argument("laplacian_separated: invalid mode");
    }
    const auto& grid = *u.grid();
    const double np = static_cast<double>(params.n);
    const auto upp = u.dzz();
    std::vector<double> out(grid.size());
    for (std::size_t i = 0; i < grid.size(); ++i) {
        const double z = grid.z(i);
        const double jn = static_cast<double>(mode.j) * np;
        const double potential =
            (mode.lambda + jn * jn / (4.0 * np) * std::pow(z, np)) * np *
            std::pow(z, np - 2.0);
        out[i] = (upp[i] - potential * u[i]) / (np * std::pow(z, np - 1.0));
    }
    return RadialFunction(u.grid(), std::move(out));
}

double radial_distance(const ModelParams& params, double z1, double z2) {
    params.validate();
    if (!(z1 > 0.0) || z1 > z2) {
        throw std::invalid_argument("radial_distance: need 0 < z1 <= z2");
    }
    const double np = static_cast<double>(params.n);
    const double e = 0.5 * (np + 1.0);
    return std::sqrt(np) / e * (std::pow(z2, e) - std::pow(z1, e));
}

double volume_of_shell(const ModelParams& params, double z1, double z2) {
    params.validate();
    if (!(z1 > 0.0) || z1 > z2) {
        throw std::invalid_argument("volume_of_shell: need 0 < z1 <= z2");
    }
    const double np = static_cast<double>(params.n);
    return params.base_volume * params.fiber_normalization *
           (std::pow(z2, np) - std::pow(z1, np));
}

}  // namespace calabi
