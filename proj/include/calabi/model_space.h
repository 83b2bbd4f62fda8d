#pragma once
// The model geometry in separated coordinates: radial profile t = z^n, the
// two metric coefficients of the ansatz, the separated Laplacian, radial
// geodesic distance, and shell volumes.

#include "calabi/grid.h"

namespace calabi {

struct ModelParams {
    int n = 3;
    double base_volume = 1.0;         // cross-section volume factor
    double fiber_normalization = 1.0; // length assigned to the circle fiber

    void validate() const;
};

// Per-mode data for the separated Laplacian: cross-section eigenvalue lambda
// and integer fiber frequency j.
struct Mode {
    double lambda = 0.0;
    int j = 0;
};

// Metric coefficients of the model: (horizontal, fiber) = (z, 1/(n z^{n-1})).
std::pair<double, double> metric_coefficients(const ModelParams& params,
                                              double z);

// Radial coefficient of Delta(u(z) psi(y)) for the given mode:
//   (1/(n z^{n-1})) * ( u'' - (lambda + j^2 n/4 * z^n) * n z^{n-2} * u ).
// Second derivatives use u's attached analytic derivative when present,
// 4th-order finite differences otherwise.
RadialFunction laplacian_separated(const ModelParams& params,
                                   const RadialFunction& u, const Mode& mode);

// Geodesic length of the radial segment [z1, z2]:
//   Int sqrt(n) s^{(n-1)/2} ds = (2 sqrt n/(n+1)) (z2^{(n+1)/2} - z1^{(n+1)/2}).
double radial_distance(const ModelParams& params, double z1, double z2);

// Volume of the shell {z1 <= z <= z2}:
//   base_volume * fiber_normalization * (z2^n - z1^n).
double volume_of_shell(const ModelParams& params, double z1, double z2);

}  // namespace calabi
