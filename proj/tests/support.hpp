#pragma once

// Shared fixtures for the unit tests.

#include <cmath>
#include <random>

#include "sinhpoisson/torus.hpp"

namespace sinhp::testing {

/// Smooth random mean-zero field: a few low Fourier modes with normal
/// coefficients, scaled to the given sup norm.
inline Field random_field(const GridPtr& g, std::mt19937_64& rng, double amplitude = 1.0, int kmax = 3) {
    std::normal_distribution<double> n(0.0, 1.0);
    Field f(g);
    for (int kx = 0; kx <= kmax; ++kx)
        for (int ky = -kmax; ky <= kmax; ++ky) {
            if (kx == 0 && ky <= 0) continue;
            const double a = n(rng), b = n(rng);
            const double damp = 1.0 / (1.0 + kx * kx + ky * ky);
            f += Field::from_function(g, [&](double x, double y) {
                const double t = 2.0 * pi * (kx * x / g->lx() + ky * y / g->ly());
                return damp * (a * std::cos(t) + b * std::sin(t));
            });
        }
    project_mean_zero(f);
    f *= amplitude / max_abs(f);
    return f;
}

inline double rel_diff(double a, double b) { return std::abs(a - b) / std::max(std::abs(b), 1e-300); }

}  // namespace sinhp::testing
