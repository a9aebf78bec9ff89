#pragma once

// Finite-field diagnostics for concentration: the two vortex densities, their
// peaks, ball masses around the peaks, and the blow-up mass relations
//
//   8 pi (m1 + m2/gamma) = (m1 - m2)^2,   m1 >= 8 pi,   m2 >= 8 pi/gamma,
//   m1 + gamma m2 >= 16 pi (1 + gamma).
//
// Masses are only defined in the blow-up limit; here they are ball integrals
// at a reported radius.

#include <algorithm>
#include <cmath>
#include <utility>
#include <vector>

#include "sinhpoisson/model.hpp"
#include "sinhpoisson/region.hpp"
#include "sinhpoisson/torus.hpp"

namespace sinhp {

struct Densities {
    Field positive;  // lambda1 e^v / int e^v
    Field negative;  // lambda2 e^{-gamma v} / int e^{-gamma v}
};

inline Densities densities(const Field& v, const Parameters& p) {
    Field d1 = exp_density(v, 1.0).weight;
    Field d2 = exp_density(v, -p.gamma).weight;
    d1 *= p.lambda1;
    d2 *= p.lambda2;
    return {std::move(d1), std::move(d2)};
}

struct Peak {
    std::size_t node = 0;
    Point point;
    int species = 1;        // which density peaks here
    double strength = 0.0;  // density / mean density
};

namespace detail {
inline bool strict_local_max(const Field& f, int i, int j) {
    const TorusGrid& g = f.grid();
    const double c = f.at(i, j);
    for (int dj = -1; dj <= 1; ++dj)
        for (int di = -1; di <= 1; ++di) {
            if (!di && !dj) continue;
            const int ii = (i + di + g.nx()) % g.nx();
            const int jj = (j + dj + g.ny()) % g.ny();
            if (f.at(ii, jj) >= c) return false;
        }
    return true;
}
}  // namespace detail

/// Strict local maxima of either density above threshold_factor times its
/// mean, merged greedily in descending order of strength when closer than
/// merge_radius.
inline std::vector<Peak> detect_candidates(const Densities& d, double lambda1, double lambda2,
                                           double threshold_factor, double merge_radius) {
    const TorusGrid& g = d.positive.grid();
    std::vector<Peak> raw;
    auto scan = [&](const Field& f, double lambda, int species) {
        const double mean_density = lambda / g.volume();
        if (mean_density <= 0.0) return;
        for (int j = 0; j < g.ny(); ++j)
            for (int i = 0; i < g.nx(); ++i) {
                const double s = f.at(i, j) / mean_density;
                if (s > threshold_factor && detail::strict_local_max(f, i, j))
                    raw.push_back({g.index(i, j), Point{g.x(i), g.y(j)}, species, s});
            }
    };
    scan(d.positive, lambda1, 1);
    scan(d.negative, lambda2, 2);
    std::stable_sort(raw.begin(), raw.end(), [](const Peak& a, const Peak& b) { return a.strength > b.strength; });

    std::vector<Peak> kept;
    for (const Peak& p : raw) {
        const bool near = std::any_of(kept.begin(), kept.end(), [&](const Peak& q) {
            return torus_distance(g, p.point, q.point) < merge_radius;
        });
        if (!near) kept.push_back(p);
    }
    return kept;
}

inline double ball_integral(const Field& density, Point center, double radius) {
    const TorusGrid& g = density.grid();
    require(radius > 0.0 && radius < 0.5 * std::min(g.lx(), g.ly()),
            "ball radius must be positive and below the injectivity radius");
    double s = 0.0;
    for (int j = 0; j < g.ny(); ++j)
        for (int i = 0; i < g.nx(); ++i)
            if (torus_distance(g, {g.x(i), g.y(j)}, center) < radius) s += density.at(i, j);
    return s * g.cell_area();
}

inline std::pair<double, double> local_masses(const Densities& d, Point center, double radius) {
    return {ball_integral(d.positive, center, radius), ball_integral(d.negative, center, radius)};
}

inline std::pair<double, double> local_masses(const Field& v, const Parameters& p, Point center, double radius) {
    return local_masses(densities(v, p), center, radius);
}

struct IdentityCheck {
    double residual = 0.0;           // 8 pi (m1 + m2/gamma) - (m1 - m2)^2
    bool positive_bound = false;     // m1 >= 8 pi - tol
    bool negative_bound = false;     // m2 >= 8 pi/gamma - tol
    bool sum_bound = false;          // m1 + gamma m2 >= 16 pi (1 + gamma) - tol
};

inline IdentityCheck identity_check(double m1, double m2, double gamma, double tol = 0.0) {
    require(m1 >= 0.0 && m2 >= 0.0, "identity_check: masses must be non-negative");
    require(gamma > 0.0 && gamma <= 1.0, "gamma must lie in (0, 1]");
    IdentityCheck c;
    c.residual = eight_pi * (m1 + m2 / gamma) - (m1 - m2) * (m1 - m2);
    c.positive_bound = m1 >= eight_pi - tol;
    c.negative_bound = m2 >= eight_pi / gamma - tol;
    c.sum_bound = m1 + gamma * m2 >= alpha_gamma(gamma) - tol;
    return c;
}

struct Candidate {
    Peak peak;
    double m1 = 0.0;
    double m2 = 0.0;
    double radius = 0.0;
    IdentityCheck identity;
};

struct AnalysisOptions {
    double radius = 0.2;
    double threshold_factor = 10.0;
    double bound_tol = 0.0;
};

struct MassReport {
    Densities densities;
    std::vector<Candidate> candidates;
    double total1 = 0.0;  // full integral of the positive density
    double total2 = 0.0;
    AnalysisOptions options;
};

inline MassReport analyze(const Field& v, const Parameters& p, const AnalysisOptions& opt = {}) {
    MassReport rep{densities(v, p), {}, 0.0, 0.0, opt};
    rep.total1 = quadrature(rep.densities.positive);
    rep.total2 = quadrature(rep.densities.negative);
    for (const Peak& pk : detect_candidates(rep.densities, p.lambda1, p.lambda2, opt.threshold_factor, opt.radius)) {
        const auto [m1, m2] = local_masses(rep.densities, pk.point, opt.radius);
        rep.candidates.push_back({pk, m1, m2, opt.radius, identity_check(m1, m2, p.gamma, opt.bound_tol)});
    }
    return rep;
}

}  // namespace sinhp
