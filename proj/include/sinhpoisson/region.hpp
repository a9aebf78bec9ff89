#pragma once

// Admissible parameter region for the mountain-pass existence result and the
// algebra of the blow-up mass parabola (x - y)^2 = 8 pi (x + y/gamma).

#include <array>
#include <cmath>
#include <utility>

#include "sinhpoisson/torus.hpp"

namespace sinhp {

/// gamma together with the product mu1(Sigma) |Sigma|; construction enforces
/// 8 pi < mu1 |Sigma| < 16 pi (1 + gamma).
struct RegionSpec {
    double gamma = 1.0;
    double mu1_vol = 4.0 * pi * pi;

    static RegionSpec make(double gamma, double mu1_vol) {
        require(gamma > 0.0 && gamma <= 1.0, "gamma must lie in (0, 1]");
        require(mu1_vol > eight_pi && mu1_vol < 16.0 * pi * (1.0 + gamma),
                "mu1*|Sigma| outside (8 pi, 16 pi (1 + gamma))");
        return {gamma, mu1_vol};
    }
    static RegionSpec make(double gamma, const TorusGrid& g) { return make(gamma, mu1(g) * g.volume()); }
};

inline constexpr double resonance_tol = 1e-9;

/// True when x lies within resonance_tol of step * k for some k >= 1.
inline bool on_resonance(double x, double step) {
    const double k = std::round(x / step);
    return k >= 1.0 && std::abs(x - k * step) <= resonance_tol;
}

/// Clause-by-clause evaluation of membership.
struct RegionClauses {
    bool nonnegative = false;     // l1, l2 >= 0
    bool supercritical = false;   // max{l1, gamma l2} > 8 pi
    bool off_resonance_1 = false; // l1 not in 8 pi N
    bool off_resonance_2 = false; // l2 not in (8 pi / gamma) N
    bool below_mu1 = false;       // l1 + gamma l2 < mu1 |Sigma|
    bool inside() const {
        return nonnegative && supercritical && off_resonance_1 && off_resonance_2 && below_mu1;
    }
};

inline RegionClauses evaluate_clauses(const RegionSpec& s, double l1, double l2) {
    RegionClauses c;
    c.nonnegative = l1 >= 0.0 && l2 >= 0.0;
    c.supercritical = std::max(l1, s.gamma * l2) > eight_pi;
    c.off_resonance_1 = !on_resonance(l1, eight_pi);
    c.off_resonance_2 = !on_resonance(l2, eight_pi / s.gamma);
    c.below_mu1 = l1 + s.gamma * l2 < s.mu1_vol;
    return c;
}

inline bool contains(const RegionSpec& s, double l1, double l2) { return evaluate_clauses(s, l1, l2).inside(); }

struct Triangle {
    std::array<Point, 3> v;

    double signed_area() const {
        return 0.5 * ((v[1].x - v[0].x) * (v[2].y - v[0].y) - (v[2].x - v[0].x) * (v[1].y - v[0].y));
    }
};

/// T1 (positive-species side) and T2 (negative-species side); the region is
/// their union minus the resonance lines.
inline std::pair<Triangle, Triangle> triangles(const RegionSpec& s) {
    const double m = s.mu1_vol;
    const double g = s.gamma;
    Triangle t1{{Point{eight_pi, 0.0}, Point{m, 0.0}, Point{eight_pi, (m - eight_pi) / g}}};
    Triangle t2{{Point{0.0, eight_pi / g}, Point{0.0, m / g}, Point{m - eight_pi, eight_pi / g}}};
    return {t1, t2};
}

// ---------------------------------------------------------------------------
// Mass parabola

enum class Branch { plus, minus };

inline double branch_sign(Branch b) { return b == Branch::plus ? 1.0 : -1.0; }

/// (x - y)^2 - 8 pi (x + y/gamma)
inline double parabola_residual(double x, double y, double gamma) {
    return (x - y) * (x - y) - eight_pi * (x + y / gamma);
}

/// x(y) = y + 4 pi +- sqrt(8 pi (1 + 1/gamma) y + 16 pi^2)
inline double parabola_x(double y, double gamma, Branch b) {
    require(gamma > 0.0 && gamma <= 1.0, "gamma must lie in (0, 1]");
    const double disc = eight_pi * (1.0 + 1.0 / gamma) * y + 16.0 * pi * pi;
    require(y >= 0.0 && disc >= 0.0, "parabola_x: negative discriminant");
    return y + 4.0 * pi + branch_sign(b) * std::sqrt(disc);
}

/// y(x) = x + 4 pi/gamma +- sqrt(8 pi (1 + 1/gamma) x + 16 pi^2/gamma^2)
inline double parabola_y(double x, double gamma, Branch b) {
    require(gamma > 0.0 && gamma <= 1.0, "gamma must lie in (0, 1]");
    const double disc = eight_pi * (1.0 + 1.0 / gamma) * x + 16.0 * pi * pi / (gamma * gamma);
    require(x >= 0.0 && disc >= 0.0, "parabola_y: negative discriminant");
    return x + 4.0 * pi / gamma + branch_sign(b) * std::sqrt(disc);
}

/// Parabola abscissa at the minimal negative-species mass 8 pi/gamma.
inline double x_bar(double gamma) { return eight_pi * (1.0 + 2.0 / gamma); }

/// Parabola ordinate at the minimal positive-species mass 8 pi.
inline double y_bar(double gamma) { return eight_pi * (2.0 + 1.0 / gamma); }

/// min{x + gamma y : x >= 8 pi, y >= 8 pi/gamma, (x, y) on the parabola}.
inline double alpha_gamma(double gamma) {
    require(gamma > 0.0 && gamma <= 1.0, "gamma must lie in (0, 1]");
    return 16.0 * pi * (1.0 + gamma);
}

}  // namespace sinhp
