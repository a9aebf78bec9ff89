#pragma once

// Liouville-bubble test functions
//
//   u_eps(p) = log eps^2 / (eps^2 + d(p, p0)^2)^2   inside B_{r0}(p0),
//   constant continuation outside,
//
// and the least-squares check of their energy asymptotics in log(1/eps^2).

#include <array>
#include <cmath>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "sinhpoisson/model.hpp"
#include "sinhpoisson/torus.hpp"

namespace sinhp {

struct BubbleSpec {
    double eps = 0.1;
    Point p0{0.5, 0.5};
    double r0 = 0.25;

    static BubbleSpec make(double eps, Point p0, double r0, const TorusGrid& g) {
        require(eps > 0.0 && eps < r0, "bubble needs 0 < eps < r0");
        require(r0 < 0.5 * std::min(g.lx(), g.ly()), "bubble cap radius must stay below the injectivity radius");
        require(p0.x >= 0.0 && p0.x < g.lx() && p0.y >= 0.0 && p0.y < g.ly(), "bubble center outside the torus");
        return {eps, p0, r0};
    }
};

inline double bubble_profile(double eps, double d) {
    const double e2 = eps * eps;
    return std::log(e2) - 2.0 * std::log(e2 + d * d);
}

/// u_eps on the grid (not mean-zero).
inline Field bubble_u(const BubbleSpec& s, const GridPtr& grid) {
    const auto dist = distance_to_point(*grid, s.p0);
    Field u(grid);
    const double cap = bubble_profile(s.eps, s.r0);
    for (std::size_t k = 0; k < dist.size(); ++k) u[k] = dist[k] < s.r0 ? bubble_profile(s.eps, dist[k]) : cap;
    return u;
}

/// v_eps = u_eps - mean(u_eps).
inline Field bubble_v(const BubbleSpec& s, const GridPtr& grid) { return mean_zero(bubble_u(s, grid)); }

// ---------------------------------------------------------------------------

struct LineFit {
    double slope = 0.0;
    double intercept = 0.0;
};

/// Ordinary least squares y ~ slope * x + intercept.
inline LineFit fit_line(std::span<const double> x, std::span<const double> y) {
    require(x.size() == y.size() && x.size() >= 2, "fit_line needs >= 2 matching samples");
    const double n = static_cast<double>(x.size());
    double sx = 0, sy = 0;
    for (std::size_t i = 0; i < x.size(); ++i) {
        sx += x[i];
        sy += y[i];
    }
    const double mx = sx / n, my = sy / n;
    double sxx = 0, sxy = 0;
    for (std::size_t i = 0; i < x.size(); ++i) {
        sxx += (x[i] - mx) * (x[i] - mx);
        sxy += (x[i] - mx) * (y[i] - my);
    }
    require(sxx > 0.0, "fit_line: degenerate abscissae");
    const double slope = sxy / sxx;
    return {slope, my - slope * mx};
}

/// Dense least squares min |A c - y| by Householder QR.  A is rows x cols,
/// column-major, rows >= cols, full column rank.
inline std::vector<double> least_squares(std::vector<double> a, std::vector<double> y, std::size_t rows,
                                         std::size_t cols) {
    require(rows >= cols && a.size() == rows * cols && y.size() == rows, "least_squares: bad shape");
    auto A = [&](std::size_t i, std::size_t j) -> double& { return a[j * rows + i]; };
    for (std::size_t k = 0; k < cols; ++k) {
        double norm = 0.0;
        for (std::size_t i = k; i < rows; ++i) norm += A(i, k) * A(i, k);
        norm = std::sqrt(norm);
        require(norm > 0.0, "least_squares: rank deficient");
        const double alpha = A(k, k) > 0 ? -norm : norm;
        std::vector<double> h(rows - k);
        for (std::size_t i = k; i < rows; ++i) h[i - k] = A(i, k);
        h[0] -= alpha;
        double hh = 0.0;
        for (double t : h) hh += t * t;
        if (hh == 0.0) continue;
        auto reflect = [&](auto&& col) {
            double d = 0.0;
            for (std::size_t i = k; i < rows; ++i) d += h[i - k] * col(i);
            d *= 2.0 / hh;
            for (std::size_t i = k; i < rows; ++i) col(i) -= d * h[i - k];
        };
        for (std::size_t j = k; j < cols; ++j) reflect([&](std::size_t i) -> double& { return A(i, j); });
        reflect([&](std::size_t i) -> double& { return y[i]; });
    }
    std::vector<double> c(cols);
    for (std::size_t k = cols; k-- > 0;) {
        double s = y[k];
        for (std::size_t j = k + 1; j < cols; ++j) s -= A(k, j) * c[j];
        require(A(k, k) != 0.0, "least_squares: rank deficient");
        c[k] = s / A(k, k);
    }
    return c;
}

/// Slope of y against L = log(1/eps^2).  The bounded remainder of the bubble
/// expansions is not constant at finite eps: the exact ball integrals of the
/// profile carry eps^2 and eps^2 log(1/eps^2) terms.  The corrected fit
/// regresses on {1, L, eps^2, eps^2 L}; the plain OLS line is kept alongside.
struct SlopeFit {
    double slope = 0.0;
    double intercept = 0.0;
    double ols_slope = 0.0;
    double ols_intercept = 0.0;
};

inline SlopeFit fit_expansion(std::span<const double> log_inv_eps2, std::span<const double> y) {
    const std::size_t n = y.size();
    require(log_inv_eps2.size() == n && n >= 4, "fit_expansion needs >= 4 samples");
    std::vector<double> a(4 * n);
    for (std::size_t i = 0; i < n; ++i) {
        const double L = log_inv_eps2[i];
        const double e2 = std::exp(-L);
        a[i] = 1.0;
        a[n + i] = L;
        a[2 * n + i] = e2;
        a[3 * n + i] = e2 * L;
    }
    const auto c = least_squares(std::move(a), std::vector<double>(y.begin(), y.end()), n, 4);
    const LineFit ols = fit_line(log_inv_eps2, y);
    return {c[1], c[0], ols.slope, ols.intercept};
}

struct ExpansionSample {
    double eps = 0.0;
    double log_inv_eps2 = 0.0;   // log(1/eps^2), the regression abscissa
    double mean_u = 0.0;         // (1/|Sigma|) int u_eps
    double dirichlet = 0.0;      // int |grad v_eps|^2
    double log_int_exp = 0.0;    // log int e^{v_eps}
    double log_int_exp_neg_gamma = 0.0;  // log int e^{-gamma v_eps}
    double log_int_exp_neg_one = 0.0;    // log int e^{-v_eps}
    double J_v = 0.0;            // J(v_eps)
    double J_negv_over_gamma = 0.0;      // J(-v_eps/gamma)
};

/// Which fitted quantity; used to index slopes and expected values.
enum class Expansion { mean_u, dirichlet, log_int_exp, log_int_exp_neg_gamma, log_int_exp_neg_one, J_v, J_negv };

inline constexpr std::array<Expansion, 7> all_expansions{
    Expansion::mean_u,    Expansion::dirichlet,           Expansion::log_int_exp, Expansion::log_int_exp_neg_gamma,
    Expansion::log_int_exp_neg_one, Expansion::J_v, Expansion::J_negv};

inline const char* expansion_name(Expansion e) {
    switch (e) {
        case Expansion::mean_u: return "mean_u";
        case Expansion::dirichlet: return "dirichlet";
        case Expansion::log_int_exp: return "logIntExp";
        case Expansion::log_int_exp_neg_gamma: return "logIntExpNegGamma";
        case Expansion::log_int_exp_neg_one: return "logIntExpNegOne";
        case Expansion::J_v: return "J_v";
        case Expansion::J_negv: return "J_negv_over_gamma";
    }
    return "?";
}

inline double sample_value(const ExpansionSample& s, Expansion e) {
    switch (e) {
        case Expansion::mean_u: return s.mean_u;
        case Expansion::dirichlet: return s.dirichlet;
        case Expansion::log_int_exp: return s.log_int_exp;
        case Expansion::log_int_exp_neg_gamma: return s.log_int_exp_neg_gamma;
        case Expansion::log_int_exp_neg_one: return s.log_int_exp_neg_one;
        case Expansion::J_v: return s.J_v;
        case Expansion::J_negv: return s.J_negv_over_gamma;
    }
    return 0.0;
}

/// Leading coefficient in log(1/eps^2) predicted by the asymptotic expansions.
inline double expected_slope(Expansion e, const Parameters& p) {
    switch (e) {
        case Expansion::mean_u: return -1.0;  // mean u = log eps^2 + O(1)
        case Expansion::dirichlet: return 16.0 * pi;
        case Expansion::log_int_exp: return 1.0;
        case Expansion::log_int_exp_neg_gamma: return 0.0;
        case Expansion::log_int_exp_neg_one: return 0.0;
        case Expansion::J_v: return eight_pi - p.lambda1;
        case Expansion::J_negv: return (eight_pi / p.gamma - p.lambda2) / p.gamma;
    }
    return 0.0;
}

struct ExpansionReport {
    std::vector<ExpansionSample> samples;
    std::array<SlopeFit, all_expansions.size()> fits{};
    bool under_resolved = false;  // slope moved > 5% when the eps window was halved
    std::string resolution_note;

    const SlopeFit& fit(Expansion e) const { return fits[static_cast<std::size_t>(e)]; }
};

inline ExpansionSample expansion_sample(const BubbleSpec& spec, const GridPtr& grid, const Parameters& p) {
    const Field u = bubble_u(spec, grid);
    const Field v = mean_zero(u);
    ExpansionSample s;
    s.eps = spec.eps;
    s.log_inv_eps2 = -2.0 * std::log(spec.eps);
    s.mean_u = mean(u);
    s.dirichlet = dirichlet_energy(v);
    s.log_int_exp = log_int_exp(v, 1.0);
    s.log_int_exp_neg_gamma = log_int_exp(v, -p.gamma);
    s.log_int_exp_neg_one = log_int_exp(v, -1.0);
    s.J_v = functional_J(v, p);
    s.J_negv_over_gamma = functional_J((-1.0 / p.gamma) * v, p);
    return s;
}

/// Samples the bubble family at each eps and fits every expansion against
/// log(1/eps^2).  eps must decrease geometrically with at least 5 members.
inline ExpansionReport verify_expansions(std::span<const double> eps, Point p0, double r0, const GridPtr& grid,
                                         const Parameters& p) {
    require(eps.size() >= 5, "verify_expansions needs at least 5 eps values");
    const double ratio = eps[1] / eps[0];
    for (std::size_t i = 1; i < eps.size(); ++i)
        require(eps[i] < eps[i - 1] && std::abs(eps[i] / eps[i - 1] - ratio) <= 1e-9 * ratio,
                "eps values must form a decreasing geometric sequence");

    ExpansionReport rep;
    for (double e : eps) rep.samples.push_back(expansion_sample(BubbleSpec::make(e, p0, r0, *grid), grid, p));

    auto fit_range = [&](Expansion which, std::size_t first, std::size_t last) {
        std::vector<double> x, y;
        for (std::size_t i = first; i < last; ++i) {
            x.push_back(rep.samples[i].log_inv_eps2);
            y.push_back(sample_value(rep.samples[i], which));
        }
        return fit_expansion(x, y);
    };

    const std::size_t n = rep.samples.size();
    for (Expansion e : all_expansions) {
        rep.fits[static_cast<std::size_t>(e)] = fit_range(e, 0, n);
        const double coarse = fit_range(e, 0, n - 1).slope;
        const double fine = fit_range(e, 1, n).slope;
        const double scale = std::max(std::abs(rep.fit(e).slope), 1.0);
        if (std::abs(fine - coarse) > 0.05 * scale) {
            rep.under_resolved = true;
            rep.resolution_note += std::string(expansion_name(e)) + " ";
        }
    }
    const double h = std::min(grid->dx(), grid->dy());
    if (eps.back() < 4.0 * h) rep.resolution_note += "(smallest eps below 4 grid spacings) ";
    return rep;
}

// ---------------------------------------------------------------------------

struct DownhillOptions {
    std::optional<Point> p0;   // default: torus center
    std::optional<double> r0;  // default: 0.9 x injectivity radius
    double eps_start = 0.125;
    double shrink = 0.7071067811865476;  // 1/sqrt(2)
};

struct DownhillEndpoint {
    Field field;
    double eps = 0.0;
    int branch = 1;  // 1: v_eps, 2: -v_eps/gamma
    double J = 0.0;
    double norm = 0.0;  // Dirichlet norm
};

/// A field v1 with J(v1) < 0 and Dirichlet norm >= 1, built from the largest
/// bubble in the shrinking eps sequence that qualifies.
inline DownhillEndpoint downhill_endpoint(const Parameters& p, const GridPtr& grid, const DownhillOptions& opt = {}) {
    const bool branch1 = p.lambda1 > eight_pi;
    const bool branch2 = p.lambda2 > eight_pi / p.gamma;
    if (!branch1 && !branch2)
        throw PreconditionError("downhill_endpoint: need lambda1 > 8 pi or gamma lambda2 > 8 pi");
    const double floor = std::min(grid->dx(), grid->dy());
    const Point p0 = opt.p0.value_or(Point{0.5 * grid->lx(), 0.5 * grid->ly()});
    const double r0 = opt.r0.value_or(0.45 * std::min(grid->lx(), grid->ly()));
    for (double eps = std::min(opt.eps_start, 0.5 * r0); eps >= floor; eps *= opt.shrink) {
        Field v = bubble_v(BubbleSpec::make(eps, p0, r0, *grid), grid);
        if (!branch1) v *= -1.0 / p.gamma;
        const double J = functional_J(v, p);
        const double norm = dirichlet_norm(v);
        if (J < 0.0 && norm >= 1.0) return {std::move(v), eps, branch1 ? 1 : 2, J, norm};
    }
    throw SolverError("downhill_endpoint: grid too coarse to reach J < 0 along the bubble family");
}

}  // namespace sinhp
