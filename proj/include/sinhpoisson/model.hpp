#pragma once

// The asymmetric sinh-Poisson mean-field problem
//
//   -Delta v = l1 e^v / int e^v - l2 e^{-g v} / int e^{-g v} - kappa,  int v = 0,
//
// and its energy
//
//   J(v) = 1/2 int |grad v|^2 - l1 log int e^v - (l2/g) log int e^{-g v}.

#include <cmath>
#include <limits>

#include "sinhpoisson/torus.hpp"

namespace sinhp {

/// (lambda1, lambda2, gamma) with kappa = (lambda1 - lambda2)/|Sigma| stored at
/// construction.
struct Parameters {
    double lambda1 = 0.0;
    double lambda2 = 0.0;
    double gamma = 1.0;
    double kappa = 0.0;

    static Parameters make(double lambda1, double lambda2, double gamma, double volume) {
        require(std::isfinite(lambda1) && std::isfinite(lambda2) && lambda1 >= 0.0 && lambda2 >= 0.0,
                "lambda1, lambda2 must be finite and >= 0");
        require(gamma > 0.0 && gamma <= 1.0, "gamma must lie in (0, 1]");
        require(volume > 0.0, "volume must be positive");
        return {lambda1, lambda2, gamma, (lambda1 - lambda2) / volume};
    }
    static Parameters make(double lambda1, double lambda2, double gamma, const TorusGrid& g) {
        return make(lambda1, lambda2, gamma, g.volume());
    }
};

/// Vortex-intensity distribution tau delta_1 + (1 - tau) delta_{-gamma}.
struct TwoAtomMeasure {
    double lambda = 0.0;
    double tau = 0.5;
    double gamma = 1.0;

    static TwoAtomMeasure make(double lambda, double tau, double gamma) {
        require(std::isfinite(lambda) && lambda > 0.0, "lambda must be positive");
        require(tau > 0.0 && tau < 1.0, "tau must lie in (0, 1); single-species measures are degenerate");
        require(gamma > 0.0 && gamma <= 1.0, "gamma must lie in (0, 1]");
        return {lambda, tau, gamma};
    }
};

/// lambda1 = lambda tau, lambda2 = lambda gamma (1 - tau).
inline Parameters atoms_to_pair(const TwoAtomMeasure& m, double volume) {
    return Parameters::make(m.lambda * m.tau, m.lambda * m.gamma * (1.0 - m.tau), m.gamma, volume);
}

/// Moser-Trudinger threshold of the two-atom functional:
/// 8 pi min{1/tau, 1/(gamma^2 (1 - tau))}.
inline double mt_threshold(const TwoAtomMeasure& m) {
    require(m.tau > 0.0 && m.tau < 1.0, "mt_threshold: tau must lie in (0, 1)");
    return eight_pi * std::min(1.0 / m.tau, 1.0 / (m.gamma * m.gamma * (1.0 - m.tau)));
}

// ---------------------------------------------------------------------------

/// Normalized exponential e^{a v} / int e^{a v} together with log int e^{a v},
/// both computed with the maximum of a v factored out.
struct ExpDensity {
    Field weight;  // integrates to 1
    double log_integral = 0.0;
};

inline ExpDensity exp_density(const Field& v, double a) {
    require_finite(v);
    double top = -std::numeric_limits<double>::infinity();
    for (double x : v.values()) top = std::max(top, a * x);
    Field w(v.grid_ptr());
    double s = 0.0;
    auto vv = v.values();
    auto wv = w.values();
    for (std::size_t k = 0; k < vv.size(); ++k) {
        wv[k] = std::exp(a * vv[k] - top);
        s += wv[k];
    }
    const double integral = s * v.grid().cell_area();
    w *= 1.0 / integral;
    return {std::move(w), top + std::log(integral)};
}

inline double log_int_exp(const Field& v, double a) {
    require_finite(v);
    double top = -std::numeric_limits<double>::infinity();
    for (double x : v.values()) top = std::max(top, a * x);
    long double s = 0.0L;
    for (double x : v.values()) s += std::exp(a * x - top);
    return top + static_cast<double>(std::log(s * v.grid().cell_area()));
}

inline double functional_J(const Field& v, const Parameters& p) {
    const double dirichlet = dirichlet_energy(v);
    return 0.5 * dirichlet - p.lambda1 * log_int_exp(v, 1.0) - (p.lambda2 / p.gamma) * log_int_exp(v, -p.gamma);
}

/// L2 representative of J'(v): -Delta v - l1 w1 + l2 w2 + kappa, projected
/// mean-zero.  Vanishes exactly at solutions.
inline Field gradient_J(const Field& v, const Parameters& p) {
    const ExpDensity d1 = exp_density(v, 1.0);
    const ExpDensity d2 = exp_density(v, -p.gamma);
    Field r = laplacian(v);
    r *= -1.0;
    auto rv = r.values();
    auto w1 = d1.weight.values();
    auto w2 = d2.weight.values();
    for (std::size_t k = 0; k < rv.size(); ++k) rv[k] += -p.lambda1 * w1[k] + p.lambda2 * w2[k] + p.kappa;
    project_mean_zero(r);
    return r;
}

/// Second variation of J linearized at a fixed v.  Caches the two normalized
/// densities so repeated applications (Krylov solves) only pay for one
/// transform pair each.
class HessianOperator {
  public:
    HessianOperator(const Field& v, const Parameters& p)
        : p_(p), w1_(exp_density(v, 1.0).weight), w2_(exp_density(v, -p.gamma).weight) {}

    Field apply(const Field& phi) const {
        Field out = laplacian(phi);
        out *= -1.0;
        const double m1 = inner(w1_, phi);
        const double m2 = inner(w2_, phi);
        const double c1 = p_.lambda1;
        const double c2 = p_.lambda2 * p_.gamma;
        auto o = out.values();
        auto f = phi.values();
        auto a = w1_.values();
        auto b = w2_.values();
        for (std::size_t k = 0; k < o.size(); ++k)
            o[k] -= c1 * a[k] * (f[k] - m1) + c2 * b[k] * (f[k] - m2);
        project_mean_zero(out);
        return out;
    }

    Field operator()(const Field& phi) const { return apply(phi); }

  private:
    Parameters p_;
    Field w1_, w2_;
};

/// Mean-zero representative of J''(v)[phi].
inline Field hessian_apply(const Field& v, const Field& phi, const Parameters& p) {
    return HessianOperator(v, p).apply(phi);
}

/// Source of the PDE without the Laplacian: l1 w1 - l2 w2 - kappa.
inline Field pde_source(const Field& v, const Parameters& p) {
    const ExpDensity d1 = exp_density(v, 1.0);
    const ExpDensity d2 = exp_density(v, -p.gamma);
    Field s(v.grid_ptr());
    auto sv = s.values();
    auto w1 = d1.weight.values();
    auto w2 = d2.weight.values();
    for (std::size_t k = 0; k < sv.size(); ++k) sv[k] = p.lambda1 * w1[k] - p.lambda2 * w2[k] - p.kappa;
    return s;
}

}  // namespace sinhp
