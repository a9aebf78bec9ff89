#pragma once

// Nontrivial critical points of J: a mountain-pass path between the strict
// local minimum 0 and a bubble endpoint with J < 0 is deformed until its
// highest node sits near the saddle, then Newton-GMRES polishes the residual.

#include <algorithm>
#include <cmath>
#include <limits>
#include <optional>
#include <string>
#include <vector>

#include "sinhpoisson/bubbles.hpp"
#include "sinhpoisson/krylov.hpp"
#include "sinhpoisson/model.hpp"
#include "sinhpoisson/region.hpp"
#include "sinhpoisson/torus.hpp"

namespace sinhp {

struct MinimaxConfig {
    int path_nodes = 33;
    double path_step = 1e-2;      // initial step; halved on failure, grown on success
    double max_path_step = 0.5;
    double switch_tol = 1e-3;     // H^{-1} norm of the residual at the max node
    double newton_tol = 1e-9;     // absolute L2 norm of gradient_J
    int max_sweeps = 200;
    int max_newton = 60;
    GmresOptions gmres{};
    DownhillOptions downhill{};
    double symmetry_kick = 1e-6;
};

enum class SolveStatus { converged, geometry_failure, newton_stagnation };

inline const char* status_name(SolveStatus s) {
    switch (s) {
        case SolveStatus::converged: return "converged";
        case SolveStatus::geometry_failure: return "geometry-failure";
        case SolveStatus::newton_stagnation: return "newton-stagnation";
    }
    return "?";
}

struct SolveRecord {
    Field field;
    Parameters parameters;
    SolveStatus status = SolveStatus::newton_stagnation;
    double residual_norm = 0.0;  // L2 norm of gradient_J
    double J_value = 0.0;
    int iterations = 0;          // sweeps + Newton steps
    int sweeps = 0;
    int newton_iterations = 0;
    std::vector<double> residual_history{};  // Newton, L2
    double sup_norm = 0.0;
    double dirichlet_norm = 0.0;
    double positive_fraction = 0.0;  // share of nodes with v > 0
    std::string message{};

    bool converged() const { return status == SolveStatus::converged; }
    bool nontrivial() const { return dirichlet_norm >= 1e-3; }
};

inline double residual_tolerance(const MinimaxConfig& cfg) { return cfg.newton_tol; }

namespace detail {

inline void fill_diagnostics(SolveRecord& rec) {
    rec.J_value = functional_J(rec.field, rec.parameters);
    rec.sup_norm = max_abs(rec.field);
    rec.dirichlet_norm = dirichlet_norm(rec.field);
    std::size_t pos = 0;
    for (double v : rec.field.values()) pos += v > 0.0;
    rec.positive_fraction = static_cast<double>(pos) / static_cast<double>(rec.field.size());
}

/// H^{-1} norm of a mean-zero residual, sqrt(<r, (-Delta)^{-1} r>).
inline double dual_norm(const Field& r) { return std::sqrt(std::max(0.0, inner(r, inv_laplacian(r)))); }

}  // namespace detail

// ---------------------------------------------------------------------------
// Newton refinement

/// Newton-GMRES on gradient_J(v) = 0 over mean-zero fields, preconditioned by
/// the inverse Laplacian, with backtracking on the L2 residual.  When the
/// Newton direction fails the line search a steepest-descent step on
/// 1/2 |r|_{H^-1}^2 is tried instead.
inline SolveRecord newton_refine(const Field& v0, const Parameters& p, const MinimaxConfig& cfg = {}) {
    require(is_mean_zero(v0, 1e-9), "newton_refine: initial field must be mean-zero");
    SolveRecord rec{mean_zero(v0), p};
    const double tol = residual_tolerance(cfg);
    const double scale = std::max(p.lambda1 + p.lambda2, 1.0);
    auto precond = [](const Field& f) { return inv_laplacian(mean_zero(f)); };

    Field r = gradient_J(rec.field, p);
    double rn = l2_norm(r);
    rec.residual_history.push_back(rn);

    for (int it = 0; it < cfg.max_newton && rn > tol; ++it) {
        const HessianOperator H(rec.field, p);
        GmresOptions go = cfg.gmres;
        go.rtol = std::clamp(rn / scale, 1e-12, std::min(cfg.gmres.rtol, 1e-2));
        Field delta(rec.field.grid_ptr());
        const Field rhs = -1.0 * r;
        gmres(H, precond, rhs, delta, [](const Field& a, const Field& b) { return inner(a, b); }, go);
        project_mean_zero(delta);

        auto try_direction = [&](const Field& d) -> bool {
            for (double t = 1.0; t >= 1.0 / 256.0; t *= 0.5) {
                Field trial = rec.field;
                trial.axpy(t, d);
                if (!all_finite(trial)) continue;
                Field rt = gradient_J(trial, p);
                const double tn = l2_norm(rt);
                if (std::isfinite(tn) && tn <= (1.0 - 1e-4 * t) * rn) {
                    rec.field = std::move(trial);
                    r = std::move(rt);
                    rn = tn;
                    return true;
                }
            }
            return false;
        };

        bool ok = all_finite(delta) && try_direction(delta);
        if (!ok) {
            const Field g = inv_laplacian(r);
            Field d = precond(H(g));
            d *= -1.0;
            ok = try_direction(d);
        }
        ++rec.newton_iterations;
        rec.residual_history.push_back(rn);
        if (!ok) break;
    }

    rec.residual_norm = rn;
    rec.iterations = rec.sweeps + rec.newton_iterations;
    rec.status = rn <= tol ? SolveStatus::converged : SolveStatus::newton_stagnation;
    if (!rec.converged()) rec.message = "Newton stagnated at residual " + format_double(rn);
    detail::fill_diagnostics(rec);
    return rec;
}

// ---------------------------------------------------------------------------
// Path deformation

struct PathState {
    std::vector<Field> nodes;
    std::vector<double> J;
    int max_index = 0;

    void evaluate(const Parameters& p) {
        J.resize(nodes.size());
        for (std::size_t i = 0; i < nodes.size(); ++i) J[i] = functional_J(nodes[i], p);
        max_index = static_cast<int>(std::max_element(J.begin(), J.end()) - J.begin());
    }
};

/// Straight path t v1, t uniform in [0, 1].
inline PathState initial_path(const Field& v1, int nodes) {
    require(nodes >= 16, "path needs at least 16 nodes");
    PathState s;
    for (int i = 0; i < nodes; ++i) s.nodes.push_back((static_cast<double>(i) / (nodes - 1)) * v1);
    return s;
}

/// Respaces nodes uniformly in H^1 arc length on each side of `pivot`, which
/// stays in place.  Node count is preserved.
inline void reparametrize(PathState& s, int pivot) {
    const int n = static_cast<int>(s.nodes.size());
    std::vector<double> arc(n, 0.0);
    for (int i = 1; i < n; ++i) arc[i] = arc[i - 1] + dirichlet_norm(s.nodes[i] - s.nodes[i - 1]);

    auto point_at = [&](double target) {
        int seg = static_cast<int>(std::upper_bound(arc.begin(), arc.end(), target) - arc.begin()) - 1;
        seg = std::clamp(seg, 0, n - 2);
        const double len = arc[seg + 1] - arc[seg];
        const double t = len > 0.0 ? std::clamp((target - arc[seg]) / len, 0.0, 1.0) : 0.0;
        Field f = s.nodes[seg];
        f *= 1.0 - t;
        f.axpy(t, s.nodes[seg + 1]);
        return f;
    };

    std::vector<Field> out;
    out.reserve(n);
    for (int i = 0; i < n; ++i) {
        if (i == 0 || i == n - 1 || i == pivot) {
            out.push_back(s.nodes[i]);
        } else if (i < pivot) {
            out.push_back(point_at(arc[pivot] * i / pivot));
        } else {
            out.push_back(point_at(arc[pivot] + (arc[n - 1] - arc[pivot]) * (i - pivot) / (n - 1 - pivot)));
        }
    }
    s.nodes = std::move(out);
}

struct DeformationResult {
    PathState path;
    int sweeps = 0;
    double gradient_norm = 0.0;  // H^{-1} residual norm at the max node
    bool switched = false;       // reached switch_tol
    bool collapsed = false;      // max node at an endpoint
};

/// Climbing-node path deformation: the highest node moves along -gradient with
/// its tangential component reversed; its neighbours descend.
inline DeformationResult deform_path(PathState path, const Parameters& p, const MinimaxConfig& cfg) {
    DeformationResult out;
    const int n = static_cast<int>(path.nodes.size());
    double step = cfg.path_step;
    path.evaluate(p);

    for (; out.sweeps < cfg.max_sweeps; ++out.sweeps) {
        const int k = path.max_index;
        if (k == 0 || k == n - 1) {
            out.collapsed = true;
            break;
        }
        const Field gk = inv_laplacian(gradient_J(path.nodes[k], p));
        out.gradient_norm = std::sqrt(std::max(0.0, h1_inner(gk, gk)));
        if (out.gradient_norm < cfg.switch_tol) {
            out.switched = true;
            break;
        }

        Field tangent = path.nodes[k + 1] - path.nodes[k - 1];
        const double tn = dirichlet_norm(tangent);
        if (tn > 0.0) tangent *= 1.0 / tn;
        Field climb = gk;
        climb.axpy(-2.0 * h1_inner(gk, tangent), tangent);

        PathState trial = path;
        trial.nodes[k].axpy(-step, climb);
        for (int nb : {k - 1, k + 1}) {
            if (nb <= 0 || nb >= n - 1) continue;
            trial.nodes[nb].axpy(-step, inv_laplacian(gradient_J(path.nodes[nb], p)));
            project_mean_zero(trial.nodes[nb]);
        }
        project_mean_zero(trial.nodes[k]);

        bool ok = all_finite(trial.nodes[k]);
        if (ok) {
            for (int nb : {k - 1, k + 1})
                if (nb > 0 && nb < n - 1 && functional_J(trial.nodes[nb], p) > path.J[nb]) ok = false;
        }
        if (ok) {
            const double gnew = detail::dual_norm(gradient_J(trial.nodes[k], p));
            ok = std::isfinite(gnew) && gnew <= 1.2 * out.gradient_norm;
        }
        if (!ok) {
            step *= 0.5;
            if (step < 1e-8) break;
            continue;
        }
        step = std::min(step * 1.5, cfg.max_path_step);
        reparametrize(trial, k);
        trial.evaluate(p);
        path = std::move(trial);
    }
    out.path = std::move(path);
    return out;
}

/// Mountain-pass critical point at parameters inside the admissible region.
inline SolveRecord mountain_pass(const Parameters& p, const GridPtr& grid, const MinimaxConfig& cfg = {}) {
    const RegionSpec spec = RegionSpec::make(p.gamma, *grid);
    require(contains(spec, p.lambda1, p.lambda2), "mountain_pass: parameters outside the admissible region");
    require(grid->nx() >= 64 && grid->ny() >= 64, "mountain_pass: grid must be at least 64 x 64");

    const DownhillEndpoint end = downhill_endpoint(p, grid, cfg.downhill);
    PathState path = initial_path(end.field, cfg.path_nodes);
    if (p.gamma == 1.0 && p.lambda1 == p.lambda2) {
        // odd symmetry can pin the deformation; break it once
        const Field kick = mean_zero(Field::from_function(grid, [&](double x, double y) {
            return std::sin(2.0 * pi * x / grid->lx()) * std::cos(4.0 * pi * y / grid->ly());
        }));
        for (std::size_t i = 1; i + 1 < path.nodes.size(); ++i) path.nodes[i].axpy(cfg.symmetry_kick, kick);
    }

    DeformationResult def = deform_path(std::move(path), p, cfg);
    if (def.collapsed) {
        SolveRecord rec{Field(grid), p, SolveStatus::geometry_failure};
        rec.sweeps = def.sweeps;
        rec.message = "path maximum drifted to an endpoint";
        detail::fill_diagnostics(rec);
        return rec;
    }

    SolveRecord rec = newton_refine(def.path.nodes[def.path.max_index], p, cfg);
    rec.sweeps = def.sweeps;
    rec.iterations = rec.sweeps + rec.newton_iterations;
    if (!def.switched) rec.message += (rec.message.empty() ? "" : "; ") + std::string("switch_tol not reached");
    if (rec.converged() && !rec.nontrivial()) {
        rec.status = SolveStatus::geometry_failure;
        rec.message = "Newton collapsed onto the trivial solution";
    }
    return rec;
}

// ---------------------------------------------------------------------------
// Continuation

inline Parameters interpolate(const Parameters& a, const Parameters& b, double t, double volume) {
    return Parameters::make(a.lambda1 + t * (b.lambda1 - a.lambda1), a.lambda2 + t * (b.lambda2 - a.lambda2),
                            a.gamma + t * (b.gamma - a.gamma), volume);
}

/// Warm-started Newton from an existing record towards p_end; `start` itself
/// is the first element of the result.
inline std::vector<SolveRecord> continuation_from(const SolveRecord& start, const Parameters& p_end, int steps,
                                                  const MinimaxConfig& cfg = {}) {
    require(steps >= 1, "continuation needs at least one step");
    require(start.converged(), "continuation: the starting record did not converge");
    const GridPtr& grid = start.field.grid_ptr();
    const Parameters& p0 = start.parameters;
    std::vector<SolveRecord> out{start};
    std::size_t last_good = 0;
    std::optional<std::size_t> prev_good;
    for (int s = 1; s <= steps; ++s) {
        const Parameters ps = interpolate(p0, p_end, static_cast<double>(s) / steps, grid->volume());
        const SolveRecord& last = out[last_good];
        // secant predictor from the last two converged states
        Field guess = last.field;
        if (prev_good) {
            const SolveRecord& prev = out[*prev_good];
            const double dl = last.parameters.lambda1 - prev.parameters.lambda1 + last.parameters.lambda2 -
                              prev.parameters.lambda2;
            const double dn = ps.lambda1 - last.parameters.lambda1 + ps.lambda2 - last.parameters.lambda2;
            if (dl != 0.0) guess.axpy(dn / dl, last.field - prev.field);
        }
        SolveRecord rec = newton_refine(guess, ps, cfg);
        if (!rec.converged() && prev_good) rec = newton_refine(out[last_good].field, ps, cfg);
        if (s == 1 && !rec.converged()) throw SolverError("continuation: first step failed to converge");
        out.push_back(std::move(rec));
        if (out.back().converged()) {
            prev_good = last_good;
            last_good = out.size() - 1;
        }
    }
    return out;
}

/// Mountain-pass solve at p_start followed by warm-started Newton steps along
/// the straight segment to p_end.  Failed steps are kept and flagged.
inline std::vector<SolveRecord> continuation(const Parameters& p_start, const Parameters& p_end, int steps,
                                             const GridPtr& grid, const MinimaxConfig& cfg = {}) {
    const RegionSpec spec = RegionSpec::make(p_start.gamma, *grid);
    const bool same = p_start.lambda1 == p_end.lambda1 && p_start.lambda2 == p_end.lambda2 &&
                      p_start.gamma == p_end.gamma;
    if (!same) {
        require(steps >= 1, "continuation needs at least one step");
        require(p_start.gamma == p_end.gamma, "continuation keeps gamma fixed");
        for (int s = 0; s < steps; ++s) {
            const Parameters ps = interpolate(p_start, p_end, static_cast<double>(s) / steps, grid->volume());
            require(contains(spec, ps.lambda1, ps.lambda2), "continuation: segment leaves the admissible region");
        }
    }
    SolveRecord first = mountain_pass(p_start, grid, cfg);
    if (!first.converged()) throw SolverError("continuation: initial mountain-pass solve failed: " + first.message);
    if (same) return {std::move(first)};
    return continuation_from(first, p_end, steps, cfg);
}

}  // namespace sinhp
