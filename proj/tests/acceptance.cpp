// Acceptance run: one PASS/FAIL line per criterion, nonzero exit on failure.

#include <Eigen/Dense>

#include <chrono>
#include <cstdio>
#include <fstream>
#include <functional>
#include <random>
#include <string>
#include <vector>

#include "fd_check.hpp"
#include "sinhpoisson/blowup.hpp"
#include "sinhpoisson/bubbles.hpp"
#include "sinhpoisson/minimax.hpp"
#include "sinhpoisson/region.hpp"
#include "support.hpp"

using namespace sinhp;

namespace {

struct Outcome {
    bool pass = true;
    std::string detail;

    void check(bool ok, const std::string& what) {
        if (!ok) pass = false;
        if (!detail.empty()) detail += "; ";
        detail += what + (ok ? "" : " [failed]");
    }
};

std::string num(double v, const char* f = "%.6g") {
    char buf[64];
    std::snprintf(buf, sizeof buf, f, v);
    return buf;
}

double rel(double a, double b) { return std::abs(a - b) / std::abs(b); }

// ---------------------------------------------------------------------------

Outcome eigenvalue() {
    Outcome o;
    auto g = make_grid(128, 128);
    const double target = 4 * pi * pi;
    const double mv = mu1(*g) * g->volume();
    o.check(rel(mv, target) <= 1e-10, "mu1|Sigma| = " + num(mv, "%.15g"));
    // Rayleigh quotient of the lowest Fourier mode through the spectral operators
    auto mode = Field::from_function(g, [](double x, double) { return std::cos(2 * pi * x); });
    const double rq = dirichlet_energy(mode) / inner(mode, mode);
    o.check(rel(rq, target) <= 1e-10, "lowest-mode Rayleigh quotient rel err " + num(rel(rq, target)));
    for (double gamma : {0.1, 0.5, 1.0}) {
        const bool window = eight_pi < mv && mv < 16 * pi * (1 + gamma);
        bool accepted = true;
        try {
            RegionSpec::make(gamma, *g);
        } catch (const PreconditionError&) {
            accepted = false;
        }
        o.check(window && accepted, "window holds at gamma " + num(gamma));
    }
    return o;
}

Outcome bubble_slopes() {
    Outcome o;
    auto g = make_grid(256, 256);
    const auto p = Parameters::make(30, 60, 0.5, 1.0);
    std::vector<double> eps;
    for (int k = 3; k <= 7; ++k) eps.push_back(std::ldexp(1.0, -k));
    const auto rep = verify_expansions(eps, {0.5, 0.5}, 0.25, g, p);
    const double d = rep.fit(Expansion::dirichlet).slope;
    const double l = rep.fit(Expansion::log_int_exp).slope;
    const double n = rep.fit(Expansion::log_int_exp_neg_gamma).slope;
    const double jv = rep.fit(Expansion::J_v).slope;
    const double jn = rep.fit(Expansion::J_negv).slope;
    const double ejv = eight_pi - p.lambda1;
    const double ejn = (eight_pi / p.gamma - p.lambda2) / p.gamma;
    o.check(rel(d, 16 * pi) <= 0.02, "dirichlet " + num(d) + " vs " + num(16 * pi));
    o.check(rel(l, 1.0) <= 0.02, "logIntExp " + num(l));
    o.check(std::abs(n) <= 0.05, "logIntExpNegGamma " + num(n));
    o.check(rel(jv, ejv) <= 0.05, "J_v " + num(jv) + " vs " + num(ejv));
    o.check(rel(jn, ejn) <= 0.05, "J_negv " + num(jn) + " vs " + num(ejn));
    return o;
}

Outcome region_algebra() {
    Outcome o;
    for (double gamma : {0.25, 0.5, 1.0}) {
        const double xb = parabola_x(eight_pi / gamma, gamma, Branch::plus);
        const double yb = parabola_y(eight_pi, gamma, Branch::plus);
        const double a_closed = std::min(x_bar(gamma) + eight_pi, eight_pi + gamma * y_bar(gamma));
        o.check(rel(xb, 8 * pi * (1 + 2 / gamma)) <= 1e-14 && rel(yb, 8 * pi * (2 + 1 / gamma)) <= 1e-14 &&
                    rel(a_closed, alpha_gamma(gamma)) <= 1e-14,
                "closed forms at gamma " + num(gamma));
        // dense scan of x + gamma y over the admissible arc, parametrized from both constraint lines
        double best = 1e300;
        const int steps = 2000000;
        for (int k = 0; k <= steps; ++k) {
            const double t = 400.0 * k / steps;
            for (Branch b : {Branch::plus, Branch::minus}) {
                const double y = eight_pi / gamma + t;
                const double x = parabola_x(y, gamma, b);
                if (x >= eight_pi) best = std::min(best, x + gamma * y);
                const double x2 = eight_pi + t;
                const double y2 = parabola_y(x2, gamma, b);
                if (y2 >= eight_pi / gamma) best = std::min(best, x2 + gamma * y2);
            }
        }
        o.check(rel(best, alpha_gamma(gamma)) <= 1e-6, "scan alpha " + num(best, "%.10g"));
    }
    std::mt19937_64 rng(2024);
    long samples = 0, mismatches = 0;
    for (double gamma : {0.25, 0.5, 1.0}) {
        const auto spec = RegionSpec::make(gamma, 4 * pi * pi);
        const auto [t1, t2] = triangles(spec);
        auto inside = [](const Triangle& t, double x, double y) {
            const auto& [a, b, c] = t.v;
            const double det = (b.y - c.y) * (a.x - c.x) + (c.x - b.x) * (a.y - c.y);
            const double l1 = ((b.y - c.y) * (x - c.x) + (c.x - b.x) * (y - c.y)) / det;
            const double l2 = ((c.y - a.y) * (x - c.x) + (a.x - c.x) * (y - c.y)) / det;
            return l1 > 0 && l2 > 0 && 1 - l1 - l2 > 0;
        };
        std::uniform_real_distribution<double> ux(0, spec.mu1_vol), uy(0, spec.mu1_vol / gamma);
        for (int k = 0; k < 100000; ++k) {
            const double x = ux(rng), y = uy(rng);
            if (on_resonance(x, eight_pi) || on_resonance(y, eight_pi / gamma)) continue;
            ++samples;
            mismatches += (inside(t1, x, y) || inside(t2, x, y)) != contains(spec, x, y);
        }
    }
    o.check(mismatches == 0, "triangle union vs clauses: " + std::to_string(mismatches) + " mismatches in " +
                                 std::to_string(samples));
    return o;
}

// smallest eigenvalue of J''(0) on mean-zero fields, from the assembled operator
double smallest_hessian_eigenvalue(const GridPtr& g, const Parameters& p) {
    const auto n = static_cast<Eigen::Index>(g->size());
    Eigen::MatrixXd h(n, n);
    const Field zero(g);
    const HessianOperator op(zero, p);
    for (Eigen::Index c = 0; c < n; ++c) {
        Field e(g);
        e[static_cast<std::size_t>(c)] = 1.0;
        project_mean_zero(e);
        const Field col = op(e);
        for (Eigen::Index r = 0; r < n; ++r) h(r, c) = col[static_cast<std::size_t>(r)];
    }
    // lift the constant mode far above the spectrum
    h = 0.5 * (h + h.transpose());
    h.array() += 1e6 / static_cast<double>(n);
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(h, Eigen::EigenvaluesOnly);
    return es.eigenvalues()(0);
}

Outcome hessian_threshold() {
    Outcome o;
    for (auto [lx, ly] : {std::pair{1.0, 1.0}, std::pair{1.0, 0.8}}) {
        auto g = make_grid(16, 16, lx, ly);
        const double gamma = 0.5, lambda2 = 10.0;
        const double threshold = mu1(*g) * g->volume();
        auto q = [&](double l1) { return smallest_hessian_eigenvalue(g, Parameters::make(l1, lambda2, gamma, *g)); };
        double lo = 0.0, hi = 2 * threshold;
        bool bracket = q(lo) > 0 && q(hi) < 0;
        for (int it = 0; it < 60 && bracket; ++it) {
            const double mid = 0.5 * (lo + hi);
            (q(mid) > 0 ? lo : hi) = mid;
        }
        const double crossing = 0.5 * (lo + hi) + gamma * lambda2;
        o.check(bracket && std::abs(crossing - threshold) <= 1e-6,
                "torus " + num(lx) + "x" + num(ly) + ": crossing " + num(crossing, "%.10g") + " vs " +
                    num(threshold, "%.10g"));
    }
    return o;
}

Outcome fd_consistency() {
    Outcome o;
    std::mt19937_64 rng(99);
    auto g = make_grid(64, 64);
    const auto p = Parameters::make(30, 5, 0.5, 1.0);
    double worst_g = 1e9, worst_h = 1e9;
    for (int t = 0; t < 20; ++t) {
        const Field v = sinhp::testing::random_field(g, rng, 1.0, 4);
        const Field phi = sinhp::testing::random_field(g, rng, 50.0, 4);
        worst_g = std::min(worst_g, sinhp::testing::gradient_fd(v, phi, p).order);
        worst_h = std::min(worst_h, sinhp::testing::hessian_fd(v, phi, p).order);
    }
    o.check(worst_g >= 1.9, "min gradient order " + num(worst_g, "%.4f"));
    o.check(worst_h >= 1.9, "min Hessian order " + num(worst_h, "%.4f"));
    return o;
}

Outcome existence() {
    Outcome o;
    auto g = make_grid(128, 128);
    auto fine = make_grid(256, 256);
    const double gamma = 0.5;
    const auto spec = RegionSpec::make(gamma, *g);
    const auto [t1, t2] = triangles(spec);
    auto at = [](const Triangle& t, double a, double b, double c) {
        return Point{a * t.v[0].x + b * t.v[1].x + c * t.v[2].x, a * t.v[0].y + b * t.v[1].y + c * t.v[2].y};
    };
    const std::vector<Point> points{{30, 5}, at(t1, 1. / 3, 1. / 3, 1. / 3), at(t2, 1. / 3, 1. / 3, 1. / 3),
                                    at(t2, 0.25, 0.5, 0.25)};
    for (Point pt : points) {
        const auto p = Parameters::make(pt.x, pt.y, gamma, *g);
        const std::string tag = "(" + num(pt.x, "%.4g") + "," + num(pt.y, "%.4g") + ")";
        if (!contains(spec, pt.x, pt.y)) {
            o.check(false, tag + " outside region");
            continue;
        }
        const SolveRecord rec = mountain_pass(p, g);
        if (!rec.converged()) {
            o.check(false, tag + " " + status_name(rec.status) + ": " + rec.message);
            continue;
        }
        const double recomputed = l2_norm(gradient_J(rec.field, p));
        const SolveRecord refined = newton_refine(resample(rec.field, fine), Parameters::make(pt.x, pt.y, gamma, *fine));
        const double drift = refined.converged() ? rel(refined.J_value, rec.J_value) : 1.0;
        o.check(rec.residual_norm <= 1e-9 && recomputed <= 2 * rec.residual_norm + 1e-15 &&
                    rec.dirichlet_norm >= 1e-3 && rec.J_value > 0 && drift < 1e-4,
                tag + " J=" + num(rec.J_value, "%.10g") + " res=" + num(rec.residual_norm, "%.2e") +
                    " |v|=" + num(rec.dirichlet_norm, "%.4g") + " refine dJ=" + num(drift, "%.1e"));
    }
    return o;
}

Outcome duality() {
    Outcome o;
    auto g = make_grid(128, 128);
    const SolveRecord a = mountain_pass(Parameters::make(30, 5, 1.0, 1.0), g);
    const SolveRecord b = mountain_pass(Parameters::make(5, 30, 1.0, 1.0), g);
    if (!a.converged() || !b.converged()) {
        o.check(false, "solves did not converge");
        return o;
    }
    const Field neg = -b.field;
    const auto [di, dj] = best_alignment(a.field, neg);
    const double dist = l2_norm(a.field - shift(neg, di, dj));
    o.check(dist <= 1e-6, "L2 distance after shift (" + std::to_string(di) + "," + std::to_string(dj) +
                              ") = " + num(dist, "%.2e") + ", J " + num(a.J_value, "%.10g") + " / " +
                              num(b.J_value, "%.10g"));
    return o;
}

Outcome mass_quantization() {
    Outcome o;
    auto g = make_grid(256, 256);
    const double eps = 1e-3, r0 = 0.25;
    const Point p0{0.5, 0.5};
    const Field v = bubble_v(BubbleSpec::make(eps, p0, r0, *g), g);
    const auto [m1, m1b] = local_masses(v, Parameters::make(eight_pi, 0, 1.0, 1.0), p0, r0);
    o.check(rel(m1, eight_pi) <= 0.01, "m1 = " + num(m1, "%.6f"));
    for (double gamma : {0.5, 1.0}) {
        const auto [n1, m2] = local_masses((-1.0 / gamma) * v, Parameters::make(0, eight_pi / gamma, gamma, 1.0), p0, r0);
        o.check(rel(m2, eight_pi / gamma) <= 0.01, "m2(gamma " + num(gamma) + ") = " + num(m2, "%.6f"));
    }
    for (double gamma : {0.25, 0.5, 1.0}) {
        const double r_plus = identity_check(eight_pi, 0, gamma).residual;
        const double r_minus = identity_check(0, eight_pi / gamma, gamma).residual;
        o.check(r_plus == 0.0 && r_minus == 0.0,
                "one-sided residuals at gamma " + num(gamma) + ": " + num(r_plus) + ", " + num(r_minus));
        // parabola points: both corners and interior points of each branch
        std::vector<std::pair<double, double>> pts{{x_bar(gamma), eight_pi / gamma}, {eight_pi, y_bar(gamma)}};
        for (double y : {1.0, 50.0, 300.0}) pts.emplace_back(parabola_x(y, gamma, Branch::plus), y);
        double worst = 0.0;
        for (auto [x, y] : pts) {
            const double res = identity_check(x, y, gamma).residual;
            worst = std::max(worst, std::abs(res) / ((x - y) * (x - y)));
        }
        // exact zero in real arithmetic; allow a few ulps of the squared terms
        o.check(worst <= 8 * std::numeric_limits<double>::epsilon(),
                "parabola residuals at gamma " + num(gamma) + " <= " + num(worst, "%.1e") + " relative");
    }
    return o;
}

Outcome blowup_trend() {
    Outcome o;
    auto g = make_grid(128, 128);
    const auto start = Parameters::make(30, 5, 0.5, 1.0);
    const auto end = Parameters::make(eight_pi + 0.5, 5, 0.5, 1.0);
    const auto recs = continuation(start, end, 10, g);
    std::ofstream manifest("acceptance_trend_manifest.csv");
    manifest << "# continuation gamma=0.5 lambda2=5 lambda1 30 -> 8pi+0.5, 128x128\n"
             << "step,lambda1,status,residual,supnorm,m1_dominant,J\n";
    std::vector<double> sup, m1;
    int failed = 0;
    for (std::size_t s = 0; s < recs.size(); ++s) {
        const SolveRecord& r = recs[s];
        const MassReport rep = analyze(r.field, r.parameters);
        double dominant = 0.0;
        for (const Candidate& c : rep.candidates)
            if (c.peak.species == 1) {
                dominant = c.m1;
                break;
            }
        manifest << s << ',' << format_double(r.parameters.lambda1) << ',' << status_name(r.status) << ','
                 << format_double(r.residual_norm) << ',' << format_double(r.sup_norm) << ','
                 << format_double(dominant) << ',' << format_double(r.J_value) << '\n';
        if (!r.converged()) {
            ++failed;
            continue;
        }
        sup.push_back(r.sup_norm);
        m1.push_back(dominant);
    }
    auto monotone_tail = [](const std::vector<double>& x) {
        if (x.size() < 5) return false;
        for (std::size_t i = x.size() - 4; i < x.size(); ++i)
            if (x[i] < x[i - 1]) return false;
        return true;
    };
    o.check(failed == 0, std::to_string(recs.size()) + " records, " + std::to_string(failed) + " failed");
    o.check(monotone_tail(sup), "sup-norm tail " + num(sup.size() >= 5 ? sup[sup.size() - 5] : 0, "%.4f") + " -> " +
                                    num(sup.empty() ? 0 : sup.back(), "%.4f"));
    o.check(monotone_tail(m1), "m1 tail " + num(m1.size() >= 5 ? m1[m1.size() - 5] : 0, "%.4f") + " -> " +
                                   num(m1.empty() ? 0 : m1.back(), "%.4f"));
    return o;
}

}  // namespace

int main() {
    const std::vector<std::pair<const char*, std::function<Outcome()>>> criteria{
        {"eigenvalue check", eigenvalue},
        {"bubble expansion slopes", bubble_slopes},
        {"region algebra", region_algebra},
        {"Hessian threshold", hessian_threshold},
        {"gradient/Hessian consistency", fd_consistency},
        {"existence reproduction", existence},
        {"gamma=1 duality", duality},
        {"mass quantization", mass_quantization},
        {"blow-up trend", blowup_trend},
    };
    int failures = 0;
    for (std::size_t i = 0; i < criteria.size(); ++i) {
        const auto t0 = std::chrono::steady_clock::now();
        Outcome o;
        try {
            o = criteria[i].second();
        } catch (const std::exception& e) {
            o.pass = false;
            o.detail = std::string("exception: ") + e.what();
        }
        const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
        failures += !o.pass;
        std::printf("%s %zu %s: %s (%.1f s)\n", o.pass ? "PASS" : "FAIL", i + 1, criteria[i].first, o.detail.c_str(),
                    secs);
        std::fflush(stdout);
    }
    std::printf("%d of %zu criteria passed\n", static_cast<int>(criteria.size()) - failures, criteria.size());
    return failures == 0 ? 0 : 1;
}
