#pragma once

// Restarted GMRES for vector types with +=, *= and axpy (Field in practice).

#include <cmath>
#include <vector>

namespace sinhp {

struct GmresOptions {
    double rtol = 1e-8;
    int restart = 60;
    int max_iter = 600;
};

struct GmresResult {
    bool converged = false;
    bool breakdown = false;
    int iterations = 0;
    double relative_residual = 1.0;  // preconditioned
};

/// Solves M^{-1} A x = M^{-1} b (left preconditioning).  `x` holds the
/// initial guess on entry.
template <typename Vec, typename Op, typename Prec, typename Dot>
GmresResult gmres(const Op& A, const Prec& M, const Vec& b, Vec& x, Dot dot, const GmresOptions& opt) {
    GmresResult res;
    auto norm = [&](const Vec& v) { return std::sqrt(dot(v, v)); };

    const Vec pb = M(b);
    const double bnorm = norm(pb);
    if (bnorm == 0.0) {
        x *= 0.0;
        res.converged = true;
        res.relative_residual = 0.0;
        return res;
    }

    const int m = opt.restart;
    while (res.iterations < opt.max_iter) {
        Vec r = b;
        r -= A(x);
        r = M(r);
        const double beta = norm(r);
        res.relative_residual = beta / bnorm;
        if (res.relative_residual <= opt.rtol) {
            res.converged = true;
            return res;
        }

        std::vector<Vec> V;
        V.reserve(m + 1);
        r *= 1.0 / beta;
        V.push_back(std::move(r));
        std::vector<std::vector<double>> H(m + 1, std::vector<double>(m, 0.0));
        std::vector<double> cs(m, 0.0), sn(m, 0.0), g(m + 1, 0.0);
        g[0] = beta;

        int k = 0;
        for (; k < m && res.iterations < opt.max_iter; ++k, ++res.iterations) {
            Vec w = M(A(V[k]));
            // modified Gram-Schmidt, two passes
            for (int pass = 0; pass < 2; ++pass)
                for (int i = 0; i <= k; ++i) {
                    const double h = dot(w, V[i]);
                    H[i][k] += h;
                    w.axpy(-h, V[i]);
                }
            H[k + 1][k] = norm(w);
            for (int i = 0; i < k; ++i) {
                const double t = cs[i] * H[i][k] + sn[i] * H[i + 1][k];
                H[i + 1][k] = -sn[i] * H[i][k] + cs[i] * H[i + 1][k];
                H[i][k] = t;
            }
            const double denom = std::hypot(H[k][k], H[k + 1][k]);
            if (denom == 0.0) {
                res.breakdown = true;
                break;
            }
            cs[k] = H[k][k] / denom;
            sn[k] = H[k + 1][k] / denom;
            const double hk1 = H[k + 1][k];
            H[k][k] = denom;
            H[k + 1][k] = 0.0;
            g[k + 1] = -sn[k] * g[k];
            g[k] = cs[k] * g[k];
            res.relative_residual = std::abs(g[k + 1]) / bnorm;
            if (res.relative_residual <= opt.rtol || hk1 <= 1e-14 * beta) {
                ++k;
                ++res.iterations;
                break;
            }
            w *= 1.0 / hk1;
            V.push_back(std::move(w));
        }

        // back substitution on the k x k triangle
        std::vector<double> y(k, 0.0);
        for (int i = k - 1; i >= 0; --i) {
            double s = g[i];
            for (int j = i + 1; j < k; ++j) s -= H[i][j] * y[j];
            y[i] = s / H[i][i];
        }
        for (int i = 0; i < k; ++i) x.axpy(y[i], V[i]);

        if (res.breakdown) return res;
        if (res.relative_residual <= opt.rtol) {
            res.converged = true;
            return res;
        }
    }
    return res;
}

}  // namespace sinhp
