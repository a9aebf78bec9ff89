#pragma once

// Periodic grids on flat rectangular tori, mean-zero fields, and the
// Fourier-space Laplacian with its inverse.

#include <fftw3.h>

#include <algorithm>
#include <cmath>
#include <complex>
#include <cstddef>
#include <cstdio>
#include <fstream>
#include <istream>
#include <memory>
#include <mutex>
#include <numbers>
#include <ostream>
#include <span>
#include <sstream>
#include <string>
#include <utility>
#include <vector>

#include "sinhpoisson/errors.hpp"

namespace sinhp {

using cplx = std::complex<double>;

inline constexpr double pi = std::numbers::pi;
inline constexpr double eight_pi = 8.0 * std::numbers::pi;

struct Point {
    double x = 0.0;
    double y = 0.0;
};

namespace detail {
// FFTW's planner is not re-entrant; execution on distinct buffers is.
inline std::mutex& fftw_planner_mutex() {
    static std::mutex m;
    return m;
}
}  // namespace detail

/// Uniform nx-by-ny grid on the torus [0,Lx) x [0,Ly).  Values are stored
/// row-major: node (i, j) sits at x = i*Lx/nx, y = j*Ly/ny, index j*nx + i.
/// Immutable after construction; share it through GridPtr.
class TorusGrid {
  public:
    TorusGrid(int nx, int ny, double lx = 1.0, double ly = 1.0)
        : nx_(nx), ny_(ny), lx_(lx), ly_(ly) {
        require(nx >= 8 && ny >= 8 && nx % 2 == 0 && ny % 2 == 0,
                "torus grid needs even nx, ny >= 8");
        require(std::isfinite(lx) && std::isfinite(ly) && lx > 0.0 && ly > 0.0,
                "torus periods must be positive");
        volume_ = lx_ * ly_;
        cell_area_ = volume_ / static_cast<double>(size());
        nxh_ = nx_ / 2 + 1;

        symbol_.resize(spectral_size());
        for (int j = 0; j < ny_; ++j) {
            const double ky = (j <= ny_ / 2) ? j : j - ny_;
            for (int i = 0; i < nxh_; ++i) {
                const double kx = i;
                symbol_[static_cast<std::size_t>(j) * nxh_ + i] =
                    4.0 * pi * pi * (kx * kx / (lx_ * lx_) + ky * ky / (ly_ * ly_));
            }
        }

        std::vector<double> rbuf(size());
        std::vector<cplx> cbuf(spectral_size());
        auto* r = rbuf.data();
        auto* c = reinterpret_cast<fftw_complex*>(cbuf.data());
        std::lock_guard lock(detail::fftw_planner_mutex());
        fwd_ = fftw_plan_dft_r2c_2d(ny_, nx_, r, c, FFTW_ESTIMATE | FFTW_UNALIGNED);
        bwd_ = fftw_plan_dft_c2r_2d(ny_, nx_, c, r, FFTW_ESTIMATE | FFTW_UNALIGNED);
    }

    TorusGrid(const TorusGrid&) = delete;
    TorusGrid& operator=(const TorusGrid&) = delete;

    ~TorusGrid() {
        std::lock_guard lock(detail::fftw_planner_mutex());
        fftw_destroy_plan(fwd_);
        fftw_destroy_plan(bwd_);
    }

    int nx() const { return nx_; }
    int ny() const { return ny_; }
    double lx() const { return lx_; }
    double ly() const { return ly_; }
    double dx() const { return lx_ / nx_; }
    double dy() const { return ly_ / ny_; }
    double volume() const { return volume_; }
    double cell_area() const { return cell_area_; }
    std::size_t size() const { return static_cast<std::size_t>(nx_) * ny_; }
    std::size_t spectral_size() const { return static_cast<std::size_t>(ny_) * nxh_; }
    int spectral_nx() const { return nxh_; }

    double x(int i) const { return i * dx(); }
    double y(int j) const { return j * dy(); }
    std::size_t index(int i, int j) const { return static_cast<std::size_t>(j) * nx_ + i; }
    Point node(std::size_t k) const {
        return {x(static_cast<int>(k % nx_)), y(static_cast<int>(k / nx_))};
    }

    /// Eigenvalues of -Laplacian indexed like the half spectrum.
    std::span<const double> symbol() const { return symbol_; }

    /// Multiplicity of a half-spectrum column in Parseval sums.
    double parseval_weight(int i) const { return (i == 0 || i == nx_ / 2) ? 1.0 : 2.0; }

    void forward(std::span<const double> in, std::span<cplx> out) const {
        fftw_execute_dft_r2c(fwd_, const_cast<double*>(in.data()),
                             reinterpret_cast<fftw_complex*>(out.data()));
    }

    /// Unnormalized inverse transform; destroys `in`.
    void backward(std::span<cplx> in, std::span<double> out) const {
        fftw_execute_dft_c2r(bwd_, reinterpret_cast<fftw_complex*>(in.data()), out.data());
    }

    bool same_shape(const TorusGrid& o) const {
        return nx_ == o.nx_ && ny_ == o.ny_ && lx_ == o.lx_ && ly_ == o.ly_;
    }

  private:
    int nx_, ny_, nxh_ = 0;
    double lx_, ly_;
    double volume_ = 0.0, cell_area_ = 0.0;
    std::vector<double> symbol_;
    fftw_plan fwd_ = nullptr;
    fftw_plan bwd_ = nullptr;
};

using GridPtr = std::shared_ptr<const TorusGrid>;

inline GridPtr make_grid(int nx, int ny, double lx = 1.0, double ly = 1.0) {
    return std::make_shared<const TorusGrid>(nx, ny, lx, ly);
}

/// Real scalar samples on a TorusGrid.
class Field {
  public:
    explicit Field(GridPtr grid) : grid_(std::move(grid)), values_(grid_->size(), 0.0) {}
    Field(GridPtr grid, std::vector<double> values)
        : grid_(std::move(grid)), values_(std::move(values)) {
        require(values_.size() == grid_->size(), "field size does not match grid");
    }

    template <typename F>
    static Field from_function(GridPtr grid, F&& f) {
        Field out(grid);
        for (int j = 0; j < grid->ny(); ++j)
            for (int i = 0; i < grid->nx(); ++i)
                out.values_[grid->index(i, j)] = f(grid->x(i), grid->y(j));
        return out;
    }

    const TorusGrid& grid() const { return *grid_; }
    const GridPtr& grid_ptr() const { return grid_; }
    std::size_t size() const { return values_.size(); }

    std::span<double> values() { return values_; }
    std::span<const double> values() const { return values_; }
    double& operator[](std::size_t k) { return values_[k]; }
    double operator[](std::size_t k) const { return values_[k]; }
    double& at(int i, int j) { return values_[grid_->index(i, j)]; }
    double at(int i, int j) const { return values_[grid_->index(i, j)]; }

    Field& operator+=(const Field& o) {
        check_same(o);
        for (std::size_t k = 0; k < values_.size(); ++k) values_[k] += o.values_[k];
        return *this;
    }
    Field& operator-=(const Field& o) {
        check_same(o);
        for (std::size_t k = 0; k < values_.size(); ++k) values_[k] -= o.values_[k];
        return *this;
    }
    Field& operator*=(double s) {
        for (double& v : values_) v *= s;
        return *this;
    }
    /// this += s * o
    Field& axpy(double s, const Field& o) {
        check_same(o);
        for (std::size_t k = 0; k < values_.size(); ++k) values_[k] += s * o.values_[k];
        return *this;
    }

    friend Field operator+(Field a, const Field& b) { return a += b; }
    friend Field operator-(Field a, const Field& b) { return a -= b; }
    friend Field operator*(double s, Field a) { return a *= s; }
    friend Field operator-(Field a) { return a *= -1.0; }

  private:
    void check_same(const Field& o) const {
        require(grid_ == o.grid_ || grid_->same_shape(*o.grid_), "fields live on different grids");
    }

    GridPtr grid_;
    std::vector<double> values_;
};

// ---------------------------------------------------------------------------
// Quadrature and norms (rectangle rule, spectrally accurate for periodic data)

inline double quadrature(const Field& f) {
    double s = 0.0;
    for (double v : f.values()) s += v;
    return s * f.grid().cell_area();
}

inline double mean(const Field& f) { return quadrature(f) / f.grid().volume(); }

inline double inner(const Field& a, const Field& b) {
    double s = 0.0;
    auto av = a.values();
    auto bv = b.values();
    for (std::size_t k = 0; k < av.size(); ++k) s += av[k] * bv[k];
    return s * a.grid().cell_area();
}

inline double l2_norm(const Field& f) { return std::sqrt(inner(f, f)); }

inline double max_abs(std::span<const double> v) {
    double m = 0.0;
    for (double x : v) m = std::max(m, std::abs(x));
    return m;
}
inline double max_abs(const Field& f) { return max_abs(f.values()); }

inline bool all_finite(const Field& f) {
    return std::all_of(f.values().begin(), f.values().end(),
                       [](double v) { return std::isfinite(v); });
}

inline void require_finite(const Field& f) { require(all_finite(f), "field has non-finite values"); }

/// Subtracts the grid mean in place.
inline void project_mean_zero(Field& f) {
    double s = 0.0;
    for (double v : f.values()) s += v;
    const double m = s / static_cast<double>(f.size());
    for (double& v : f.values()) v -= m;
}

inline Field mean_zero(Field f) {
    project_mean_zero(f);
    return f;
}

/// |mean| small relative to the field's amplitude.
inline bool is_mean_zero(const Field& f, double rel_tol = 1e-10) {
    return std::abs(mean(f)) <= rel_tol * max_abs(f) + 1e-300;
}

// ---------------------------------------------------------------------------
// Spectral operators

namespace detail {
template <typename Multiplier>
Field apply_multiplier(const Field& f, Multiplier&& mult) {
    const TorusGrid& g = f.grid();
    std::vector<cplx> hat(g.spectral_size());
    g.forward(f.values(), hat);
    auto sym = g.symbol();
    for (std::size_t k = 0; k < hat.size(); ++k) hat[k] *= mult(k, sym[k]);
    Field out(f.grid_ptr());
    g.backward(hat, out.values());
    out *= 1.0 / static_cast<double>(g.size());
    return out;
}
}  // namespace detail

/// Delta f via the multiplier -4 pi^2 (k1^2/Lx^2 + k2^2/Ly^2).
inline Field laplacian(const Field& f) {
    require_finite(f);
    return detail::apply_multiplier(f, [](std::size_t, double s) { return -s; });
}

/// Mean-zero u with -Delta u = f.  Rejects f with a non-negligible mean.
inline Field inv_laplacian(const Field& f) {
    require_finite(f);
    require(is_mean_zero(f), "inv_laplacian: source has nonzero mean");
    return detail::apply_multiplier(f, [](std::size_t k, double s) { return k == 0 ? 0.0 : 1.0 / s; });
}

/// Convolution with the mean-corrected Green's function:
/// -Delta G(., p) = delta_p - 1/|Sigma|, int G(., p) = 0.
inline Field green_convolve(const Field& f) {
    require_finite(f);
    return detail::apply_multiplier(f, [](std::size_t k, double s) { return k == 0 ? 0.0 : 1.0 / s; });
}

/// <a, b>_{H^1} = int grad a . grad b, evaluated by Parseval.
inline double h1_inner(const Field& a, const Field& b) {
    const TorusGrid& g = a.grid();
    std::vector<cplx> ah(g.spectral_size()), bh(g.spectral_size());
    g.forward(a.values(), ah);
    g.forward(b.values(), bh);
    auto sym = g.symbol();
    const int nxh = g.spectral_nx();
    double s = 0.0;
    for (std::size_t k = 0; k < ah.size(); ++k) {
        const int i = static_cast<int>(k % nxh);
        s += g.parseval_weight(i) * sym[k] * (ah[k].real() * bh[k].real() + ah[k].imag() * bh[k].imag());
    }
    return s * g.cell_area() / static_cast<double>(g.size());
}

/// int |grad f|^2.
inline double dirichlet_energy(const Field& f) { return h1_inner(f, f); }

inline double dirichlet_norm(const Field& f) { return std::sqrt(std::max(0.0, dirichlet_energy(f))); }

/// Smallest nonzero eigenvalue of -Laplacian on the torus.
inline double mu1(const TorusGrid& g) {
    return 4.0 * pi * pi * std::min(1.0 / (g.lx() * g.lx()), 1.0 / (g.ly() * g.ly()));
}

// ---------------------------------------------------------------------------
// Geometry

/// Minimum-image geodesic distance on the flat torus.
inline double torus_distance(const TorusGrid& g, Point a, Point b) {
    auto wrap = [](double d, double l) {
        d = std::fmod(std::abs(d), l);
        return std::min(d, l - d);
    };
    const double ddx = wrap(a.x - b.x, g.lx());
    const double ddy = wrap(a.y - b.y, g.ly());
    return std::hypot(ddx, ddy);
}

inline std::vector<double> distance_to_point(const TorusGrid& g, Point p0) {
    require(p0.x >= 0.0 && p0.x < g.lx() && p0.y >= 0.0 && p0.y < g.ly(),
            "point outside the fundamental domain");
    std::vector<double> d(g.size());
    for (int j = 0; j < g.ny(); ++j)
        for (int i = 0; i < g.nx(); ++i) d[g.index(i, j)] = torus_distance(g, {g.x(i), g.y(j)}, p0);
    return d;
}

/// out(i, j) = f(i - di, j - dj), periodic.
inline Field shift(const Field& f, int di, int dj) {
    const TorusGrid& g = f.grid();
    Field out(f.grid_ptr());
    for (int j = 0; j < g.ny(); ++j) {
        const int js = ((j - dj) % g.ny() + g.ny()) % g.ny();
        for (int i = 0; i < g.nx(); ++i) {
            const int is = ((i - di) % g.nx() + g.nx()) % g.nx();
            out.at(i, j) = f.at(is, js);
        }
    }
    return out;
}

/// Trigonometric interpolation onto another grid of the same torus.
/// Nyquist modes are dropped.
inline Field resample(const Field& f, const GridPtr& target) {
    const TorusGrid& src = f.grid();
    require(src.lx() == target->lx() && src.ly() == target->ly(), "resample: different tori");
    std::vector<cplx> in(src.spectral_size());
    src.forward(f.values(), in);
    std::vector<cplx> out(target->spectral_size(), cplx{0.0, 0.0});
    const int kx_max = std::min(src.nx(), target->nx()) / 2;
    const int ky_max = std::min(src.ny(), target->ny()) / 2;
    const double scale = static_cast<double>(target->size()) / static_cast<double>(src.size());
    for (int ky = -ky_max + 1; ky < ky_max; ++ky) {
        const int js = ky >= 0 ? ky : ky + src.ny();
        const int jt = ky >= 0 ? ky : ky + target->ny();
        for (int kx = 0; kx < kx_max; ++kx)
            out[static_cast<std::size_t>(jt) * target->spectral_nx() + kx] =
                scale * in[static_cast<std::size_t>(js) * src.spectral_nx() + kx];
    }
    Field r(target);
    target->backward(out, r.values());
    r *= 1.0 / static_cast<double>(target->size());
    return r;
}

/// Integer shift (di, dj) minimizing the L2 distance between shift(b, di, dj)
/// and a, found through FFT cross-correlation.
inline std::pair<int, int> best_alignment(const Field& a, const Field& b) {
    const TorusGrid& g = a.grid();
    std::vector<cplx> ah(g.spectral_size()), bh(g.spectral_size());
    g.forward(a.values(), ah);
    g.forward(b.values(), bh);
    for (std::size_t k = 0; k < ah.size(); ++k) ah[k] *= std::conj(bh[k]);
    std::vector<double> corr(g.size());
    g.backward(ah, corr);
    const auto best = std::max_element(corr.begin(), corr.end()) - corr.begin();
    return {static_cast<int>(best % g.nx()), static_cast<int>(best / g.nx())};
}

// ---------------------------------------------------------------------------
// Field files:
//   # torus-field nx=<int> ny=<int> Lx=<float> Ly=<float>
//   optional further '#' comment lines
//   ny lines of nx values, 17 significant digits.

inline std::string format_double(double v) {
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

/// `comments` is written verbatim after the header; each of its lines must
/// start with '#'.
inline void write_field(std::ostream& os, const Field& f, const std::string& comments = {}) {
    const TorusGrid& g = f.grid();
    os << "# torus-field nx=" << g.nx() << " ny=" << g.ny() << " Lx=" << format_double(g.lx())
       << " Ly=" << format_double(g.ly()) << '\n';
    os << comments;
    for (int j = 0; j < g.ny(); ++j) {
        for (int i = 0; i < g.nx(); ++i) {
            if (i) os << ' ';
            os << format_double(f.at(i, j));
        }
        os << '\n';
    }
}

inline Field read_field(std::istream& is) {
    std::string header;
    if (!std::getline(is, header)) throw FormatError("field file: missing header");
    int nx = 0, ny = 0;
    double lx = 0.0, ly = 0.0;
    char tail = 0;
    if (std::sscanf(header.c_str(), "# torus-field nx=%d ny=%d Lx=%lf Ly=%lf %c", &nx, &ny, &lx, &ly,
                    &tail) != 4)
        throw FormatError("field file: malformed header '" + header + "'");
    GridPtr grid;
    try {
        grid = make_grid(nx, ny, lx, ly);
    } catch (const PreconditionError& e) {
        throw FormatError(std::string("field file: invalid grid: ") + e.what());
    }
    std::vector<double> values;
    values.reserve(grid->size());
    std::string line;
    int rows = 0;
    while (std::getline(is, line)) {
        const auto first = line.find_first_not_of(" \t\r");
        if (first == std::string::npos) continue;
        if (line[first] == '#') {
            if (rows > 0) throw FormatError("field file: comment inside the value block");
            continue;
        }
        std::istringstream ls(line);
        std::string tok;
        int cols = 0;
        while (ls >> tok) {
            std::size_t used = 0;
            double v = 0.0;
            try {
                v = std::stod(tok, &used);
            } catch (const std::exception&) {
                throw FormatError("field file: bad value '" + tok + "'");
            }
            if (used != tok.size() || !std::isfinite(v)) throw FormatError("field file: bad value '" + tok + "'");
            values.push_back(v);
            ++cols;
        }
        if (cols != nx) throw FormatError("field file: row " + std::to_string(rows) + " has wrong length");
        ++rows;
    }
    if (rows != ny) throw FormatError("field file: expected " + std::to_string(ny) + " rows");
    return Field(grid, std::move(values));
}

inline void save_field(const std::string& path, const Field& f, const std::string& comments = {}) {
    std::ofstream os(path);
    if (!os) throw std::runtime_error("cannot write " + path);
    write_field(os, f, comments);
}

inline Field load_field(const std::string& path) {
    std::ifstream is(path);
    if (!is) throw FormatError("cannot open " + path);
    return read_field(is);
}

}  // namespace sinhp
