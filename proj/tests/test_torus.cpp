#include <catch_amalgamated.hpp>

#include <Eigen/Dense>

#include <random>
#include <sstream>

#include "sinhpoisson/torus.hpp"
#include "support.hpp"

using namespace sinhp;
using Catch::Approx;
using sinhp::testing::random_field;

TEST_CASE("Fourier modes are eigenfunctions of the Laplacian", "[torus]") {
    auto g = make_grid(32, 16, 2.0, 1.0);
    for (auto [kx, ky] : {std::pair{1, 0}, std::pair{0, 1}, std::pair{3, 2}, std::pair{5, 7}}) {
        auto f = Field::from_function(g, [&](double x, double y) {
            return std::cos(2 * pi * kx * x / 2.0) * std::cos(2 * pi * ky * y);
        });
        const double lambda = 4 * pi * pi * (kx * kx / 4.0 + ky * ky);
        Field lf = laplacian(f);
        lf.axpy(lambda, f);
        CHECK(max_abs(lf) <= 1e-9 * lambda);
    }
}

TEST_CASE("inv_laplacian inverts -laplacian on mean-zero fields", "[torus]") {
    std::mt19937_64 rng(11);
    auto g = make_grid(48, 32, 1.5, 1.0);
    for (int trial = 0; trial < 5; ++trial) {
        Field f = random_field(g, rng, 2.0, 6);
        Field back = inv_laplacian(-laplacian(f));
        back -= f;
        CHECK(max_abs(back) <= 1e-9);
        CHECK(is_mean_zero(inv_laplacian(f)));
    }
}

TEST_CASE("Precondition failures in spectral operators", "[torus]") {
    auto g = make_grid(16, 16);
    Field c = Field::from_function(g, [](double, double) { return 1.0; });
    CHECK_THROWS_AS(inv_laplacian(c), PreconditionError);
    Field nan = c;
    nan[3] = std::nan("");
    CHECK_THROWS_AS(laplacian(nan), PreconditionError);
    CHECK_THROWS_AS(make_grid(15, 16), PreconditionError);
    CHECK_THROWS_AS(make_grid(16, 16, -1.0, 1.0), PreconditionError);
}

TEST_CASE("green_convolve drops the mean", "[torus]") {
    std::mt19937_64 rng(3);
    auto g = make_grid(32, 32);
    Field f = random_field(g, rng);
    Field shifted = f;
    for (double& v : shifted.values()) v += 4.0;
    Field d = green_convolve(shifted) - inv_laplacian(f);
    CHECK(max_abs(d) <= 1e-12);
}

TEST_CASE("Laplacian is self-adjoint and Parseval matches the direct sum", "[torus]") {
    std::mt19937_64 rng(5);
    auto g = make_grid(40, 24, 1.0, 0.7);
    Field a = random_field(g, rng, 1.0, 5), b = random_field(g, rng, 1.0, 5);
    CHECK(inner(laplacian(a), b) == Approx(inner(a, laplacian(b))).epsilon(1e-12));
    CHECK(h1_inner(a, b) == Approx(-inner(a, laplacian(b))).epsilon(1e-11));
    CHECK(dirichlet_energy(a) == Approx(-inner(a, laplacian(a))).epsilon(1e-11));

    // int |grad cos(2 pi x)|^2 over the unit torus is 2 pi^2
    auto u = make_grid(16, 16);
    auto c = Field::from_function(u, [](double x, double) { return std::cos(2 * pi * x); });
    CHECK(dirichlet_energy(c) == Approx(2 * pi * pi).epsilon(1e-12));
}

TEST_CASE("Poincare inequality with mu1", "[torus]") {
    std::mt19937_64 rng(17);
    for (auto [lx, ly] : {std::pair{1.0, 1.0}, std::pair{2.0, 1.0}, std::pair{0.5, 1.25}}) {
        auto g = make_grid(32, 32, lx, ly);
        for (int trial = 0; trial < 10; ++trial) {
            Field f = random_field(g, rng, 1.0, 4);
            CHECK(dirichlet_energy(f) >= mu1(*g) * inner(f, f) * (1 - 1e-12));
        }
    }
}

TEST_CASE("mu1 agrees with dense eigenvalue oracles", "[torus]") {
    // spectral operator assembled column by column
    auto g = make_grid(16, 8, 2.0, 1.0);
    const auto n = static_cast<Eigen::Index>(g->size());
    Eigen::MatrixXd a(n, n);
    for (Eigen::Index c = 0; c < n; ++c) {
        Field e(g);
        e[static_cast<std::size_t>(c)] = 1.0;
        Field col = -laplacian(e);
        for (Eigen::Index r = 0; r < n; ++r) a(r, c) = col[static_cast<std::size_t>(r)];
    }
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(0.5 * (a + a.transpose()));
    const auto& ev = es.eigenvalues();
    CHECK(std::abs(ev(0)) <= 1e-9);
    CHECK(ev(1) == Approx(mu1(*g)).epsilon(1e-10));
    CHECK(ev(1) == Approx(pi * pi).epsilon(1e-10));

    // independent five-point difference operator; converges at second order
    auto fd_mu1 = [](int nx, int ny, double lx, double ly) {
        const double hx = lx / nx, hy = ly / ny;
        const Eigen::Index m = static_cast<Eigen::Index>(nx) * ny;
        Eigen::MatrixXd l = Eigen::MatrixXd::Zero(m, m);
        for (int j = 0; j < ny; ++j)
            for (int i = 0; i < nx; ++i) {
                const Eigen::Index k = static_cast<Eigen::Index>(j) * nx + i;
                l(k, k) = 2 / (hx * hx) + 2 / (hy * hy);
                l(k, static_cast<Eigen::Index>(j) * nx + (i + 1) % nx) -= 1 / (hx * hx);
                l(k, static_cast<Eigen::Index>(j) * nx + (i + nx - 1) % nx) -= 1 / (hx * hx);
                l(k, static_cast<Eigen::Index>((j + 1) % ny) * nx + i) -= 1 / (hy * hy);
                l(k, static_cast<Eigen::Index>((j + ny - 1) % ny) * nx + i) -= 1 / (hy * hy);
            }
        Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> s(l, Eigen::EigenvaluesOnly);
        return s.eigenvalues()(1);
    };
    const double coarse = std::abs(fd_mu1(16, 8, 2.0, 1.0) - pi * pi);
    const double fine = std::abs(fd_mu1(32, 16, 2.0, 1.0) - pi * pi);
    CHECK(fine < 0.3 * coarse);
    CHECK(fine / (pi * pi) < 5e-3);
}

TEST_CASE("mu1 times area is scale invariant", "[torus]") {
    for (double l : {0.25, 1.0, 3.0, 10.0}) {
        auto g = make_grid(8, 8, l, l);
        CHECK(mu1(*g) * g->volume() == Approx(4 * pi * pi).epsilon(1e-14));
    }
    auto rect = make_grid(8, 8, 2.0, 1.0);
    CHECK(mu1(*rect) == Approx(pi * pi).epsilon(1e-14));
}

TEST_CASE("Torus distance uses the minimum image", "[torus]") {
    auto g = make_grid(16, 16);
    CHECK(torus_distance(*g, {0.1, 0.1}, {0.9, 0.9}) == Approx(std::sqrt(0.08)).epsilon(1e-14));
    CHECK(torus_distance(*g, {0.0, 0.0}, {0.5, 0.5}) == Approx(std::sqrt(0.5)).epsilon(1e-14));
    CHECK(torus_distance(*g, {0.2, 0.3}, {0.2, 0.3}) == 0.0);
    auto d = distance_to_point(*g, {0.0, 0.0});
    CHECK(d[g->index(15, 0)] == Approx(1.0 / 16).epsilon(1e-14));
    CHECK_THROWS_AS(distance_to_point(*g, {1.0, 0.0}), PreconditionError);
    CHECK_THROWS_AS(distance_to_point(*g, {-0.1, 0.0}), PreconditionError);
}

TEST_CASE("shift, best_alignment and resample", "[torus]") {
    std::mt19937_64 rng(23);
    auto g = make_grid(32, 24);
    Field f = random_field(g, rng, 1.0, 5);
    Field s = shift(f, 5, -3);
    CHECK(s.at(5, 21) == f.at(0, 0));
    auto [di, dj] = best_alignment(s, f);
    CHECK(di == 5);
    CHECK(dj == 21);
    CHECK(max_abs(shift(f, di, dj) - s) == 0.0);

    auto fine = make_grid(64, 48);
    Field up = resample(f, fine);
    Field exact = Field::from_function(fine, [&](double, double) { return 0.0; });
    for (int j = 0; j < g->ny(); ++j)
        for (int i = 0; i < g->nx(); ++i) CHECK(up.at(2 * i, 2 * j) == Approx(f.at(i, j)).margin(1e-12));
    CHECK(max_abs(resample(up, g) - f) <= 1e-12);
}

TEST_CASE("Field files round trip exactly", "[torus][io]") {
    std::mt19937_64 rng(29);
    auto g = make_grid(16, 8, 1.0, 0.5);
    Field f = random_field(g, rng, 3.0);
    f[7] = 1e-300;
    std::stringstream ss;
    write_field(ss, f, "# note = 1\n");
    Field back = read_field(ss);
    CHECK(back.grid().same_shape(*g));
    for (std::size_t k = 0; k < f.size(); ++k) CHECK(back[k] == f[k]);
}

TEST_CASE("Malformed field files are rejected", "[torus][io]") {
    auto bad = [](const std::string& text) {
        std::istringstream is(text);
        return read_field(is);
    };
    std::string rows;
    for (int j = 0; j < 8; ++j) rows += "0 0 0 0 0 0 0 0\n";
    const std::string header = "# torus-field nx=8 ny=8 Lx=1 Ly=1\n";
    CHECK_NOTHROW(bad(header + rows));
    CHECK_THROWS_AS(bad(""), FormatError);
    CHECK_THROWS_AS(bad("# torus nx=8 ny=8 Lx=1 Ly=1\n" + rows), FormatError);
    CHECK_THROWS_AS(bad("# torus-field nx=7 ny=8 Lx=1 Ly=1\n" + rows), FormatError);
    CHECK_THROWS_AS(bad(header + rows.substr(0, rows.size() - 16)), FormatError);
    CHECK_THROWS_AS(bad(header + "0 0 0\n" + rows.substr(16)), FormatError);
    CHECK_THROWS_AS(bad(header + "0 0 0 0 0 0 0 abc\n" + rows.substr(16)), FormatError);
    CHECK_THROWS_AS(bad(header + "0 0 0 0 0 0 0 nan\n" + rows.substr(16)), FormatError);
    CHECK_THROWS_AS(bad(header + rows + "0 0 0 0 0 0 0 0\n"), FormatError);
    CHECK_THROWS_AS(bad(header + rows.substr(0, 16) + "# x\n" + rows.substr(16)), FormatError);
}
