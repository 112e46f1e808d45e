#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <cstdio>
#include <fstream>
#include <random>

#include "invlab/grid.hpp"

using namespace invlab;

TEST_CASE("build_grid basics") {
    Grid2D g = build_grid(4);
    CHECK(g.nodes() == 25);
    CHECK(g.boundary_nodes() == 16);
    CHECK(build_grid(64).h == 1.0 / 64);
    CHECK_THROWS_AS(build_grid(3), InvalidResolutionError);
}

TEST_CASE("boundary walk is the topological boundary, weights sum to perimeter") {
    for (int n : {4, 7, 16}) {
        Grid2D g = build_grid(n);
        const auto& walk = boundary_walk(g);
        CHECK(static_cast<int>(walk.size()) == 4 * n);
        BoundaryData b(g);
        double wsum = 0.0;
        for (double w : b.w) wsum += w;
        CHECK(std::abs(wsum - 4.0) < 1e-12 * 4.0);
    }
}

TEST_CASE("boundary_trace constants and coordinates") {
    Grid2D g = build_grid(8);
    auto one = make_field(g, [](double, double) { return cplx(1.0); });
    for (const cplx& z : boundary_trace(one).v) CHECK(z == cplx(1.0));

    auto xf = make_field(g, [](double x, double) { return cplx(x); });
    BoundaryData t = boundary_trace(xf);
    const auto& walk = boundary_walk(g);
    for (std::size_t k = 0; k < walk.size(); ++k) CHECK(t.v[k] == cplx(g.x(walk[k].i)));
}

TEST_CASE("boundary_trace matches an independent index walk on a random field") {
    Grid2D g = build_grid(9);
    std::mt19937_64 rng(7);
    std::uniform_real_distribution<double> u(-1, 1);
    ScalarField f(g);
    for (cplx& z : f.v) z = cplx(u(rng), u(rng));
    BoundaryData t = boundary_trace(f);

    // Oracle: walk the rectangle counterclockwise by hand.
    std::size_t k = 0;
    int n = g.n;
    auto expect = [&](int i, int j) {
        CHECK(t.v[k] == f.at(i, j));
        ++k;
    };
    for (int i = 0; i <= n; ++i) expect(i, 0);
    for (int j = 1; j <= n; ++j) expect(n, j);
    for (int i = n - 1; i >= 0; --i) expect(i, n);
    for (int j = n - 1; j >= 1; --j) expect(0, j);
    CHECK(k == t.v.size());
}

TEST_CASE("normal_derivative exact on linear and quadratic fields") {
    Grid2D g = build_grid(16);
    auto xf = make_field(g, [](double x, double) { return cplx(x); });
    BoundaryData d = normal_derivative(xf);
    const auto& walk = boundary_walk(g);
    for (std::size_t k = 0; k < walk.size(); ++k) {
        if (walk[k].is_corner) continue;
        double want = walk[k].face == 1 ? 1.0 : (walk[k].face == 3 ? -1.0 : 0.0);
        CHECK(std::abs(d.v[k].real() - want) < 1e-12);
    }
    auto x2 = make_field(g, [](double x, double) { return cplx(x * x); });
    BoundaryData d2 = normal_derivative(x2);
    for (std::size_t k = 0; k < walk.size(); ++k) {
        if (walk[k].is_corner || walk[k].face != 1) continue;
        CHECK(std::abs(d2.v[k].real() - 2.0) < 1e-11);
    }
}

TEST_CASE("normal_derivative second-order convergence against the analytic derivative") {
    auto err_at = [](int n) {
        Grid2D g = build_grid(n);
        auto u = make_field(g, [](double x, double y) { return cplx(std::sin(M_PI * x) * std::sin(M_PI * y)); });
        BoundaryData d = normal_derivative(u);
        const auto& walk = boundary_walk(g);
        double worst = 0.0;
        for (std::size_t k = 0; k < walk.size(); ++k) {
            if (walk[k].face != 1 || walk[k].is_corner) continue;
            double want = -M_PI * std::sin(M_PI * g.y(walk[k].j)); // d/dx at x=1, outward
            worst = std::max(worst, std::abs(d.v[k].real() - want));
        }
        return worst;
    };
    double e32 = err_at(32), e64 = err_at(64);
    double ratio = e32 / e64;
    CHECK(ratio > 3.5);
    CHECK(ratio < 4.5);
}

TEST_CASE("boundary_integral trivial values") {
    Grid2D g = build_grid(12);
    auto one = make_boundary(g, [](double, double) { return cplx(1.0); });
    CHECK(std::abs(boundary_integral(one, one) - cplx(4.0)) < 1e-12);
    auto xb = make_boundary(g, [](double x, double) { return cplx(x); });
    CHECK(std::abs(boundary_integral(one, xb) - cplx(2.0)) < 1e-12);

    Grid2D g2 = build_grid(10);
    auto other = make_boundary(g2, [](double, double) { return cplx(1.0); });
    CHECK_THROWS_AS(boundary_integral(one, other), ShapeError);
}

TEST_CASE("boundary_integral converges at second order on oscillatory data") {
    auto value_at = [](int n) {
        Grid2D g = build_grid(n);
        auto a = make_boundary(g, [](double x, double y) { return cplx(std::cos(3 * x + y)); });
        auto b = make_boundary(g, [](double x, double y) { return cplx(std::sin(2 * x - y)); });
        return boundary_integral(a, b).real();
    };
    double ref = value_at(512);
    double e32 = std::abs(value_at(32) - ref), e64 = std::abs(value_at(64) - ref);
    CHECK(e32 / e64 > 3.5);
    CHECK(e32 / e64 < 4.5);
}

TEST_CASE("volume_integral exactness and analytic values") {
    Grid2D g = build_grid(20);
    CHECK(std::abs(volume_integral(make_field(g, [](double, double) { return cplx(1.0); })) - cplx(1.0)) < 1e-14);
    CHECK(std::abs(volume_integral(make_field(g, [](double x, double y) { return cplx(x * y); })) - cplx(0.25)) < 1e-14);

    auto sinsin = [](double x, double y) { return cplx(std::sin(M_PI * x) * std::sin(M_PI * y)); };
    double want = 4.0 / (M_PI * M_PI);
    double e32 = std::abs(volume_integral(make_field(build_grid(32), sinsin)).real() - want);
    double e64 = std::abs(volume_integral(make_field(build_grid(64), sinsin)).real() - want);
    CHECK(e64 < 1e-3);
    CHECK(e32 / e64 > 3.5);
    CHECK(e32 / e64 < 4.5);
}

TEST_CASE("linearity of trace, normal derivative and integrals") {
    Grid2D g = build_grid(11);
    std::mt19937_64 rng(21);
    std::uniform_real_distribution<double> u(-1, 1);
    ScalarField f1(g), f2(g);
    for (int k = 0; k < g.nodes(); ++k) {
        f1.v[k] = cplx(u(rng), u(rng));
        f2.v[k] = cplx(u(rng), u(rng));
    }
    cplx a(u(rng), u(rng)), b(u(rng), u(rng));
    ScalarField combo(g);
    for (int k = 0; k < g.nodes(); ++k) combo.v[k] = a * f1.v[k] + b * f2.v[k];

    BoundaryData t1 = boundary_trace(f1), t2 = boundary_trace(f2), tc = boundary_trace(combo);
    BoundaryData d1 = normal_derivative(f1), d2 = normal_derivative(f2), dc = normal_derivative(combo);
    for (std::size_t k = 0; k < tc.v.size(); ++k) {
        CHECK(std::abs(tc.v[k] - (a * t1.v[k] + b * t2.v[k])) < 1e-12);
        CHECK(std::abs(dc.v[k] - (a * d1.v[k] + b * d2.v[k])) < 1e-9); // 1/h amplification
    }
    cplx vi = volume_integral(combo);
    cplx vi_lin = a * volume_integral(f1) + b * volume_integral(f2);
    CHECK(std::abs(vi - vi_lin) < 1e-12);
}

TEST_CASE("boundary CSV carries arc length and weights") {
    Grid2D g = build_grid(4);
    BoundaryData b = make_boundary(g, [](double x, double y) { return cplx(x, y); });
    std::string path = "test_boundary.csv";
    write_boundary_csv(b, path);
    std::ifstream in(path);
    std::string header, first;
    std::getline(in, header);
    std::getline(in, first);
    CHECK(header == "s,re,im,weight");
    CHECK(first == "0,0,0,0.25"); // corner (0,0): s = 0, weight = h
    in.close();
    std::remove(path.c_str());
}

TEST_CASE("field CSV round trip") {
    Grid2D g = build_grid(6);
    std::mt19937_64 rng(3);
    std::uniform_real_distribution<double> u(-5, 5);
    ScalarField f(g);
    for (cplx& z : f.v) z = cplx(u(rng), u(rng));
    std::string path = "test_field_roundtrip.csv";
    write_field_csv(f, path);
    ScalarField back = read_field_csv(path);
    REQUIRE(back.grid.n == g.n);
    for (int k = 0; k < g.nodes(); ++k) CHECK(back.v[k] == f.v[k]);
    std::remove(path.c_str());
}
