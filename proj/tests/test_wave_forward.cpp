#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <cstdio>
#include <fstream>

#include "invlab/multilin.hpp"
#include "invlab/wave.hpp"

using namespace invlab;

namespace {

double pulse(double t) {
    double s = (t - 0.1) / 0.1;
    return (s > 0 && s < 1) ? std::sin(M_PI * s) * std::sin(M_PI * s) : 0.0;
}

std::function<double(double, double)> bump(double c, double w, double t0, double tw) {
    return [=](double t, double x) {
        double sx = (x - c) / w, st = (t - t0) / tw;
        double gx = std::abs(sx) < 1 ? std::cos(M_PI * sx / 2) : 0.0;
        double gt = std::abs(st) < 1 ? std::cos(M_PI * st / 2) : 0.0;
        return gx * gx * gt * gt;
    };
}

} // namespace

TEST_CASE("grid invariants") {
    SpaceTimeGrid g = make_st_grid(256, 1024, 4.0);
    CHECK(g.lambda() == 1.0);
    CHECK(g.dt() * g.nt == 4.0);
    CHECK_THROWS_AS((void)make_st_grid(256, 200, 4.0), InstabilityError); // lambda > 1
    CHECK_THROWS_AS((void)make_st_grid(2, 100, 1.0), InvalidResolutionError);
}

TEST_CASE("d'Alembert transport is bit-exact at lambda = 1 before the reflection returns") {
    SpaceTimeGrid g = make_st_grid(256, 1024, 4.0);
    SpaceTimeField q(g);
    WaveSource s;
    s.control = make_control(g, 0, pulse);
    SpaceTimeField u = solve_wave(q, 2, s);
    for (int j = 0; j <= g.nt; ++j)
        for (int i = 0; i <= g.nx; ++i) {
            if (g.t(j) + g.x(i) >= 2.05) continue; // reflected support has not arrived
            CHECK(u.at(j, i) == pulse(g.t(j) - g.x(i)));
        }
}

TEST_CASE("zero control gives the zero solution") {
    SpaceTimeGrid g = make_st_grid(64, 128, 2.0);
    SpaceTimeField q = make_st_field(g, [](double, double) { return 1.0; });
    WaveSource s;
    s.control = BoundaryTimeData(g);
    CHECK(solve_wave(q, 2, s).norm_inf() == 0.0);
}

TEST_CASE("discrete energy is conserved after the control ends at lambda < 1") {
    SpaceTimeGrid g = make_st_grid(128, 270, 2.0); // lambda ~ 0.948
    SpaceTimeField q(g);
    WaveSource s;
    s.control = make_control(g, 0, pulse);
    SpaceTimeField u = solve_wave(q, 2, s);
    int j0 = static_cast<int>(std::ceil(0.25 / g.dt()));
    double e0 = leapfrog_energy(u, j0);
    REQUIRE(e0 > 0.0);
    for (int j = j0; j < g.nt; ++j)
        CHECK(std::abs(leapfrog_energy(u, j) - e0) <= 1e-10 * e0);
}

TEST_CASE("finite propagation speed is exact by stencil locality") {
    SpaceTimeGrid g = make_st_grid(128, 270, 2.0);
    SpaceTimeField q = make_st_field(g, [](double, double) { return 2.0; });
    WaveSource s;
    s.control = make_control(g, 0, pulse);
    SpaceTimeField u = solve_wave(q, 2, s);
    int j0 = static_cast<int>(0.1 / g.dt()); // index of the first nonzero control sample
    for (int j = 0; j <= g.nt; ++j)
        for (int i = 0; i <= g.nx; ++i)
            if (i > j - j0) CHECK(u.at(j, i) == 0.0);
}

TEST_CASE("nonlinear correction scales quadratically for m = 2") {
    SpaceTimeGrid g = make_st_grid(128, 256, 2.0);
    SpaceTimeField q = make_st_field(g, [](double, double) { return 1.0; });
    SpaceTimeField q0(g);
    auto corr = [&](double amp) {
        WaveSource s;
        s.control = make_control(g, 0, [=](double t) { return amp * pulse(t); });
        SpaceTimeField u = solve_wave(q, 2, s), ul = solve_wave(q0, 2, s);
        double w = 0.0;
        for (std::size_t k = 0; k < u.v.size(); ++k) w = std::max(w, std::abs(u.v[k] - ul.v[k]));
        return w;
    };
    double r = corr(2e-3) / corr(1e-3);
    CHECK(r > 3.6);
    CHECK(r < 4.4);
}

TEST_CASE("blow-up detector flags departure from the small-data regime") {
    SpaceTimeGrid g = make_st_grid(128, 512, 4.0);
    SpaceTimeField q = make_st_field(g, [](double, double) { return 50.0; });
    WaveSource s;
    s.control = make_control(g, 0, [](double t) {
        double u = (t - 0.1) / 0.4;
        return (u > 0 && u < 1) ? -std::sin(M_PI * u) * std::sin(M_PI * u) : 0.0;
    });
    CHECK_THROWS_AS((void)solve_wave(q, 2, s), InstabilityError);
}

TEST_CASE("wave DtN: zero map, arrival derivative, time-shift equivariance") {
    SpaceTimeGrid g = make_st_grid(256, 512, 2.0);
    SpaceTimeField q(g);
    WaveDtn dtn = wave_dtn(q, 2, 10.0);

    CHECK(dtn(BoundaryTimeData(g)).norm_inf() == 0.0);

    // Arriving pulse at x=1 with the Dirichlet reflection: d_nu u ~ -2 f'(t-1).
    BoundaryTimeData f = make_control(g, 0, pulse);
    BoundaryTimeData lf = dtn(f);
    double worst = 0.0, scale = 0.0;
    for (int j = 0; j <= g.nt; ++j) {
        double t = g.t(j);
        if (t < 1.02 || t > 1.28) continue;
        double dfdt = (pulse(t - 1 + 1e-6) - pulse(t - 1 - 1e-6)) / 2e-6;
        worst = std::max(worst, std::abs(lf.at(1, j) + 2.0 * dfdt));
        scale = std::max(scale, std::abs(2.0 * dfdt));
    }
    CHECK(worst <= 0.06 * scale);

    // Time-independent q: shifting the control shifts the trace.
    SpaceTimeField qx = make_st_field(g, [](double, double x) { return 1.0 + x; });
    WaveDtn dq = wave_dtn(qx, 2, 10.0);
    int shift = 64;
    BoundaryTimeData fs = make_control(g, 0, [&](double t) { return pulse(t - shift * g.dt()); });
    BoundaryTimeData a = dq(f), b = dq(fs);
    for (int j = 0; j + shift <= g.nt; ++j) {
        CHECK(std::abs(b.at(0, j + shift) - a.at(0, j)) < 1e-12);
        CHECK(std::abs(b.at(1, j + shift) - a.at(1, j)) < 1e-12);
    }

    BoundaryTimeData big = make_control(g, 0, [](double) { return 20.0; });
    CHECK_THROWS_AS(dtn(big), AdmissibilityError);
}

TEST_CASE("divided differences below the leading order m vanish to the finite-eps floor") {
    SpaceTimeGrid g = make_st_grid(128, 256, 2.0);
    SpaceTimeField q = make_st_field(g, [](double, double) { return 1.0; });
    WaveDtn dtn = wave_dtn(q, 3, 1.0);
    BoundaryTimeData f = make_control(g, 0, pulse);
    auto dd2 = [&](double eps) {
        return mixed_derivative_dtn(dtn, std::vector<BoundaryTimeData>{f, f},
                                    EpsilonSchedule::uniform(2, eps))
            .norm_inf();
    };
    double d1 = dd2(1e-2), d2 = dd2(5e-3);
    CHECK(d1 <= 15.0 * 1e-2);     // leak is the third-order term, O(eps)
    CHECK(d1 / d2 > 1.7);          // and it halves with eps
    CHECK(d1 / d2 < 2.5);
}

TEST_CASE("spacetime field and control CSV schemas") {
    SpaceTimeGrid g = make_st_grid(4, 4, 1.0);
    SpaceTimeField u(g);
    u.at(1, 2) = 3.5;
    write_st_field_csv(u, "test_stfield.csv");
    write_control_csv(make_control(g, 1, [](double t) { return t; }), "test_control.csv");
    std::ifstream f1("test_stfield.csv"), f2("test_control.csv");
    std::string h1, h2;
    std::getline(f1, h1);
    std::getline(f2, h2);
    CHECK(h1 == "t,x,value");
    CHECK(h2 == "side,t,value");
    f1.close();
    f2.close();
    std::remove("test_stfield.csv");
    std::remove("test_control.csv");
}

TEST_CASE("fourth linearization: zero coefficient, cubic truncation rate, disjoint sources") {
    SpaceTimeGrid g = make_st_grid(128, 256, 2.0);
    SpaceTimeField a = make_st_field(g, [](double, double) { return 1.0; });
    std::vector<SpaceTimeField> srcs = {
        make_st_field(g, bump(0.45, 0.2, 0.5, 0.25)),
        make_st_field(g, bump(0.55, 0.2, 0.55, 0.25)),
        make_st_field(g, bump(0.5, 0.25, 0.6, 0.3)),
        make_st_field(g, bump(0.5, 0.3, 0.45, 0.25)),
    };

    SpaceTimeField a0(g);
    CHECK(fourth_linearization_check(a0, srcs, {4e-2, 4e-2, 4e-2, 4e-2}) < 1e-6);

    // Pure quartic at zero background has no odd corrections: the divided
    // difference truncates at O(eps^3), so halving divides the residual by ~8.
    double r1 = fourth_linearization_check(a, srcs, {1.28, 1.28, 1.28, 1.28});
    double r2 = fourth_linearization_check(a, srcs, {0.64, 0.64, 0.64, 0.64});
    double r3 = fourth_linearization_check(a, srcs, {0.32, 0.32, 0.32, 0.32});
    CHECK(r1 / r2 > 6.5);
    CHECK(r1 / r2 < 9.5);
    CHECK(r2 / r3 > 6.5);
    CHECK(r2 / r3 < 9.5);

    std::vector<SpaceTimeField> far = {
        make_st_field(g, bump(0.15, 0.08, 1.85, 0.1)),
        make_st_field(g, bump(0.85, 0.08, 1.85, 0.1)),
        make_st_field(g, bump(0.15, 0.08, 1.85, 0.1)),
        make_st_field(g, bump(0.85, 0.08, 1.85, 0.1)),
    };
    CHECK(fourth_linearization_check(a, far, {4e-2, 4e-2, 4e-2, 4e-2}) == 0.0);
}
