#include "invlab/wave.hpp"

#include <cmath>
#include <fstream>

namespace invlab {

SpaceTimeGrid make_st_grid(int nx, int nt, double T) {
    if (nx < 4 || nt < 4) throw InvalidResolutionError("make_st_grid: nx and nt must be >= 4");
    if (!(T > 0.0)) throw ShapeError("make_st_grid: T must be positive");
    SpaceTimeGrid g{nx, nt, T};
    if (g.lambda() > 1.0 + 1e-14)
        throw InstabilityError("make_st_grid: Courant ratio " + fmt_g17(g.lambda()) + " exceeds 1");
    return g;
}

double SpaceTimeField::norm_inf() const {
    double m = 0.0;
    for (double x : v) m = std::max(m, std::abs(x));
    return m;
}

SpaceTimeField make_st_field(const SpaceTimeGrid& g, const std::function<double(double, double)>& f_tx) {
    SpaceTimeField u(g);
    for (int j = 0; j <= g.nt; ++j)
        for (int i = 0; i <= g.nx; ++i) u.at(j, i) = f_tx(g.t(j), g.x(i));
    return u;
}

double BoundaryTimeData::norm_inf() const {
    double m = 0.0;
    for (double x : v) m = std::max(m, std::abs(x));
    return m;
}

BoundaryTimeData make_control(const SpaceTimeGrid& g, int side, const std::function<double(double)>& f_t) {
    if (side != 0 && side != 1) throw ShapeError("make_control: side must be 0 or 1");
    BoundaryTimeData b(g);
    for (int j = 0; j <= g.nt; ++j) b.at(side, j) = f_t(g.t(j));
    return b;
}

double boundary_time_integral(const BoundaryTimeData& a, const BoundaryTimeData& b) {
    if (!a.stg.same(b.stg)) throw ShapeError("boundary_time_integral: grid mismatch");
    Kahan s;
    for (std::size_t k = 0; k < a.v.size(); ++k) s.add(a.v[k] * b.v[k]);
    return s.sum() * a.weight();
}

SpaceTimeField solve_wave(const SpaceTimeField& q, int m, const WaveSource& src,
                          const WaveOptions& opt) {
    const SpaceTimeGrid& g = q.stg;
    if (!src.control.stg.same(g)) throw ShapeError("solve_wave: control grid mismatch");
    if (src.interior && !src.interior->stg.same(g)) throw ShapeError("solve_wave: source grid mismatch");
    if (m < 2) throw ShapeError("solve_wave: m must be >= 2");
    const double lam = g.lambda();
    if (lam > 1.0 + 1e-14) throw InstabilityError("solve_wave: Courant ratio exceeds 1");
    const bool unit_lambda = (lam == 1.0);
    const double lam2 = lam * lam;
    const double dt2 = g.dt() * g.dt();
    const int nx = g.nx;

    double data_scale = src.control.norm_inf();
    if (src.interior) data_scale = std::max(data_scale, g.T * g.T * src.interior->norm_inf());
    const double cap = opt.blowup_factor * data_scale;

    SpaceTimeField u(g);
    for (int j = 0; j <= 1 && j <= g.nt; ++j) {
        // zero initial data: both starting rows vanish in the interior
        u.at(j, 0) = src.control.at(0, j);
        u.at(j, nx) = src.control.at(1, j);
    }
    for (int j = 1; j < g.nt; ++j) {
        double row_max = 0.0;
        for (int i = 1; i < nx; ++i) {
            double uc = u.at(j, i);
            double up = u.at(j, i + 1), um = u.at(j, i - 1), ut = u.at(j - 1, i);
            double load = q.at(j, i) * ipow(uc, m);
            if (src.interior) load -= src.interior->at(j, i);
            double next;
            if (unit_lambda) {
                // the update telescopes at lambda = 1; this ordering transports
                // right-moving data without rounding
                next = ((up - ut) + um) - dt2 * load;
            } else {
                next = 2.0 * uc - ut + lam2 * (up - 2.0 * uc + um) - dt2 * load;
            }
            u.at(j + 1, i) = next;
            row_max = std::max(row_max, std::abs(next));
        }
        u.at(j + 1, 0) = src.control.at(0, j + 1);
        u.at(j + 1, nx) = src.control.at(1, j + 1);
        if (data_scale > 0.0 && row_max > cap)
            throw InstabilityError("solve_wave: solution exceeded " + fmt_g17(opt.blowup_factor) +
                                   " x data scale at t = " + fmt_g17(g.t(j + 1)) +
                                   " (left the small-data regime)");
        if (!std::isfinite(row_max))
            throw InstabilityError("solve_wave: solution became non-finite at t = " + fmt_g17(g.t(j + 1)));
    }
    return u;
}

double leapfrog_energy(const SpaceTimeField& u, int j) {
    const SpaceTimeGrid& g = u.stg;
    if (j < 0 || j + 1 > g.nt) throw ShapeError("leapfrog_energy: step out of range");
    const double dt = g.dt(), dx = g.dx();
    Kahan s;
    for (int i = 0; i <= g.nx; ++i) {
        double vt = (u.at(j + 1, i) - u.at(j, i)) / dt;
        s.add(vt * vt * dx);
    }
    for (int i = 0; i < g.nx; ++i) {
        double ga = (u.at(j, i + 1) - u.at(j, i)) / dx;
        double gb = (u.at(j + 1, i + 1) - u.at(j + 1, i)) / dx;
        s.add(ga * gb * dx);
    }
    return s.sum();
}

BoundaryTimeData lateral_normal_derivative(const SpaceTimeField& u) {
    const SpaceTimeGrid& g = u.stg;
    if (g.nx < 4) throw InvalidResolutionError("lateral_normal_derivative: nx too small for the stencil");
    BoundaryTimeData out(g);
    const double h2 = 2.0 * g.dx();
    for (int j = 0; j <= g.nt; ++j) {
        out.at(0, j) = (3.0 * u.at(j, 0) - 4.0 * u.at(j, 1) + u.at(j, 2)) / h2;
        out.at(1, j) = (3.0 * u.at(j, g.nx) - 4.0 * u.at(j, g.nx - 1) + u.at(j, g.nx - 2)) / h2;
    }
    return out;
}

WaveDtn::WaveDtn(SpaceTimeField q, int m, double delta, WaveOptions opt)
    : q_(std::move(q)), m_(m), delta_(delta), opt_(opt) {
    if (m_ < 2) throw ShapeError("WaveDtn: m must be >= 2");
    if (!(delta_ > 0.0)) throw ShapeError("WaveDtn: delta must be positive");
}

BoundaryTimeData WaveDtn::operator()(const BoundaryTimeData& f) const {
    if (f.norm_inf() > delta_)
        throw AdmissibilityError("WaveDtn: ||f||_inf exceeds delta = " + fmt_g17(delta_));
    calls_.fetch_add(1);
    WaveSource src;
    src.control = f;
    return lateral_normal_derivative(solve_wave(q_, m_, src, opt_));
}

WaveDtn wave_dtn(const SpaceTimeField& q, int m, double delta) { return WaveDtn(q, m, delta); }

double fourth_linearization_check(const SpaceTimeField& a,
                                  const std::vector<SpaceTimeField>& sources,
                                  const std::vector<double>& eps) {
    const SpaceTimeGrid& g = a.stg;
    if (sources.size() != 4 || eps.size() != 4)
        throw ShapeError("fourth_linearization_check: need four sources and four eps");
    for (const auto& f : sources)
        if (!f.stg.same(g)) throw ShapeError("fourth_linearization_check: source grid mismatch");
    for (double e : eps)
        if (!(e > 0.0)) throw ScheduleError("fourth_linearization_check: eps must be positive");

    SpaceTimeField zero_q(g);
    BoundaryTimeData no_control(g);

    // Linearized waves: box u_j = f_j.
    std::vector<SpaceTimeField> lin;
    lin.reserve(4);
    for (const auto& f : sources) {
        WaveSource s;
        s.control = no_control;
        s.interior = f;
        lin.push_back(solve_wave(zero_q, 4, s));
    }

    // w = mixed divided difference over the 16 source subsets (empty set gives
    // the zero solution and is skipped).
    std::vector<SpaceTimeField> runs(16, SpaceTimeField(g));
    parallel_for(15, [&](std::size_t t) {
        unsigned mask = static_cast<unsigned>(t) + 1;
        SpaceTimeField f(g);
        for (int j = 0; j < 4; ++j)
            if (mask >> j & 1u)
                for (std::size_t k = 0; k < f.v.size(); ++k)
                    f.v[k] += eps[static_cast<std::size_t>(j)] * sources[static_cast<std::size_t>(j)].v[k];
        WaveSource s;
        s.control = no_control;
        s.interior = std::move(f);
        runs[mask] = solve_wave(a, 4, s);
    });

    SpaceTimeField w(g);
    double inv = 1.0 / (eps[0] * eps[1] * eps[2] * eps[3]);
    for (unsigned mask = 1; mask < 16; ++mask) {
        int bits = 0;
        for (int j = 0; j < 4; ++j) bits += static_cast<int>(mask >> j & 1u);
        double sign = ((4 - bits) % 2 == 0) ? 1.0 : -1.0;
        for (std::size_t k = 0; k < w.v.size(); ++k) w.v[k] += sign * inv * runs[mask].v[k];
    }

    // residual of box w + 24 a u1 u2 u3 u4 on interior nodes
    const double idt2 = 1.0 / (g.dt() * g.dt());
    const double idx2 = 1.0 / (g.dx() * g.dx());
    double worst = 0.0;
    for (int j = 1; j < g.nt; ++j)
        for (int i = 1; i < g.nx; ++i) {
            double box = (w.at(j + 1, i) - 2.0 * w.at(j, i) + w.at(j - 1, i)) * idt2 -
                         (w.at(j, i + 1) - 2.0 * w.at(j, i) + w.at(j, i - 1)) * idx2;
            double prod = lin[0].at(j, i) * lin[1].at(j, i) * lin[2].at(j, i) * lin[3].at(j, i);
            worst = std::max(worst, std::abs(box + 24.0 * a.at(j, i) * prod));
        }
    return worst;
}

void write_st_field_csv(const SpaceTimeField& u, const std::string& path) {
    std::ofstream out(path);
    if (!out) throw Error("cannot open for writing: " + path);
    out << "t,x,value\n";
    for (int j = 0; j <= u.stg.nt; ++j)
        for (int i = 0; i <= u.stg.nx; ++i)
            out << fmt_g17(u.stg.t(j)) << ',' << fmt_g17(u.stg.x(i)) << ',' << fmt_g17(u.at(j, i)) << '\n';
}

void write_control_csv(const BoundaryTimeData& b, const std::string& path) {
    std::ofstream out(path);
    if (!out) throw Error("cannot open for writing: " + path);
    out << "side,t,value\n";
    for (int side = 0; side <= 1; ++side)
        for (int j = 0; j <= b.stg.nt; ++j)
            out << side << ',' << fmt_g17(b.stg.t(j)) << ',' << fmt_g17(b.at(side, j)) << '\n';
}

} // namespace invlab
