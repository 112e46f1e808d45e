#include "invlab/wave_recon.hpp"

#include <cmath>

namespace invlab {

std::size_t DiamondRegion::count() const {
    std::size_t c = 0;
    for (std::uint8_t b : mask) c += b != 0;
    return c;
}

void DiamondRegion::check_invariant() const {
    for (int j = 0; j <= stg.nt; ++j)
        for (int i = 0; i <= stg.nx; ++i) {
            if (!at(j, i)) continue;
            double t = stg.t(j), x = stg.x(i);
            double near_side = std::min(x, 1.0 - x);
            if (!(t > near_side && stg.T - t > near_side))
                throw RegionError("DiamondRegion: masked node outside the causal diamond");
        }
}

namespace {

DiamondRegion build_region(const SpaceTimeGrid& stg,
                           const std::function<bool(double, double)>& pred) {
    DiamondRegion r;
    r.stg = stg;
    r.mask.assign(static_cast<std::size_t>(stg.nodes()), 0);
    for (int j = 0; j <= stg.nt; ++j)
        for (int i = 0; i <= stg.nx; ++i)
            if (pred(stg.t(j), stg.x(i)))
                r.mask[static_cast<std::size_t>(j) * (stg.nx + 1) + static_cast<std::size_t>(i)] = 1;
    return r;
}

} // namespace

DiamondRegion diamond_region(const SpaceTimeGrid& stg) {
    return build_region(stg, [&](double t, double x) {
        double near_side = std::min(x, 1.0 - x);
        return t > near_side && stg.T - t > near_side;
    });
}

DiamondRegion pulse_region(const SpaceTimeGrid& stg, double sigma_p) {
    const double margin = 5.0 * sigma_p + 2.0 * stg.dx();
    return build_region(stg, [&](double t, double x) {
        double near_side = std::min(x, 1.0 - x), far_side = std::max(x, 1.0 - x);
        return t > far_side + margin && stg.T - t > near_side + margin;
    });
}

double PulseTriple::profile(double t, double s, double sigma) {
    double d = (t - s) / sigma;
    return std::abs(d) > 6.0 ? 0.0 : std::exp(-d * d);
}

BoundaryTimeData PulseTriple::control1(const SpaceTimeGrid& g) const {
    return make_control(g, pair_side, [&](double t) { return profile(t, s1, sigma); });
}

BoundaryTimeData PulseTriple::control2(const SpaceTimeGrid& g) const {
    return make_control(g, 1 - pair_side, [&](double t) { return profile(t, s2, sigma); });
}

BoundaryTimeData PulseTriple::weight3(const SpaceTimeGrid& g) const {
    // Trace of the free transport wave launched with f3: it reaches the
    // opposite side one unit of time later.
    BoundaryTimeData w(g);
    for (int j = 0; j <= g.nt; ++j) {
        w.at(pair_side, j) = profile(g.t(j), s3, sigma);
        w.at(1 - pair_side, j) = profile(g.t(j), s3 + 1.0, sigma);
    }
    return w;
}

double PulseTriple::v1(double t, double x) const {
    double phase = pair_side == 0 ? t - x : t - (1.0 - x);
    return profile(phase, s1, sigma);
}

double PulseTriple::v2(double t, double x) const {
    double phase = pair_side == 0 ? t - (1.0 - x) : t - x;
    return profile(phase, s2, sigma);
}

double PulseTriple::v3(double t, double x) const {
    double phase = pair_side == 0 ? t - x : t - (1.0 - x);
    return profile(phase, s3, sigma);
}

double pulse_overlap_mass(double sigma) { return M_PI / (2.0 * std::sqrt(2.0)) * sigma * sigma; }

PulseTriple design_pulses(const SpaceTimeGrid& stg, double t0, double x0, double sigma_p) {
    if (!(sigma_p > 0.0)) throw ShapeError("design_pulses: sigma_p must be positive");
    const double margin = 5.0 * sigma_p + 2.0 * stg.dx();
    double near_side = std::min(x0, 1.0 - x0), far_side = std::max(x0, 1.0 - x0);
    if (!(t0 > far_side + margin && stg.T - t0 > near_side + margin))
        throw RegionError("design_pulses: target (" + fmt_g17(t0) + ", " + fmt_g17(x0) +
                          ") outside the pulse-admissible diamond");
    PulseTriple p;
    p.sigma = sigma_p;
    p.pair_side = (x0 >= 0.5) ? 0 : 1;
    double dist_pair = (p.pair_side == 0) ? x0 : 1.0 - x0;   // travel time from the pair side
    p.s1 = p.s3 = t0 - dist_pair;
    p.s2 = t0 - (1.0 - dist_pair);
    return p;
}

namespace {

double scan_rel_l2(const std::vector<double>& truth, const std::vector<double>& err) {
    long double num = 0.0L, den = 0.0L;
    for (std::size_t k = 0; k < truth.size(); ++k) {
        num += static_cast<long double>(err[k]) * err[k];
        den += static_cast<long double>(truth[k]) * truth[k];
    }
    if (den == 0.0L) return static_cast<double>(std::sqrt(static_cast<double>(num)));
    return static_cast<double>(std::sqrt(static_cast<double>(num / den)));
}

struct ScanLattice {
    std::vector<double> t, x;
};

ScanLattice build_scan(const SpaceTimeGrid& g, const ScanOptions& opt) {
    ScanLattice s;
    const double margin = 5.0 * opt.point.sigma_p + 2.0 * g.dx();
    const double lateral = 2.0 * g.dx();
    int kt_max = static_cast<int>(g.T / opt.spacing_t);
    int kx_max = static_cast<int>(1.0 / opt.spacing_x);
    for (int kt = 1; kt <= kt_max; ++kt)
        for (int kx = 1; kx <= kx_max; ++kx) {
            double t0 = kt * opt.spacing_t, x0 = kx * opt.spacing_x;
            if (x0 < lateral || x0 > 1.0 - lateral) continue;
            double near_side = std::min(x0, 1.0 - x0), far_side = std::max(x0, 1.0 - x0);
            if (t0 > far_side + margin && g.T - t0 > near_side + margin) {
                s.t.push_back(t0);
                s.x.push_back(x0);
            }
        }
    return s;
}

double field_value(const SpaceTimeField& q, double t0, double x0) {
    // bilinear interpolation on the spacetime grid
    const SpaceTimeGrid& g = q.stg;
    double jt = t0 / g.dt(), ix = x0 / g.dx();
    int j = std::min(static_cast<int>(jt), g.nt - 1);
    int i = std::min(static_cast<int>(ix), g.nx - 1);
    double a = jt - j, b = ix - i;
    return (1 - a) * ((1 - b) * q.at(j, i) + b * q.at(j, i + 1)) +
           a * ((1 - b) * q.at(j + 1, i) + b * q.at(j + 1, i + 1));
}

} // namespace

ScanResult reconstruct_q_diamond(const WaveDtn& oracle, const SpaceTimeField& q_true,
                                 const ScanOptions& opt) {
    const SpaceTimeGrid& g = oracle.grid();
    ScanLattice lattice = build_scan(g, opt);

    SpaceTimeField unit_q = make_st_field(g, [](double, double) { return 1.0; });
    WaveDtn reference = wave_dtn(unit_q, 2, oracle.delta());

    ScanResult out;
    out.t = lattice.t;
    out.x = lattice.x;
    out.truth.assign(lattice.t.size(), 0.0);
    out.recon.assign(lattice.t.size(), 0.0);
    out.error.assign(lattice.t.size(), 0.0);

    parallel_for(lattice.t.size(), [&](std::size_t k) {
        double t0 = lattice.t[k], x0 = lattice.x[k];
        double value;
        if (opt.snr_db == snr_off()) {
            value = point_sample_q(oracle, reference, t0, x0, opt.point);
        } else {
            NoisyWaveDtn noisy(oracle, opt.snr_db, opt.seed ^ fnv1a(&k, sizeof k));
            value = point_sample_q(noisy, reference, t0, x0, opt.point);
        }
        out.recon[k] = value;
        out.truth[k] = field_value(q_true, t0, x0);
    });

    if (opt.smooth_t > 0.0 && opt.smooth_x > 0.0) {
        std::vector<double> smoothed(out.recon.size());
        parallel_for(out.recon.size(), [&](std::size_t k) {
            Kahan num, den;
            for (std::size_t j = 0; j < out.recon.size(); ++j) {
                double dt = (out.t[j] - out.t[k]) / opt.smooth_t;
                double dx = (out.x[j] - out.x[k]) / opt.smooth_x;
                if (std::abs(dt) > 3.0 || std::abs(dx) > 3.0) continue;
                double w = std::exp(-0.5 * (dt * dt + dx * dx));
                num.add(w * out.recon[j]);
                den.add(w);
            }
            smoothed[k] = num.sum() / den.sum();
        });
        out.recon = std::move(smoothed);
    }

    for (std::size_t k = 0; k < out.recon.size(); ++k) out.error[k] = out.recon[k] - out.truth[k];
    out.rel_l2 = scan_rel_l2(out.truth, out.error);
    return out;
}

double stability_exponent(int s, int m, int n) {
    return 8.0 * (m - 1) /
           (2.0 * m * (m - 1) * (8 * s - n + 13) + 2.0 * m - 1.0);
}

namespace {

// Oracle blending Lambda_1 toward Lambda_2 at data-space magnitude delta.
struct BlendedOracle {
    const WaveDtn* a;
    const WaveDtn* b;
    double factor; // delta / calibration

    BoundaryTimeData operator()(const BoundaryTimeData& f) const {
        BoundaryTimeData ya = (*a)(f), yb = (*b)(f);
        for (std::size_t k = 0; k < ya.v.size(); ++k) ya.v[k] += factor * (yb.v[k] - ya.v[k]);
        return ya;
    }
    double delta() const { return a->delta(); }
};

double fit_loglog_slope(const std::vector<SweepRow>& rows) {
    // least squares on (log delta, log error), skipping non-positive entries
    double sx = 0, sy = 0, sxx = 0, sxy = 0;
    int n = 0;
    for (const SweepRow& r : rows) {
        if (!(r.delta > 0.0) || !(r.error > 0.0)) continue;
        double lx = std::log(r.delta), ly = std::log(r.error);
        sx += lx; sy += ly; sxx += lx * lx; sxy += lx * ly;
        ++n;
    }
    if (n < 2) return 0.0;
    return (n * sxy - sx * sy) / (n * sxx - sx * sx);
}

} // namespace

SweepResult stability_sweep(const SpaceTimeField& q1, const SpaceTimeField& q2, int m,
                            const std::vector<double>& deltas, int s_theory, int m_theory,
                            const ScanOptions& opt) {
    const SpaceTimeGrid& g = q1.stg;
    if (!q2.stg.same(g)) throw ShapeError("stability_sweep: potential grids differ");
    WaveDtn d1 = wave_dtn(q1, m, 1.0), d2 = wave_dtn(q2, m, 1.0);

    // Calibrate the data-space distance on the combined probe of a central target.
    SpaceTimeField unit_q = make_st_field(g, [](double, double) { return 1.0; });
    WaveDtn reference = wave_dtn(unit_q, 2, 1.0);
    PulseTriple center = design_pulses(g, g.T / 2.0, 0.5, opt.point.sigma_p);
    BoundaryTimeData probe = center.control1(g);
    data_axpy(probe, 1.0, center.control2(g));
    data_scale(probe, opt.point.eps);
    BoundaryTimeData y1 = d1(probe), y2 = d2(probe);
    long double dist2 = 0.0L;
    for (std::size_t k = 0; k < y1.v.size(); ++k) {
        double d = y2.v[k] - y1.v[k];
        dist2 += static_cast<long double>(d) * d;
    }
    double calibration = std::sqrt(static_cast<double>(dist2) * y1.weight());
    if (calibration == 0.0)
        calibration = 1.0; // identical oracles: all perturbations are zero

    ScanLattice lattice = build_scan(g, opt);
    auto run = [&](double delta) {
        BlendedOracle blend{&d1, &d2, delta / calibration};
        std::vector<double> recon(lattice.t.size(), 0.0);
        parallel_for(lattice.t.size(), [&](std::size_t k) {
            recon[k] = point_sample_q(blend, reference, lattice.t[k], lattice.x[k], opt.point);
        });
        return recon;
    };

    std::vector<double> base = run(0.0);
    SweepResult out;
    out.sigma_theory = stability_exponent(s_theory, m_theory);
    for (double delta : deltas) {
        std::vector<double> recon = run(delta);
        double worst = 0.0;
        for (std::size_t k = 0; k < recon.size(); ++k)
            worst = std::max(worst, std::abs(recon[k] - base[k]));
        out.rows.push_back({delta, worst});
    }
    out.fitted_slope = fit_loglog_slope(out.rows);
    return out;
}

} // namespace invlab
