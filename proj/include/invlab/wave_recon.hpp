// Pointwise recovery of q(t,x) on the causal diamond from the wave DtN
// oracle: two crossing pulses drive the second linearization, a transported
// third pulse weights the returned trace, and a simulated unit-potential
// reference calibrates the overlap mass. Includes the noisy scan experiment
// and the stability sweep.
#pragma once
#include <cstdint>

#include "invlab/multilin.hpp"
#include "invlab/noise.hpp"
#include "invlab/wave.hpp"

namespace invlab {

struct DiamondRegion {
    SpaceTimeGrid stg;
    std::vector<std::uint8_t> mask; // per (t,x) node

    bool at(int j, int i) const { return mask[static_cast<std::size_t>(j) * (stg.nx + 1) + static_cast<std::size_t>(i)] != 0; }
    std::size_t count() const;
    void check_invariant() const; // every masked node lies in the causal diamond
};

// Full causal diamond: t > min(x,1-x) and T-t > min(x,1-x).
DiamondRegion diamond_region(const SpaceTimeGrid& stg);

// Subset where the three-pulse design is admissible: the crossing pulse must
// arrive from the far boundary and the weight wave must leave through the
// near one, so t > max(x,1-x) + margin and T-t > min(x,1-x) + margin with
// margin = 5 sigma_p + 2 dx.
DiamondRegion pulse_region(const SpaceTimeGrid& stg, double sigma_p);

struct PulseTriple {
    int pair_side = 0;   // side the doubled pulse enters (0: x=0, 1: x=1)
    double s1 = 0.0;     // centers of the three pulses
    double s2 = 0.0;
    double s3 = 0.0;
    double sigma = 0.0;

    // Gaussian profile exp(-(t-s)^2 / sigma^2), truncated at 6 sigma.
    static double profile(double t, double s, double sigma);

    BoundaryTimeData control1(const SpaceTimeGrid& g) const;
    BoundaryTimeData control2(const SpaceTimeGrid& g) const;
    // Two-sided trace of the transported third pulse (the pairing weight).
    BoundaryTimeData weight3(const SpaceTimeGrid& g) const;
    // The three linearized waves evaluated as free transport fields.
    double v1(double t, double x) const;
    double v2(double t, double x) const;
    double v3(double t, double x) const;
};

// Analytic overlap of the three transport ribbons: (pi / (2 sqrt 2)) sigma^2.
double pulse_overlap_mass(double sigma);

PulseTriple design_pulses(const SpaceTimeGrid& stg, double t0, double x0, double sigma_p);

struct PointSampleOptions {
    double sigma_p = 0.08;
    double eps = 0.25;              // per-slot amplitude of the divided difference
    double calibration_floor = 0.05; // reject when |reference pairing| < floor * analytic mass
};

// One pairing P = <D^2 Lambda[f1,f2], weight>; the estimate is P / P_ref with
// P_ref from a simulated q = 1 oracle of the same geometry.
template <class Oracle>
double pairing_value(const Oracle& oracle, const PulseTriple& p, const SpaceTimeGrid& g,
                     double eps) {
    std::vector<BoundaryTimeData> probes = {p.control1(g), p.control2(g)};
    BoundaryTimeData d2 = mixed_derivative_dtn(oracle, probes, EpsilonSchedule::uniform(2, eps));
    return boundary_time_integral(d2, p.weight3(g));
}

template <class Oracle>
double point_sample_q(const Oracle& oracle, const WaveDtn& reference_unit_q, double t0, double x0,
                      const PointSampleOptions& opt = {}) {
    const SpaceTimeGrid& g = reference_unit_q.grid();
    PulseTriple p = design_pulses(g, t0, x0, opt.sigma_p);
    double pref = pairing_value(reference_unit_q, p, g, opt.eps);
    if (std::abs(pref) < opt.calibration_floor * 2.0 * pulse_overlap_mass(opt.sigma_p))
        throw ConditioningError("point_sample_q: degenerate calibration mass at t0 = " +
                                fmt_g17(t0) + ", x0 = " + fmt_g17(x0));
    return pairing_value(oracle, p, g, opt.eps) / pref;
}

struct ScanResult {
    std::vector<double> t, x;       // scan lattice
    std::vector<double> truth, recon, error;
    double rel_l2 = 0.0;            // weighted over the scan lattice
};

struct ScanOptions {
    PointSampleOptions point;
    double spacing_t = 0.05;
    double spacing_x = 0.05;
    double snr_db = snr_off();
    std::uint64_t seed = 0;
    // Gaussian kernel regression over the scan lattice (0 disables). Noisy
    // runs need it: a single sounding carries the 1/eps^2-amplified
    // measurement noise, and neighbouring soundings have independent streams.
    double smooth_t = 0.0;
    double smooth_x = 0.0;
};

// Scans point_sample_q over a lattice in the pulse-admissible diamond. Noise,
// when enabled, is measurement noise on every oracle output, seeded per scan
// job (seed xor job index hash) for order independence. q_true is used only
// for the reported truth/error panels.
ScanResult reconstruct_q_diamond(const WaveDtn& oracle, const SpaceTimeField& q_true,
                                 const ScanOptions& opt);

struct SweepRow {
    double delta;
    double error;
};

struct SweepResult {
    std::vector<SweepRow> rows;
    double fitted_slope = 0.0;
    double sigma_theory = 0.0;
};

// Theoretical stability exponent sigma(s,m) = 8(m-1) / (2m(m-1)(8s-n+13) + 2m-1).
double stability_exponent(int s, int m, int n = 1);

// Perturbs the q1 data toward q2 at magnitudes delta (relative to the
// calibrated data distance), reconstructs, and tabulates the discrepancy
// against the unperturbed reconstruction, with a log-log slope fit.
// sigma_theory is reported for (s_theory, m_theory); the scanned oracles use
// the quadratic model, whose machinery the reconstruction is built on.
SweepResult stability_sweep(const SpaceTimeField& q1, const SpaceTimeField& q2, int m,
                            const std::vector<double>& deltas, int s_theory, int m_theory,
                            const ScanOptions& opt);

} // namespace invlab
