// Reconstruction of the potential from the DtN oracle alone: harmonic
// complex-exponential probes whose product realizes a Fourier mode, sampled
// over a frequency lattice and inverted by a truncated series.
#pragma once
#include "invlab/multilin.hpp"

namespace invlab {

struct NullVectorPair {
    std::vector<double> k;   // length 2 or 3
    std::vector<cplx> xi1, xi2;
    bool trivial = false;    // k = 0: xi1 = xi2 = 0, sample with constant probes
};

// Closed forms with xi.xi = 0 (bilinear dot) and xi1 + xi2 = i k.
// 2D: xi1 = a(1,i), xi2 = b(1,-i) with a = (i k1 + k2)/2, b = (i k1 - k2)/2.
// 3D: xi = i k/2 +- zeta, zeta real, zeta.k = 0, |zeta| = |k|/2.
NullVectorPair null_vectors(const std::vector<double>& k);

// Per-probe growth cap: half the range of Re(xi . x) over the square must not
// exceed this exponent. 2*pi admits the frequency lattice up to |p|_1 <= 4.
inline double default_growth_cap() { return 2.0 * M_PI; }

// Boundary trace of x -> exp(xi . x). Throws FrequencyCapError when the
// probe's growth exceeds the cap.
BoundaryData cgo_probe(const std::vector<cplx>& xi, const Grid2D& g,
                       double growth_cap = default_growth_cap());

// Estimate of qhat(k) = integral of q exp(i k.x): CGO probes in two slots,
// constant probes in the remaining m-1, paired against 1. Probes are fed to
// the divided difference at unit sup norm and the sample rescaled, so the
// schedule is admissible independent of the probe growth.
cplx fourier_sample(const DtnOracle& oracle, const std::vector<double>& k, int m,
                    const EpsilonSchedule& sched, double growth_cap = default_growth_cap());

struct FourierTable {
    int K = 0;
    std::vector<cplx> qhat;      // (2K+1)^2, row-major over p2 then p1
    std::vector<int> status;     // 0 = kept, 1 = rejected by symmetry filter, 2 = outside cap

    int idx(int p1, int p2) const { return (p2 + K) * (2 * K + 1) + (p1 + K); }
    cplx at(int p1, int p2) const { return qhat[static_cast<std::size_t>(idx(p1, p2))]; }
};

void write_fourier_csv(const FourierTable& t, const std::string& path);

struct ReconOptions {
    double growth_cap = default_growth_cap();
    // Conjugate-symmetry filter: a pair (k,-k) whose disagreement exceeds
    // reject_ratio times the averaged magnitude is treated as unmeasurable.
    double reject_ratio = 0.5;
};

struct ReconResult {
    ScalarField q;       // truncated-series reconstruction (real part)
    FourierTable table;  // after conjugate-symmetry averaging and filtering
};

ReconResult reconstruct_q(const DtnOracle& oracle, int m, int K, const Grid2D& g,
                          const EpsilonSchedule& sched, const ReconOptions& opt = {});

// Test-side oracles and metrics.
FourierTable direct_fourier_table(const std::function<cplx(double, double)>& q_fn, int K, int n_fine);
ScalarField field_from_table(const FourierTable& t, const Grid2D& g);
double relative_l2(const ScalarField& got, const ScalarField& want);

} // namespace invlab
