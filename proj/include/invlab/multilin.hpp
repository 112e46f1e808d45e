// Extraction of m-th order linearizations of a DtN oracle by inclusion-
// exclusion divided differences, plus the linearized-hierarchy solver used as
// an independent oracle in tests, and the boundary/volume integral identity.
//
// The divided difference is generic over the data type (elliptic boundary
// functions, lateral wave traces); a type participates by providing the
// data_* customization points below.
#pragma once
#include <algorithm>
#include <cstring>
#include <map>
#include <vector>

#include "invlab/elliptic.hpp"
#include "invlab/grid.hpp"

namespace invlab {

struct EpsilonSchedule {
    std::vector<double> eps;   // one per source slot
    double refine = 0.5;       // halving factor for refinement studies

    EpsilonSchedule() = default;
    EpsilonSchedule(std::initializer_list<double> e) : eps(e) {}
    static EpsilonSchedule uniform(int slots, double e) {
        EpsilonSchedule s;
        s.eps.assign(static_cast<std::size_t>(slots), e);
        return s;
    }
    EpsilonSchedule refined() const {
        EpsilonSchedule s = *this;
        for (double& e : s.eps) e *= refine;
        return s;
    }
};

// ---- customization points for BoundaryData -------------------------------

inline BoundaryData zero_like(const BoundaryData& d) {
    BoundaryData z(d.grid);
    return z;
}
inline double data_norm_inf(const BoundaryData& d) { return d.norm_inf(); }
inline void data_axpy(BoundaryData& y, double a, const BoundaryData& x) {
    for (std::size_t k = 0; k < y.v.size(); ++k) y.v[k] += a * x.v[k];
}
inline void data_add_scaled(BoundaryData& y, cplx a, const BoundaryData& x) {
    for (std::size_t k = 0; k < y.v.size(); ++k) y.v[k] += a * x.v[k];
}
inline void data_scale(BoundaryData& y, double a) {
    for (cplx& z : y.v) z *= a;
}
inline bool data_is_real(const BoundaryData& d) { return d.is_real(); }
inline BoundaryData data_real(const BoundaryData& d) {
    BoundaryData r = d;
    for (cplx& z : r.v) z = z.real();
    return r;
}
inline BoundaryData data_imag(const BoundaryData& d) {
    BoundaryData r = d;
    for (cplx& z : r.v) z = z.imag();
    return r;
}
inline std::vector<unsigned char> data_key_bytes(const BoundaryData& d) {
    std::vector<unsigned char> b(d.v.size() * sizeof(cplx));
    std::memcpy(b.data(), d.v.data(), b.size());
    return b;
}

// ---- divided difference ----------------------------------------------------

namespace detail {

template <class Data>
struct Slot {
    Data probe;       // normalized to unit sup norm
    double amp;       // eps_j * ||f_j||_inf, the admissibility-relevant amplitude
    bool has_imag;
    Data re, im;
    std::vector<unsigned char> key;
};

inline int popcount_u(unsigned v) {
    int c = 0;
    while (v) { c += static_cast<int>(v & 1u); v >>= 1; }
    return c;
}

} // namespace detail

// Returns (1/prod eps_j) sum_{S subset of slots} (-1)^{k-|S|} Lambda(sum_{j in S} eps_j f_j).
// The S = empty term is Lambda(0) = 0 and contributes without an oracle call.
// Slots are canonicalized (unit-sup-norm probes, sorted) so the value is
// bit-identical under slot permutations and under (c f, eps/c) rescaling.
template <class Oracle, class Data>
Data mixed_derivative_dtn(const Oracle& oracle, const std::vector<Data>& probes,
                          const EpsilonSchedule& sched) {
    const int k = static_cast<int>(probes.size());
    if (k < 1) throw ScheduleError("mixed_derivative_dtn: need at least one probe");
    if (static_cast<int>(sched.eps.size()) < k)
        throw ScheduleError("mixed_derivative_dtn: schedule has fewer entries than probes");

    double prod_eps = 1.0;
    std::vector<detail::Slot<Data>> slots;
    slots.reserve(static_cast<std::size_t>(k));
    for (int j = 0; j < k; ++j) {
        if (!(sched.eps[j] > 0.0)) throw ScheduleError("mixed_derivative_dtn: eps must be positive");
        double scale = data_norm_inf(probes[j]);
        if (scale == 0.0) return zero_like(probes[j]); // multilinear: zero slot kills the derivative
        prod_eps *= sched.eps[j];
        detail::Slot<Data> s;
        s.probe = probes[j];
        data_scale(s.probe, 1.0 / scale);
        s.amp = sched.eps[j] * scale;
        s.has_imag = !data_is_real(s.probe);
        s.re = data_real(s.probe);
        s.im = data_imag(s.probe);
        s.key = data_key_bytes(s.probe);
        slots.push_back(std::move(s));
    }

    // Admissibility gate before any oracle call.
    for (const auto& s : slots)
        if (s.amp > oracle.delta() / k + 1e-15 * oracle.delta())
            throw ScheduleError("mixed_derivative_dtn: eps * ||f||_inf exceeds delta / slots");

    std::sort(slots.begin(), slots.end(), [](const auto& a, const auto& b) {
        if (a.amp != b.amp) return a.amp < b.amp;
        return a.key < b.key;
    });

    // Enumerate tasks: a component choice c (real/imag per slot) and a subset
    // mask. Tasks with the same (slot, component) multiset are shared.
    struct Term {
        std::size_t task;
        double sign;       // (-1)^(k-|S|)
        cplx weight;       // i^{#imag components}
    };
    std::vector<std::vector<std::pair<int, int>>> task_defs;
    std::map<std::vector<std::pair<int, int>>, std::size_t> task_ids;
    std::vector<Term> terms;

    const unsigned combos = 1u << k;
    static const cplx ipow4[4] = {{1, 0}, {0, 1}, {-1, 0}, {0, -1}};
    for (unsigned c = 0; c < combos; ++c) {
        bool feasible = true;
        for (int j = 0; j < k; ++j)
            if ((c >> j & 1u) && !slots[static_cast<std::size_t>(j)].has_imag) { feasible = false; break; }
        if (!feasible) continue;
        cplx weight = ipow4[detail::popcount_u(c) % 4];
        for (unsigned mask = 1; mask < combos; ++mask) {
            std::vector<std::pair<int, int>> def;
            for (int j = 0; j < k; ++j)
                if (mask >> j & 1u) def.emplace_back(j, (c >> j & 1u) ? 1 : 0);
            auto it = task_ids.find(def);
            std::size_t id;
            if (it == task_ids.end()) {
                id = task_defs.size();
                task_ids.emplace(def, id);
                task_defs.push_back(def);
            } else {
                id = it->second;
            }
            double sign = ((k - detail::popcount_u(mask)) % 2 == 0) ? 1.0 : -1.0;
            terms.push_back({id, sign, weight});
        }
    }

    // Independent oracle calls, then a deterministic sequential reduction.
    std::vector<Data> results(task_defs.size(), zero_like(slots[0].probe));
    parallel_for(task_defs.size(), [&](std::size_t t) {
        Data g = zero_like(slots[0].probe);
        for (const auto& [j, comp] : task_defs[t]) {
            const auto& s = slots[static_cast<std::size_t>(j)];
            data_axpy(g, s.amp, comp ? s.im : s.re);
        }
        results[t] = oracle(g);
    });

    // The oracle sees each slot as amp_j * (f_j / ||f_j||), which is exactly
    // eps_j f_j; only the 1/prod(eps_j) of the divided difference remains.
    Data acc = zero_like(slots[0].probe);
    const double inv = 1.0 / prod_eps;
    for (const Term& t : terms) data_add_scaled(acc, t.weight * (t.sign * inv), results[t.task]);
    return acc;
}

// ---- linearized hierarchy (test oracle) -----------------------------------

struct Hierarchy {
    std::vector<ScalarField> v; // harmonic extensions of the probes
    ScalarField w;              // solves Lap w = -m! q prod(v_j), w = 0 on the boundary
};

Hierarchy linearized_hierarchy(const EllipticProblem& p, const std::vector<BoundaryData>& probes);

// -(1/m!) * boundary_integral(D^m Lambda[f_1..f_m], f_{m+1}); estimates
// the volume integral of q * v_1 ... v_m * v_{m+1}.
template <class Oracle>
cplx integral_pairing(const Oracle& oracle, const std::vector<BoundaryData>& probes,
                      const BoundaryData& pair_probe, const EpsilonSchedule& sched) {
    const int m = static_cast<int>(probes.size());
    BoundaryData dm = mixed_derivative_dtn(oracle, probes, sched);
    double mfact = 1.0;
    for (int j = 2; j <= m; ++j) mfact *= j;
    return -boundary_integral(dm, pair_probe) / mfact;
}

// One row of the identity-consistency refinement table.
struct IdentityRow {
    double eps;
    double h;
    double identity_residual;
};

// |integral_pairing - volume_integral(q prod v_j * v_pair)| for the given
// potential across an eps sweep at fixed n and an n sweep at fixed eps.
std::vector<IdentityRow> identity_convergence_table(
    const std::function<cplx(double, double)>& q_fn, int m, int n_fixed,
    const std::vector<double>& eps_sweep, const std::vector<int>& n_sweep, double eps_fixed);

} // namespace invlab
