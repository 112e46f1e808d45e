// Passive-observation geometry on the conformal flat 2-torus: first-arrival
// geodesic distances, distance-difference families over an observer set,
// Lorentzian observation-time functions on the product spacetime, observation
// coordinates, and the light-cone quadric fit.
#pragma once
#include <array>
#include <string>
#include <vector>

#include "invlab/errors.hpp"
#include "invlab/util.hpp"

namespace invlab {

// Conformal factor c > 0 sampled on a periodic res x res lattice over [0,1)^2;
// the metric is c(x)^2 (dx1^2 + dx2^2).
struct MetricField {
    int res = 0;
    std::vector<double> c;

    int nodes() const { return res * res; }
    int id(int i, int j) const { return (j % res + res) % res * res + (i % res + res) % res; }
    double at(int i, int j) const { return c[static_cast<std::size_t>(id(i, j))]; }
    void validate() const;
};

MetricField make_metric(int res, const std::function<double(double, double)>& c_fn);

struct LatticePoint {
    int i = 0, j = 0;
    bool operator==(const LatticePoint&) const = default;
};

struct ObserverSet {
    std::vector<LatticePoint> z;
    void validate() const; // K >= 3, pairwise distinct
};

// First-arrival distances from one source to every lattice node: Dijkstra on
// the 16-neighbour weighted graph (unit ring plus knight moves), periodic
// wraparound. Carries the O(angular discretization) metrication error of the
// stencil, measured against refinement rather than assumed.
std::vector<double> geodesic_distances(const MetricField& metric, LatticePoint source);

// ---- distance-difference families ------------------------------------------

// One source's matrix D(i,j) = d(z_i, x) - d(z_j, x), stored row-major; the
// source itself is withheld.
struct DistanceDifferenceRecord {
    int K = 0;
    std::vector<double> m;
    double at(int i, int j) const { return m[static_cast<std::size_t>(i) * K + static_cast<std::size_t>(j)]; }
};

struct DistanceDifferenceFamily {
    int K = 0;
    std::vector<DistanceDifferenceRecord> records;
};

DistanceDifferenceFamily build_distance_difference_family(const MetricField& metric,
                                                          const ObserverSet& F,
                                                          const std::vector<LatticePoint>& X);

struct InjectivityReport {
    double min_separation = 0.0; // min over record pairs of the sup-norm distance
    int excluded_pairs = 0;      // bitwise-identical records (duplicate sources)
    bool degenerate = false;     // no usable pairs
};

InjectivityReport verify_injectivity(const DistanceDifferenceFamily& family);

// ---- Lorentzian observation times on R x N ----------------------------------

// Precomputes one distance field per observer; observation times, earliest
// observation sets and cone fits all read from these fields.
class PassiveSystem {
public:
    PassiveSystem(MetricField metric, ObserverSet observers);

    const MetricField& metric() const { return metric_; }
    const ObserverSet& observers() const { return obs_; }
    int count() const { return static_cast<int>(obs_.z.size()); }

    // F_q(a) = t + d(x, z_a) for the source event q = (t, x).
    double observation_time(double t, LatticePoint x, int a) const;
    std::vector<double> observation_times(double t, LatticePoint x) const;

    const std::vector<double>& observer_field(int a) const { return fields_[static_cast<std::size_t>(a)]; }

private:
    MetricField metric_;
    ObserverSet obs_;
    std::vector<std::vector<double>> fields_;
};

// Earliest observation set: the graph of F_q realized as spacetime points
// (F_q(a), z_a), unindexed.
struct SpacetimePoint {
    double t;
    LatticePoint z;
};

std::vector<SpacetimePoint> earliest_obs_set(const PassiveSystem& sys, double t, LatticePoint x);
// Round-trip: recover F_q from the set (matching observer positions).
std::vector<double> observation_times_from_set(const std::vector<SpacetimePoint>& set,
                                               const ObserverSet& observers);

// The family of observation-time functions over a source sample, labels withheld.
struct ObservationTimeFamily {
    int K = 0;
    std::vector<std::vector<double>> records;
};

ObservationTimeFamily build_observation_family(const PassiveSystem& sys,
                                               const std::vector<std::pair<double, LatticePoint>>& sources);

// ---- observation coordinates and the cone fit -------------------------------

struct ObsCoordinates {
    std::array<double, 3> X{};        // (F_q(a1), F_q(a2), F_q(a3))
    bool full_rank = false;           // Jacobian in (t, x1, x2) has rank 3
    double min_singular = 0.0;
    double max_singular = 0.0;
    bool nonsmooth_warning = false;   // a gradient sat on a cut locus
};

ObsCoordinates obs_coordinates(const PassiveSystem& sys, double t, LatticePoint x,
                               const std::array<int, 3>& a_tuple);

struct ConeFit {
    std::array<std::array<double, 3>, 3> G{}; // fitted quadratic form, G_tt = -1
    double conformal_error = 0.0;             // rel. deviation of the spatial block from c^-2 I
    double null_residual_max = 0.0;           // max |G(xi,xi)| / (sigma_max(G) |xi|^2)
    int used = 0;                             // covectors surviving the cut-locus filter
};

ConeFit fit_light_cone(const PassiveSystem& sys, LatticePoint x);

void write_metric_csv(const MetricField& m, const std::string& path);
void write_dd_family_csv(const DistanceDifferenceFamily& f, const std::string& path);
void write_obs_family_csv(const ObservationTimeFamily& f, const std::string& path);

// Flat-torus closed form (c constant): test-side oracle.
double flat_torus_distance(double c, double x1, double y1, double x2, double y2);

} // namespace invlab
