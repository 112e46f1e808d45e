// 1+1D nonlinear wave solver  u_tt - u_xx + q(t,x) u^m = f  on [0,T] x [0,1]
// with Dirichlet lateral control, the wave DtN oracle over lateral traces, and
// the fourth-linearization identity check.
#pragma once
#include <atomic>
#include <cstdint>
#include <cstring>
#include <optional>

#include "invlab/errors.hpp"
#include "invlab/util.hpp"

namespace invlab {

struct SpaceTimeGrid {
    int nx = 0;      // spatial cells on [0,1]
    int nt = 0;      // time steps on [0,T]
    double T = 0.0;

    double dx() const { return 1.0 / nx; }
    double dt() const { return T / nt; }
    double lambda() const { return dt() / dx(); }
    int nodes() const { return (nt + 1) * (nx + 1); }
    double t(int j) const { return j * dt(); }
    double x(int i) const { return i * dx(); }
    bool same(const SpaceTimeGrid& o) const { return nx == o.nx && nt == o.nt && T == o.T; }
};

SpaceTimeGrid make_st_grid(int nx, int nt, double T);

struct SpaceTimeField {
    SpaceTimeGrid stg;
    std::vector<double> v; // (nt+1) rows of (nx+1) values

    SpaceTimeField() = default;
    explicit SpaceTimeField(const SpaceTimeGrid& g) : stg(g), v(static_cast<std::size_t>(g.nodes()), 0.0) {}
    double& at(int j, int i) { return v[static_cast<std::size_t>(j) * (stg.nx + 1) + static_cast<std::size_t>(i)]; }
    double at(int j, int i) const { return v[static_cast<std::size_t>(j) * (stg.nx + 1) + static_cast<std::size_t>(i)]; }
    double norm_inf() const;
};

SpaceTimeField make_st_field(const SpaceTimeGrid& g, const std::function<double(double, double)>& f_tx);

// Lateral traces: side 0 is x=0, side 1 is x=1, sampled at the nt+1 time
// nodes; quadrature weight dt per sample.
struct BoundaryTimeData {
    SpaceTimeGrid stg;
    std::vector<double> v; // 2*(nt+1): side 0 block then side 1 block

    BoundaryTimeData() = default;
    explicit BoundaryTimeData(const SpaceTimeGrid& g) : stg(g), v(2 * static_cast<std::size_t>(g.nt + 1), 0.0) {}
    double& at(int side, int j) { return v[static_cast<std::size_t>(side) * (stg.nt + 1) + static_cast<std::size_t>(j)]; }
    double at(int side, int j) const { return v[static_cast<std::size_t>(side) * (stg.nt + 1) + static_cast<std::size_t>(j)]; }
    double norm_inf() const;
    double weight() const { return stg.dt(); }
};

BoundaryTimeData make_control(const SpaceTimeGrid& g, int side, const std::function<double(double)>& f_t);

// Lateral-trace pairing: sum over both sides and time of a*b*dt.
double boundary_time_integral(const BoundaryTimeData& a, const BoundaryTimeData& b);

// ---- multilin customization points -----------------------------------------

inline BoundaryTimeData zero_like(const BoundaryTimeData& d) { return BoundaryTimeData(d.stg); }
inline double data_norm_inf(const BoundaryTimeData& d) { return d.norm_inf(); }
inline void data_axpy(BoundaryTimeData& y, double a, const BoundaryTimeData& x) {
    for (std::size_t k = 0; k < y.v.size(); ++k) y.v[k] += a * x.v[k];
}
inline void data_add_scaled(BoundaryTimeData& y, cplx a, const BoundaryTimeData& x) {
    if (a.imag() != 0.0) throw ShapeError("BoundaryTimeData is real-valued");
    for (std::size_t k = 0; k < y.v.size(); ++k) y.v[k] += a.real() * x.v[k];
}
inline void data_scale(BoundaryTimeData& y, double a) {
    for (double& z : y.v) z *= a;
}
inline bool data_is_real(const BoundaryTimeData&) { return true; }
inline BoundaryTimeData data_real(const BoundaryTimeData& d) { return d; }
inline BoundaryTimeData data_imag(const BoundaryTimeData& d) { return zero_like(d); }
inline std::vector<unsigned char> data_key_bytes(const BoundaryTimeData& d) {
    std::vector<unsigned char> b(d.v.size() * sizeof(double));
    std::memcpy(b.data(), d.v.data(), b.size());
    return b;
}

// ---- solver -----------------------------------------------------------------

struct WaveSource {
    BoundaryTimeData control;                 // Dirichlet values on both sides
    std::optional<SpaceTimeField> interior;   // right-hand side f(t,x)
};

struct WaveOptions {
    double blowup_factor = 1e3; // instability when ||u|| exceeds factor * data scale
};

// Explicit leapfrog; exact transport at lambda = 1. q may depend on (t,x).
SpaceTimeField solve_wave(const SpaceTimeField& q, int m, const WaveSource& src,
                          const WaveOptions& opt = {});

// Conserved leapfrog energy at half-step j+1/2 (valid for q = 0 and zero
// boundary values at rows j and j+1).
double leapfrog_energy(const SpaceTimeField& u, int j);

class WaveDtn {
public:
    WaveDtn(SpaceTimeField q, int m, double delta, WaveOptions opt = {});

    BoundaryTimeData operator()(const BoundaryTimeData& f) const;
    double delta() const { return delta_; }
    const SpaceTimeGrid& grid() const { return q_.stg; }
    std::uint64_t calls() const { return calls_.load(); }

private:
    SpaceTimeField q_;
    int m_;
    double delta_;
    WaveOptions opt_;
    mutable std::atomic<std::uint64_t> calls_{0};
};

WaveDtn wave_dtn(const SpaceTimeField& q, int m, double delta = 1.0);

// One-sided lateral normal derivative of a solved field (3-point stencil).
BoundaryTimeData lateral_normal_derivative(const SpaceTimeField& u);

// Fourth mixed divided difference of the interior-source solution map for
// u_tt - u_xx + a u^4 = f, compared against the linearized product source:
// returns max | box_h(w) + 24 a u1 u2 u3 u4 | over interior nodes.
double fourth_linearization_check(const SpaceTimeField& a,
                                  const std::vector<SpaceTimeField>& sources,
                                  const std::vector<double>& eps);

void write_st_field_csv(const SpaceTimeField& u, const std::string& path);
void write_control_csv(const BoundaryTimeData& b, const std::string& path);

} // namespace invlab
