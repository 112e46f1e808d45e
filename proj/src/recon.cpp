#include "invlab/recon.hpp"

#include <cmath>
#include <fstream>

namespace invlab {

NullVectorPair null_vectors(const std::vector<double>& k) {
    NullVectorPair out;
    out.k = k;
    double kn = 0.0;
    for (double c : k) kn += c * c;
    kn = std::sqrt(kn);

    if (k.size() == 2) {
        out.xi1.assign(2, cplx(0.0));
        out.xi2.assign(2, cplx(0.0));
        if (kn == 0.0) {
            out.trivial = true;
            return out;
        }
        cplx a = cplx(k[1], k[0]) / 2.0;  // (i k1 + k2)/2
        cplx b = cplx(-k[1], k[0]) / 2.0; // (i k1 - k2)/2
        out.xi1 = {a, a * cplx(0.0, 1.0)};
        out.xi2 = {b, b * cplx(0.0, -1.0)};
        return out;
    }
    if (k.size() == 3) {
        out.xi1.assign(3, cplx(0.0));
        out.xi2.assign(3, cplx(0.0));
        if (kn == 0.0) {
            out.trivial = true;
            return out;
        }
        // zeta = unit(e3 x k) * |k|/2, falling back to e1 x k near the pole.
        double zx = -k[1], zy = k[0], zz = 0.0;
        double zn = std::sqrt(zx * zx + zy * zy);
        if (zn < 1e-12 * kn) {
            zx = 0.0; zy = -k[2]; zz = k[1];
            zn = std::sqrt(zy * zy + zz * zz);
        }
        double s = kn / (2.0 * zn);
        zx *= s; zy *= s; zz *= s;
        for (int c = 0; c < 3; ++c) {
            cplx half_ik = cplx(0.0, k[static_cast<std::size_t>(c)] / 2.0);
            double z = (c == 0 ? zx : c == 1 ? zy : zz);
            out.xi1[static_cast<std::size_t>(c)] = half_ik + z;
            out.xi2[static_cast<std::size_t>(c)] = half_ik - z;
        }
        return out;
    }
    throw ShapeError("null_vectors: k must have length 2 or 3");
}

namespace {

double growth_exponent(const std::vector<cplx>& xi) {
    // Half the range of Re(xi . x) over the unit square; attained at corners.
    double rex = xi[0].real(), rey = xi[1].real();
    return (std::abs(rex) + std::abs(rey)) / 2.0;
}

} // namespace

BoundaryData cgo_probe(const std::vector<cplx>& xi, const Grid2D& g, double growth_cap) {
    if (xi.size() != 2) throw ShapeError("cgo_probe: expected a 2D frequency vector");
    if (growth_exponent(xi) > growth_cap)
        throw FrequencyCapError("cgo_probe: growth exponent " + fmt_g17(growth_exponent(xi)) +
                                " exceeds cap " + fmt_g17(growth_cap));
    return make_boundary(g, [&](double x, double y) { return std::exp(xi[0] * x + xi[1] * y); });
}

cplx fourier_sample(const DtnOracle& oracle, const std::vector<double>& k, int m,
                    const EpsilonSchedule& sched, double growth_cap) {
    if (k.size() != 2) throw ShapeError("fourier_sample: expected a 2D frequency vector");
    const Grid2D& g = oracle.grid();
    BoundaryData one = make_boundary(g, [](double, double) { return cplx(1.0); });

    NullVectorPair nv = null_vectors(k);
    std::vector<BoundaryData> probes;
    double rescale = 1.0;
    if (nv.trivial) {
        probes.assign(static_cast<std::size_t>(m), one);
    } else {
        BoundaryData v1 = cgo_probe(nv.xi1, g, growth_cap);
        BoundaryData v2 = cgo_probe(nv.xi2, g, growth_cap);
        double c1 = v1.norm_inf(), c2 = v2.norm_inf();
        data_scale(v1, 1.0 / c1);
        data_scale(v2, 1.0 / c2);
        rescale = c1 * c2;
        probes.push_back(std::move(v1));
        probes.push_back(std::move(v2));
        for (int j = 2; j < m; ++j) probes.push_back(one);
    }
    return integral_pairing(oracle, probes, one, sched) * rescale;
}

void write_fourier_csv(const FourierTable& t, const std::string& path) {
    std::ofstream out(path);
    if (!out) throw Error("cannot open for writing: " + path);
    out << "k1,k2,re,im\n";
    for (int p2 = -t.K; p2 <= t.K; ++p2)
        for (int p1 = -t.K; p1 <= t.K; ++p1) {
            cplx z = t.at(p1, p2);
            out << fmt_g17(2.0 * M_PI * p1) << ',' << fmt_g17(2.0 * M_PI * p2) << ','
                << fmt_g17(z.real()) << ',' << fmt_g17(z.imag()) << '\n';
        }
}

ReconResult reconstruct_q(const DtnOracle& oracle, int m, int K, const Grid2D& g,
                          const EpsilonSchedule& sched, const ReconOptions& opt) {
    if (K < 0) throw ShapeError("reconstruct_q: K must be nonnegative");
    // Axis frequencies must pass the cap for K to be within reach.
    if ((M_PI / 2.0) * K > opt.growth_cap + 1e-12)
        throw FrequencyCapError("reconstruct_q: lattice cutoff K exceeds the growth cap");

    const int side = 2 * K + 1;
    FourierTable raw;
    raw.K = K;
    raw.qhat.assign(static_cast<std::size_t>(side * side), cplx(0.0));
    raw.status.assign(static_cast<std::size_t>(side * side), 0);

    // Every lattice sample owns its oracle calls; the merge is keyed by index.
    parallel_for(static_cast<std::size_t>(side * side), [&](std::size_t idx) {
        int p1 = static_cast<int>(idx) % side - K;
        int p2 = static_cast<int>(idx) / side - K;
        std::vector<double> k = {2.0 * M_PI * p1, 2.0 * M_PI * p2};
        try {
            raw.qhat[idx] = fourier_sample(oracle, k, m, sched, opt.growth_cap);
        } catch (const FrequencyCapError&) {
            raw.status[idx] = 2; // unmeasurable at this cap; contributes zero
        }
    });

    // Conjugate-symmetry averaging (q is real). Pairs whose halves disagree by
    // more than reject_ratio of their mean magnitude carry no usable signal.
    FourierTable table = raw;
    for (int p2 = -K; p2 <= K; ++p2)
        for (int p1 = -K; p1 <= K; ++p1) {
            if (std::make_pair(p1, p2) > std::make_pair(-p1, -p2)) continue;
            int ia = table.idx(p1, p2), ib = table.idx(-p1, -p2);
            if (raw.status[static_cast<std::size_t>(ia)] == 2 ||
                raw.status[static_cast<std::size_t>(ib)] == 2) {
                table.qhat[static_cast<std::size_t>(ia)] = 0.0;
                table.qhat[static_cast<std::size_t>(ib)] = 0.0;
                table.status[static_cast<std::size_t>(ia)] = 2;
                table.status[static_cast<std::size_t>(ib)] = 2;
                continue;
            }
            cplx s1 = raw.qhat[static_cast<std::size_t>(ia)];
            cplx s2 = std::conj(raw.qhat[static_cast<std::size_t>(ib)]);
            cplx avg = 0.5 * (s1 + s2);
            double dis = 0.5 * std::abs(s1 - s2);
            if (dis > opt.reject_ratio * std::abs(avg)) {
                table.qhat[static_cast<std::size_t>(ia)] = 0.0;
                table.qhat[static_cast<std::size_t>(ib)] = 0.0;
                table.status[static_cast<std::size_t>(ia)] = 1;
                table.status[static_cast<std::size_t>(ib)] = 1;
            } else {
                table.qhat[static_cast<std::size_t>(ia)] = avg;
                table.qhat[static_cast<std::size_t>(ib)] = std::conj(avg);
            }
        }

    ReconResult out;
    out.table = table;
    out.q = field_from_table(table, g);
    return out;
}

FourierTable direct_fourier_table(const std::function<cplx(double, double)>& q_fn, int K, int n_fine) {
    Grid2D g = build_grid(n_fine);
    FourierTable t;
    t.K = K;
    const int side = 2 * K + 1;
    t.qhat.assign(static_cast<std::size_t>(side * side), cplx(0.0));
    t.status.assign(static_cast<std::size_t>(side * side), 0);
    ScalarField q = make_field(g, q_fn);
    for (int p2 = -K; p2 <= K; ++p2)
        for (int p1 = -K; p1 <= K; ++p1) {
            ScalarField integrand(g);
            for (int j = 0; j <= g.n; ++j)
                for (int i = 0; i <= g.n; ++i) {
                    double phase = 2.0 * M_PI * (p1 * g.x(i) + p2 * g.y(j));
                    integrand.at(i, j) = q.at(i, j) * std::exp(cplx(0.0, phase));
                }
            t.qhat[static_cast<std::size_t>(t.idx(p1, p2))] = volume_integral(integrand);
        }
    return t;
}

ScalarField field_from_table(const FourierTable& t, const Grid2D& g) {
    ScalarField out(g);
    for (int j = 0; j <= g.n; ++j)
        for (int i = 0; i <= g.n; ++i) {
            KahanC s;
            for (int p2 = -t.K; p2 <= t.K; ++p2)
                for (int p1 = -t.K; p1 <= t.K; ++p1) {
                    double phase = -2.0 * M_PI * (p1 * g.x(i) + p2 * g.y(j));
                    s.add(t.at(p1, p2) * std::exp(cplx(0.0, phase)));
                }
            out.at(i, j) = s.sum().real();
        }
    return out;
}

double relative_l2(const ScalarField& got, const ScalarField& want) {
    if (!got.grid.same(want.grid)) throw ShapeError("relative_l2: grid mismatch");
    ScalarField diff2(got.grid), want2(got.grid);
    for (int k = 0; k < got.grid.nodes(); ++k) {
        diff2.v[k] = std::norm(got.v[k] - want.v[k]);
        want2.v[k] = std::norm(want.v[k]);
    }
    double num = std::sqrt(volume_integral(diff2).real());
    double den = std::sqrt(volume_integral(want2).real());
    return den == 0.0 ? num : num / den;
}

} // namespace invlab
