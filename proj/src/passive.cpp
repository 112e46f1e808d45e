#include "invlab/passive.hpp"

#include <algorithm>
#include <numeric>
#include <cmath>
#include <fstream>
#include <map>
#include <mutex>
#include <queue>

namespace invlab {

void MetricField::validate() const {
    if (res < 8) throw InvalidResolutionError("MetricField: resolution must be >= 8");
    if (static_cast<int>(c.size()) != res * res) throw ShapeError("MetricField: value count mismatch");
    for (double v : c)
        if (!(v > 0.0) || !std::isfinite(v))
            throw ShapeError("MetricField: conformal factor must be positive and finite");
}

MetricField make_metric(int res, const std::function<double(double, double)>& c_fn) {
    MetricField m;
    m.res = res;
    m.c.resize(static_cast<std::size_t>(res) * res);
    for (int j = 0; j < res; ++j)
        for (int i = 0; i < res; ++i)
            m.c[static_cast<std::size_t>(j) * res + i] = c_fn(static_cast<double>(i) / res,
                                                              static_cast<double>(j) / res);
    m.validate();
    return m;
}

void ObserverSet::validate() const {
    if (z.size() < 3) throw ShapeError("ObserverSet: need at least 3 observers");
    for (std::size_t a = 0; a < z.size(); ++a)
        for (std::size_t b = a + 1; b < z.size(); ++b)
            if (z[a] == z[b]) throw ShapeError("ObserverSet: observers must be pairwise distinct");
}

namespace {

struct Offset {
    int di, dj;
    double len; // lattice units
};

const std::vector<Offset>& stencil16() {
    static const std::vector<Offset> s = [] {
        std::vector<Offset> v;
        for (int di = -2; di <= 2; ++di)
            for (int dj = -2; dj <= 2; ++dj) {
                if (di == 0 && dj == 0) continue;
                if (std::abs(std::gcd(di, dj)) != 1) continue;
                v.push_back({di, dj, std::sqrt(static_cast<double>(di * di + dj * dj))});
            }
        return v;
    }();
    return s;
}

} // namespace

std::vector<double> geodesic_distances(const MetricField& metric, LatticePoint source) {
    metric.validate();
    const int res = metric.res;
    const double h = 1.0 / res;
    const auto& stencil = stencil16();

    std::vector<double> dist(static_cast<std::size_t>(res) * res,
                             std::numeric_limits<double>::infinity());
    using Item = std::pair<double, int>;
    std::priority_queue<Item, std::vector<Item>, std::greater<Item>> heap;
    int start = metric.id(source.i, source.j);
    dist[static_cast<std::size_t>(start)] = 0.0;
    heap.push({0.0, start});
    while (!heap.empty()) {
        auto [d, node] = heap.top();
        heap.pop();
        if (d > dist[static_cast<std::size_t>(node)]) continue;
        int i = node % res, j = node / res;
        double ci = metric.c[static_cast<std::size_t>(node)];
        for (const Offset& o : stencil) {
            int nb = metric.id(i + o.di, j + o.dj);
            double w = o.len * h * 0.5 * (ci + metric.c[static_cast<std::size_t>(nb)]);
            double nd = d + w;
            if (nd < dist[static_cast<std::size_t>(nb)]) {
                dist[static_cast<std::size_t>(nb)] = nd;
                heap.push({nd, nb});
            }
        }
    }
    return dist;
}

DistanceDifferenceFamily build_distance_difference_family(const MetricField& metric,
                                                          const ObserverSet& F,
                                                          const std::vector<LatticePoint>& X) {
    F.validate();
    const int K = static_cast<int>(F.z.size());
    std::vector<std::vector<double>> fields(static_cast<std::size_t>(K));
    parallel_for(static_cast<std::size_t>(K), [&](std::size_t a) {
        fields[a] = geodesic_distances(metric, F.z[a]);
    });

    DistanceDifferenceFamily fam;
    fam.K = K;
    fam.records.reserve(X.size());
    for (const LatticePoint& x : X) {
        DistanceDifferenceRecord rec;
        rec.K = K;
        rec.m.resize(static_cast<std::size_t>(K) * K);
        int node = metric.id(x.i, x.j);
        for (int i = 0; i < K; ++i)
            for (int j = 0; j < K; ++j)
                rec.m[static_cast<std::size_t>(i) * K + j] =
                    fields[static_cast<std::size_t>(i)][static_cast<std::size_t>(node)] -
                    fields[static_cast<std::size_t>(j)][static_cast<std::size_t>(node)];
        fam.records.push_back(std::move(rec));
    }
    return fam;
}

InjectivityReport verify_injectivity(const DistanceDifferenceFamily& family) {
    InjectivityReport rep;
    double best = std::numeric_limits<double>::infinity();
    bool any = false;
    for (std::size_t a = 0; a < family.records.size(); ++a)
        for (std::size_t b = a + 1; b < family.records.size(); ++b) {
            double sep = 0.0;
            for (std::size_t k = 0; k < family.records[a].m.size(); ++k)
                sep = std::max(sep, std::abs(family.records[a].m[k] - family.records[b].m[k]));
            if (sep == 0.0) {
                ++rep.excluded_pairs; // bitwise-identical records: duplicated source
                continue;
            }
            best = std::min(best, sep);
            any = true;
        }
    if (!any) {
        rep.degenerate = true;
        rep.min_separation = 0.0;
    } else {
        rep.min_separation = best;
    }
    return rep;
}

PassiveSystem::PassiveSystem(MetricField metric, ObserverSet observers)
    : metric_(std::move(metric)), obs_(std::move(observers)) {
    metric_.validate();
    obs_.validate();
    fields_.resize(obs_.z.size());
    parallel_for(obs_.z.size(), [&](std::size_t a) {
        fields_[a] = geodesic_distances(metric_, obs_.z[a]);
    });
}

double PassiveSystem::observation_time(double t, LatticePoint x, int a) const {
    return t + fields_[static_cast<std::size_t>(a)][static_cast<std::size_t>(metric_.id(x.i, x.j))];
}

std::vector<double> PassiveSystem::observation_times(double t, LatticePoint x) const {
    std::vector<double> out(obs_.z.size());
    for (std::size_t a = 0; a < obs_.z.size(); ++a)
        out[a] = observation_time(t, x, static_cast<int>(a));
    return out;
}

std::vector<SpacetimePoint> earliest_obs_set(const PassiveSystem& sys, double t, LatticePoint x) {
    std::vector<SpacetimePoint> set;
    set.reserve(static_cast<std::size_t>(sys.count()));
    for (int a = 0; a < sys.count(); ++a)
        set.push_back({sys.observation_time(t, x, a), sys.observers().z[static_cast<std::size_t>(a)]});
    return set;
}

std::vector<double> observation_times_from_set(const std::vector<SpacetimePoint>& set,
                                               const ObserverSet& observers) {
    std::vector<double> out(observers.z.size(), std::numeric_limits<double>::quiet_NaN());
    for (std::size_t a = 0; a < observers.z.size(); ++a)
        for (const SpacetimePoint& p : set)
            if (p.z == observers.z[a]) {
                out[a] = p.t;
                break;
            }
    for (double v : out)
        if (std::isnan(v)) throw ShapeError("observation_times_from_set: observer missing from the set");
    return out;
}

ObservationTimeFamily build_observation_family(
    const PassiveSystem& sys, const std::vector<std::pair<double, LatticePoint>>& sources) {
    ObservationTimeFamily fam;
    fam.K = sys.count();
    fam.records.reserve(sources.size());
    for (const auto& [t, x] : sources) fam.records.push_back(sys.observation_times(t, x));
    return fam;
}

namespace {

struct GradSample {
    double gx, gy;
    bool nonsmooth;
};

// Central difference over 2-cell steps; flags cut-locus nonsmoothness when the
// one-sided differences disagree by more than 10%.
GradSample field_gradient(const MetricField& m, const std::vector<double>& field, LatticePoint x) {
    const double h = 1.0 / m.res;
    auto val = [&](int di, int dj) {
        return field[static_cast<std::size_t>(m.id(x.i + di, x.j + dj))];
    };
    GradSample g{};
    double fwd_x = (val(2, 0) - val(0, 0)) / (2 * h), bwd_x = (val(0, 0) - val(-2, 0)) / (2 * h);
    double fwd_y = (val(0, 2) - val(0, 0)) / (2 * h), bwd_y = (val(0, 0) - val(0, -2)) / (2 * h);
    g.gx = (val(2, 0) - val(-2, 0)) / (4 * h);
    g.gy = (val(0, 2) - val(0, -2)) / (4 * h);
    double scale = std::max({std::abs(fwd_x), std::abs(bwd_x), std::abs(fwd_y), std::abs(bwd_y), 1e-12});
    g.nonsmooth = std::abs(fwd_x - bwd_x) > 0.1 * scale || std::abs(fwd_y - bwd_y) > 0.1 * scale;
    return g;
}

// Directional metrication factor of the 16-neighbour stencil, calibrated once
// per resolution on the flat metric: ratio of graph distance to true distance
// binned by direction (folded into [0, pi/4] by the stencil's symmetry).
const std::vector<double>& stencil_rho_table(int res) {
    static std::mutex mu;
    static std::map<int, std::vector<double>> cache;
    std::lock_guard<std::mutex> lock(mu);
    auto it = cache.find(res);
    if (it != cache.end()) return it->second;

    MetricField flat;
    flat.res = res;
    flat.c.assign(static_cast<std::size_t>(res) * res, 1.0);
    std::vector<double> d = geodesic_distances(flat, {0, 0});

    const int bins = 24;
    std::vector<double> sum(bins, 0.0);
    std::vector<int> cnt(bins, 0);
    for (int j = 0; j < res; ++j)
        for (int i = 0; i < res; ++i) {
            double dx = static_cast<double>(i) / res, dy = static_cast<double>(j) / res;
            if (dx > 0.5) dx -= 1.0;
            if (dy > 0.5) dy -= 1.0;
            double r = std::hypot(dx, dy);
            if (r < 0.2 || r > 0.3) continue;
            double a = std::atan2(std::abs(dy), std::abs(dx)); // [0, pi/2]
            double af = std::min(a, M_PI / 2 - a);             // fold to [0, pi/4]
            int b = std::min(bins - 1, static_cast<int>(af / (M_PI / 4) * bins));
            sum[static_cast<std::size_t>(b)] += d[static_cast<std::size_t>(j) * res + i] / r;
            cnt[static_cast<std::size_t>(b)] += 1;
        }
    std::vector<double> rho(bins, 1.0);
    for (int b = 0; b < bins; ++b)
        if (cnt[static_cast<std::size_t>(b)] > 0) rho[static_cast<std::size_t>(b)] = sum[static_cast<std::size_t>(b)] / cnt[static_cast<std::size_t>(b)];
    auto [pos, ok] = cache.emplace(res, std::move(rho));
    (void)ok;
    return pos->second;
}

double rho_correction(int res, double gx, double gy) {
    const auto& rho = stencil_rho_table(res);
    const int bins = static_cast<int>(rho.size());
    double a = std::atan2(std::abs(gy), std::abs(gx));
    double af = std::min(a, M_PI / 2 - a);
    int b = std::min(bins - 1, static_cast<int>(af / (M_PI / 4) * bins));
    return rho[static_cast<std::size_t>(b)];
}

// Cyclic Jacobi for small symmetric matrices; returns eigenvalues ascending
// and the corresponding eigenvectors as columns of V.
template <int N>
void jacobi_sym(std::array<std::array<double, N>, N> A, std::array<double, N>& eval,
                std::array<std::array<double, N>, N>& V) {
    for (int i = 0; i < N; ++i)
        for (int j = 0; j < N; ++j) V[i][j] = (i == j) ? 1.0 : 0.0;
    for (int sweep = 0; sweep < 64; ++sweep) {
        double off = 0.0;
        for (int p = 0; p < N; ++p)
            for (int q = p + 1; q < N; ++q) off += A[p][q] * A[p][q];
        if (off < 1e-30) break;
        for (int p = 0; p < N; ++p)
            for (int q = p + 1; q < N; ++q) {
                if (A[p][q] == 0.0) continue;
                double theta = (A[q][q] - A[p][p]) / (2.0 * A[p][q]);
                double t = (theta >= 0 ? 1.0 : -1.0) / (std::abs(theta) + std::sqrt(theta * theta + 1.0));
                double c = 1.0 / std::sqrt(t * t + 1.0), s = t * c;
                for (int k = 0; k < N; ++k) {
                    double akp = A[k][p], akq = A[k][q];
                    A[k][p] = c * akp - s * akq;
                    A[k][q] = s * akp + c * akq;
                }
                for (int k = 0; k < N; ++k) {
                    double apk = A[p][k], aqk = A[q][k];
                    A[p][k] = c * apk - s * aqk;
                    A[q][k] = s * apk + c * aqk;
                }
                for (int k = 0; k < N; ++k) {
                    double vkp = V[k][p], vkq = V[k][q];
                    V[k][p] = c * vkp - s * vkq;
                    V[k][q] = s * vkp + c * vkq;
                }
            }
    }
    std::array<int, N> order{};
    for (int i = 0; i < N; ++i) order[i] = i;
    std::sort(order.begin(), order.end(), [&](int a, int b) { return A[a][a] < A[b][b]; });
    std::array<std::array<double, N>, N> Vs{};
    for (int i = 0; i < N; ++i) {
        eval[i] = A[order[i]][order[i]];
        for (int k = 0; k < N; ++k) Vs[k][i] = V[k][order[i]];
    }
    V = Vs;
}

} // namespace

ObsCoordinates obs_coordinates(const PassiveSystem& sys, double t, LatticePoint x,
                               const std::array<int, 3>& a_tuple) {
    ObsCoordinates out;
    std::array<std::array<double, 3>, 3> J{};
    for (int r = 0; r < 3; ++r) {
        int a = a_tuple[static_cast<std::size_t>(r)];
        out.X[static_cast<std::size_t>(r)] = sys.observation_time(t, x, a);
        GradSample g = field_gradient(sys.metric(), sys.observer_field(a), x);
        out.nonsmooth_warning = out.nonsmooth_warning || g.nonsmooth;
        J[static_cast<std::size_t>(r)] = {1.0, g.gx, g.gy}; // dF/dt = 1 by the product structure
    }
    // singular values via J^T J
    std::array<std::array<double, 3>, 3> JtJ{};
    for (int i = 0; i < 3; ++i)
        for (int j = 0; j < 3; ++j) {
            double s = 0.0;
            for (int k = 0; k < 3; ++k) s += J[k][i] * J[k][j];
            JtJ[static_cast<std::size_t>(i)][static_cast<std::size_t>(j)] = s;
        }
    std::array<double, 3> ev{};
    std::array<std::array<double, 3>, 3> V{};
    jacobi_sym<3>(JtJ, ev, V);
    out.min_singular = std::sqrt(std::max(0.0, ev[0]));
    out.max_singular = std::sqrt(std::max(0.0, ev[2]));
    out.full_rank = out.min_singular > 1e-6 * out.max_singular;
    return out;
}

ConeFit fit_light_cone(const PassiveSystem& sys, LatticePoint x) {
    const int K = sys.count();
    if (K < 12) throw ShapeError("fit_light_cone: need at least 12 observers");

    std::vector<std::array<double, 3>> covectors;
    covectors.reserve(static_cast<std::size_t>(K));
    for (int a = 0; a < K; ++a) {
        GradSample g = field_gradient(sys.metric(), sys.observer_field(a), x);
        if (g.nonsmooth) continue; // cut-locus filter
        double rho = rho_correction(sys.metric().res, g.gx, g.gy);
        covectors.push_back({1.0, g.gx / rho, g.gy / rho});
    }
    if (covectors.size() < 12)
        throw ConditioningError("fit_light_cone: fewer than 12 usable covectors after the cut-locus filter");

    // Homogeneous least squares for the symmetric form G with G(xi,xi) = 0:
    // rows v = [t^2, 2 t x1, 2 t x2, x1^2, 2 x1 x2, x2^2].
    std::array<std::array<double, 6>, 6> M{};
    for (const auto& xi : covectors) {
        std::array<double, 6> v = {xi[0] * xi[0], 2 * xi[0] * xi[1], 2 * xi[0] * xi[2],
                                   xi[1] * xi[1], 2 * xi[1] * xi[2], xi[2] * xi[2]};
        for (int i = 0; i < 6; ++i)
            for (int j = 0; j < 6; ++j) M[static_cast<std::size_t>(i)][static_cast<std::size_t>(j)] += v[static_cast<std::size_t>(i)] * v[static_cast<std::size_t>(j)];
    }
    std::array<double, 6> ev{};
    std::array<std::array<double, 6>, 6> V{};
    jacobi_sym<6>(M, ev, V);
    // ev[0] ~ 0 holds the cone; ev[1] measures determinacy of the fit.
    double lam_max = std::max(ev[5], 1e-300), lam_5 = std::max(ev[1], 0.0);
    if (lam_5 <= 0.0 || std::sqrt(lam_max / lam_5) > 1e8)
        throw ConditioningError("fit_light_cone: insufficient directional spread");

    std::array<double, 6> gvec{};
    for (int i = 0; i < 6; ++i) gvec[static_cast<std::size_t>(i)] = V[static_cast<std::size_t>(i)][0];

    ConeFit out;
    double gtt = gvec[0];
    if (std::abs(gtt) < 1e-12)
        throw ConditioningError("fit_light_cone: degenerate time-time component");
    double s = -1.0 / gtt; // normalize G_tt = -1
    out.G = {{{-1.0, s * gvec[1], s * gvec[2]},
              {s * gvec[1], s * gvec[3], s * gvec[4]},
              {s * gvec[2], s * gvec[4], s * gvec[5]}}};
    out.used = static_cast<int>(covectors.size());

    double cx = sys.metric().at(x.i, x.j);
    double want = 1.0 / (cx * cx);
    double num = std::sqrt((out.G[1][1] - want) * (out.G[1][1] - want) +
                           2.0 * out.G[1][2] * out.G[1][2] +
                           (out.G[2][2] - want) * (out.G[2][2] - want));
    out.conformal_error = num / (want * std::sqrt(2.0));

    // null residuals against the fitted form
    double gnorm = 0.0;
    for (int i = 0; i < 3; ++i)
        for (int j = 0; j < 3; ++j) gnorm = std::max(gnorm, std::abs(out.G[static_cast<std::size_t>(i)][static_cast<std::size_t>(j)]));
    for (const auto& xi : covectors) {
        double q = 0.0;
        for (int i = 0; i < 3; ++i)
            for (int j = 0; j < 3; ++j) q += out.G[static_cast<std::size_t>(i)][static_cast<std::size_t>(j)] * xi[static_cast<std::size_t>(i)] * xi[static_cast<std::size_t>(j)];
        double n2 = xi[0] * xi[0] + xi[1] * xi[1] + xi[2] * xi[2];
        out.null_residual_max = std::max(out.null_residual_max, std::abs(q) / (gnorm * n2));
    }
    return out;
}

void write_metric_csv(const MetricField& m, const std::string& path) {
    std::ofstream out(path);
    if (!out) throw Error("cannot open for writing: " + path);
    out << "x1,x2,c\n";
    for (int j = 0; j < m.res; ++j)
        for (int i = 0; i < m.res; ++i)
            out << fmt_g17(static_cast<double>(i) / m.res) << ',' << fmt_g17(static_cast<double>(j) / m.res)
                << ',' << fmt_g17(m.at(i, j)) << '\n';
}

void write_dd_family_csv(const DistanceDifferenceFamily& f, const std::string& path) {
    std::ofstream out(path);
    if (!out) throw Error("cannot open for writing: " + path);
    out << "record,i,j,value\n";
    for (std::size_t r = 0; r < f.records.size(); ++r)
        for (int i = 0; i < f.K; ++i)
            for (int j = 0; j < f.K; ++j)
                out << r << ',' << i << ',' << j << ',' << fmt_g17(f.records[r].at(i, j)) << '\n';
}

void write_obs_family_csv(const ObservationTimeFamily& f, const std::string& path) {
    std::ofstream out(path);
    if (!out) throw Error("cannot open for writing: " + path);
    out << "record,a,value\n";
    for (std::size_t r = 0; r < f.records.size(); ++r)
        for (int a = 0; a < f.K; ++a)
            out << r << ',' << a << ',' << fmt_g17(f.records[r][static_cast<std::size_t>(a)]) << '\n';
}

double flat_torus_distance(double c, double x1, double y1, double x2, double y2) {
    double dx = std::abs(x1 - x2), dy = std::abs(y1 - y2);
    dx = std::min(dx, 1.0 - dx);
    dy = std::min(dy, 1.0 - dy);
    return c * std::hypot(dx, dy);
}

} // namespace invlab
