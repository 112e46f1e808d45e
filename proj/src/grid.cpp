#include "invlab/grid.hpp"

#include <cmath>
#include <cstdio>
#include <fstream>
#include <map>
#include <mutex>
#include <sstream>

namespace invlab {

Grid2D build_grid(int n) {
    if (n < 4) throw InvalidResolutionError("build_grid: n must be >= 4, got " + std::to_string(n));
    Grid2D g;
    g.n = n;
    g.h = 1.0 / n;
    return g;
}

const std::vector<BoundaryNode>& boundary_walk(const Grid2D& g) {
    static std::mutex mu;
    static std::map<int, std::vector<BoundaryNode>> cache;
    std::lock_guard<std::mutex> lock(mu);
    auto it = cache.find(g.n);
    if (it != cache.end()) return it->second;

    std::vector<BoundaryNode> walk;
    walk.reserve(static_cast<std::size_t>(g.boundary_nodes()));
    int n = g.n;
    for (int i = 0; i <= n; ++i) walk.push_back({i, 0, 0, i == 0 || i == n, 0.0, -1.0});      // bottom
    for (int j = 1; j <= n; ++j) walk.push_back({n, j, 1, j == n, 1.0, 0.0});                 // right
    for (int i = n - 1; i >= 0; --i) walk.push_back({i, n, 2, i == 0, 0.0, 1.0});             // top
    for (int j = n - 1; j >= 1; --j) walk.push_back({0, j, 3, false, -1.0, 0.0});             // left
    auto [pos, ok] = cache.emplace(g.n, std::move(walk));
    (void)ok;
    return pos->second;
}

double ScalarField::norm_inf() const {
    double m = 0.0;
    for (const cplx& z : v) m = std::max(m, std::abs(z));
    return m;
}

void ScalarField::check_finite(const char* what) const {
    for (const cplx& z : v)
        if (!std::isfinite(z.real()) || !std::isfinite(z.imag()))
            throw ShapeError(std::string(what) + ": field contains non-finite values");
}

BoundaryData::BoundaryData(const Grid2D& g)
    : grid(g),
      v(static_cast<std::size_t>(g.boundary_nodes())),
      w(static_cast<std::size_t>(g.boundary_nodes()), g.h) {}

double BoundaryData::norm_inf() const {
    double m = 0.0;
    for (const cplx& z : v) m = std::max(m, std::abs(z));
    return m;
}

double BoundaryData::norm_w2() const {
    Kahan s;
    for (std::size_t k = 0; k < v.size(); ++k) s.add(w[k] * std::norm(v[k]));
    return std::sqrt(s.sum());
}

bool BoundaryData::is_real(double tol) const {
    for (const cplx& z : v)
        if (std::abs(z.imag()) > tol) return false;
    return true;
}

void BoundaryData::check_finite(const char* what) const {
    for (const cplx& z : v)
        if (!std::isfinite(z.real()) || !std::isfinite(z.imag()))
            throw ShapeError(std::string(what) + ": boundary data contains non-finite values");
}

ScalarField make_field(const Grid2D& g, const std::function<cplx(double, double)>& f) {
    ScalarField u(g);
    for (int j = 0; j <= g.n; ++j)
        for (int i = 0; i <= g.n; ++i) u.at(i, j) = f(g.x(i), g.y(j));
    return u;
}

BoundaryData make_boundary(const Grid2D& g, const std::function<cplx(double, double)>& f) {
    BoundaryData b(g);
    const auto& walk = boundary_walk(g);
    for (std::size_t k = 0; k < walk.size(); ++k) b.v[k] = f(g.x(walk[k].i), g.y(walk[k].j));
    return b;
}

BoundaryData boundary_trace(const ScalarField& u) {
    u.check_finite("boundary_trace");
    BoundaryData b(u.grid);
    const auto& walk = boundary_walk(u.grid);
    for (std::size_t k = 0; k < walk.size(); ++k) b.v[k] = u.at(walk[k].i, walk[k].j);
    return b;
}

namespace {

// One-sided stencil for one face direction; (di,dj) points inward.
cplx one_sided(const ScalarField& u, int i, int j, int di, int dj) {
    const double h = u.grid.h;
    return (3.0 * u.at(i, j) - 4.0 * u.at(i + di, j + dj) + u.at(i + 2 * di, j + 2 * dj)) / (2.0 * h);
}

} // namespace

BoundaryData normal_derivative(const ScalarField& u) {
    u.check_finite("normal_derivative");
    const Grid2D& g = u.grid;
    BoundaryData b(g);
    const auto& walk = boundary_walk(g);
    const int n = g.n;
    for (std::size_t k = 0; k < walk.size(); ++k) {
        int i = walk[k].i, j = walk[k].j;
        bool on_bottom = (j == 0), on_top = (j == n), on_left = (i == 0), on_right = (i == n);
        cplx acc = 0.0;
        int faces = 0;
        if (on_bottom) { acc += one_sided(u, i, j, 0, +1); ++faces; }
        if (on_top)    { acc += one_sided(u, i, j, 0, -1); ++faces; }
        if (on_left)   { acc += one_sided(u, i, j, +1, 0); ++faces; }
        if (on_right)  { acc += one_sided(u, i, j, -1, 0); ++faces; }
        b.v[k] = acc / static_cast<double>(faces);
    }
    return b;
}

cplx boundary_integral(const BoundaryData& a, const BoundaryData& b) {
    if (!a.grid.same(b.grid) || a.v.size() != b.v.size())
        throw ShapeError("boundary_integral: grid mismatch");
    KahanC s;
    for (std::size_t k = 0; k < a.v.size(); ++k) s.add(a.v[k] * b.v[k] * a.w[k]);
    return s.sum();
}

cplx volume_integral(const ScalarField& u) {
    const Grid2D& g = u.grid;
    const double h2 = g.h * g.h;
    KahanC s;
    for (int j = 0; j <= g.n; ++j) {
        double wj = (j == 0 || j == g.n) ? 0.5 : 1.0;
        for (int i = 0; i <= g.n; ++i) {
            double wi = (i == 0 || i == g.n) ? 0.5 : 1.0;
            s.add(u.at(i, j) * (wi * wj * h2));
        }
    }
    return s.sum();
}

void write_field_csv(const ScalarField& u, const std::string& path) {
    std::ofstream out(path);
    if (!out) throw Error("cannot open for writing: " + path);
    out << "x,y,re,im\n";
    for (int j = 0; j <= u.grid.n; ++j)
        for (int i = 0; i <= u.grid.n; ++i) {
            cplx z = u.at(i, j);
            out << fmt_g17(u.grid.x(i)) << ',' << fmt_g17(u.grid.y(j)) << ','
                << fmt_g17(z.real()) << ',' << fmt_g17(z.imag()) << '\n';
        }
}

ScalarField read_field_csv(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw Error("cannot open for reading: " + path);
    std::string line;
    std::getline(in, line); // header
    std::vector<double> xs, ys, re, im;
    while (std::getline(in, line)) {
        if (line.empty()) continue;
        std::istringstream ls(line);
        std::string tok;
        double vals[4];
        for (int c = 0; c < 4; ++c) {
            if (!std::getline(ls, tok, ',')) throw Error("bad field CSV row: " + line);
            vals[c] = std::strtod(tok.c_str(), nullptr);
        }
        xs.push_back(vals[0]); ys.push_back(vals[1]); re.push_back(vals[2]); im.push_back(vals[3]);
    }
    std::size_t count = xs.size();
    int side = static_cast<int>(std::lround(std::sqrt(static_cast<double>(count))));
    if (static_cast<std::size_t>(side) * static_cast<std::size_t>(side) != count || side < 5)
        throw ShapeError("field CSV is not a square node grid");
    ScalarField u(build_grid(side - 1));
    for (std::size_t k = 0; k < count; ++k) u.v[k] = cplx(re[k], im[k]);
    return u;
}

void write_boundary_csv(const BoundaryData& b, const std::string& path) {
    std::ofstream out(path);
    if (!out) throw Error("cannot open for writing: " + path);
    out << "s,re,im,weight\n";
    for (std::size_t k = 0; k < b.v.size(); ++k) {
        double s = static_cast<double>(k) * b.grid.h;
        out << fmt_g17(s) << ',' << fmt_g17(b.v[k].real()) << ',' << fmt_g17(b.v[k].imag()) << ','
            << fmt_g17(b.w[k]) << '\n';
    }
}

} // namespace invlab
