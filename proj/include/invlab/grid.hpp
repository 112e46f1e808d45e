// Uniform grid on the unit square, scalar fields, boundary traces and
// quadrature. Shared by the elliptic and reconstruction modules.
#pragma once
#include <string>
#include <vector>

#include "invlab/errors.hpp"
#include "invlab/util.hpp"

namespace invlab {

// (n+1)^2 nodes on [0,1]^2, mesh width h = 1/n. The boundary path is walked
// counterclockwise from (0,0), giving 4n boundary nodes indexed by arc length.
struct Grid2D {
    int n = 0;
    double h = 0.0;

    int nodes() const { return (n + 1) * (n + 1); }
    int boundary_nodes() const { return 4 * n; }
    int interior_nodes() const { return (n - 1) * (n - 1); }
    int id(int i, int j) const { return j * (n + 1) + i; }
    double x(int i) const { return i * h; }
    double y(int j) const { return j * h; }
    bool same(const Grid2D& o) const { return n == o.n; }
};

Grid2D build_grid(int n);

// Boundary node in arc-length order: grid index, position, face and outward
// normal. Faces: 0 bottom, 1 right, 2 top, 3 left; corners belong to the face
// the walk enters them on and carry is_corner.
struct BoundaryNode {
    int i, j;
    int face;
    bool is_corner;
    double nx, ny; // outward normal (corner: set to the entering face's normal)
};

const std::vector<BoundaryNode>& boundary_walk(const Grid2D& g);

struct ScalarField {
    Grid2D grid;
    std::vector<cplx> v;

    ScalarField() = default;
    explicit ScalarField(const Grid2D& g) : grid(g), v(static_cast<std::size_t>(g.nodes())) {}

    cplx& at(int i, int j) { return v[static_cast<std::size_t>(grid.id(i, j))]; }
    cplx at(int i, int j) const { return v[static_cast<std::size_t>(grid.id(i, j))]; }
    double norm_inf() const;
    void check_finite(const char* what) const;
};

// Trace values on the boundary walk plus trapezoid quadrature weights
// (h per node, corners included at h, total = perimeter 4).
struct BoundaryData {
    Grid2D grid;
    std::vector<cplx> v;
    std::vector<double> w;

    BoundaryData() = default;
    explicit BoundaryData(const Grid2D& g);

    int count() const { return static_cast<int>(v.size()); }
    double norm_inf() const;
    // sqrt(sum w |v|^2), the weighted boundary norm.
    double norm_w2() const;
    bool is_real(double tol = 0.0) const;
    void check_finite(const char* what) const;
};

ScalarField make_field(const Grid2D& g, const std::function<cplx(double, double)>& f);
BoundaryData make_boundary(const Grid2D& g, const std::function<cplx(double, double)>& f);

BoundaryData boundary_trace(const ScalarField& u);

// One-sided second-order stencil along the outward normal:
// (3 u0 - 4 u1 + u2) / (2h) with u1, u2 the first and second interior
// neighbours along the inward normal. Corners take the mean of the two
// adjacent face stencils.
BoundaryData normal_derivative(const ScalarField& u);

cplx boundary_integral(const BoundaryData& a, const BoundaryData& b);

// Trapezoid quadrature over the square; exact on bilinear fields.
cplx volume_integral(const ScalarField& u);

// CSV: "x,y,re,im", row-major (y outer, x inner).
void write_field_csv(const ScalarField& u, const std::string& path);
ScalarField read_field_csv(const std::string& path);
// CSV: "s,re,im,weight" with s the arc length from (0,0) counterclockwise.
void write_boundary_csv(const BoundaryData& b, const std::string& path);

} // namespace invlab
