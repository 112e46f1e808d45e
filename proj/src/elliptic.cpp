#include "invlab/elliptic.hpp"

#include <cmath>

namespace invlab {

void EllipticProblem::validate() const {
    if (m < 2) throw Error("EllipticProblem: m must be >= 2");
    if (delta <= 0.0) throw Error("EllipticProblem: delta must be positive");
    if (!q.grid.same(grid)) throw ShapeError("EllipticProblem: q lives on a different grid");
    for (const cplx& z : q.v)
        if (z.imag() != 0.0) throw Error("EllipticProblem: q must be real-valued");
}

namespace {

std::vector<double> boundary_to_full(const Grid2D& g, const BoundaryData& f, bool imag_part) {
    std::vector<double> bc(static_cast<std::size_t>(g.nodes()), 0.0);
    const auto& walk = boundary_walk(g);
    for (std::size_t k = 0; k < walk.size(); ++k)
        bc[g.id(walk[k].i, walk[k].j)] = imag_part ? f.v[k].imag() : f.v[k].real();
    return bc;
}

// Max-norm residual of Lap_h u + q u^m over interior nodes (real arrays).
double interior_residual(const Grid2D& g, const std::vector<double>& u, const std::vector<double>& q,
                         int m, std::vector<double>* out) {
    const int n = g.n;
    const double ih2 = 1.0 / (g.h * g.h);
    double worst = 0.0;
    for (int j = 1; j < n; ++j)
        for (int i = 1; i < n; ++i) {
            int c = g.id(i, j);
            long double lap = (static_cast<long double>(u[c - 1]) + u[c + 1] + u[c - (n + 1)] +
                               u[c + (n + 1)] - 4.0L * u[c]) * ih2;
            long double r = lap + static_cast<long double>(q[c]) * ipow(u[c], m);
            if (out) (*out)[interior_index(g, i, j)] = static_cast<double>(r);
            worst = std::max(worst, static_cast<double>(std::fabs(static_cast<double>(r))));
        }
    return worst;
}

} // namespace

ScalarField solve_harmonic(const BoundaryData& f, const Grid2D& g) {
    if (!f.grid.same(g)) throw ShapeError("solve_harmonic: boundary data grid mismatch");
    f.check_finite("solve_harmonic");
    ScalarField u(g);
    std::vector<double> zero_rhs(static_cast<std::size_t>(g.interior_nodes()), 0.0);
    std::vector<double> re = solve_dirichlet_real(g, boundary_to_full(g, f, false), zero_rhs);
    if (f.is_real()) {
        for (int k = 0; k < g.nodes(); ++k) u.v[k] = re[k];
        return u;
    }
    std::vector<double> im = solve_dirichlet_real(g, boundary_to_full(g, f, true), zero_rhs);
    for (int k = 0; k < g.nodes(); ++k) u.v[k] = cplx(re[k], im[k]);
    return u;
}

ScalarField solve_semilinear(const EllipticProblem& p, const BoundaryData& f, const SolveOptions& opt) {
    p.validate();
    if (!f.grid.same(p.grid)) throw ShapeError("solve_semilinear: boundary data grid mismatch");
    f.check_finite("solve_semilinear");
    if (!f.is_real()) throw Error("solve_semilinear: nonlinear solver accepts real boundary data only");
    if (f.norm_inf() > p.delta)
        throw AdmissibilityError("solve_semilinear: ||f||_inf exceeds delta = " + fmt_g17(p.delta));

    // With q identically zero the equation degenerates to the harmonic one.
    if (p.q.norm_inf() == 0.0) return solve_harmonic(f, p.grid);

    const Grid2D& g = p.grid;
    const int n = g.n, m_int = g.interior_nodes();
    std::vector<double> q(static_cast<std::size_t>(g.nodes()));
    for (int k = 0; k < g.nodes(); ++k) q[k] = p.q.v[k].real();

    std::vector<double> bc = boundary_to_full(g, f, false);
    std::vector<double> zero_rhs(static_cast<std::size_t>(m_int), 0.0);
    std::vector<double> u = solve_dirichlet_real(g, bc, zero_rhs);

    std::vector<double> res(static_cast<std::size_t>(m_int));
    double rn = interior_residual(g, u, q, p.m, &res);
    double best = rn;
    std::vector<double> best_u = u;
    int stall = 0;
    for (int it = 0; it < opt.max_iterations && rn > 0.0; ++it) {
        // Jacobian of -(Lap u + q u^m) is (-Lap) - m q u^(m-1) on the diagonal.
        std::vector<double> dd(static_cast<std::size_t>(m_int));
        for (int j = 1; j < n; ++j)
            for (int i = 1; i < n; ++i) {
                int c = g.id(i, j);
                dd[interior_index(g, i, j)] = -p.m * q[c] * ipow(u[c], p.m - 1);
            }
        std::vector<double> step;
        try {
            InteriorOperator jac(g, dd);
            BandedCholesky chol(jac);
            step = chol.solve(res);
        } catch (const SolverFailureError&) {
            // Jacobian left the SPD neighbourhood: the iterate is outside the
            // small-data regime.
            throw WellPosednessError("solve_semilinear: Jacobian lost positivity "
                                     "(f outside the small-data regime)", rn);
        }
        for (int j = 1; j < n; ++j)
            for (int i = 1; i < n; ++i) u[g.id(i, j)] += step[interior_index(g, i, j)];
        rn = interior_residual(g, u, q, p.m, &res);
        if (rn < best) {
            best = rn;
            best_u = u;
            stall = 0;
        } else if (++stall >= 2 && best <= opt.residual_guarantee) {
            break; // at the rounding floor
        }
    }
    if (best > opt.residual_guarantee)
        throw WellPosednessError("solve_semilinear: Newton stalled above the residual guarantee "
                                 "(f likely outside the small-data regime)", best);

    ScalarField out(g);
    for (int k = 0; k < g.nodes(); ++k) out.v[k] = best_u[k];
    return out;
}

DtnOracle::DtnOracle(EllipticProblem p, SolveOptions opt) : p_(std::move(p)), opt_(opt) {
    p_.validate();
}

BoundaryData DtnOracle::operator()(const BoundaryData& f) const {
    calls_.fetch_add(1);
    return normal_derivative(solve_semilinear(p_, f, opt_));
}

DtnOracle make_dtn(const EllipticProblem& p) { return DtnOracle(p); }

} // namespace invlab
