#include "invlab/multilin.hpp"

namespace invlab {

Hierarchy linearized_hierarchy(const EllipticProblem& p, const std::vector<BoundaryData>& probes) {
    p.validate();
    if (static_cast<int>(probes.size()) != p.m)
        throw ShapeError("linearized_hierarchy: expected m probes");
    const Grid2D& g = p.grid;

    Hierarchy out;
    out.v.reserve(probes.size());
    for (const BoundaryData& f : probes) out.v.push_back(solve_harmonic(f, g));

    double mfact = 1.0;
    for (int j = 2; j <= p.m; ++j) mfact *= j;

    // (-Lap) w = m! q prod(v_j) with zero boundary values.
    std::vector<cplx> rhs(static_cast<std::size_t>(g.interior_nodes()));
    for (int j = 1; j < g.n; ++j)
        for (int i = 1; i < g.n; ++i) {
            cplx prod = 1.0;
            for (const ScalarField& v : out.v) prod *= v.at(i, j);
            rhs[interior_index(g, i, j)] = mfact * p.q.at(i, j) * prod;
        }

    std::vector<double> zero_bc(static_cast<std::size_t>(g.nodes()), 0.0);
    std::vector<double> rr(rhs.size()), ri(rhs.size());
    bool complex_rhs = false;
    for (std::size_t k = 0; k < rhs.size(); ++k) {
        rr[k] = rhs[k].real();
        ri[k] = rhs[k].imag();
        if (ri[k] != 0.0) complex_rhs = true;
    }
    std::vector<double> wre = solve_dirichlet_real(g, zero_bc, rr);
    out.w = ScalarField(g);
    if (complex_rhs) {
        std::vector<double> wim = solve_dirichlet_real(g, zero_bc, ri);
        for (int k = 0; k < g.nodes(); ++k) out.w.v[k] = cplx(wre[k], wim[k]);
    } else {
        for (int k = 0; k < g.nodes(); ++k) out.w.v[k] = wre[k];
    }
    return out;
}

namespace {

double identity_residual_once(const std::function<cplx(double, double)>& q_fn, int m, int n,
                              double eps) {
    Grid2D g = build_grid(n);
    EllipticProblem p;
    p.grid = g;
    p.q = make_field(g, q_fn);
    p.m = m;
    p.delta = 1.0; // constant probes of amplitude eps stay well inside
    DtnOracle oracle(p);

    BoundaryData one = make_boundary(g, [](double, double) { return cplx(1.0, 0.0); });
    std::vector<BoundaryData> probes(static_cast<std::size_t>(m), one);
    EpsilonSchedule sched = EpsilonSchedule::uniform(m, eps);
    cplx pairing = integral_pairing(oracle, probes, one, sched);

    ScalarField integrand = p.q; // probes are 1, so the product is q itself
    cplx direct = volume_integral(integrand);
    return std::abs(pairing - direct);
}

} // namespace

std::vector<IdentityRow> identity_convergence_table(
    const std::function<cplx(double, double)>& q_fn, int m, int n_fixed,
    const std::vector<double>& eps_sweep, const std::vector<int>& n_sweep, double eps_fixed) {
    std::vector<IdentityRow> rows;
    for (double eps : eps_sweep)
        rows.push_back({eps, 1.0 / n_fixed, identity_residual_once(q_fn, m, n_fixed, eps)});
    for (int n : n_sweep)
        rows.push_back({eps_fixed, 1.0 / n, identity_residual_once(q_fn, m, n, eps_fixed)});
    return rows;
}

} // namespace invlab
