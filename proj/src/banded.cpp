#include "invlab/banded.hpp"

#include <cmath>
#include <limits>

namespace invlab {

InteriorOperator::InteriorOperator(const Grid2D& g, std::vector<double> diag_extra)
    : g_(g), m_(g.n - 1), dx_(std::move(diag_extra)) {
    if (!dx_.empty() && static_cast<int>(dx_.size()) != m_ * m_)
        throw ShapeError("InteriorOperator: diag_extra size mismatch");
}

void InteriorOperator::apply(const std::vector<double>& x, std::vector<double>& y) const {
    const int m = m_;
    const double ih2 = 1.0 / (g_.h * g_.h);
    y.resize(static_cast<std::size_t>(m * m));
    for (int j = 0; j < m; ++j) {
        for (int i = 0; i < m; ++i) {
            int k = j * m + i;
            long double acc = 4.0L * static_cast<long double>(x[k]);
            if (i > 0) acc -= x[k - 1];
            if (i < m - 1) acc -= x[k + 1];
            if (j > 0) acc -= x[k - m];
            if (j < m - 1) acc -= x[k + m];
            acc *= ih2;
            if (!dx_.empty()) acc += static_cast<long double>(dx_[k]) * x[k];
            y[k] = static_cast<double>(acc);
        }
    }
}

BandedCholesky::BandedCholesky(const InteriorOperator& op) : op_(&op) {
    n_ = op.size();
    bw_ = op.band();
    const int m = op.band();
    const double ih2 = 1.0 / (op.grid().h * op.grid().h);
    const auto& dx = op.diag_extra();

    // Assemble the lower band of (-Lap_h + D): diag 4/h^2 + D, first
    // off-diagonal -1/h^2 (broken at row ends), bw-th off-diagonal -1/h^2.
    f_.assign(static_cast<std::size_t>(n_) * (bw_ + 1), 0.0);
    auto at = [&](int i, int d) -> double& { return f_[static_cast<std::size_t>(i) * (bw_ + 1) + d]; };
    for (int k = 0; k < n_; ++k) {
        at(k, bw_) = 4.0 * ih2 + (dx.empty() ? 0.0 : dx[k]);
        if (k % m != 0) at(k, bw_ - 1) = -ih2;
        if (k >= m) at(k, 0) = -ih2;
    }

    // In-place banded Cholesky (LL^T).
    for (int i = 0; i < n_; ++i) {
        int lo = std::max(0, i - bw_);
        for (int j = lo; j <= i; ++j) {
            long double s = at(i, bw_ - (i - j));
            int klo = std::max(lo, j - bw_);
            for (int k = klo; k < j; ++k)
                s -= static_cast<long double>(at(i, bw_ - (i - k))) * at(j, bw_ - (j - k));
            if (j == i) {
                if (s <= 0.0L) throw SolverFailureError("BandedCholesky: non-positive pivot (system not SPD)");
                at(i, bw_) = static_cast<double>(std::sqrt(static_cast<double>(s)));
            } else {
                at(i, bw_ - (i - j)) = static_cast<double>(s / at(j, bw_));
            }
        }
    }
}

void BandedCholesky::raw_solve(std::vector<double>& x) const {
    auto at = [&](int i, int d) -> double { return f_[static_cast<std::size_t>(i) * (bw_ + 1) + d]; };
    // forward L y = b
    for (int i = 0; i < n_; ++i) {
        long double s = x[i];
        int lo = std::max(0, i - bw_);
        for (int k = lo; k < i; ++k) s -= static_cast<long double>(at(i, bw_ - (i - k))) * x[k];
        x[i] = static_cast<double>(s / at(i, bw_));
    }
    // backward L^T x = y
    for (int i = n_ - 1; i >= 0; --i) {
        long double s = x[i];
        int hi = std::min(n_ - 1, i + bw_);
        for (int k = i + 1; k <= hi; ++k) s -= static_cast<long double>(at(k, bw_ - (k - i))) * x[k];
        x[i] = static_cast<double>(s / at(i, bw_));
    }
}

std::vector<double> BandedCholesky::solve(const std::vector<double>& rhs, int max_refine) const {
    if (static_cast<int>(rhs.size()) != n_) throw ShapeError("BandedCholesky::solve: rhs size mismatch");
    std::vector<double> x = rhs;
    raw_solve(x);
    std::vector<double> ax, r(static_cast<std::size_t>(n_));
    double prev = std::numeric_limits<double>::max();
    for (int pass = 0; pass < max_refine; ++pass) {
        op_->apply(x, ax);
        double rn = 0.0;
        for (int k = 0; k < n_; ++k) {
            r[k] = static_cast<double>(static_cast<long double>(rhs[k]) - ax[k]);
            rn = std::max(rn, std::abs(r[k]));
        }
        if (rn == 0.0 || rn >= 0.5 * prev) break;
        prev = rn;
        raw_solve(r);
        for (int k = 0; k < n_; ++k) x[k] += r[k];
    }
    return x;
}

int interior_index(const Grid2D& g, int i, int j) { return (j - 1) * (g.n - 1) + (i - 1); }

std::vector<double> solve_dirichlet_real(const Grid2D& g, const std::vector<double>& bc,
                                         const std::vector<double>& rhs_interior,
                                         const std::vector<double>& diag_extra) {
    const int n = g.n, m = n - 1;
    const double ih2 = 1.0 / (g.h * g.h);
    InteriorOperator op(g, diag_extra);
    BandedCholesky chol(op);

    std::vector<double> rhs = rhs_interior;
    if (static_cast<int>(rhs.size()) != m * m) throw ShapeError("solve_dirichlet_real: rhs size mismatch");
    // Move Dirichlet coupling to the right-hand side.
    for (int j = 1; j < n; ++j) {
        for (int i = 1; i < n; ++i) {
            int k = interior_index(g, i, j);
            if (i == 1) rhs[k] += ih2 * bc[g.id(0, j)];
            if (i == n - 1) rhs[k] += ih2 * bc[g.id(n, j)];
            if (j == 1) rhs[k] += ih2 * bc[g.id(i, 0)];
            if (j == n - 1) rhs[k] += ih2 * bc[g.id(i, n)];
        }
    }
    std::vector<double> u = chol.solve(rhs);

    std::vector<double> full(static_cast<std::size_t>(g.nodes()), 0.0);
    for (int j = 0; j <= n; ++j)
        for (int i = 0; i <= n; ++i) {
            bool bdry = (i == 0 || i == n || j == 0 || j == n);
            full[g.id(i, j)] = bdry ? bc[g.id(i, j)] : u[interior_index(g, i, j)];
        }
    return full;
}

} // namespace invlab
