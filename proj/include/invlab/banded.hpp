// Direct solver for the interior systems behind the elliptic module:
// (-Laplacian_h + D) u = b on the (n-1)^2 interior nodes of the unit-square
// grid, D diagonal. Banded Cholesky with long-double iterative refinement:
// the divided differences downstream subtract near-equal oracle outputs, so
// the solves must stay near the rounding floor.
#pragma once
#include <vector>

#include "invlab/grid.hpp"

namespace invlab {

class InteriorOperator {
public:
    // diag_extra holds D at interior nodes in row-major interior order; empty means D = 0.
    InteriorOperator(const Grid2D& g, std::vector<double> diag_extra = {});

    int size() const { return m_ * m_; }
    int band() const { return m_; }

    // y = (-Lap_h + D) x, long-double accumulation per row.
    void apply(const std::vector<double>& x, std::vector<double>& y) const;

    const Grid2D& grid() const { return g_; }
    const std::vector<double>& diag_extra() const { return dx_; }

private:
    Grid2D g_;
    int m_; // interior nodes per row = n-1
    std::vector<double> dx_;
};

// Cholesky factor of an InteriorOperator; throws SolverFailureError on a
// non-positive pivot (the system left the SPD regime).
class BandedCholesky {
public:
    explicit BandedCholesky(const InteriorOperator& op);

    // Solves to a refined residual; up to `max_refine` correction passes.
    std::vector<double> solve(const std::vector<double>& rhs, int max_refine = 3) const;

private:
    void raw_solve(std::vector<double>& x) const;

    const InteriorOperator* op_;
    int n_ = 0, bw_ = 0;
    std::vector<double> f_; // row-major lower band, row i holds L(i, i-bw..i)
};

// Interior row-major index helpers for fields including boundary.
int interior_index(const Grid2D& g, int i, int j);

// Solve (-Lap_h) u = rhs_interior with Dirichlet values given on the full
// field `bc` (only its boundary ring is read). Returns the full field.
std::vector<double> solve_dirichlet_real(const Grid2D& g, const std::vector<double>& bc,
                                         const std::vector<double>& rhs_interior,
                                         const std::vector<double>& diag_extra = {});

} // namespace invlab
