// Semilinear elliptic solver  Lap u + q u^m = 0  with Dirichlet data on the
// unit square, and the Dirichlet-to-Neumann oracle built from it.
#pragma once
#include <atomic>
#include <cstdint>
#include <memory>

#include "invlab/banded.hpp"
#include "invlab/grid.hpp"

namespace invlab {

struct EllipticProblem {
    ScalarField q;      // real-valued potential
    int m = 2;          // nonlinearity power, >= 2
    Grid2D grid;
    double delta = 1e-2; // admissible boundary sup-norm bound

    void validate() const;
};

struct SolveOptions {
    // Newton runs to its rounding floor; this is the guaranteed bound checked
    // at exit, not the stopping target.
    double residual_guarantee = 1e-11;
    int max_iterations = 25;
};

// 5-point discrete harmonic extension of f; complex data solved per component.
ScalarField solve_harmonic(const BoundaryData& f, const Grid2D& g);

// Newton on the discrete residual, initialized at the harmonic extension.
// Real boundary data only; throws AdmissibilityError / WellPosednessError.
ScalarField solve_semilinear(const EllipticProblem& p, const BoundaryData& f,
                             const SolveOptions& opt = {});

// Black-box boundary-to-boundary map f -> normal_derivative(u_f). This is the
// only interface the reconstruction modules may touch.
class DtnOracle {
public:
    DtnOracle(EllipticProblem p, SolveOptions opt = {});

    BoundaryData operator()(const BoundaryData& f) const;
    double delta() const { return p_.delta; }
    const Grid2D& grid() const { return p_.grid; }
    std::uint64_t calls() const { return calls_.load(); }

private:
    EllipticProblem p_;
    SolveOptions opt_;
    mutable std::atomic<std::uint64_t> calls_{0};
};

DtnOracle make_dtn(const EllipticProblem& p);

} // namespace invlab
