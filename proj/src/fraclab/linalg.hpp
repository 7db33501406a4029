#pragma once

#include <cstddef>
#include <functional>
#include <vector>

#include "fraclab/exec.hpp"

namespace fraclab {

/// Direct tridiagonal solve (Thomas algorithm) for the 1D implicit steps.
/// sub[0] and sup[n-1] are ignored.  Throws NumericalError on a vanishing
/// pivot.  The bands are taken by value: elimination works on the copies.
std::vector<double> solve_tridiagonal(std::vector<double> sub, std::vector<double> dia,
                                      std::vector<double> sup, std::vector<double> rhs);

/// Matrix-vector product y = A x for matrix-free Krylov iteration.
using ApplyFn = std::function<void(const std::vector<double>&, std::vector<double>&)>;

struct KrylovResult {
    std::vector<double> x;
    int iterations = 0;
    double residual = 0.0;  ///< final true relative residual |b - Ax| / |b|
    bool converged = false;
};

/// Diagonally preconditioned BiCGStab for Ax = b, x0 = 0.  The implicit-step
/// matrix is nonsymmetric whenever a drift coefficient is present, so the
/// stabilised iteration is the default for the 2D path.  `diag` holds the
/// matrix diagonal.  Convergence is judged on the true residual.
KrylovResult bicgstab(const ApplyFn& apply, const std::vector<double>& diag,
                      const std::vector<double>& b, double rel_tol, int max_iter,
                      Exec ex = Exec::parallel);

}  // namespace fraclab
