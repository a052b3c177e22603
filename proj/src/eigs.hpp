#pragma once

#include <Eigen/Sparse>
#include <functional>

#include "chart.hpp"

namespace geomq {

using SpMat = Eigen::SparseMatrix<double>;

// Matrix-free operator contract used by the iterative path: the solver only
// ever calls apply(in, out), so factorizations or matrix representations stay
// on the caller's side of the seam.
struct LinearOperator {
    int dim = 0;
    std::function<void(const double* in, double* out)> apply;
};

struct EigPairs {
    std::vector<double> values; // ascending
    Mat vectors;                // dim x count, unit M-norm columns
};

// Lowest nev eigenpairs of A x = lambda M x with A symmetric and M a positive
// diagonal. Dense solve up to dense_limit unknowns, shift-invert Lanczos with
// deflation restarts above it.
EigPairs lowest_eigenpairs(const SpMat& A, const Vec& mdiag, int nev, int dense_limit = 4000);

// Largest-magnitude eigenpairs of a symmetric operator given only through the
// callback. Deterministic seeded starts; full reorthogonalization.
EigPairs lanczos_largest(const LinearOperator& op, int nev, double tol = 1e-12);

double max_relative_asymmetry(const SpMat& A);

} // namespace geomq
