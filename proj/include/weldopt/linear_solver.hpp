#pragma once

// SPD solver for a sequence of matrices sharing one sparsity pattern whose
// values drift slowly (one per time step). A Cholesky factorization of an
// earlier matrix preconditions CG on the current one; the factorization is
// refreshed only when CG stops converging quickly.

#include <Eigen/SparseCholesky>

#include "weldopt/kernels.hpp"

namespace weldopt {

struct LinearSolverStats {
  long solves = 0;
  long factorizations = 0;
  long cg_iterations = 0;
};

class RecyclingCholesky {
 public:
  struct Options {
    // CG iterations tolerated before the current matrix is factorized.
    int max_cg_iterations = 6;
    // Relative residual in the preconditioner norm.
    double tolerance = 1e-10;
  };

  RecyclingCholesky() = default;
  explicit RecyclingCholesky(Options options) : options_(options) {}

  void analyze(const SparseMatrix& pattern);
  // Drops the stored factorization; the next solve factorizes.
  void reset() { valid_ = false; }

  // Solves A x = b. A must have the analyzed pattern and be SPD.
  Vector solve(const SparseMatrix& a, const Vector& b);

  const LinearSolverStats& stats() const { return stats_; }

 private:
  void factorize(const SparseMatrix& a);

  Options options_;
  Eigen::SimplicialLDLT<SparseMatrix, Eigen::Lower> factor_;
  bool analyzed_ = false;
  bool valid_ = false;
  LinearSolverStats stats_;
};

}  // namespace weldopt
