#include "weldopt/linear_solver.hpp"

#include <cmath>

#include "weldopt/errors.hpp"

namespace weldopt {

void RecyclingCholesky::analyze(const SparseMatrix& pattern) {
  factor_.analyzePattern(pattern);
  analyzed_ = true;
  valid_ = false;
}

void RecyclingCholesky::factorize(const SparseMatrix& a) {
  if (!analyzed_) analyze(a);
  factor_.factorize(a);
  if (factor_.info() != Eigen::Success) {
    valid_ = false;
    throw SolverError("Cholesky factorization failed (matrix not positive definite?)");
  }
  valid_ = true;
  ++stats_.factorizations;
}

Vector RecyclingCholesky::solve(const SparseMatrix& a, const Vector& b) {
  ++stats_.solves;
  if (valid_) {
    Vector x = Vector::Zero(b.size());
    Vector r = b;
    Vector z = factor_.solve(r);
    double rz = r.dot(z);
    const double threshold = options_.tolerance * options_.tolerance * rz;
    if (rz == 0.0) return x;
    Vector p = z;
    Vector ap(b.size());
    for (int k = 0; k < options_.max_cg_iterations; ++k) {
      ap.noalias() = a * p;
      const double step = rz / p.dot(ap);
      x += step * p;
      r -= step * ap;
      z = factor_.solve(r);
      const double rz_next = r.dot(z);
      ++stats_.cg_iterations;
      if (rz_next <= threshold) return x;
      p = z + (rz_next / rz) * p;
      rz = rz_next;
    }
  }
  factorize(a);
  Vector x = factor_.solve(b);
  if (!x.allFinite()) throw SolverError("non-finite solution of step system");
  return x;
}

}  // namespace weldopt
