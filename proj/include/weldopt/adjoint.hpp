#pragma once

// Discrete adjoint of the time stepping scheme and the reduced gradient of
// the objective with respect to the laser power fraction.
//
// With F_m(theta_{m+1}, theta_m, u_m) = 0 the residual of step m, the adjoint
// vectors p_0..p_{N-1} solve, backwards in time,
//   (dF_m/dtheta_{m+1})^T p_m = -dJ/dtheta_{m+1} - (dF_{m+1}/dtheta_{m+1})^T p_{m+1},
// where the last term (absent for m = N-1) differentiates the lagged
// coefficients s(theta), kappa(theta) and the explicit part of the step.

#include <optional>
#include <vector>

#include "weldopt/fem.hpp"
#include "weldopt/objective.hpp"

namespace weldopt {

struct AdjointTrajectory {
  std::vector<Vector> states;  // p_0 .. p_{N-1}
};

// (dF_m/dtheta_m)^T p for the step theta_m -> theta_next.
Vector apply_lagged_transpose(const HeatModel& model, const Vector& theta_m,
                              const Vector& theta_next, const Vector& p);

class AdjointSolver {
 public:
  explicit AdjointSolver(const HeatModel& model);

  AdjointTrajectory solve(const Trajectory& traj, const ObjectiveWeights& w);
  const LinearSolverStats& solver_stats() const { return solver_.stats(); }

 private:
  const HeatModel& model_;
  RecyclingCholesky solver_;
  SparseMatrix jacobian_;
  ElementFields fields_;
};

AdjointTrajectory solve_adjoint(const HeatModel& model, const Trajectory& traj,
                                const ObjectiveWeights& w);

// g_n = beta_control u_n - p_n . f, the gradient in the inner product
// <a, b> = tau sum a_n b_n.
std::vector<double> reduced_gradient(const HeatModel& model, const AdjointTrajectory& adj,
                                     const Control& control, const ObjectiveWeights& w);

// One forward solve and its objective report.
struct Evaluation {
  Control control;
  Trajectory trajectory;
  ObjectiveReport report;

  double total() const { return report.total; }
};

// Reduced objective j(u) = J(theta(u), u) on a fixed model.
class WeldingProblem {
 public:
  WeldingProblem(HeatModel& model, ObjectiveWeights weights);

  Evaluation evaluate(const Control& control);
  std::vector<double> gradient(const Evaluation& eval);

  HeatModel& model() { return model_; }
  const ObjectiveWeights& weights() const { return weights_; }
  double time_step() const { return model_.time_step(); }
  int steps() const { return model_.params().steps; }

 private:
  HeatModel& model_;
  ObjectiveWeights weights_;
  AdjointSolver adjoint_;
};

// Finite-difference derivative of j at control along direction, scaled by
// 1/h: central when both u +- h d are feasible, one-sided otherwise.
double fd_gradient_oracle(WeldingProblem& problem, const Control& control,
                          const std::vector<double>& direction, double h);

// tau sum a_n b_n
double tau_dot(const std::vector<double>& a, const std::vector<double>& b, double tau);

}  // namespace weldopt
