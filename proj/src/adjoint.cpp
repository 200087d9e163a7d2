#include "weldopt/adjoint.hpp"

#include "weldopt/errors.hpp"

namespace weldopt {

Vector apply_lagged_transpose(const HeatModel& model, const Vector& theta_m,
                              const Vector& theta_next, const Vector& p) {
  const auto& map = model.assembly();
  const auto elements = map.elements();
  const double alpha = model.params().implicitness;
  const double tau = model.time_step();
  ElementFields f;
  evaluate_fields(model.exec(), map, model.material(), theta_m, f);
  const Vector theta_alpha = alpha * theta_next + (1.0 - alpha) * theta_m;

  std::vector<Local3> local(elements.size());
  for_each_element(model.exec(), elements.size(), [&](std::size_t e) {
    const auto& g = elements[e];
    double pe[3], we[3], te[3];
    for (int i = 0; i < 3; ++i) {
      pe[i] = p[g.nodes[i]];
      we[i] = theta_next[g.nodes[i]] - theta_m[g.nodes[i]];
      te[i] = theta_alpha[g.nodes[i]];
    }
    // p^T m w, p^T S_r theta_a, p^T S_z theta_a for the coefficient derivatives
    double pmw = 0.0, psr = 0.0, psz = 0.0;
    for (int i = 0; i < 3; ++i) {
      for (int j = 0; j < 3; ++j) {
        const int l = 3 * i + j;
        pmw += pe[i] * g.mass[l] * we[j];
        psr += pe[i] * g.stiff_r[l] * te[j];
        psz += pe[i] * g.stiff_z[l] * te[j];
      }
    }
    const double shared = (f.capacity_slope[e] * pmw +
                           tau * (f.kappa_r_slope[e] * psr + f.kappa_z_slope[e] * psz)) / 3.0;
    for (int i = 0; i < 3; ++i) {
      double acc = 0.0;
      for (int j = 0; j < 3; ++j) {
        const int l = 3 * i + j;
        acc += (-f.capacity[e] * g.mass[l] +
                (1.0 - alpha) * tau * (f.kappa_r[e] * g.stiff_r[l] + f.kappa_z[e] * g.stiff_z[l])) *
               pe[j];
      }
      local[e][i] = acc + shared;
    }
  });
  Vector out(static_cast<Eigen::Index>(model.num_nodes()));
  gather_to_nodes(model.exec(), map, local, {out.data(), static_cast<std::size_t>(out.size())});
  if (alpha < 1.0) model.apply_cooling_jacobian(theta_alpha, p, (1.0 - alpha) * tau, out);
  return out;
}

AdjointSolver::AdjointSolver(const HeatModel& model)
    : model_(model), jacobian_(model.assembly().pattern()) {
  solver_.analyze(jacobian_);
}

AdjointTrajectory AdjointSolver::solve(const Trajectory& traj, const ObjectiveWeights& w) {
  const int steps = traj.steps();
  if (steps < 1) throw InvalidInput("trajectory has no time steps");
  const auto n = static_cast<Eigen::Index>(model_.num_nodes());
  const double alpha = model_.params().implicitness;
  const int target = model_.mesh().target_node;
  const std::vector<double> pen = penetration_derivative(traj, w, model_.mesh());

  AdjointTrajectory adj;
  adj.states.assign(static_cast<std::size_t>(steps), Vector::Zero(n));
  // velocity-term derivative with respect to the earlier state of the pair
  // (m+1, m+2), waiting to be added when theta_{m+1} is processed
  Vector carry = Vector::Zero(n);
  for (int m = steps - 1; m >= 0; --m) {
    const auto mu = static_cast<std::size_t>(m);
    const Vector& theta_m = traj.states[mu];
    const Vector& theta_next = traj.states[mu + 1];

    Vector rhs = carry;
    Vector d_earlier = Vector::Zero(n);
    add_velocity_derivative(model_, w, theta_m, theta_next, d_earlier, rhs);
    rhs[target] += pen[mu];
    if (m == steps - 1) {
      rhs += completeness_derivative(theta_next, w, model_);
    } else {
      rhs += apply_lagged_transpose(model_, theta_next, traj.states[mu + 2], adj.states[mu + 1]);
    }
    carry = std::move(d_earlier);

    if (rhs.isZero(0.0)) continue;  // p_m stays zero
    evaluate_fields(model_.exec(), model_.assembly(), model_.material(), theta_m, fields_);
    model_.assemble_step_jacobian(fields_, alpha * theta_next + (1.0 - alpha) * theta_m, jacobian_);
    try {
      adj.states[mu] = -solver_.solve(jacobian_, rhs);
    } catch (const SolverError& err) {
      throw SolverError(std::string(err.what()) + " in adjoint step " + std::to_string(m), 0.0, m);
    }
  }
  return adj;
}

AdjointTrajectory solve_adjoint(const HeatModel& model, const Trajectory& traj,
                                const ObjectiveWeights& w) {
  AdjointSolver solver(model);
  return solver.solve(traj, w);
}

std::vector<double> reduced_gradient(const HeatModel& model, const AdjointTrajectory& adj,
                                     const Control& control, const ObjectiveWeights& w) {
  if (adj.states.size() != control.size()) {
    throw InvalidInput("adjoint and control lengths differ");
  }
  std::vector<double> g(control.size());
  for (std::size_t n = 0; n < g.size(); ++n) {
    g[n] = w.control * control.values[n] - adj.states[n].dot(model.laser_load());
  }
  return g;
}

WeldingProblem::WeldingProblem(HeatModel& model, ObjectiveWeights weights)
    : model_(model), weights_(weights), adjoint_(model) {
  weights_.validate();
}

Evaluation WeldingProblem::evaluate(const Control& control) {
  Evaluation e;
  e.control = control;
  e.trajectory = model_.solve_forward(control);
  e.report = weldopt::evaluate(control, e.trajectory, weights_, model_);
  return e;
}

std::vector<double> WeldingProblem::gradient(const Evaluation& eval) {
  const AdjointTrajectory adj = adjoint_.solve(eval.trajectory, weights_);
  return reduced_gradient(model_, adj, eval.control, weights_);
}

double fd_gradient_oracle(WeldingProblem& problem, const Control& control,
                          const std::vector<double>& direction, double h) {
  if (!(h > 0.0)) throw InvalidInput("finite-difference step must be positive");
  if (direction.size() != control.size()) throw InvalidInput("direction has the wrong length");
  auto shifted = [&](double t) {
    Control c = control;
    for (std::size_t n = 0; n < c.size(); ++n) c.values[n] += t * direction[n];
    return c;
  };
  const Control plus = shifted(h);
  const Control minus = shifted(-h);
  if (plus.feasible() && minus.feasible()) {
    return (problem.evaluate(plus).total() - problem.evaluate(minus).total()) / (2.0 * h);
  }
  if (plus.feasible()) return (problem.evaluate(plus).total() - problem.evaluate(control).total()) / h;
  if (minus.feasible()) {
    return (problem.evaluate(control).total() - problem.evaluate(minus).total()) / h;
  }
  throw InvalidInput("no feasible finite-difference stencil along this direction");
}

double tau_dot(const std::vector<double>& a, const std::vector<double>& b, double tau) {
  double s = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) s += a[i] * b[i];
  return tau * s;
}

}  // namespace weldopt
