#pragma once

// Projected gradient descent on the box [0,1]^N with backtracking line search.

#include <cmath>
#include <concepts>
#include <functional>
#include <string_view>
#include <vector>

#include "weldopt/adjoint.hpp"
#include "weldopt/errors.hpp"

namespace weldopt {

struct OptimizerConfig {
  double sigma = 1e-4;
  double initial_step = 1.0;
  double backtrack_factor = 0.5;
  double min_step = 1e-12;
  bool warm_start = true;  // start each line search at twice the last accepted step
  double tol_grad = 1e-5;
  double tol_control = 1e-8;
  double tol_descent_rate = 1e-4;
  int max_iterations = 100;

  void validate() const;
};

enum class StopReason { None, Gradient, ControlChange, DescentRate, MaxIterations, Stagnation };

std::string_view to_string(StopReason reason);

struct IterationRecord {
  int iteration = 0;
  ObjectiveReport report;         // at the iterate entering this iteration
  double projected_gradient = 0;  // ||P_A g||_tau
  double step = 0;                // accepted step size, 0 if none
  double control_change = 0;      // ||u_trial - u_current||_tau
  double total_after = 0;         // objective at the accepted trial
  int trials = 0;                 // objective evaluations in the line search
  StopReason stop = StopReason::None;
};

struct DescentTrace {
  std::vector<IterationRecord> records;
  StopReason reason = StopReason::None;
  int evaluations = 0;
  int gradients = 0;
};

struct DescentResult {
  Evaluation best;
  DescentTrace trace;
};

// componentwise clamp to [0, 1]
std::vector<double> project_box(std::vector<double> u);

// g restricted to the tangent cone of [0,1]^N at u: interior components are
// kept; at u = 0 only g <= 0 survives, at u = 1 only g >= 0.
std::vector<double> project_tangent_cone(const std::vector<double>& g, const std::vector<double>& u);

template <class P>
concept DescentProblem = requires(P& p, const Control& c, const Evaluation& e) {
  { p.evaluate(c) } -> std::same_as<Evaluation>;
  { p.gradient(e) } -> std::convertible_to<std::vector<double>>;
};

namespace detail {

inline double tau_norm(const std::vector<double>& a, double tau) {
  return std::sqrt(tau_dot(a, a, tau));
}

}  // namespace detail

// Armijo backtracking along the projection arc: a trial
// u(a) = P(u - a g) is accepted when
//   j(u(a)) <= j(u) - sigma <g, u - u(a)>_tau,
// which is j(u) - sigma a ||g||^2_tau whenever no component is clipped.
template <DescentProblem P>
DescentResult descend(P& problem, const Control& initial, const OptimizerConfig& config,
                      const std::function<void(const IterationRecord&)>& on_iteration = {}) {
  config.validate();
  if (!initial.feasible()) throw InvalidInput("initial control is not feasible");
  const double tau = initial.time_step;
  DescentResult result;
  DescentTrace& trace = result.trace;
  Evaluation current = problem.evaluate(initial);
  ++trace.evaluations;
  double last_step = config.initial_step;

  for (int it = 1;; ++it) {
    IterationRecord rec;
    rec.iteration = it;
    rec.report = current.report;
    const std::vector<double> g = problem.gradient(current);
    ++trace.gradients;
    rec.projected_gradient =
        detail::tau_norm(project_tangent_cone(g, current.control.values), tau);

    auto finish = [&](StopReason reason) {
      rec.stop = reason;
      trace.reason = reason;
      trace.records.push_back(rec);
      if (on_iteration) on_iteration(rec);
    };
    if (rec.projected_gradient < config.tol_grad) {
      finish(StopReason::Gradient);
      break;
    }
    if (it > config.max_iterations) {
      finish(StopReason::MaxIterations);
      break;
    }

    double step = config.warm_start && it > 1 ? 2.0 * last_step : config.initial_step;
    bool accepted = false;
    Evaluation trial;
    while (step >= config.min_step) {
      std::vector<double> u = current.control.values;
      for (std::size_t n = 0; n < u.size(); ++n) u[n] -= step * g[n];
      Control c{project_box(std::move(u)), tau};
      std::vector<double> move(c.size());
      for (std::size_t n = 0; n < move.size(); ++n) move[n] = current.control.values[n] - c.values[n];
      const double decrease = tau_dot(g, move, tau);
      ++rec.trials;
      bool ok = false;
      try {
        trial = problem.evaluate(c);
        ++trace.evaluations;
        ok = trial.total() <= current.total() - config.sigma * decrease;
      } catch (const SolverError&) {
        ok = false;  // a step too long for the state solver counts as a failed trial
      }
      if (ok) {
        rec.control_change = detail::tau_norm(move, tau);
        accepted = true;
        break;
      }
      step *= config.backtrack_factor;
    }
    if (!accepted) {
      finish(StopReason::Stagnation);
      break;
    }
    rec.step = step;
    last_step = step;
    rec.total_after = trial.total();
    const double rate = current.total() != 0.0 ? 1.0 - trial.total() / current.total() : 0.0;
    current = std::move(trial);
    if (rec.control_change < config.tol_control) {
      finish(StopReason::ControlChange);
      break;
    }
    if (rate < config.tol_descent_rate) {
      finish(StopReason::DescentRate);
      break;
    }
    trace.records.push_back(rec);
    if (on_iteration) on_iteration(rec);
  }
  result.best = std::move(current);
  return result;
}

}  // namespace weldopt
