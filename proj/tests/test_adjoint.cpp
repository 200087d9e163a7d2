#include <Eigen/SparseCholesky>

#include "support.hpp"
#include "weldopt/errors.hpp"

using namespace weldopt;
using testing::Rng;

namespace {

// Residual of one step written out from the scheme, for differentiation.
Vector step_residual(const HeatModel& model, const Vector& theta_m, const Vector& x, double u) {
  const double tau = model.time_step();
  const double alpha = model.params().implicitness;
  ElementFields f;
  evaluate_fields(Exec::Serial, model.assembly(), model.material(), theta_m, f);
  SparseMatrix mass = model.assembly().pattern(), stiff = model.assembly().pattern();
  assemble_operator(Exec::Serial, model.assembly(), f.capacity, {}, {}, 1.0, 0.0,
                    {mass.valuePtr(), static_cast<std::size_t>(mass.nonZeros())});
  assemble_operator(Exec::Serial, model.assembly(), {}, f.kappa_r, f.kappa_z, 0.0, 1.0,
                    {stiff.valuePtr(), static_cast<std::size_t>(stiff.nonZeros())});
  const Vector mid = alpha * x + (1.0 - alpha) * theta_m;
  Vector cooling;
  model.cooling_flux(mid, cooling);
  return mass * (x - theta_m) + tau * (stiff * mid) + tau * cooling - tau * u * model.laser_load();
}

ObjectiveWeights amplified() {
  ObjectiveWeights w;
  w.velocity = 1e3;
  w.v_max = 0.05;
  w.completeness = 1e-3;
  return w;
}

Control random_control(Rng& rng, std::size_t n, double tau) {
  return {rng.vector(n, 0.05, 0.95), tau};
}

struct GradientSample {
  double adjoint;
  double fd;
  bool smooth;
};

GradientSample sample(WeldingProblem& problem, const Control& u, const std::vector<double>& dir,
                      double h) {
  const Evaluation e = problem.evaluate(u);
  const auto g = problem.gradient(e);
  auto shifted = [&](double s) {
    Control c = u;
    for (std::size_t n = 0; n < c.size(); ++n) c.values[n] += s * dir[n];
    return problem.evaluate(c);
  };
  const Evaluation plus = shifted(h), minus = shifted(-h);
  testing::check_lp_inequality(plus.trajectory, problem.model().mesh(), problem.weights().p);
  const auto sig = activity_signature(e.trajectory, problem.weights(), problem.model());
  const bool smooth = activity_signature(plus.trajectory, problem.weights(), problem.model()) == sig &&
                      activity_signature(minus.trajectory, problem.weights(), problem.model()) == sig;
  return {tau_dot(g, dir, u.time_step), (plus.total() - minus.total()) / (2 * h), smooth};
}

}  // namespace

TEST_CASE("control-only objective has a zero adjoint") {
  HeatModel model = testing::make_small_model();
  ObjectiveWeights w;
  w.penetration = w.velocity = w.completeness = 0.0;
  WeldingProblem problem(model, w);
  Rng rng(2);
  const Control u = random_control(rng, 40, model.time_step());
  const Evaluation e = problem.evaluate(u);
  const AdjointTrajectory adj = solve_adjoint(model, e.trajectory, w);
  REQUIRE(adj.states.size() == 40);
  for (const auto& p : adj.states) CHECK(p.isZero(0.0));
  const auto g = reduced_gradient(model, adj, u, w);
  for (std::size_t n = 0; n < g.size(); ++n) CHECK(g[n] == w.control * u.values[n]);
  const auto g0 = reduced_gradient(model, adj, testing::constant_control(model, 0.0), w);
  for (double x : g0) CHECK(x == 0.0);
  // finite differences of the quadratic recover beta u tau per component
  std::vector<double> e5(40, 0.0);
  e5[5] = 1.0;
  CHECK(fd_gradient_oracle(problem, u, e5, 1e-6) ==
        doctest::Approx(w.control * u.values[5] * u.time_step).epsilon(1e-6));
}

TEST_CASE("adjoint gradient matches central differences") {
  for (double alpha : {1.0, 0.5}) {
    CAPTURE(alpha);
    SimulationParams p = testing::short_run();
    p.implicitness = alpha;
    HeatModel model = testing::make_small_model(25, 8, p);
    WeldingProblem problem(model, amplified());
    Rng rng(alpha == 1.0 ? 101 : 202);
    int compared = 0;
    for (int i = 0; i < 4; ++i) {
      const Control u = random_control(rng, 40, model.time_step());
      for (int j = 0; j < 3; ++j) {
        const auto dir = rng.vector(40, -1.0, 1.0);
        // the half-implicit scheme is stiff in u; its difference quotient needs a smaller h
        const GradientSample s = sample(problem, u, dir, alpha == 1.0 ? 1e-6 : 1e-7);
        if (!s.smooth) continue;
        CHECK(std::abs(s.adjoint - s.fd) / std::max(std::abs(s.fd), 1e-12) < 1e-4);
        ++compared;
      }
    }
    CHECK(compared >= 6);
  }
}

TEST_CASE("one-sided differences at the bounds") {
  HeatModel model = testing::make_small_model();
  WeldingProblem problem(model, ObjectiveWeights{});
  Control u = testing::pulse(model, 1.0, 5e-3);
  std::vector<double> dir(40, 0.0);
  dir[0] = 1.0;  // u_0 = 1: only the minus side is feasible
  const Evaluation e = problem.evaluate(u);
  const auto g = problem.gradient(e);
  const double fd = fd_gradient_oracle(problem, u, dir, 1e-7);
  CHECK(fd == doctest::Approx(g[0] * u.time_step).epsilon(1e-3));
  CHECK_THROWS_AS(fd_gradient_oracle(problem, u, dir, 0.0), InvalidInput);
}

TEST_CASE("adjoint is linear in the state weights") {
  HeatModel model = testing::make_small_model();
  const ObjectiveWeights w = amplified();
  ObjectiveWeights w2 = w;
  w2.penetration *= 2;
  w2.velocity *= 2;
  w2.completeness *= 2;
  const Trajectory t = testing::forward_checked(model, testing::pulse(model, 0.9, 6e-3), w.p);
  const AdjointTrajectory a = solve_adjoint(model, t, w);
  const AdjointTrajectory b = solve_adjoint(model, t, w2);
  double scale = 0.0;
  for (const auto& p : a.states) scale = std::max(scale, p.cwiseAbs().maxCoeff());
  REQUIRE(scale > 0.0);
  for (std::size_t n = 0; n < a.states.size(); ++n) {
    CHECK(testing::max_abs_diff(b.states[n], 2.0 * a.states[n]) <= 1e-8 * scale);
  }
}

TEST_CASE("completeness alone loads only the last step") {
  HeatModel model = testing::make_small_model();
  ObjectiveWeights w;
  w.penetration = w.velocity = w.control = 0.0;
  w.completeness = 1.0;
  // heat late so the final state is partly above solidus
  Control u = testing::constant_control(model, 0.0);
  for (std::size_t n = 30; n < 40; ++n) u.values[n] = 1.0;
  const Trajectory t = testing::forward_checked(model, u, w.p);
  const Vector terminal = completeness_derivative(t.states.back(), w, model);
  REQUIRE(terminal.cwiseAbs().maxCoeff() > 0.0);

  // no loads at earlier steps
  for (double d : penetration_derivative(t, w, model.mesh())) CHECK(d == 0.0);
  for (int n = 0; n + 1 < t.steps(); ++n) {
    const auto nu = static_cast<std::size_t>(n);
    Vector da = Vector::Zero(terminal.size()), db = Vector::Zero(terminal.size());
    add_velocity_derivative(model, w, t.states[nu], t.states[nu + 1], da, db);
    CHECK(da.isZero(0.0));
    CHECK(db.isZero(0.0));
  }

  // p_{N-1} from one direct solve, earlier p_n by propagation alone
  const AdjointTrajectory adj = solve_adjoint(model, t, w);
  ElementFields f;
  auto solve_transposed = [&](int m, const Vector& rhs) {
    const auto mu = static_cast<std::size_t>(m);
    evaluate_fields(Exec::Serial, model.assembly(), model.material(), t.states[mu], f);
    SparseMatrix j = model.assembly().pattern();
    model.assemble_step_jacobian(f, t.states[mu + 1], j);
    Eigen::SimplicialLDLT<SparseMatrix> ldlt(j);
    return Vector(-ldlt.solve(rhs));
  };
  const Vector last = solve_transposed(39, terminal);
  CHECK(testing::max_abs_diff(last, adj.states[39]) <= 1e-8 * last.cwiseAbs().maxCoeff());
  const Vector prev = solve_transposed(38, apply_lagged_transpose(model, t.states[39], t.states[40], adj.states[39]));
  CHECK(testing::max_abs_diff(prev, adj.states[38]) <= 1e-8 * prev.cwiseAbs().maxCoeff());
}

TEST_CASE("step Jacobians match differences of the residual") {
  for (double alpha : {1.0, 0.5, 0.0}) {
    CAPTURE(alpha);
    SimulationParams p = testing::short_run();
    p.implicitness = alpha;
    HeatModel model = testing::make_small_model(25, 8, p);
    Rng rng(61);
    const auto n = static_cast<Eigen::Index>(model.num_nodes());
    Vector theta_m(n), x(n), v(n), pvec(n);
    for (Eigen::Index k = 0; k < n; ++k) {
      theta_m[k] = rng.uniform(300.0, 1300.0);
      x[k] = theta_m[k] + rng.uniform(-40.0, 40.0);
      v[k] = rng.uniform(-1.0, 1.0);
      pvec[k] = rng.uniform(-1.0, 1.0);
    }
    const double h = 1e-4, u = 0.6;
    // with respect to the new state
    ElementFields f;
    evaluate_fields(Exec::Serial, model.assembly(), model.material(), theta_m, f);
    SparseMatrix j = model.assembly().pattern();
    model.assemble_step_jacobian(f, alpha * x + (1 - alpha) * theta_m, j);
    const Vector fd_new =
        (step_residual(model, theta_m, x + h * v, u) - step_residual(model, theta_m, x - h * v, u)) / (2 * h);
    CHECK(testing::max_abs_diff(j * v, fd_new) <= 1e-6 * fd_new.cwiseAbs().maxCoeff());
    // with respect to the lagged state, through the transpose
    const Vector fd_old =
        (step_residual(model, theta_m + h * v, x, u) - step_residual(model, theta_m - h * v, x, u)) / (2 * h);
    const double lhs = apply_lagged_transpose(model, theta_m, x, pvec).dot(v);
    CHECK(lhs == doctest::Approx(pvec.dot(fd_old)).epsilon(1e-6));
  }
}
