#include <algorithm>

#include "support.hpp"
#include "weldopt/optimizer.hpp"

using namespace weldopt;
using testing::Rng;

namespace {

// j(u) = 1/2 tau sum c_n (u_n - t_n)^2, gradient in the tau inner product
struct Quadratic {
  std::vector<double> weight, target;
  double tau = 1e-4;
  int evaluations = 0;
  double throw_above = 1e300;  // trial controls with max |u - 0.5| above this fail

  Evaluation evaluate(const Control& c) {
    ++evaluations;
    double spread = 0.0;
    for (double u : c.values) spread = std::max(spread, std::abs(u - 0.5));
    if (spread > throw_above) throw SolverError("trial rejected by the mock solver");
    Evaluation e;
    e.control = c;
    double s = 0.0;
    for (std::size_t n = 0; n < c.size(); ++n) {
      s += weight[n] * (c.values[n] - target[n]) * (c.values[n] - target[n]);
    }
    e.report.control = e.report.total = 0.5 * tau * s;
    return e;
  }
  std::vector<double> gradient(const Evaluation& e) const {
    std::vector<double> g(e.control.size());
    for (std::size_t n = 0; n < g.size(); ++n) g[n] = weight[n] * (e.control.values[n] - target[n]);
    return g;
  }
};

// objective that never decreases along the negative gradient
struct Uphill {
  Evaluation evaluate(const Control& c) {
    Evaluation e;
    e.control = c;
    double s = 0.0;
    for (double u : c.values) s += u;
    e.report.total = 1.0 + s;
    return e;
  }
  std::vector<double> gradient(const Evaluation& e) const {
    return std::vector<double>(e.control.size(), -1.0);
  }
};

static_assert(DescentProblem<Quadratic>);
static_assert(DescentProblem<WeldingProblem>);

Quadratic random_quadratic(Rng& rng, std::size_t n) {
  return {rng.vector(n, 0.5, 1.5), rng.vector(n, -0.5, 1.5)};
}

void check_trace(const DescentResult& r, const Control& start, double tau) {
  double previous = 1e300;
  bool first = true;
  for (const auto& rec : r.trace.records) {
    if (!first) CHECK(rec.report.total <= previous);
    if (rec.step > 0.0) CHECK(rec.total_after <= rec.report.total);
    previous = rec.report.total;
    first = false;
  }
  // exactly one terminal record, at the end
  REQUIRE(!r.trace.records.empty());
  for (std::size_t i = 0; i + 1 < r.trace.records.size(); ++i) {
    CHECK(r.trace.records[i].stop == StopReason::None);
  }
  CHECK(r.trace.records.back().stop == r.trace.reason);
  CHECK(r.trace.reason != StopReason::None);
  CHECK(r.best.control.feasible());
  CHECK(r.best.control.time_step == tau);
  CHECK(r.best.total() <= r.trace.records.front().report.total);
  CHECK(start.size() == r.best.control.size());
}

}  // namespace

TEST_CASE("box projection") {
  const auto p = project_box({-0.5, 0.3, 1.7});
  CHECK(p == std::vector<double>{0.0, 0.3, 1.0});
  CHECK(project_box(p) == p);
  Rng rng(3);
  for (int trial = 0; trial < 100; ++trial) {
    const auto u = rng.vector(20, -2.0, 3.0);
    const auto once = project_box(u);
    CHECK(project_box(once) == once);
    for (double x : once) CHECK((x >= 0.0 && x <= 1.0));
  }
}

TEST_CASE("tangent cone projection") {
  const std::vector<double> u = {0.0, 0.0, 0.4, 1.0, 1.0};
  const std::vector<double> g = {2.0, -3.0, 5.0, 7.0, -1.0};
  CHECK(project_tangent_cone(g, u) == std::vector<double>{0.0, -3.0, 5.0, 7.0, 0.0});
  CHECK_THROWS_AS(project_tangent_cone(g, {0.0, 0.0, 0.4, 1.0, 1.2}), InvalidInput);
  CHECK_THROWS_AS(project_tangent_cone(g, {0.0}), InvalidInput);
}

TEST_CASE("descent on a box-constrained quadratic") {
  Rng rng(5);
  for (int trial = 0; trial < 20; ++trial) {
    Quadratic q = random_quadratic(rng, 30);
    const Control start{rng.vector(30, 0.0, 1.0), q.tau};
    OptimizerConfig cfg;
    cfg.tol_descent_rate = 0.0;
    cfg.tol_control = 0.0;
    cfg.tol_grad = 1e-8;
    cfg.max_iterations = 200;
    const DescentResult r = descend(q, start, cfg);
    check_trace(r, start, q.tau);
    CHECK(r.trace.reason == StopReason::Gradient);
    for (std::size_t n = 0; n < 30; ++n) {
      CHECK(r.best.control.values[n] == doctest::Approx(std::clamp(q.target[n], 0.0, 1.0)).scale(1).epsilon(1e-5));
    }
    CHECK(r.trace.evaluations == q.evaluations);
  }
}

TEST_CASE("stationary start stops after one iteration") {
  Quadratic q{std::vector<double>(10, 1.0), {-1, -1, 2, 2, -0.5, 3, 0, 1, 0, 1}};
  Control start{project_box(q.target), q.tau};
  const DescentResult r = descend(q, start, OptimizerConfig{});
  CHECK(r.trace.records.size() == 1);
  CHECK(r.trace.reason == StopReason::Gradient);
  CHECK(r.best.control.values == start.values);
}

TEST_CASE("other stopping rules") {
  Rng rng(9);
  Quadratic q = random_quadratic(rng, 12);
  const Control start{std::vector<double>(12, 0.5), q.tau};
  SUBCASE("iteration limit") {
    OptimizerConfig cfg;
    cfg.max_iterations = 2;
    cfg.tol_descent_rate = 0.0;
    cfg.tol_control = 0.0;
    cfg.tol_grad = 0.0;
    const DescentResult r = descend(q, start, cfg);
    CHECK(r.trace.reason == StopReason::MaxIterations);
    CHECK(r.trace.records.size() == 3);
    check_trace(r, start, q.tau);
  }
  SUBCASE("descent rate") {
    OptimizerConfig cfg;
    cfg.tol_descent_rate = 1.0;
    const DescentResult r = descend(q, start, cfg);
    CHECK(r.trace.reason == StopReason::DescentRate);
    CHECK(r.trace.records.size() == 1);
  }
  SUBCASE("control change") {
    OptimizerConfig cfg;
    cfg.tol_control = 1.0;
    cfg.tol_descent_rate = 0.0;
    const DescentResult r = descend(q, start, cfg);
    CHECK(r.trace.reason == StopReason::ControlChange);
  }
  SUBCASE("stagnation") {
    Uphill up;
    OptimizerConfig cfg;
    cfg.min_step = 1e-3;
    const DescentResult r = descend(up, Control{std::vector<double>(12, 0.5), q.tau}, cfg);
    CHECK(r.trace.reason == StopReason::Stagnation);
    CHECK(r.best.control.values == std::vector<double>(12, 0.5));
    CHECK(r.trace.records.back().step == 0.0);
  }
  SUBCASE("solver failures count as rejected trials") {
    q.throw_above = 0.45;
    OptimizerConfig cfg;
    cfg.initial_step = 100.0;
    const DescentResult r = descend(q, start, cfg);
    check_trace(r, start, q.tau);
    CHECK(r.trace.records.front().trials > 1);
    CHECK(r.best.total() < r.trace.records.front().report.total);
  }
}

TEST_CASE("invalid optimizer input") {
  Quadratic q{std::vector<double>(3, 1.0), std::vector<double>(3, 0.0)};
  OptimizerConfig bad;
  bad.sigma = 1.5;
  CHECK_THROWS_AS(descend(q, Control{{0.1, 0.2, 0.3}, 1e-4}, bad), ConfigError);
  CHECK_THROWS_AS(descend(q, Control{{0.1, 1.2, 0.3}, 1e-4}, OptimizerConfig{}), InvalidInput);
}

TEST_CASE("control-only welding problem drives the pulse to zero") {
  HeatModel model = testing::make_small_model();
  ObjectiveWeights w;
  w.penetration = w.velocity = w.completeness = 0.0;
  WeldingProblem problem(model, w);
  Rng rng(77);
  for (const Control& start : {testing::constant_control(model, 0.5),
                               Control{rng.vector(40, 0.0, 1.0), model.time_step()}}) {
    OptimizerConfig cfg;
    cfg.max_iterations = 50;
    const DescentResult r = descend(problem, start, cfg);
    check_trace(r, start, model.time_step());
    CHECK(r.trace.records.size() <= 51);
    const double norm = std::sqrt(tau_dot(r.best.control.values, r.best.control.values, model.time_step()));
    CHECK(norm < 1e-6);
    testing::check_lp_inequality(r.best.trajectory, model.mesh(), w.p);
  }
}
