#pragma once

// Shared helpers for the unit tests: small models, random generators and the
// l^p inequality check every produced trajectory goes through.

#include <cmath>
#include <random>
#include <vector>

#include "doctest.h"
#include "weldopt/adjoint.hpp"
#include "weldopt/objective.hpp"

namespace testing {

using namespace weldopt;

// Thin wrapper so generators read the same in every test.
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : engine_(seed) {}

  double uniform(double lo = 0.0, double hi = 1.0) {
    return std::uniform_real_distribution<double>(lo, hi)(engine_);
  }
  int integer(int lo, int hi) { return std::uniform_int_distribution<int>(lo, hi)(engine_); }

  std::vector<double> vector(std::size_t n, double lo, double hi) {
    std::vector<double> v(n);
    for (auto& x : v) x = uniform(lo, hi);
    return v;
  }

 private:
  std::mt19937_64 engine_;
};

inline DomainSpec small_domain(int nr = 25, int nz = 8) {
  DomainSpec d;
  d.nr = nr;
  d.nz = nz;
  return d;
}

inline SimulationParams short_run(int steps = 40, double final_time = 12e-3) {
  SimulationParams p;
  p.steps = steps;
  p.final_time = final_time;
  return p;
}

inline HeatModel make_small_model(int nr = 25, int nz = 8, SimulationParams params = short_run(),
                                  Exec exec = Exec::Serial,
                                  MaterialConfig material = MaterialConfig::aluminium_6082()) {
  return HeatModel(build_mesh(small_domain(nr, nz), 0.375e-3), MaterialModel(material), params,
                   exec);
}

inline Control constant_control(const HeatModel& model, double value) {
  Control c;
  c.time_step = model.time_step();
  c.values.assign(static_cast<std::size_t>(model.params().steps), value);
  return c;
}

// hold for t < hold, zero afterwards
inline Control pulse(const HeatModel& model, double fraction, double hold) {
  Control c = constant_control(model, 0.0);
  for (std::size_t n = 0; n < c.size(); ++n) {
    if (static_cast<double>(n) * c.time_step < hold - 1e-12) c.values[n] = fraction;
  }
  return c;
}

// (sum |x|^p)^(1/p) <= N^(1/p) max |x| on the target-node history
inline void check_lp_inequality(const Trajectory& traj, const Mesh& mesh, double p) {
  const auto history = target_history(traj, mesh);
  double largest = 0.0;
  for (double x : history) largest = std::max(largest, std::abs(x));
  const double bound = std::pow(static_cast<double>(history.size()), 1.0 / p) * largest;
  CHECK(lp_norm_in_time(history, p) <= bound);
}

inline Trajectory forward_checked(HeatModel& model, const Control& c, double p = 20.0) {
  Trajectory t = model.solve_forward(c);
  check_lp_inequality(t, model.mesh(), p);
  return t;
}

inline double max_abs_diff(const Vector& a, const Vector& b) {
  return (a - b).cwiseAbs().maxCoeff();
}

}  // namespace testing
