#include "weldopt/objective.hpp"

#include <algorithm>
#include <cmath>

#include "weldopt/errors.hpp"

namespace weldopt {

namespace {

struct VelocityParts {
  double mean_increment;   // mean of theta_{n+1} - theta_n over the element
  double grad_r, grad_z;   // gradient of theta_{n+a}
  double grad_norm;
  double velocity;
};

VelocityParts velocity_parts(const ElementGeometry& g, const Vector& theta_n,
                             const Vector& theta_next, double alpha, double tau, double eps) {
  VelocityParts v{};
  for (int i = 0; i < 3; ++i) {
    const double a = theta_n[g.nodes[i]];
    const double b = theta_next[g.nodes[i]];
    const double mid = alpha * b + (1.0 - alpha) * a;
    v.mean_increment += (b - a) / 3.0;
    v.grad_r += mid * g.dr[i];
    v.grad_z += mid * g.dz[i];
  }
  v.grad_norm = std::hypot(v.grad_r, v.grad_z);
  v.velocity = -v.mean_increment / (tau * (v.grad_norm + eps));
  return v;
}

double element_mean(const ElementGeometry& g, const Vector& theta) {
  return (theta[g.nodes[0]] + theta[g.nodes[1]] + theta[g.nodes[2]]) / 3.0;
}

}  // namespace

void ObjectiveWeights::validate() const {
  if (penetration < 0.0 || velocity < 0.0 || completeness < 0.0 || control < 0.0) {
    throw ConfigError("objective weights must be nonnegative");
  }
  if (!(p >= 2.0)) throw ConfigError("p-norm exponent must be at least 2");
  if (!(v_max > 0.0)) throw ConfigError("v_max must be positive");
  if (!(eps_grad > 0.0)) throw ConfigError("eps_grad must be positive");
}

double lp_norm_in_time(std::span<const double> samples, double p) {
  if (!(p >= 1.0)) throw InvalidInput("l^p norm needs p >= 1");
  if (samples.empty()) throw InvalidInput("l^p norm of an empty sequence");
  double largest = 0.0;
  for (double x : samples) largest = std::max(largest, std::abs(x));
  if (largest == 0.0) return 0.0;
  double sum = 0.0;
  for (double x : samples) sum += std::pow(std::abs(x) / largest, p);
  return largest * std::pow(sum, 1.0 / p);
}

double compensated_target(double liquidus, int steps, double p) {
  return std::pow(static_cast<double>(steps), 1.0 / p) * liquidus;
}

std::vector<double> target_history(const Trajectory& traj, const Mesh& mesh) {
  std::vector<double> out;
  out.reserve(traj.states.size());
  for (std::size_t n = 1; n < traj.states.size(); ++n) out.push_back(traj.states[n][mesh.target_node]);
  return out;
}

double j_penetration(const Trajectory& traj, const ObjectiveWeights& w, const Mesh& mesh) {
  const double lp = lp_norm_in_time(target_history(traj, mesh), w.p);
  return 0.5 * w.penetration * (lp - w.theta_target) * (lp - w.theta_target);
}

double isotherm_velocity(const ElementGeometry& g, const Vector& theta_n,
                         const Vector& theta_next, double alpha, double tau, double eps_grad) {
  return velocity_parts(g, theta_n, theta_next, alpha, tau, eps_grad).velocity;
}

bool in_corridor(const ElementGeometry& g, const Vector& theta_n, const Vector& theta_next,
                 const PhaseConstants& phase) {
  return element_mean(g, theta_n) >= phase.solidus && element_mean(g, theta_next) < phase.liquidus;
}

double j_velocity(const Trajectory& traj, const ObjectiveWeights& w, const HeatModel& model) {
  if (w.velocity == 0.0) return 0.0;
  const auto elements = model.assembly().elements();
  const double alpha = model.params().implicitness;
  const double tau = traj.time_step;
  const PhaseConstants& phase = model.material().phase();
  std::vector<double> local(elements.size());
  double total = 0.0;
  for (int n = 0; n < traj.steps(); ++n) {
    const Vector& a = traj.states[static_cast<std::size_t>(n)];
    const Vector& b = traj.states[static_cast<std::size_t>(n) + 1];
    for_each_element(model.exec(), elements.size(), [&](std::size_t e) {
      const auto& g = elements[e];
      local[e] = 0.0;
      if (!in_corridor(g, a, b, phase)) return;
      const double excess = isotherm_velocity(g, a, b, alpha, tau, w.eps_grad) - w.v_max;
      if (excess > 0.0) local[e] = excess * excess * g.r_measure();
    });
    for (double x : local) total += x;
  }
  return 0.5 * w.velocity * tau * total;
}

double j_completeness(const Trajectory& traj, const ObjectiveWeights& w, const HeatModel& model) {
  if (w.completeness == 0.0) return 0.0;
  const double solidus = model.material().phase().solidus;
  const Vector q = (traj.states.back().array() - solidus).max(0.0).matrix();
  return 0.5 * w.completeness * q.dot(model.r_mass() * q);
}

double j_control(const Control& control, const ObjectiveWeights& w) {
  double sum = 0.0;
  for (double u : control.values) sum += u * u;
  return 0.5 * w.control * control.time_step * sum;
}

double welding_depth(const Trajectory& traj, const Mesh& mesh, const PhaseConstants& phase) {
  for (int node : mesh.axis_nodes) {
    for (const auto& state : traj.states) {
      if (state[node] >= phase.liquidus) return mesh.spec.height - mesh.nodes[node].z;
    }
  }
  return 0.0;
}

ObjectiveReport evaluate(const Control& control, const Trajectory& traj,
                         const ObjectiveWeights& w, const HeatModel& model) {
  ObjectiveReport r;
  const auto history = target_history(traj, model.mesh());
  r.lp_norm = lp_norm_in_time(history, w.p);
  r.theta_max_at_target = history.empty() ? 0.0 : *std::max_element(history.begin(), history.end());
  r.penetration = 0.5 * w.penetration * (r.lp_norm - w.theta_target) * (r.lp_norm - w.theta_target);
  r.velocity = j_velocity(traj, w, model);
  r.completeness = j_completeness(traj, w, model);
  r.control = j_control(control, w);
  r.total = r.penetration + r.velocity + r.completeness + r.control;
  r.welding_depth = welding_depth(traj, model.mesh(), model.material().phase());
  return r;
}

std::vector<double> penetration_derivative(const Trajectory& traj, const ObjectiveWeights& w,
                                           const Mesh& mesh) {
  const auto history = target_history(traj, mesh);
  const double lp = lp_norm_in_time(history, w.p);
  std::vector<double> d(history.size(), 0.0);
  if (lp == 0.0 || w.penetration == 0.0) return d;
  const double factor = w.penetration * (lp - w.theta_target);
  for (std::size_t n = 0; n < history.size(); ++n) {
    const double x = history[n];
    const double sign = x > 0.0 ? 1.0 : (x < 0.0 ? -1.0 : 0.0);
    d[n] = factor * std::pow(std::abs(x) / lp, w.p - 1.0) * sign;
  }
  return d;
}

void add_velocity_derivative(const HeatModel& model, const ObjectiveWeights& w,
                             const Vector& theta_n, const Vector& theta_next, Vector& d_theta_n,
                             Vector& d_theta_next) {
  if (w.velocity == 0.0) return;
  const auto elements = model.assembly().elements();
  const double alpha = model.params().implicitness;
  const double tau = model.time_step();
  const PhaseConstants& phase = model.material().phase();
  std::vector<Local3> dn(elements.size()), dn1(elements.size());
  for_each_element(model.exec(), elements.size(), [&](std::size_t e) {
    const auto& g = elements[e];
    dn[e] = {0.0, 0.0, 0.0};
    dn1[e] = {0.0, 0.0, 0.0};
    if (!in_corridor(g, theta_n, theta_next, phase)) return;
    const VelocityParts v = velocity_parts(g, theta_n, theta_next, alpha, tau, w.eps_grad);
    const double excess = v.velocity - w.v_max;
    if (!(excess > 0.0)) return;
    const double c = w.velocity * tau * excess * g.r_measure();
    const double denom = v.grad_norm + w.eps_grad;
    // d|G|/dtheta_{n+a,k} = (G . grad phi_k) / |G|, taken as 0 when G = 0
    const double q = v.grad_norm > 0.0 ? v.mean_increment / (tau * denom * denom * v.grad_norm) : 0.0;
    for (int i = 0; i < 3; ++i) {
      const double g_dot = v.grad_r * g.dr[i] + v.grad_z * g.dz[i];
      dn1[e][i] = c * (-1.0 / (3.0 * tau * denom) + q * alpha * g_dot);
      dn[e][i] = c * (1.0 / (3.0 * tau * denom) + q * (1.0 - alpha) * g_dot);
    }
  });
  const auto& map = model.assembly();
  gather_to_nodes(model.exec(), map, dn, {d_theta_n.data(), static_cast<std::size_t>(d_theta_n.size())},
                  true);
  gather_to_nodes(model.exec(), map, dn1,
                  {d_theta_next.data(), static_cast<std::size_t>(d_theta_next.size())}, true);
}

Vector completeness_derivative(const Vector& theta_final, const ObjectiveWeights& w,
                               const HeatModel& model) {
  const double solidus = model.material().phase().solidus;
  const Vector q = (theta_final.array() - solidus).max(0.0).matrix();
  Vector d = w.completeness * (model.r_mass() * q);
  for (Eigen::Index k = 0; k < d.size(); ++k) {
    if (!(theta_final[k] > solidus)) d[k] = 0.0;
  }
  return d;
}

std::vector<std::uint8_t> activity_signature(const Trajectory& traj, const ObjectiveWeights& w,
                                             const HeatModel& model) {
  const auto elements = model.assembly().elements();
  const double alpha = model.params().implicitness;
  const PhaseConstants& phase = model.material().phase();
  std::vector<std::uint8_t> sig;
  sig.reserve(static_cast<std::size_t>(traj.steps()) * elements.size() + model.num_nodes());
  for (int n = 0; n < traj.steps(); ++n) {
    const Vector& a = traj.states[static_cast<std::size_t>(n)];
    const Vector& b = traj.states[static_cast<std::size_t>(n) + 1];
    for (const auto& g : elements) {
      std::uint8_t bits = 0;
      if (in_corridor(g, a, b, phase)) {
        bits |= 1;
        if (isotherm_velocity(g, a, b, alpha, traj.time_step, w.eps_grad) > w.v_max) bits |= 2;
      }
      sig.push_back(bits);
    }
  }
  for (Eigen::Index k = 0; k < traj.states.back().size(); ++k) {
    sig.push_back(traj.states.back()[k] > phase.solidus ? 1 : 0);
  }
  return sig;
}

}  // namespace weldopt
