#include "weldopt/fem.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <sstream>

#include "weldopt/errors.hpp"

namespace weldopt {

namespace {

// 4-point Gauss-Legendre on [0, 1]; exact for the degree-6 integrand
// theta^4 * phi * r on a straight edge.
constexpr std::array<double, 4> kGaussNodes = {
    0.5 * (1.0 - 0.8611363115940526), 0.5 * (1.0 - 0.3399810435848563),
    0.5 * (1.0 + 0.3399810435848563), 0.5 * (1.0 + 0.8611363115940526)};
constexpr std::array<double, 4> kGaussWeights = {
    0.5 * 0.3478548451374538, 0.5 * 0.6521451548625461, 0.5 * 0.6521451548625461,
    0.5 * 0.3478548451374538};

std::span<double> values_of(SparseMatrix& m) {
  return {m.valuePtr(), static_cast<std::size_t>(m.nonZeros())};
}

int slot_of(const SparseMatrix& m, int row, int col) {
  const int* inner = m.innerIndexPtr();
  const int* first = inner + m.outerIndexPtr()[col];
  const int* last = inner + m.outerIndexPtr()[col + 1];
  return static_cast<int>(std::lower_bound(first, last, row) - inner);
}

double scaled_norm(const Vector& residual, const Vector& scale) {
  return (residual.array().abs() / scale.array()).maxCoeff();
}

}  // namespace

void SimulationParams::validate() const {
  if (!(final_time > 0.0) || steps < 1) throw ConfigError("final time and step count must be positive");
  if (!(implicitness >= 0.0 && implicitness <= 1.0)) throw ConfigError("implicitness must lie in [0, 1]");
  if (!(ambient > 0.0)) throw ConfigError("ambient temperature must be positive");
  if (convection < 0.0 || radiation < 0.0) throw ConfigError("transfer coefficients must be nonnegative");
  if (!(max_power >= 0.0)) throw ConfigError("maximal power must be nonnegative");
  if (!(newton_tolerance > 0.0) || newton_max_iterations < 1) {
    throw ConfigError("invalid Newton settings");
  }
}

double power_density(double max_power, double beam_radius) {
  return max_power / (std::numbers::pi * beam_radius * beam_radius);
}

double boundary_flux(double theta, const SimulationParams& params) {
  const double t2 = theta * theta;
  const double a2 = params.ambient * params.ambient;
  return params.radiation * (t2 * t2 - a2 * a2) + params.convection * (theta - params.ambient);
}

double boundary_flux_derivative(double theta, const SimulationParams& params) {
  return 4.0 * params.radiation * theta * theta * theta + params.convection;
}

bool Control::feasible() const {
  for (double u : values) {
    if (!(u >= 0.0 && u <= 1.0)) return false;
  }
  return true;
}

HeatModel::HeatModel(Mesh mesh, MaterialModel material, SimulationParams params, Exec exec)
    : mesh_(std::move(mesh)),
      material_(std::move(material)),
      params_(params),
      exec_(exec),
      map_(std::make_unique<AssemblyMap>(mesh_)) {
  params_.validate();
  const auto n = static_cast<Eigen::Index>(mesh_.num_nodes());
  const double load = material_.absorptivity() *
                      power_density(params_.max_power, mesh_.spec.beam_radius);
  laser_load_ = Vector::Zero(n);
  jacobian_ = map_->pattern();
  linear_ = map_->pattern();

  for (const auto& edge : mesh_.boundary_edges) {
    const int a = edge.nodes[0], b = edge.nodes[1];
    const Point& pa = mesh_.nodes[a];
    const Point& pb = mesh_.nodes[b];
    const double length = std::hypot(pb.r - pa.r, pb.z - pa.z);
    if (edge.tag == BoundaryTag::LaserSpot) {
      laser_load_[a] += load * length * (2.0 * pa.r + pb.r) / 6.0;
      laser_load_[b] += load * length * (pa.r + 2.0 * pb.r) / 6.0;
    }
    const bool cooled = edge.tag == BoundaryTag::LaserSpot || edge.tag == BoundaryTag::TopOuter ||
                        (edge.tag == BoundaryTag::Bottom && params_.cooling_on_bottom);
    if (!cooled) continue;
    const std::array<int, 4> slots = {slot_of(jacobian_, a, a), slot_of(jacobian_, a, b),
                                      slot_of(jacobian_, b, a), slot_of(jacobian_, b, b)};
    for (std::size_t q = 0; q < kGaussNodes.size(); ++q) {
      const double s = kGaussNodes[q];
      const double r = (1.0 - s) * pa.r + s * pb.r;
      cooling_points_.push_back({a, b, 1.0 - s, s, kGaussWeights[q] * length * r, slots});
    }
  }

  r_mass_ = map_->pattern();
  assemble_operator(exec_, *map_, {}, {}, {}, 1.0, 0.0, values_of(r_mass_));
  solver_.analyze(jacobian_);
}

Vector HeatModel::ambient_state() const {
  return Vector::Constant(static_cast<Eigen::Index>(num_nodes()), params_.ambient);
}

void HeatModel::cooling_flux(const Vector& theta, Vector& out) const {
  out.setZero(static_cast<Eigen::Index>(num_nodes()));
  for (const auto& q : cooling_points_) {
    const double t = q.phi_a * theta[q.a] + q.phi_b * theta[q.b];
    const double flux = q.weight * boundary_flux(t, params_);
    out[q.a] += flux * q.phi_a;
    out[q.b] += flux * q.phi_b;
  }
}

void HeatModel::add_cooling_jacobian(const Vector& theta, double scale,
                                     std::span<double> values) const {
  for (const auto& q : cooling_points_) {
    const double t = q.phi_a * theta[q.a] + q.phi_b * theta[q.b];
    const double d = scale * q.weight * boundary_flux_derivative(t, params_);
    values[static_cast<std::size_t>(q.slots[0])] += d * q.phi_a * q.phi_a;
    values[static_cast<std::size_t>(q.slots[1])] += d * q.phi_a * q.phi_b;
    values[static_cast<std::size_t>(q.slots[2])] += d * q.phi_b * q.phi_a;
    values[static_cast<std::size_t>(q.slots[3])] += d * q.phi_b * q.phi_b;
  }
}

void HeatModel::apply_cooling_jacobian(const Vector& theta, const Vector& x, double scale,
                                       Vector& out) const {
  for (const auto& q : cooling_points_) {
    const double t = q.phi_a * theta[q.a] + q.phi_b * theta[q.b];
    const double d = scale * q.weight * boundary_flux_derivative(t, params_);
    const double xq = q.phi_a * x[q.a] + q.phi_b * x[q.b];
    out[q.a] += d * q.phi_a * xq;
    out[q.b] += d * q.phi_b * xq;
  }
}

void HeatModel::lumped_capacity(const ElementFields& fields, Vector& out) const {
  const auto elements = map_->elements();
  scratch_.resize(elements.size());
  for_each_element(exec_, elements.size(), [&](std::size_t e) {
    const auto& g = elements[e];
    for (int i = 0; i < 3; ++i) {
      scratch_[e][i] = fields.capacity[e] * (g.mass[3 * i] + g.mass[3 * i + 1] + g.mass[3 * i + 2]);
    }
  });
  out.resize(static_cast<Eigen::Index>(num_nodes()));
  gather_to_nodes(exec_, *map_, scratch_, {out.data(), static_cast<std::size_t>(out.size())});
}

void HeatModel::assemble_step_jacobian(const ElementFields& fields_n, const Vector& theta_alpha,
                                       SparseMatrix& out) const {
  const double a_tau = params_.implicitness * time_step();
  assemble_operator(exec_, *map_, fields_n.capacity, fields_n.kappa_r, fields_n.kappa_z, 1.0,
                    a_tau, values_of(out));
  if (a_tau > 0.0) add_cooling_jacobian(theta_alpha, a_tau, values_of(out));
}

Vector HeatModel::step(const Vector& theta_n, double u_n, StepStats* stats) {
  if (!(u_n >= 0.0 && u_n <= 1.0)) throw InvalidInput("control value outside [0, 1]");
  const double tau = time_step();
  const double alpha = params_.implicitness;

  evaluate_fields(exec_, *map_, material_, theta_n, fields_);
  Vector scale;
  lumped_capacity(fields_, scale);

  // Newton on F(x) = M (x - theta_n) + tau K (a x + (1-a) theta_n)
  //                + tau B(a x + (1-a) theta_n) - tau u f.
  // The linear part is kept as an operator with the lagged coefficients;
  // the step Jacobian differs from it only by the cooling term.
  assemble_operator(exec_, *map_, fields_.capacity, fields_.kappa_r, fields_.kappa_z, 1.0,
                    alpha * tau, values_of(linear_));
  Vector k_theta;
  apply_stiffness(exec_, *map_, fields_, theta_n, scratch_, k_theta);
  const Vector constant = tau * (k_theta - u_n * laser_load_);

  Vector x = theta_n;
  Vector flux, residual;
  auto evaluate_residual = [&] {
    const Vector x_alpha = alpha * x + (1.0 - alpha) * theta_n;
    cooling_flux(x_alpha, flux);
    residual = linear_ * (x - theta_n) + constant + tau * flux;
    return x_alpha;
  };

  StepStats local;
  const long factorizations_before = solver_.stats().factorizations;
  for (int it = 0; it <= params_.newton_max_iterations; ++it) {
    const Vector x_alpha = evaluate_residual();
    const double norm = scaled_norm(residual, scale);
    if (!std::isfinite(norm)) throw SolverError("non-finite residual in time step", norm);
    local.residual = norm;
    if (norm < params_.newton_tolerance) {
      local.newton_iterations = it;
      local.factorizations = static_cast<int>(solver_.stats().factorizations - factorizations_before);
      if (stats) *stats = local;
      return x;
    }
    if (it == params_.newton_max_iterations) break;
    std::copy_n(linear_.valuePtr(), linear_.nonZeros(), jacobian_.valuePtr());
    if (alpha > 0.0) add_cooling_jacobian(x_alpha, alpha * tau, values_of(jacobian_));
    x -= solver_.solve(jacobian_, residual);
  }
  std::ostringstream msg;
  msg << "Newton did not converge in " << params_.newton_max_iterations
      << " iterations (scaled residual " << local.residual << " K)";
  throw SolverError(msg.str(), local.residual);
}

Trajectory HeatModel::solve_forward(const Control& control) {
  if (control.size() != static_cast<std::size_t>(params_.steps)) {
    throw InvalidInput("control length does not match the number of time steps");
  }
  Trajectory traj;
  traj.time_step = time_step();
  traj.states.reserve(control.size() + 1);
  traj.states.push_back(ambient_state());
  for (std::size_t n = 0; n < control.size(); ++n) {
    try {
      traj.states.push_back(step(traj.states.back(), control.values[n]));
    } catch (const SolverError& err) {
      throw SolverError(std::string(err.what()) + " at step " + std::to_string(n),
                        err.residual(), static_cast<int>(n));
    }
  }
  return traj;
}

}  // namespace weldopt
