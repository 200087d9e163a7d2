#pragma once

// Discrete welding objective: penetration (l^p in time at the target node),
// solidification-front velocity, completeness of solidification and control
// cost. Also the derivative loads the adjoint sweep needs.

#include <cstdint>
#include <span>
#include <vector>

#include "weldopt/fem.hpp"

namespace weldopt {

struct ObjectiveWeights {
  double penetration = 1e-2;
  double velocity = 1.5e-1;
  double completeness = 1e-12;
  double control = 1e2;
  double p = 20.0;
  double z_target = 0.375e-3;    // m
  double theta_target = 1048.0;  // K
  double v_max = 2.0;            // m/s
  double eps_grad = 10.0;        // K/m

  void validate() const;
};

struct ObjectiveReport {
  double penetration = 0.0;
  double velocity = 0.0;
  double completeness = 0.0;
  double control = 0.0;
  double total = 0.0;
  double welding_depth = 0.0;        // m
  double theta_max_at_target = 0.0;  // K
  double lp_norm = 0.0;              // K
};

// (sum |x_n|^p)^(1/p), factored by max |x_n| to stay finite for large p.
double lp_norm_in_time(std::span<const double> samples, double p);

// Target temperature that guarantees liquidus is reached when the l^p norm
// hits it: N^(1/p) * liquidus.
double compensated_target(double liquidus, int steps, double p);

// theta_1..theta_N at the target node.
std::vector<double> target_history(const Trajectory& traj, const Mesh& mesh);

double j_penetration(const Trajectory& traj, const ObjectiveWeights& w, const Mesh& mesh);

// Speed of the isotherm through an element between two steps, positive when
// cooling: -mean(theta_{n+1}-theta_n) / (tau (|grad theta_{n+a}| + eps)).
double isotherm_velocity(const ElementGeometry& g, const Vector& theta_n,
                         const Vector& theta_next, double alpha, double tau, double eps_grad);

// Corridor indicator on element means: theta_n >= solidus and theta_{n+1} < liquidus.
bool in_corridor(const ElementGeometry& g, const Vector& theta_n, const Vector& theta_next,
                 const PhaseConstants& phase);

double j_velocity(const Trajectory& traj, const ObjectiveWeights& w, const HeatModel& model);
double j_completeness(const Trajectory& traj, const ObjectiveWeights& w, const HeatModel& model);
double j_control(const Control& control, const ObjectiveWeights& w);

// H minus the lowest axis node that reached liquidus; 0 if none did.
double welding_depth(const Trajectory& traj, const Mesh& mesh, const PhaseConstants& phase);

ObjectiveReport evaluate(const Control& control, const Trajectory& traj,
                         const ObjectiveWeights& w, const HeatModel& model);

// ---- derivatives with respect to nodal temperatures ----

// dJ_penetration / d theta_n(target) for n = 1..N (index n-1).
std::vector<double> penetration_derivative(const Trajectory& traj, const ObjectiveWeights& w,
                                           const Mesh& mesh);

// Adds dJ_velocity(step n) / d theta_n and / d theta_{n+1} into the outputs.
// The corridor indicator is held fixed.
void add_velocity_derivative(const HeatModel& model, const ObjectiveWeights& w,
                             const Vector& theta_n, const Vector& theta_next, Vector& d_theta_n,
                             Vector& d_theta_next);

// dJ_completeness / d theta_N.
Vector completeness_derivative(const Vector& theta_final, const ObjectiveWeights& w,
                               const HeatModel& model);

// Which non-smooth branches are active: per step and element the corridor
// indicator and the positive part of (v - v_max); per node whether the final
// state exceeds solidus. Two controls with equal signatures lie in the same
// smooth piece of the objective.
std::vector<std::uint8_t> activity_signature(const Trajectory& traj, const ObjectiveWeights& w,
                                             const HeatModel& model);

}  // namespace weldopt
