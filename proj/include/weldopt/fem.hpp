#pragma once

// Semi-implicit time stepping of the axisymmetric quasilinear heat equation
// with laser flux on the spot and convective/radiative cooling.
//
// Per step n -> n+1 the nodal vector theta_{n+1} solves
//   M(theta_n)(theta_{n+1} - theta_n) + tau K(theta_n) theta_{n+a}
//     + tau B(theta_{n+a}) - tau u_n f = 0,
// theta_{n+a} = a theta_{n+1} + (1-a) theta_n, where M and K carry the
// coefficients s and diag(kappa_r, kappa_z) at theta_n, B is the cooling flux
// vector and f the absorbed laser load at full power.

#include <memory>
#include <span>
#include <vector>

#include "weldopt/kernels.hpp"
#include "weldopt/linear_solver.hpp"
#include "weldopt/material.hpp"
#include "weldopt/mesh.hpp"

namespace weldopt {

struct SimulationParams {
  double ambient = 295.0;         // K
  double convection = 20.0;       // W/(m^2 K)
  double radiation = 2.26e-9;     // W/(m^2 K^4)
  double max_power = 2000.0;      // W
  double final_time = 12e-3;      // s
  int steps = 120;
  double implicitness = 1.0;
  bool cooling_on_bottom = true;
  double newton_tolerance = 1e-9;  // max_i |F_i| / (row sum of M)_i, in K
  int newton_max_iterations = 30;

  double time_step() const { return final_time / steps; }
  void validate() const;
};

double power_density(double max_power, double beam_radius);

// Phi(theta) = k (theta^4 - theta_amb^4) + h (theta - theta_amb)
double boundary_flux(double theta, const SimulationParams& params);
double boundary_flux_derivative(double theta, const SimulationParams& params);

struct Control {
  std::vector<double> values;  // fraction of max power, one per step
  double time_step = 0.0;

  std::size_t size() const { return values.size(); }
  bool feasible() const;
};

struct Trajectory {
  std::vector<Vector> states;  // theta_0 .. theta_N
  double time_step = 0.0;

  int steps() const { return static_cast<int>(states.size()) - 1; }
};

struct StepStats {
  int newton_iterations = 0;
  int factorizations = 0;
  double residual = 0.0;
};

// One Gauss point on a cooling edge.
struct BoundaryPoint {
  int a, b;          // edge nodes
  double phi_a, phi_b;
  double weight;     // Gauss weight * edge length * r
  std::array<int, 4> slots;  // (a,a) (a,b) (b,a) (b,b)
};

class HeatModel {
 public:
  HeatModel(Mesh mesh, MaterialModel material, SimulationParams params,
            Exec exec = Exec::Parallel);

  const Mesh& mesh() const { return mesh_; }
  const MaterialModel& material() const { return material_; }
  const SimulationParams& params() const { return params_; }
  const AssemblyMap& assembly() const { return *map_; }
  Exec exec() const { return exec_; }
  double time_step() const { return params_.time_step(); }
  std::size_t num_nodes() const { return mesh_.num_nodes(); }

  // eta * pd_max * int_{gamma1} phi_k r ds
  const Vector& laser_load() const { return laser_load_; }
  // int phi_i phi_j r over the whole section
  const SparseMatrix& r_mass() const { return r_mass_; }
  Vector ambient_state() const;

  // Advances theta_n by one step with control value u_n.
  Vector step(const Vector& theta_n, double u_n, StepStats* stats = nullptr);
  Trajectory solve_forward(const Control& control);

  // Cooling-flux vector B(theta) (overwrites out).
  void cooling_flux(const Vector& theta, Vector& out) const;
  // Adds scale * dB/dtheta at theta into a value array of assembly().pattern().
  void add_cooling_jacobian(const Vector& theta, double scale, std::span<double> values) const;
  // out += scale * dB/dtheta(theta) * x
  void apply_cooling_jacobian(const Vector& theta, const Vector& x, double scale,
                              Vector& out) const;

  // Jacobian of step n with respect to theta_{n+1}:
  //   M(theta_n) + a tau K(theta_n) + a tau B'(theta_{n+a}),
  // with fields evaluated at theta_n. out must carry assembly().pattern().
  void assemble_step_jacobian(const ElementFields& fields_n, const Vector& theta_alpha,
                              SparseMatrix& out) const;

  const LinearSolverStats& solver_stats() const { return solver_.stats(); }

  // row sums of M(theta_n) used to scale Newton residuals (K)
  void lumped_capacity(const ElementFields& fields, Vector& out) const;

  std::span<const BoundaryPoint> cooling_points() const { return cooling_points_; }

 private:
  Mesh mesh_;
  MaterialModel material_;
  SimulationParams params_;
  Exec exec_;
  std::unique_ptr<AssemblyMap> map_;
  std::vector<BoundaryPoint> cooling_points_;
  Vector laser_load_;
  SparseMatrix r_mass_;

  // workspace
  SparseMatrix jacobian_;
  SparseMatrix linear_;
  RecyclingCholesky solver_;
  ElementFields fields_;
  mutable std::vector<Local3> scratch_;
};

}  // namespace weldopt
