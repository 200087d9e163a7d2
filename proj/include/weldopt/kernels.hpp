#pragma once

// Element-level kernels of the P1 axisymmetric discretization.
//
// Every kernel comes in two flavours selected by Exec:
//  - Serial: the textbook loop over elements with scatter-add into the
//    global arrays. Kept as the reference implementation.
//  - Parallel: OpenMP map over elements into element-indexed buffers,
//    followed by an OpenMP gather over matrix slots / nodes that adds the
//    contributions in ascending element order.
// Both flavours add the same numbers in the same order, so results are
// bit-identical and independent of the thread count.

#include <array>
#include <span>
#include <vector>

#include <Eigen/Core>
#include <Eigen/SparseCore>

#include "weldopt/material.hpp"
#include "weldopt/mesh.hpp"

namespace weldopt {

enum class Exec { Serial, Parallel };

using SparseMatrix = Eigen::SparseMatrix<double>;
using Vector = Eigen::VectorXd;
using Local3 = std::array<double, 3>;

struct ElementGeometry {
  std::array<int, 3> nodes;
  double area = 0.0;
  double r_mean = 0.0;         // area * r_mean = integral of r over the element
  std::array<double, 3> dr{};  // d(phi_i)/dr
  std::array<double, 3> dz{};  // d(phi_i)/dz
  std::array<double, 9> mass{};     // int phi_i phi_j r
  std::array<double, 9> stiff_r{};  // int d_r phi_i d_r phi_j r
  std::array<double, 9> stiff_z{};  // int d_z phi_i d_z phi_j r

  double r_measure() const { return area * r_mean; }
};

// Per-element values of the temperature-dependent coefficients, evaluated at
// the element mean of a nodal field.
struct ElementFields {
  std::vector<double> theta_mean;
  std::vector<double> capacity, capacity_slope;
  std::vector<double> kappa_r, kappa_r_slope;
  std::vector<double> kappa_z, kappa_z_slope;

  void resize(std::size_t n);
};

class AssemblyMap {
 public:
  explicit AssemblyMap(const Mesh& mesh);

  std::span<const ElementGeometry> elements() const { return elements_; }
  std::size_t num_nodes() const { return num_nodes_; }
  // Symmetric sparsity pattern with explicit zeros; values are slots.
  const SparseMatrix& pattern() const { return pattern_; }
  // Value-array index of local entry (i, j) of element e, row-major 3x3.
  const std::array<int, 9>& slots(std::size_t e) const { return slots_[e]; }

  // Gather tables: contributions to each slot (encoded e*9+local) and to
  // each node (encoded e*3+local), in ascending element order.
  std::span<const int> slot_entries(std::size_t slot) const;
  std::span<const int> node_entries(std::size_t node) const;

 private:
  std::size_t num_nodes_;
  std::vector<ElementGeometry> elements_;
  SparseMatrix pattern_;
  std::vector<std::array<int, 9>> slots_;
  std::vector<int> slot_begin_, slot_list_;
  std::vector<int> node_begin_, node_list_;
};

// Geometry of one triangle: area, gradients and exact r-weighted P1 integrals.
ElementGeometry make_element_geometry(const Mesh& mesh, const std::array<int, 3>& nodes);

void evaluate_fields(Exec exec, const AssemblyMap& map, const MaterialModel& material,
                     const Vector& theta, ElementFields& out);

// values = sum_e mass_factor*c_e*mass_e + stiff_factor*(kr_e*stiff_r_e + kz_e*stiff_z_e)
// into the value array of map.pattern(). An empty mass_coef means c_e = 1;
// empty kr/kz skip the stiffness part.
void assemble_operator(Exec exec, const AssemblyMap& map, std::span<const double> mass_coef,
                       std::span<const double> kappa_r, std::span<const double> kappa_z,
                       double mass_factor, double stiff_factor, std::span<double> values);

// nodal[k] (+)= sum over elements e containing k of local[e][position of k].
void gather_to_nodes(Exec exec, const AssemblyMap& map, std::span<const Local3> local,
                     std::span<double> nodal, bool accumulate = false);

// Runs f(e) for every element; element-indexed outputs only.
template <class F>
void for_each_element(Exec exec, std::size_t n, F&& f) {
  const auto count = static_cast<long>(n);
#pragma omp parallel for schedule(static) if (exec == Exec::Parallel)
  for (long e = 0; e < count; ++e) f(static_cast<std::size_t>(e));
}

// K(kappa) * x evaluated element by element (no global matrix).
void apply_stiffness(Exec exec, const AssemblyMap& map, const ElementFields& fields,
                     const Vector& x, std::vector<Local3>& scratch, Vector& out);

}  // namespace weldopt
