#include "weldopt/kernels.hpp"

#include <algorithm>
#include <cmath>

#include "weldopt/errors.hpp"

namespace weldopt {

void ElementFields::resize(std::size_t n) {
  for (auto* v : {&theta_mean, &capacity, &capacity_slope, &kappa_r, &kappa_r_slope, &kappa_z,
                  &kappa_z_slope}) {
    v->resize(n);
  }
}

ElementGeometry make_element_geometry(const Mesh& mesh, const std::array<int, 3>& nodes) {
  ElementGeometry g;
  g.nodes = nodes;
  const Point& p0 = mesh.nodes[nodes[0]];
  const Point& p1 = mesh.nodes[nodes[1]];
  const Point& p2 = mesh.nodes[nodes[2]];
  const double twice_area = (p1.r - p0.r) * (p2.z - p0.z) - (p2.r - p0.r) * (p1.z - p0.z);
  if (!(twice_area > 0.0)) throw ConfigError("mesh element with non-positive orientation");
  g.area = 0.5 * twice_area;
  const std::array<Point, 3> p{p0, p1, p2};
  for (int i = 0; i < 3; ++i) {
    const Point& a = p[(i + 1) % 3];
    const Point& b = p[(i + 2) % 3];
    g.dr[i] = (a.z - b.z) / twice_area;
    g.dz[i] = (b.r - a.r) / twice_area;
  }
  g.r_mean = (p0.r + p1.r + p2.r) / 3.0;
  const double r_sum = p0.r + p1.r + p2.r;
  for (int i = 0; i < 3; ++i) {
    for (int j = 0; j < 3; ++j) {
      // int phi_i phi_j phi_k = 2A * a!b!c!/(a+b+c+2)!, with r = sum r_k phi_k
      g.mass[3 * i + j] = (i == j) ? g.area * (4.0 * p[i].r + 2.0 * r_sum) / 60.0
                                   : g.area * (p[i].r + p[j].r + r_sum) / 60.0;
      g.stiff_r[3 * i + j] = g.area * g.r_mean * g.dr[i] * g.dr[j];
      g.stiff_z[3 * i + j] = g.area * g.r_mean * g.dz[i] * g.dz[j];
    }
  }
  return g;
}

AssemblyMap::AssemblyMap(const Mesh& mesh) : num_nodes_(mesh.num_nodes()) {
  elements_.reserve(mesh.num_elements());
  for (const auto& tri : mesh.elements) elements_.push_back(make_element_geometry(mesh, tri));

  const auto n = static_cast<Eigen::Index>(num_nodes_);
  std::vector<Eigen::Triplet<double>> triplets;
  triplets.reserve(9 * elements_.size());
  for (const auto& g : elements_) {
    for (int a : g.nodes) {
      for (int b : g.nodes) triplets.emplace_back(a, b, 0.0);
    }
  }
  pattern_.resize(n, n);
  pattern_.setFromTriplets(triplets.begin(), triplets.end());
  pattern_.makeCompressed();

  const int* outer = pattern_.outerIndexPtr();
  const int* inner = pattern_.innerIndexPtr();
  auto slot_of = [&](int row, int col) {
    const int* first = inner + outer[col];
    const int* last = inner + outer[col + 1];
    const int* it = std::lower_bound(first, last, row);
    return static_cast<int>(it - inner);
  };
  slots_.resize(elements_.size());
  for (std::size_t e = 0; e < elements_.size(); ++e) {
    const auto& nd = elements_[e].nodes;
    for (int i = 0; i < 3; ++i) {
      for (int j = 0; j < 3; ++j) slots_[e][3 * i + j] = slot_of(nd[i], nd[j]);
    }
  }

  // counting sort of contributions keeps ascending element order per target
  const auto nnz = static_cast<std::size_t>(pattern_.nonZeros());
  slot_begin_.assign(nnz + 1, 0);
  node_begin_.assign(num_nodes_ + 1, 0);
  for (std::size_t e = 0; e < elements_.size(); ++e) {
    for (int s : slots_[e]) ++slot_begin_[static_cast<std::size_t>(s) + 1];
    for (int k : elements_[e].nodes) ++node_begin_[static_cast<std::size_t>(k) + 1];
  }
  for (std::size_t i = 0; i < nnz; ++i) slot_begin_[i + 1] += slot_begin_[i];
  for (std::size_t i = 0; i < num_nodes_; ++i) node_begin_[i + 1] += node_begin_[i];
  slot_list_.resize(static_cast<std::size_t>(slot_begin_.back()));
  node_list_.resize(static_cast<std::size_t>(node_begin_.back()));
  std::vector<int> slot_fill(slot_begin_.begin(), slot_begin_.end() - 1);
  std::vector<int> node_fill(node_begin_.begin(), node_begin_.end() - 1);
  for (std::size_t e = 0; e < elements_.size(); ++e) {
    const int base = static_cast<int>(e);
    for (int l = 0; l < 9; ++l) slot_list_[slot_fill[slots_[e][l]]++] = 9 * base + l;
    for (int l = 0; l < 3; ++l) node_list_[node_fill[elements_[e].nodes[l]]++] = 3 * base + l;
  }
}

std::span<const int> AssemblyMap::slot_entries(std::size_t slot) const {
  return std::span<const int>(slot_list_).subspan(
      static_cast<std::size_t>(slot_begin_[slot]),
      static_cast<std::size_t>(slot_begin_[slot + 1] - slot_begin_[slot]));
}

std::span<const int> AssemblyMap::node_entries(std::size_t node) const {
  return std::span<const int>(node_list_).subspan(
      static_cast<std::size_t>(node_begin_[node]),
      static_cast<std::size_t>(node_begin_[node + 1] - node_begin_[node]));
}

void evaluate_fields(Exec exec, const AssemblyMap& map, const MaterialModel& material,
                     const Vector& theta, ElementFields& out) {
  const auto elements = map.elements();
  out.resize(elements.size());
  const CubicSpline& s = material.heat_capacity();
  const CubicSpline& kr = material.conductivity_radial();
  const CubicSpline& kz = material.conductivity_axial();
  for_each_element(exec, elements.size(), [&](std::size_t e) {
    const auto& nd = elements[e].nodes;
    const double mean = (theta[nd[0]] + theta[nd[1]] + theta[nd[2]]) / 3.0;
    out.theta_mean[e] = mean;
    std::tie(out.capacity[e], out.capacity_slope[e]) = s.evaluate(mean);
    std::tie(out.kappa_r[e], out.kappa_r_slope[e]) = kr.evaluate(mean);
    std::tie(out.kappa_z[e], out.kappa_z_slope[e]) = kz.evaluate(mean);
  });
}

namespace {

inline double local_entry(const ElementGeometry& g, int l, double c, double kr, double kz,
                          double mass_factor, double stiff_factor, bool with_stiffness) {
  double v = mass_factor * c * g.mass[l];
  if (with_stiffness) v += stiff_factor * (kr * g.stiff_r[l] + kz * g.stiff_z[l]);
  return v;
}

}  // namespace

void assemble_operator(Exec exec, const AssemblyMap& map, std::span<const double> mass_coef,
                       std::span<const double> kappa_r, std::span<const double> kappa_z,
                       double mass_factor, double stiff_factor, std::span<double> values) {
  const auto elements = map.elements();
  const bool with_stiffness = !kappa_r.empty();
  auto coef = [&](std::size_t e) { return mass_coef.empty() ? 1.0 : mass_coef[e]; };
  auto kr = [&](std::size_t e) { return with_stiffness ? kappa_r[e] : 0.0; };
  auto kz = [&](std::size_t e) { return with_stiffness ? kappa_z[e] : 0.0; };

  if (exec == Exec::Serial) {
    std::fill(values.begin(), values.end(), 0.0);
    for (std::size_t e = 0; e < elements.size(); ++e) {
      const auto& slots = map.slots(e);
      for (int l = 0; l < 9; ++l) {
        values[static_cast<std::size_t>(slots[l])] += local_entry(
            elements[e], l, coef(e), kr(e), kz(e), mass_factor, stiff_factor, with_stiffness);
      }
    }
    return;
  }

  const auto nnz = static_cast<long>(values.size());
#pragma omp parallel for schedule(static)
  for (long s = 0; s < nnz; ++s) {
    double acc = 0.0;
    for (int code : map.slot_entries(static_cast<std::size_t>(s))) {
      const auto e = static_cast<std::size_t>(code / 9);
      acc += local_entry(elements[e], code % 9, coef(e), kr(e), kz(e), mass_factor,
                         stiff_factor, with_stiffness);
    }
    values[static_cast<std::size_t>(s)] = acc;
  }
}

void gather_to_nodes(Exec exec, const AssemblyMap& map, std::span<const Local3> local,
                     std::span<double> nodal, bool accumulate) {
  const auto elements = map.elements();
  if (exec == Exec::Serial) {
    if (!accumulate) std::fill(nodal.begin(), nodal.end(), 0.0);
    // accumulate into a zeroed buffer first so that both flavours add in
    // the same order: (existing) + (sum over elements)
    std::vector<double> sum(nodal.size(), 0.0);
    for (std::size_t e = 0; e < elements.size(); ++e) {
      for (int l = 0; l < 3; ++l) sum[static_cast<std::size_t>(elements[e].nodes[l])] += local[e][l];
    }
    for (std::size_t k = 0; k < nodal.size(); ++k) nodal[k] += sum[k];
    return;
  }
  const auto n = static_cast<long>(nodal.size());
#pragma omp parallel for schedule(static)
  for (long k = 0; k < n; ++k) {
    double acc = 0.0;
    for (int code : map.node_entries(static_cast<std::size_t>(k))) {
      acc += local[static_cast<std::size_t>(code / 3)][code % 3];
    }
    const auto kk = static_cast<std::size_t>(k);
    nodal[kk] = accumulate ? nodal[kk] + acc : acc;
  }
}

void apply_stiffness(Exec exec, const AssemblyMap& map, const ElementFields& fields,
                     const Vector& x, std::vector<Local3>& scratch, Vector& out) {
  const auto elements = map.elements();
  scratch.resize(elements.size());
  for_each_element(exec, elements.size(), [&](std::size_t e) {
    const auto& g = elements[e];
    const double xe[3] = {x[g.nodes[0]], x[g.nodes[1]], x[g.nodes[2]]};
    for (int i = 0; i < 3; ++i) {
      double acc = 0.0;
      for (int j = 0; j < 3; ++j) {
        acc += (fields.kappa_r[e] * g.stiff_r[3 * i + j] + fields.kappa_z[e] * g.stiff_z[3 * i + j]) *
               xe[j];
      }
      scratch[e][i] = acc;
    }
  });
  out.resize(static_cast<Eigen::Index>(map.num_nodes()));
  gather_to_nodes(exec, map, scratch, std::span<double>(out.data(), static_cast<std::size_t>(out.size())));
}

}  // namespace weldopt
