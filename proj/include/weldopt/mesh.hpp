#pragma once

// Structured triangulation of the axisymmetric cross-section [0,R] x [0,H].

#include <array>
#include <cstdint>
#include <filesystem>
#include <vector>

namespace weldopt {

enum class BoundaryTag : std::uint8_t {
  Axis = 0,       // r = 0
  LaserSpot = 1,  // z = H, r <= beam radius
  TopOuter = 2,   // z = H, r > beam radius
  Lateral = 3,    // r = R
  Bottom = 4,     // z = 0
};

struct DomainSpec {
  double radius = 2.5e-3;       // m
  double height = 0.5e-3;       // m
  double beam_radius = 0.2e-3;  // m
  int nr = 50;
  int nz = 80;

  void validate() const;
  double dr() const { return radius / nr; }
  double dz() const { return height / nz; }
};

struct Point {
  double r;
  double z;
};

struct BoundaryEdge {
  std::array<int, 2> nodes;
  BoundaryTag tag;
};

struct Mesh {
  DomainSpec spec;
  std::vector<Point> nodes;
  std::vector<std::array<int, 3>> elements;  // counter-clockwise in (r, z)
  std::vector<BoundaryEdge> boundary_edges;
  std::vector<int> axis_nodes;  // r = 0, ordered by increasing z
  int target_node = -1;

  int node_index(int i, int j) const { return j * (spec.nr + 1) + i; }
  std::size_t num_nodes() const { return nodes.size(); }
  std::size_t num_elements() const { return elements.size(); }
};

// Each grid rectangle is split along its (i,j)-(i+1,j+1) diagonal.
// z_target must fall on a grid line; the target node sits at (0, z_target).
Mesh build_mesh(const DomainSpec& spec, double z_target);

// nodes.csv (id,r,z), elements.csv (id,n0,n1,n2), boundary.csv (n0,n1,tag).
void write_mesh_csv(const Mesh& mesh, const std::filesystem::path& dir);

}  // namespace weldopt
