#include "weldopt/mesh.hpp"

#include <cmath>
#include <fstream>
#include <iomanip>
#include <sstream>

#include "weldopt/errors.hpp"

namespace weldopt {

namespace {

// Tolerance for "lies on a grid line", relative to the cell size.
constexpr double kGridTolerance = 1e-9;

}  // namespace

void DomainSpec::validate() const {
  if (!(radius > 0.0) || !(height > 0.0)) throw ConfigError("domain extents must be positive");
  if (!(beam_radius > 0.0 && beam_radius < radius)) {
    throw ConfigError("beam radius must lie in (0, R)");
  }
  if (nr < 2 || nz < 2) throw ConfigError("need at least 2 elements in r and z");
  const double cells = beam_radius / dr();
  if (std::abs(cells - std::round(cells)) > kGridTolerance * std::max(1.0, cells)) {
    std::ostringstream msg;
    msg << "beam radius " << beam_radius << " m is not a multiple of the radial spacing "
        << dr() << " m";
    throw ConfigError(msg.str());
  }
}

Mesh build_mesh(const DomainSpec& spec, double z_target) {
  spec.validate();
  if (!(z_target >= 0.0 && z_target <= spec.height)) {
    throw ConfigError("target depth lies outside the domain");
  }
  const double jt = z_target / spec.dz();
  const int j_target = static_cast<int>(std::lround(jt));
  if (std::abs(jt - j_target) > kGridTolerance * std::max(1.0, jt)) {
    std::ostringstream msg;
    msg << std::setprecision(12) << "z_target = " << z_target
        << " m is not on a grid line; nearest is z = " << j_target * spec.dz() << " m";
    throw ConfigError(msg.str());
  }

  Mesh mesh;
  mesh.spec = spec;
  const int nr = spec.nr, nz = spec.nz;
  mesh.nodes.reserve(static_cast<std::size_t>((nr + 1) * (nz + 1)));
  for (int j = 0; j <= nz; ++j) {
    for (int i = 0; i <= nr; ++i) {
      // exact end coordinates, so tags and measures do not drift
      const double r = (i == nr) ? spec.radius : i * spec.dr();
      const double z = (j == nz) ? spec.height : j * spec.dz();
      mesh.nodes.push_back({r, z});
    }
  }

  mesh.elements.reserve(static_cast<std::size_t>(2 * nr * nz));
  for (int j = 0; j < nz; ++j) {
    for (int i = 0; i < nr; ++i) {
      const int a = mesh.node_index(i, j), b = mesh.node_index(i + 1, j);
      const int c = mesh.node_index(i + 1, j + 1), d = mesh.node_index(i, j + 1);
      mesh.elements.push_back({a, b, c});
      mesh.elements.push_back({a, c, d});
    }
  }

  const int beam_cells = static_cast<int>(std::lround(spec.beam_radius / spec.dr()));
  for (int i = 0; i < nr; ++i) {
    mesh.boundary_edges.push_back(
        {{mesh.node_index(i, 0), mesh.node_index(i + 1, 0)}, BoundaryTag::Bottom});
  }
  for (int i = 0; i < nr; ++i) {
    mesh.boundary_edges.push_back(
        {{mesh.node_index(i, nz), mesh.node_index(i + 1, nz)},
         i < beam_cells ? BoundaryTag::LaserSpot : BoundaryTag::TopOuter});
  }
  for (int j = 0; j < nz; ++j) {
    mesh.boundary_edges.push_back(
        {{mesh.node_index(0, j), mesh.node_index(0, j + 1)}, BoundaryTag::Axis});
    mesh.boundary_edges.push_back(
        {{mesh.node_index(nr, j), mesh.node_index(nr, j + 1)}, BoundaryTag::Lateral});
  }

  for (int j = 0; j <= nz; ++j) mesh.axis_nodes.push_back(mesh.node_index(0, j));
  mesh.target_node = mesh.node_index(0, j_target);
  return mesh;
}

void write_mesh_csv(const Mesh& mesh, const std::filesystem::path& dir) {
  std::filesystem::create_directories(dir);
  std::ofstream nodes(dir / "nodes.csv");
  nodes << std::setprecision(17) << "id,r,z\n";
  for (std::size_t k = 0; k < mesh.nodes.size(); ++k) {
    nodes << k << ',' << mesh.nodes[k].r << ',' << mesh.nodes[k].z << '\n';
  }
  std::ofstream elements(dir / "elements.csv");
  elements << "id,n0,n1,n2\n";
  for (std::size_t e = 0; e < mesh.elements.size(); ++e) {
    const auto& t = mesh.elements[e];
    elements << e << ',' << t[0] << ',' << t[1] << ',' << t[2] << '\n';
  }
  std::ofstream boundary(dir / "boundary.csv");
  boundary << "n0,n1,tag\n";
  for (const auto& edge : mesh.boundary_edges) {
    boundary << edge.nodes[0] << ',' << edge.nodes[1] << ",gamma"
             << static_cast<int>(edge.tag) << '\n';
  }
  if (!nodes || !elements || !boundary) {
    throw ConfigError("failed writing mesh CSV to " + dir.string());
  }
}

}  // namespace weldopt
