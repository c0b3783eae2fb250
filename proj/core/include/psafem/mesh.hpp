#pragma once

#include <array>
#include <stdexcept>
#include <string>
#include <vector>

#include <Eigen/Dense>

namespace psafem {

/// Conforming simplicial mesh (triangles for dim==2, tetrahedra for dim==3).
///
/// Vertices and cells are flat index arrays; facet topology and vertex
/// adjacency are rebuilt after construction or refinement.  Instances are
/// treated as immutable once built: refinement returns a new mesh.
class Mesh {
public:
  int dim = 2;

  std::vector<double> coords;  // dim doubles per vertex
  std::vector<int> cells;      // dim+1 vertex ids per cell
  std::vector<int> generation; // refinement level per cell

  // Facet topology. Facet vertex ids are stored sorted ascending.  The unit
  // normal of an interior facet points from the lower- to the higher-indexed
  // incident cell; boundary normals point outward.
  std::vector<int> facets;                    // dim ids per facet
  std::vector<std::array<int, 2>> facet_cells; // {cell0, cell1 or -1}
  std::vector<int> cell_facets;               // dim+1 per cell, facet opposite local vertex i
  std::vector<double> facet_normals;          // dim per facet

  // CSR vertex->cell adjacency
  std::vector<int> vertex_cell_offsets;
  std::vector<int> vertex_cell_ids;

  int num_vertices() const { return static_cast<int>(coords.size()) / dim; }
  int num_cells() const { return static_cast<int>(cells.size()) / (dim + 1); }
  int num_facets() const { return static_cast<int>(facets.size()) / dim; }

  Eigen::Vector3d vertex(int v) const {
    Eigen::Vector3d p = Eigen::Vector3d::Zero();
    for (int d = 0; d < dim; ++d) p[d] = coords[static_cast<size_t>(v) * dim + d];
    return p;
  }
  const int* cell(int t) const { return &cells[static_cast<size_t>(t) * (dim + 1)]; }
  const int* facet(int f) const { return &facets[static_cast<size_t>(f) * dim]; }
  Eigen::Vector3d facet_normal(int f) const {
    Eigen::Vector3d n = Eigen::Vector3d::Zero();
    for (int d = 0; d < dim; ++d) n[d] = facet_normals[static_cast<size_t>(f) * dim + d];
    return n;
  }

  double cell_volume(int t) const;
  double cell_diameter(int t) const;
  Eigen::Vector3d cell_centroid(int t) const;
  double facet_measure(int f) const;
  double facet_diameter(int f) const;
  Eigen::Vector3d facet_centroid(int f) const;

  double total_volume() const;
  double min_angle() const; // 2D only: minimum interior angle in radians

  std::vector<int> vertex_patch(int z) const;
  double patch_measure(int z) const;

  /// Rebuilds facet topology and vertex adjacency from `cells`.
  /// Throws on non-manifold connectivity (facet shared by >2 cells).
  void build_topology();
};

/// Maximal-strategy mark set; `marked` holds cell indices.
struct MarkSet {
  std::vector<int> marked;
  double beta = 0.5;
};

/// Coarse initial triangulations of the preset geometries.
/// Names: unit_square, lshape2d, lshape3d, unit_cube.
Mesh preset_mesh(const std::string& name);

/// Conforming bisection refinement: every marked cell is bisected at least
/// once; hanging vertices are removed by refining incident cells at their own
/// refinement edge until the mesh is conforming.
Mesh refine(const Mesh& mesh, const MarkSet& marks);

/// Two full-marking bisection sweeps, halving h (4x cells on structured 2D
/// meshes, matching classic uniform refinement).
Mesh uniform_refine(const Mesh& mesh);

} // namespace psafem
