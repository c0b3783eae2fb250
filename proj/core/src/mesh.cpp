#include "psafem/mesh.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <unordered_map>

namespace psafem {

namespace {

double signed_volume(const Mesh& m, const int* v) {
  if (m.dim == 2) {
    Eigen::Vector3d a = m.vertex(v[0]), b = m.vertex(v[1]), c = m.vertex(v[2]);
    return 0.5 * ((b[0] - a[0]) * (c[1] - a[1]) - (b[1] - a[1]) * (c[0] - a[0]));
  }
  Eigen::Vector3d a = m.vertex(v[0]);
  Eigen::Matrix3d J;
  for (int i = 0; i < 3; ++i) J.col(i) = m.vertex(v[i + 1]) - a;
  return J.determinant() / 6.0;
}

void orient_cells(Mesh& m) {
  const int nv = m.dim + 1;
  for (int t = 0; t < m.num_cells(); ++t) {
    int* v = &m.cells[static_cast<size_t>(t) * nv];
    if (signed_volume(m, v) < 0.0) std::swap(v[nv - 2], v[nv - 1]);
  }
}

struct VecHash {
  size_t operator()(const std::vector<int>& k) const {
    size_t h = 1469598103934665603ull;
    for (int x : k) { h ^= static_cast<size_t>(x); h *= 1099511628211ull; }
    return h;
  }
};

} // namespace

double Mesh::cell_volume(int t) const { return std::abs(signed_volume(*this, cell(t))); }

double Mesh::cell_diameter(int t) const {
  const int* v = cell(t);
  double d2 = 0.0;
  for (int i = 0; i <= dim; ++i)
    for (int j = i + 1; j <= dim; ++j)
      d2 = std::max(d2, (vertex(v[i]) - vertex(v[j])).squaredNorm());
  return std::sqrt(d2);
}

Eigen::Vector3d Mesh::cell_centroid(int t) const {
  const int* v = cell(t);
  Eigen::Vector3d c = Eigen::Vector3d::Zero();
  for (int i = 0; i <= dim; ++i) c += vertex(v[i]);
  return c / (dim + 1);
}

double Mesh::facet_measure(int f) const {
  const int* v = facet(f);
  if (dim == 2) return (vertex(v[1]) - vertex(v[0])).norm();
  Eigen::Vector3d e1 = vertex(v[1]) - vertex(v[0]);
  Eigen::Vector3d e2 = vertex(v[2]) - vertex(v[0]);
  return 0.5 * e1.cross(e2).norm();
}

double Mesh::facet_diameter(int f) const {
  const int* v = facet(f);
  if (dim == 2) return (vertex(v[1]) - vertex(v[0])).norm();
  double d2 = 0.0;
  for (int i = 0; i < dim; ++i)
    for (int j = i + 1; j < dim; ++j)
      d2 = std::max(d2, (vertex(v[i]) - vertex(v[j])).squaredNorm());
  return std::sqrt(d2);
}

Eigen::Vector3d Mesh::facet_centroid(int f) const {
  const int* v = facet(f);
  Eigen::Vector3d c = Eigen::Vector3d::Zero();
  for (int i = 0; i < dim; ++i) c += vertex(v[i]);
  return c / dim;
}

double Mesh::total_volume() const {
  double s = 0.0;
  for (int t = 0; t < num_cells(); ++t) s += cell_volume(t);
  return s;
}

double Mesh::min_angle() const {
  if (dim != 2) throw std::logic_error("min_angle: 2D only");
  double amin = M_PI;
  for (int t = 0; t < num_cells(); ++t) {
    const int* v = cell(t);
    for (int i = 0; i < 3; ++i) {
      Eigen::Vector3d a = vertex(v[i]);
      Eigen::Vector3d u = vertex(v[(i + 1) % 3]) - a;
      Eigen::Vector3d w = vertex(v[(i + 2) % 3]) - a;
      double ang = std::acos(std::clamp(u.dot(w) / (u.norm() * w.norm()), -1.0, 1.0));
      amin = std::min(amin, ang);
    }
  }
  return amin;
}

std::vector<int> Mesh::vertex_patch(int z) const {
  if (z < 0 || z >= num_vertices()) throw std::out_of_range("vertex_patch: bad vertex index");
  return {vertex_cell_ids.begin() + vertex_cell_offsets[z],
          vertex_cell_ids.begin() + vertex_cell_offsets[z + 1]};
}

double Mesh::patch_measure(int z) const {
  double s = 0.0;
  for (int t : vertex_patch(z)) s += cell_volume(t);
  return s;
}

void Mesh::build_topology() {
  orient_cells(*this);

  const int nv = dim + 1;
  const int nc = num_cells();

  facets.clear();
  facet_cells.clear();
  cell_facets.assign(static_cast<size_t>(nc) * nv, -1);

  std::unordered_map<std::vector<int>, int, VecHash> index;
  index.reserve(static_cast<size_t>(nc) * nv);
  std::vector<int> key(dim);
  for (int t = 0; t < nc; ++t) {
    const int* v = cell(t);
    for (int i = 0; i < nv; ++i) {
      int k = 0;
      for (int j = 0; j < nv; ++j)
        if (j != i) key[k++] = v[j];
      std::sort(key.begin(), key.end());
      auto it = index.find(key);
      if (it == index.end()) {
        int f = num_facets();
        index.emplace(key, f);
        facets.insert(facets.end(), key.begin(), key.end());
        facet_cells.push_back({t, -1});
        cell_facets[static_cast<size_t>(t) * nv + i] = f;
      } else {
        int f = it->second;
        auto& fc = facet_cells[f];
        if (fc[1] != -1) throw std::runtime_error("non-manifold connectivity: facet with >2 cells");
        fc[1] = t;
        if (fc[1] < fc[0]) std::swap(fc[0], fc[1]);
        cell_facets[static_cast<size_t>(t) * nv + i] = f;
      }
    }
  }

  // Normals: outward w.r.t. the lower-indexed incident cell.
  facet_normals.assign(static_cast<size_t>(num_facets()) * dim, 0.0);
  for (int f = 0; f < num_facets(); ++f) {
    const int* fv = facet(f);
    Eigen::Vector3d n = Eigen::Vector3d::Zero();
    if (dim == 2) {
      Eigen::Vector3d e = vertex(fv[1]) - vertex(fv[0]);
      n = Eigen::Vector3d(e[1], -e[0], 0.0);
    } else {
      Eigen::Vector3d e1 = vertex(fv[1]) - vertex(fv[0]);
      Eigen::Vector3d e2 = vertex(fv[2]) - vertex(fv[0]);
      n = e1.cross(e2);
    }
    n.normalize();
    int t = facet_cells[f][0];
    if (n.dot(facet_centroid(f) - cell_centroid(t)) < 0.0) n = -n;
    for (int d = 0; d < dim; ++d) facet_normals[static_cast<size_t>(f) * dim + d] = n[d];
  }

  // Vertex->cell adjacency (CSR)
  vertex_cell_offsets.assign(num_vertices() + 1, 0);
  for (int t = 0; t < nc; ++t)
    for (int i = 0; i < nv; ++i) ++vertex_cell_offsets[cell(t)[i] + 1];
  for (int z = 0; z < num_vertices(); ++z) vertex_cell_offsets[z + 1] += vertex_cell_offsets[z];
  vertex_cell_ids.assign(vertex_cell_offsets.back(), -1);
  std::vector<int> cursor(vertex_cell_offsets.begin(), vertex_cell_offsets.end() - 1);
  for (int t = 0; t < nc; ++t)
    for (int i = 0; i < nv; ++i) vertex_cell_ids[cursor[cell(t)[i]]++] = t;
}

// ---------------------------------------------------------------------------
// Presets
// ---------------------------------------------------------------------------

namespace {

Mesh make_mesh(int dim, std::vector<double> coords, std::vector<int> cells) {
  Mesh m;
  m.dim = dim;
  m.coords = std::move(coords);
  m.cells = std::move(cells);
  m.generation.assign(m.num_cells(), 0);
  m.build_topology();
  return m;
}

// One unit cube split into 6 tetrahedra (Kuhn split along the main diagonal).
void add_kuhn_cube(double x0, double y0, double z0,
                   std::map<std::array<double, 3>, int>& vid,
                   std::vector<double>& coords, std::vector<int>& cells) {
  auto idx = [&](double x, double y, double z) {
    std::array<double, 3> p{x, y, z};
    auto it = vid.find(p);
    if (it != vid.end()) return it->second;
    int id = static_cast<int>(coords.size() / 3);
    vid.emplace(p, id);
    coords.insert(coords.end(), {x, y, z});
    return id;
  };
  int c[8];
  for (int k = 0; k < 8; ++k)
    c[k] = idx(x0 + (k & 1), y0 + ((k >> 1) & 1), z0 + ((k >> 2) & 1));
  // The 6 permutation tetrahedra sharing diagonal c0-c7.
  static const int tets[6][4] = {
      {0, 1, 3, 7}, {0, 3, 2, 7}, {0, 2, 6, 7},
      {0, 6, 4, 7}, {0, 4, 5, 7}, {0, 5, 1, 7}};
  for (auto& t : tets)
    for (int i = 0; i < 4; ++i) cells.push_back(c[t[i]]);
}

} // namespace

Mesh preset_mesh(const std::string& name) {
  if (name == "unit_square") {
    return make_mesh(2, {0, 0, 1, 0, 1, 1, 0, 1}, {0, 1, 2, 0, 2, 3});
  }
  if (name == "lshape2d") {
    // (-1,1)^2 minus (-1,0)^2; re-entrant corner at the origin.
    std::vector<double> coords = {
        0, -1, 1, -1, -1, 0, 0, 0, 1, 0, -1, 1, 0, 1, 1, 1};
    std::vector<int> cells = {
        0, 1, 4, 0, 4, 3,  // lower right square
        3, 4, 7, 3, 7, 6,  // upper right square
        2, 3, 6, 2, 6, 5}; // upper left square
    return make_mesh(2, std::move(coords), std::move(cells));
  }
  if (name == "unit_cube") {
    std::map<std::array<double, 3>, int> vid;
    std::vector<double> coords;
    std::vector<int> cells;
    add_kuhn_cube(0, 0, 0, vid, coords, cells);
    return make_mesh(3, std::move(coords), std::move(cells));
  }
  if (name == "lshape3d") {
    // L-shaped cross-section in the (x,z) plane extruded along y in (-1,0);
    // the re-entrant (singular) edge is {(0,y,0) : y in (-1,0)}.
    std::map<std::array<double, 3>, int> vid;
    std::vector<double> coords;
    std::vector<int> cells;
    add_kuhn_cube(-1, -1, 0, vid, coords, cells);
    add_kuhn_cube(0, -1, 0, vid, coords, cells);
    add_kuhn_cube(0, -1, -1, vid, coords, cells);
    return make_mesh(3, std::move(coords), std::move(cells));
  }
  throw std::invalid_argument("unknown geometry: " + name);
}

// ---------------------------------------------------------------------------
// Conforming bisection refinement
// ---------------------------------------------------------------------------

namespace {

struct PairHash {
  size_t operator()(const std::pair<int, int>& p) const {
    return (static_cast<size_t>(p.first) << 32) ^ static_cast<size_t>(p.second);
  }
};

// Refinement edge: longest edge of the simplex; exact tie-break by the
// lexicographically smallest sorted vertex-id pair.
std::pair<int, int> refinement_edge(const std::vector<double>& coords, int dim,
                                    const int* v) {
  auto sq = [&](int a, int b) {
    double s = 0.0;
    for (int d = 0; d < dim; ++d) {
      double diff = coords[static_cast<size_t>(a) * dim + d] - coords[static_cast<size_t>(b) * dim + d];
      s += diff * diff;
    }
    return s;
  };
  std::pair<int, int> best{-1, -1};
  double bl = -1.0;
  for (int i = 0; i <= dim; ++i)
    for (int j = i + 1; j <= dim; ++j) {
      std::pair<int, int> e{std::min(v[i], v[j]), std::max(v[i], v[j])};
      double l = sq(e.first, e.second);
      if (l > bl || (l == bl && e < best)) { bl = l; best = e; }
    }
  return best;
}

} // namespace

Mesh refine(const Mesh& mesh, const MarkSet& marks) {
  const int dim = mesh.dim;
  const int nv = dim + 1;

  std::vector<double> coords = mesh.coords;
  std::vector<std::array<int, 4>> work;
  std::vector<int> gen;
  std::vector<char> flag;
  work.reserve(mesh.num_cells());
  for (int t = 0; t < mesh.num_cells(); ++t) {
    std::array<int, 4> c{-1, -1, -1, -1};
    for (int i = 0; i < nv; ++i) c[i] = mesh.cell(t)[i];
    work.push_back(c);
    gen.push_back(mesh.generation[t]);
    flag.push_back(0);
  }
  for (int t : marks.marked) {
    if (t < 0 || t >= mesh.num_cells()) throw std::out_of_range("refine: bad cell index in mark set");
    flag[t] = 1;
  }

  std::unordered_map<std::pair<int, int>, int, PairHash> midpoint;
  auto get_midpoint = [&](std::pair<int, int> e) {
    auto it = midpoint.find(e);
    if (it != midpoint.end()) return it->second;
    int id = static_cast<int>(coords.size()) / dim;
    for (int d = 0; d < dim; ++d)
      coords.push_back(0.5 * (coords[static_cast<size_t>(e.first) * dim + d] +
                              coords[static_cast<size_t>(e.second) * dim + d]));
    midpoint.emplace(e, id);
    return id;
  };
  auto has_midpoint = [&](const std::array<int, 4>& c) {
    for (int i = 0; i <= dim; ++i)
      for (int j = i + 1; j <= dim; ++j)
        if (midpoint.count({std::min(c[i], c[j]), std::max(c[i], c[j])})) return true;
    return false;
  };

  bool changed = true;
  int passes = 0;
  while (changed) {
    if (++passes > 500) throw std::runtime_error("refine: closure did not terminate");
    changed = false;
    std::vector<std::array<int, 4>> next;
    std::vector<int> ngen;
    std::vector<char> nflag;
    next.reserve(work.size());
    for (size_t i = 0; i < work.size(); ++i) {
      const auto& c = work[i];
      if (!flag[i] && !has_midpoint(c)) {
        next.push_back(c);
        ngen.push_back(gen[i]);
        nflag.push_back(0);
        continue;
      }
      auto e = refinement_edge(coords, dim, c.data());
      int mid = get_midpoint(e);
      std::array<int, 4> a = c, b = c;
      for (int k = 0; k <= dim; ++k) {
        if (a[k] == e.second) a[k] = mid; // child keeping e.first
        if (b[k] == e.first) b[k] = mid;  // child keeping e.second
      }
      next.push_back(a);
      next.push_back(b);
      ngen.push_back(gen[i] + 1);
      ngen.push_back(gen[i] + 1);
      nflag.push_back(0);
      nflag.push_back(0);
      changed = true;
    }
    work.swap(next);
    gen.swap(ngen);
    flag.swap(nflag);
  }

  Mesh out;
  out.dim = dim;
  out.coords = std::move(coords);
  out.cells.reserve(work.size() * nv);
  for (const auto& c : work)
    for (int i = 0; i < nv; ++i) out.cells.push_back(c[i]);
  out.generation = std::move(gen);
  out.build_topology();
  return out;
}

Mesh uniform_refine(const Mesh& mesh) {
  MarkSet all;
  all.marked.resize(mesh.num_cells());
  for (int t = 0; t < mesh.num_cells(); ++t) all.marked[t] = t;
  Mesh half = refine(mesh, all);
  MarkSet all2;
  all2.marked.resize(half.num_cells());
  for (int t = 0; t < half.num_cells(); ++t) all2.marked[t] = t;
  return refine(half, all2);
}

} // namespace psafem
