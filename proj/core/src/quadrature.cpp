#include "psafem/quadrature.hpp"

#include <cmath>

namespace psafem {

namespace {

struct BaryRule {
  // Each entry: barycentric coordinates (size nverts) and relative weight
  // (weights sum to 1).
  std::vector<std::vector<double>> bary;
  std::vector<double> w;
};

void push_perms3(BaryRule& r, double a, double b, double w) {
  // Permutations of (a, b, b) over a triangle.
  r.bary.push_back({a, b, b}); r.w.push_back(w);
  r.bary.push_back({b, a, b}); r.w.push_back(w);
  r.bary.push_back({b, b, a}); r.w.push_back(w);
}

const BaryRule& tri_degree4() {
  static const BaryRule r = [] {
    BaryRule q;
    push_perms3(q, 0.108103018168070, 0.445948490915965, 0.223381589678011);
    push_perms3(q, 0.816847572980459, 0.091576213509771, 0.109951743655322);
    return q;
  }();
  return r;
}

const BaryRule& tri_degree5() {
  static const BaryRule r = [] {
    BaryRule q;
    q.bary.push_back({1.0 / 3, 1.0 / 3, 1.0 / 3});
    q.w.push_back(0.225);
    double s15 = std::sqrt(15.0);
    push_perms3(q, 1 - 2 * (6.0 - s15) / 21, (6.0 - s15) / 21, (155.0 - s15) / 1200);
    push_perms3(q, 1 - 2 * (6.0 + s15) / 21, (6.0 + s15) / 21, (155.0 + s15) / 1200);
    return q;
  }();
  return r;
}

const BaryRule& tri_degree6() {
  static const BaryRule r = [] {
    BaryRule q;
    push_perms3(q, 0.501426509658179, 0.249286745170910, 0.116786275726379);
    push_perms3(q, 0.873821971016996, 0.063089014491502, 0.050844906370207);
    const double a = 0.053145049844817, b = 0.310352451033784, c = 0.636502499121399;
    const double w = 0.082851075618374;
    const double p[6][3] = {{a, b, c}, {a, c, b}, {b, a, c}, {b, c, a}, {c, a, b}, {c, b, a}};
    for (auto& x : p) { q.bary.push_back({x[0], x[1], x[2]}); q.w.push_back(w); }
    return q;
  }();
  return r;
}

void push_perms4(BaryRule& r, double a, double b, double w) {
  // Permutations of (a, b, b, b) over a tetrahedron.
  for (int i = 0; i < 4; ++i) {
    std::vector<double> p(4, b);
    p[i] = a;
    r.bary.push_back(p);
    r.w.push_back(w);
  }
}

void push_pairs4(BaryRule& r, double a, double b, double w) {
  // Permutations of (a, a, b, b) over a tetrahedron (6 points).
  static const int ij[6][2] = {{0, 1}, {0, 2}, {0, 3}, {1, 2}, {1, 3}, {2, 3}};
  for (auto& e : ij) {
    std::vector<double> p(4, b);
    p[e[0]] = a;
    p[e[1]] = a;
    r.bary.push_back(p);
    r.w.push_back(w);
  }
}

const BaryRule& tet_degree4() {
  // Keast 11-point rule.
  static const BaryRule r = [] {
    BaryRule q;
    q.bary.push_back({0.25, 0.25, 0.25, 0.25});
    q.w.push_back(-0.0789333333333333);
    push_perms4(q, 11.0 / 14, 1.0 / 14, 0.0457333333333333);
    double b = (1.0 + std::sqrt(5.0 / 14.0)) / 4.0;
    double c = (1.0 - std::sqrt(5.0 / 14.0)) / 4.0;
    push_pairs4(q, b, c, 0.1493333333333333);
    return q;
  }();
  return r;
}

const BaryRule& tet_degree5() {
  // Felippa 14-point rule.
  static const BaryRule r = [] {
    BaryRule q;
    push_perms4(q, 1 - 3 * 0.3108859192633005, 0.3108859192633005, 0.1126879257180162);
    push_perms4(q, 1 - 3 * 0.09273525031089123, 0.09273525031089123, 0.07349304311636196);
    push_pairs4(q, 0.04550370412564964, 0.4544962958743504, 0.04254602077708147);
    return q;
  }();
  return r;
}

QuadRule map_rule(const BaryRule& br, const std::vector<Eigen::Vector3d>& verts,
                  double measure) {
  QuadRule out;
  out.points.reserve(br.bary.size());
  out.weights.reserve(br.bary.size());
  for (size_t q = 0; q < br.bary.size(); ++q) {
    Eigen::Vector3d p = Eigen::Vector3d::Zero();
    for (size_t i = 0; i < verts.size(); ++i) p += br.bary[q][i] * verts[i];
    out.points.push_back(p);
    out.weights.push_back(br.w[q] * measure);
  }
  return out;
}

std::vector<Eigen::Vector3d> cell_verts(const Mesh& m, int t) {
  std::vector<Eigen::Vector3d> v;
  for (int i = 0; i <= m.dim; ++i) v.push_back(m.vertex(m.cell(t)[i]));
  return v;
}

} // namespace

QuadRule cell_rule(const Mesh& mesh, int t) {
  const BaryRule& br = mesh.dim == 2 ? tri_degree4() : tet_degree4();
  return map_rule(br, cell_verts(mesh, t), mesh.cell_volume(t));
}

QuadRule cell_rule_high(const Mesh& mesh, int t) {
  const BaryRule& br = mesh.dim == 2 ? tri_degree6() : tet_degree5();
  return map_rule(br, cell_verts(mesh, t), mesh.cell_volume(t));
}

QuadRule facet_rule(const Mesh& mesh, int f) {
  const int* fv = mesh.facet(f);
  if (mesh.dim == 2)
    return segment_rule(mesh.vertex(fv[0]), mesh.vertex(fv[1]), 3);
  std::vector<Eigen::Vector3d> v{mesh.vertex(fv[0]), mesh.vertex(fv[1]), mesh.vertex(fv[2])};
  return map_rule(tri_degree5(), v, mesh.facet_measure(f));
}

QuadRule segment_rule(const Eigen::Vector3d& a, const Eigen::Vector3d& b, int npts) {
  std::vector<double> x, w; // on [-1,1]
  switch (npts) {
    case 1: x = {0.0}; w = {2.0}; break;
    case 2: {
      double g = 1.0 / std::sqrt(3.0);
      x = {-g, g}; w = {1.0, 1.0};
      break;
    }
    case 3: {
      double g = std::sqrt(3.0 / 5.0);
      x = {-g, 0.0, g}; w = {5.0 / 9, 8.0 / 9, 5.0 / 9};
      break;
    }
    case 5: {
      double g1 = std::sqrt(5.0 - 2.0 * std::sqrt(10.0 / 7.0)) / 3.0;
      double g2 = std::sqrt(5.0 + 2.0 * std::sqrt(10.0 / 7.0)) / 3.0;
      double w0 = 128.0 / 225;
      double w1 = (322.0 + 13.0 * std::sqrt(70.0)) / 900;
      double w2 = (322.0 - 13.0 * std::sqrt(70.0)) / 900;
      x = {-g2, -g1, 0.0, g1, g2};
      w = {w2, w1, w0, w1, w2};
      break;
    }
    default:
      throw std::invalid_argument("segment_rule: unsupported point count");
  }
  QuadRule out;
  double half = 0.5 * (b - a).norm();
  for (size_t i = 0; i < x.size(); ++i) {
    out.points.push_back(0.5 * (a + b) + 0.5 * x[i] * (b - a));
    out.weights.push_back(w[i] * half);
  }
  return out;
}

} // namespace psafem
