#include "psafem/spaces.hpp"

#include <cmath>

#include "psafem/quadrature.hpp"

namespace psafem {

CellRtBasis cell_rt_basis(const RtTensorSpace& space, int t) {
  const Mesh& m = *space.mesh;
  const int n = m.dim;
  CellRtBasis b;
  b.nfacets = n + 1;
  const double vol = m.cell_volume(t);
  for (int i = 0; i <= n; ++i) {
    int f = m.cell_facets[static_cast<size_t>(t) * (n + 1) + i];
    b.facet_id[i] = f;
    b.p[i] = m.vertex(m.cell(t)[i]); // vertex opposite facet i
    b.k[i] = space.dof_sign(t, i) / (n * vol);
  }
  return b;
}

CellAffineTensor cell_rho_affine(const RtTensorSpace& space,
                                 const Eigen::VectorXd& coeffs, int t) {
  const int n = space.mesh->dim;
  CellRtBasis b = cell_rt_basis(space, t);
  CellAffineTensor out;
  for (int r = 0; r < n; ++r) {
    for (int i = 0; i <= n; ++i) {
      double c = coeffs[space.dof(r, b.facet_id[i])] * b.k[i];
      out.c[r] += c;
      out.A.row(r).head(n) -= c * b.p[i].head(n).transpose();
    }
  }
  return out;
}

Eigen::Vector4d barycentric(const Mesh& mesh, int t, const Eigen::Vector3d& x) {
  const int n = mesh.dim;
  Eigen::Vector4d lam = Eigen::Vector4d::Zero();
  Eigen::MatrixXd J(n, n);
  Eigen::Vector3d a = mesh.vertex(mesh.cell(t)[0]);
  for (int j = 0; j < n; ++j)
    J.col(j) = (mesh.vertex(mesh.cell(t)[j + 1]) - a).head(n);
  Eigen::VectorXd rest = J.fullPivLu().solve((x - a).head(n));
  lam[0] = 1.0 - rest.sum();
  for (int j = 0; j < n; ++j) lam[j + 1] = rest[j];
  return lam;
}

std::vector<RtBasisValue> rt_basis_eval(const RtTensorSpace& space, int t,
                                        const Eigen::Vector3d& x) {
  const Mesh& m = *space.mesh;
  const int n = m.dim;
  Eigen::Vector4d lam = barycentric(m, t, x);
  for (int i = 0; i <= n; ++i)
    if (lam[i] < -1e-12) throw std::domain_error("rt_basis_eval: point outside cell");

  CellRtBasis b = cell_rt_basis(space, t);
  std::vector<RtBasisValue> out;
  out.reserve(static_cast<size_t>(n) * (n + 1));
  for (int r = 0; r < n; ++r)
    for (int i = 0; i <= n; ++i)
      out.push_back({space.dof(r, b.facet_id[i]), r, b.k[i] * (x - b.p[i])});
  return out;
}

Eigen::VectorXd interpolate_rt(const RtTensorSpace& space, const TensorField& f,
                               bool high_order) {
  const Mesh& m = *space.mesh;
  const int n = m.dim;
  Eigen::VectorXd coeffs = Eigen::VectorXd::Zero(space.num_dofs());
  for (int e = 0; e < m.num_facets(); ++e) {
    Eigen::Vector3d nrm = m.facet_normal(e);
    QuadRule q;
    if (m.dim == 2) {
      q = segment_rule(m.vertex(m.facet(e)[0]), m.vertex(m.facet(e)[1]), high_order ? 5 : 2);
    } else if (high_order) {
      q = facet_rule(m, e);
    } else {
      // 3-point edge-midpoint rule on the triangle, exact to degree 2.
      Eigen::Vector3d v0 = m.vertex(m.facet(e)[0]);
      Eigen::Vector3d v1 = m.vertex(m.facet(e)[1]);
      Eigen::Vector3d v2 = m.vertex(m.facet(e)[2]);
      double w = m.facet_measure(e) / 3.0;
      q.points = {0.5 * (v0 + v1), 0.5 * (v1 + v2), 0.5 * (v0 + v2)};
      q.weights = {w, w, w};
    }
    for (size_t k = 0; k < q.points.size(); ++k) {
      Eigen::Matrix3d val = f(q.points[k]);
      for (int r = 0; r < n; ++r)
        coeffs[space.dof(r, e)] += q.weights[k] * val.row(r).head(n).dot(nrm.head(n));
    }
  }
  return coeffs;
}

Eigen::VectorXd project_p0(const P0VectorSpace& space, const VectorField& g) {
  const Mesh& m = *space.mesh;
  Eigen::VectorXd coeffs = Eigen::VectorXd::Zero(space.num_dofs());
  for (int t = 0; t < m.num_cells(); ++t) {
    QuadRule q = cell_rule(m, t);
    Eigen::Vector3d mean = Eigen::Vector3d::Zero();
    for (size_t k = 0; k < q.points.size(); ++k) mean += q.weights[k] * g(q.points[k]);
    mean /= m.cell_volume(t);
    for (int c = 0; c < m.dim; ++c) coeffs[space.dof(t, c)] = mean[c];
  }
  return coeffs;
}

double check_commuting(const RtTensorSpace& rt, const P0VectorSpace& p0,
                       const TensorField& f, const VectorField& div_f,
                       bool high_order) {
  const Mesh& m = *rt.mesh;
  const int n = m.dim;
  Eigen::VectorXd coeffs = interpolate_rt(rt, f, high_order);

  double err2 = 0.0;
  for (int t = 0; t < m.num_cells(); ++t) {
    CellRtBasis b = cell_rt_basis(rt, t);
    Eigen::Vector3d div_interp = Eigen::Vector3d::Zero();
    for (int r = 0; r < n; ++r)
      for (int i = 0; i <= n; ++i)
        div_interp[r] += coeffs[rt.dof(r, b.facet_id[i])] * n * b.k[i];

    QuadRule q = cell_rule_high(m, t);
    Eigen::Vector3d mean = Eigen::Vector3d::Zero();
    for (size_t k = 0; k < q.points.size(); ++k) mean += q.weights[k] * div_f(q.points[k]);
    mean /= m.cell_volume(t);

    err2 += m.cell_volume(t) * (div_interp - mean).head(n).squaredNorm();
  }
  return std::sqrt(err2);
}

TensorFieldEval eval_tensor_field(const RtTensorSpace& space,
                                  const Eigen::VectorXd& coeffs, int t,
                                  const Eigen::Vector3d& x, double c_trace,
                                  double mu) {
  const int n = space.mesh->dim;
  CellAffineTensor rho = cell_rho_affine(space, coeffs, t);

  Eigen::Matrix3d val = Eigen::Matrix3d::Zero();
  for (int r = 0; r < n; ++r)
    val.row(r).head(n) = rho.A.row(r).head(n) + rho.c[r] * x.head(n).transpose();
  double tr_rho = 0.0;
  for (int i = 0; i < n; ++i) tr_rho += val(i, i);

  TensorFieldEval out;
  out.value = (val - c_trace * tr_rho * Eigen::Matrix3d::Identity()) / mu;
  if (n == 2) out.value(2, 2) = 0.0;
  out.trace = 0.0;
  for (int i = 0; i < n; ++i) out.trace += out.value(i, i);
  out.deviator = out.value - (out.trace / n) * Eigen::Matrix3d::Identity();
  if (n == 2) out.deviator(2, 2) = 0.0;

  // grad(tr rho) = rho.c; the affine RT0 parts are rot/curl free, so only the
  // -c_trace tr(rho) I term contributes.
  if (n == 2) {
    // rot(g e_1) = -dg/dy, rot(g e_2) = dg/dx with g = -c_trace tr(rho)/mu
    out.rot(0, 0) = c_trace / mu * rho.c[1];
    out.rot(1, 0) = -c_trace / mu * rho.c[0];
  } else {
    // curl(g e_i) = grad(g) x e_i
    for (int r = 0; r < 3; ++r) {
      Eigen::Vector3d e = Eigen::Vector3d::Unit(r);
      out.rot.row(r) = (-c_trace / mu) * rho.c.cross(e).transpose();
    }
  }
  return out;
}

} // namespace psafem
