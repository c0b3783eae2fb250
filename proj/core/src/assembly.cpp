#include "psafem/assembly.hpp"

#include <fstream>

#include "psafem/quadrature.hpp"

namespace psafem {

namespace {

// Per-cell integrals of the scalar RT0 basis:
//   S(i,j)       = int_T phi_i . phi_j
//   V[a][b](i,j) = int_T (phi_i)_a (phi_j)_b
struct CellIntegrals {
  Eigen::MatrixXd S;
  Eigen::MatrixXd V[3][3];
};

CellIntegrals cell_integrals(const RtTensorSpace& space, int t) {
  const Mesh& m = *space.mesh;
  const int n = m.dim;
  const int nf = n + 1;
  CellRtBasis b = cell_rt_basis(space, t);
  CellIntegrals out;
  out.S = Eigen::MatrixXd::Zero(nf, nf);
  for (int a = 0; a < n; ++a)
    for (int c = 0; c < n; ++c) out.V[a][c] = Eigen::MatrixXd::Zero(nf, nf);

  QuadRule q = cell_rule(m, t);
  std::vector<Eigen::Vector3d> phi(nf);
  for (size_t k = 0; k < q.points.size(); ++k) {
    for (int i = 0; i < nf; ++i) phi[i] = b.k[i] * (q.points[k] - b.p[i]);
    const double w = q.weights[k];
    for (int i = 0; i < nf; ++i)
      for (int j = 0; j < nf; ++j) {
        out.S(i, j) += w * phi[i].head(n).dot(phi[j].head(n));
        for (int a = 0; a < n; ++a)
          for (int c = 0; c < n; ++c) out.V[a][c](i, j) += w * phi[i][a] * phi[j][c];
      }
  }
  return out;
}

} // namespace

SparseMat assemble_a(const RtTensorSpace& space, const MaterialParams& mat, AForm form) {
  if (form == AForm::original && mat.limit)
    throw std::invalid_argument("assemble_a: original form undefined at nu = 1/2");

  const Mesh& m = *space.mesh;
  const int n = m.dim;
  const int nf = n + 1;
  const double mu = mat.mu;

  // Coefficients of delta_rs * S and of the V-(trace) coupling.
  double cs = 0.0, cv = 0.0;
  switch (form) {
    case AForm::original:
      cs = 1.0 / mu;
      cv = -(mat.lambda + mu) / (mu * (n * mat.lambda + (n + 1) * mu));
      break;
    case AForm::deviatoric:
      // xi^d : tau^d = xi : tau - (1/n) tr xi tr tau
      cs = 1.0 / mu;
      cv = -1.0 / (n * mu) +
           (mat.limit ? 0.0 : 1.0 / (n * (n * mat.lambda + (n + 1) * mu)));
      break;
    case AForm::limit:
      cs = 1.0 / mu;
      cv = -1.0 / (n * mu);
      break;
  }

  std::vector<Eigen::Triplet<double>> trips;
  trips.reserve(static_cast<size_t>(m.num_cells()) * nf * nf * n * n);
  for (int t = 0; t < m.num_cells(); ++t) {
    CellRtBasis b = cell_rt_basis(space, t);
    CellIntegrals ci = cell_integrals(space, t);
    for (int i = 0; i < nf; ++i)
      for (int j = 0; j < nf; ++j)
        for (int r = 0; r < n; ++r)
          for (int s = 0; s < n; ++s) {
            double v = cv * ci.V[r][s](i, j);
            if (r == s) v += cs * ci.S(i, j);
            if (v != 0.0)
              trips.emplace_back(space.dof(r, b.facet_id[i]),
                                 space.dof(s, b.facet_id[j]), v);
          }
  }
  SparseMat A(space.num_dofs(), space.num_dofs());
  A.setFromTriplets(trips.begin(), trips.end());
  return A;
}

SparseMat assemble_b(const RtTensorSpace& rt, const P0VectorSpace& p0) {
  if (rt.mesh != p0.mesh) throw std::invalid_argument("assemble_b: mismatched meshes");
  const Mesh& m = *rt.mesh;
  const int n = m.dim;

  std::vector<Eigen::Triplet<double>> trips;
  for (int t = 0; t < m.num_cells(); ++t) {
    CellRtBasis b = cell_rt_basis(rt, t);
    const double vol = m.cell_volume(t);
    for (int i = 0; i <= n; ++i) {
      double div_phi = n * b.k[i]; // constant on T
      for (int r = 0; r < n; ++r)
        trips.emplace_back(p0.dof(t, r), rt.dof(r, b.facet_id[i]), div_phi * vol);
    }
  }
  SparseMat B(p0.num_dofs(), rt.num_dofs());
  B.setFromTriplets(trips.begin(), trips.end());
  return B;
}

Eigen::VectorXd assemble_mass(const P0VectorSpace& p0) {
  const Mesh& m = *p0.mesh;
  Eigen::VectorXd d(p0.num_dofs());
  for (int t = 0; t < m.num_cells(); ++t) {
    double vol = m.cell_volume(t);
    for (int c = 0; c < m.dim; ++c) d[p0.dof(t, c)] = vol;
  }
  return d;
}

Eigen::VectorXd assemble_trace_constraint(const RtTensorSpace& rt) {
  const Mesh& m = *rt.mesh;
  const int n = m.dim;
  Eigen::VectorXd c = Eigen::VectorXd::Zero(rt.num_dofs());
  for (int t = 0; t < m.num_cells(); ++t) {
    CellRtBasis b = cell_rt_basis(rt, t);
    // int_T (phi_i)_r = k_i |T| (centroid - p_i)_r  (integrand is linear)
    Eigen::Vector3d cen = m.cell_centroid(t);
    double vol = m.cell_volume(t);
    for (int i = 0; i <= n; ++i) {
      Eigen::Vector3d mom = b.k[i] * vol * (cen - b.p[i]);
      for (int r = 0; r < n; ++r) c[rt.dof(r, b.facet_id[i])] += mom[r];
    }
  }
  return c;
}

SaddleSystem assemble_system(const RtTensorSpace& rt, const P0VectorSpace& p0,
                             const MaterialParams& mat) {
  SaddleSystem sys;
  sys.A = assemble_a(rt, mat, mat.limit ? AForm::limit : AForm::deviatoric);
  sys.B = assemble_b(rt, p0);
  sys.M = assemble_mass(p0);
  sys.c = assemble_trace_constraint(rt);
  sys.n_rt = rt.num_dofs();
  sys.n_q = p0.num_dofs();
  sys.limit = mat.limit;
  if (mat.limit) {
    // RT coefficients of the constant identity tensor: flux of e_r over f.
    const Mesh& m = *rt.mesh;
    sys.kernel = Eigen::VectorXd::Zero(rt.num_dofs());
    for (int f = 0; f < m.num_facets(); ++f) {
      Eigen::Vector3d n = m.facet_normal(f);
      for (int r = 0; r < m.dim; ++r)
        sys.kernel[rt.dof(r, f)] = m.facet_measure(f) * n[r];
    }
  }
  return sys;
}

void write_matrix_market(const SparseMat& m, const std::string& path) {
  std::ofstream out(path);
  out << "%%MatrixMarket matrix coordinate real general\n";
  out << m.rows() << " " << m.cols() << " " << m.nonZeros() << "\n";
  for (int k = 0; k < m.outerSize(); ++k)
    for (SparseMat::InnerIterator it(m, k); it; ++it)
      out << it.row() + 1 << " " << it.col() + 1 << " " << it.value() << "\n";
}

} // namespace psafem
