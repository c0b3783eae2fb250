#include "psafem/postprocess.hpp"

#include <cmath>

#include "psafem/quadrature.hpp"

namespace psafem {

ThetaOperator::ThetaOperator(const Mesh& mesh) : mesh_(&mesh) {
  const int n = mesh.dim;
  P0VectorSpace p0(mesh);
  P1VectorSpace p1(mesh);
  std::vector<Eigen::Triplet<double>> trips;
  for (int z = 0; z < mesh.num_vertices(); ++z) {
    std::vector<int> patch = mesh.vertex_patch(z);
    double wz = 0.0;
    for (int t : patch) wz += mesh.cell_volume(t);
    for (int t : patch) {
      double w = mesh.cell_volume(t) / wz;
      for (int c = 0; c < n; ++c) trips.emplace_back(p1.dof(z, c), p0.dof(t, c), w);
    }
  }
  theta_.resize(p1.num_dofs(), p0.num_dofs());
  theta_.setFromTriplets(trips.begin(), trips.end());
}

Eigen::VectorXd ThetaOperator::apply(const Eigen::VectorXd& p0_field) const {
  return theta_ * p0_field;
}

double ThetaOperator::local_residual_sq(const Eigen::VectorXd& p1,
                                        const Eigen::VectorXd& p0, int t) const {
  const Mesh& m = *mesh_;
  const int n = m.dim;
  P0VectorSpace sp0(m);
  P1VectorSpace sp1(m);
  QuadRule q = cell_rule(m, t);
  double acc = 0.0;
  for (size_t k = 0; k < q.points.size(); ++k) {
    Eigen::Vector4d lam = barycentric(m, t, q.points[k]);
    double s = 0.0;
    for (int c = 0; c < n; ++c) {
      double val = -p0[sp0.dof(t, c)];
      for (int i = 0; i <= n; ++i) val += lam[i] * p1[sp1.dof(m.cell(t)[i], c)];
      s += val * val;
    }
    acc += q.weights[k] * s;
  }
  return acc;
}

double ThetaOperator::global_residual(const Eigen::VectorXd& p0_field) const {
  Eigen::VectorXd p1 = apply(p0_field);
  double acc = 0.0;
  for (int t = 0; t < mesh_->num_cells(); ++t)
    acc += local_residual_sq(p1, p0_field, t);
  return std::sqrt(acc);
}

double theta_projection_identity(const VectorField& v, const Mesh& mesh) {
  const int n = mesh.dim;
  P0VectorSpace p0(mesh);
  P1VectorSpace p1(mesh);
  ThetaOperator theta(mesh);

  Eigen::VectorXd proj = project_p0(p0, v);
  Eigen::VectorXd lhs = theta.apply(proj);

  // Theta(v) directly from exact cell integrals of the callback.
  Eigen::VectorXd rhs = Eigen::VectorXd::Zero(p1.num_dofs());
  std::vector<Eigen::Vector3d> cell_int(mesh.num_cells(), Eigen::Vector3d::Zero());
  for (int t = 0; t < mesh.num_cells(); ++t) {
    QuadRule q = cell_rule_high(mesh, t);
    for (size_t k = 0; k < q.points.size(); ++k)
      cell_int[t] += q.weights[k] * v(q.points[k]);
  }
  for (int z = 0; z < mesh.num_vertices(); ++z) {
    double wz = mesh.patch_measure(z);
    Eigen::Vector3d val = Eigen::Vector3d::Zero();
    for (int t : mesh.vertex_patch(z)) val += cell_int[t];
    val /= wz;
    for (int c = 0; c < n; ++c) rhs[p1.dof(z, c)] = val[c];
  }

  // L2 norm of the P1 difference via the cell rule.
  double acc = 0.0;
  Eigen::VectorXd diff = lhs - rhs;
  for (int t = 0; t < mesh.num_cells(); ++t) {
    QuadRule q = cell_rule(mesh, t);
    for (size_t k = 0; k < q.points.size(); ++k) {
      Eigen::Vector4d lam = barycentric(mesh, t, q.points[k]);
      double s = 0.0;
      for (int c = 0; c < n; ++c) {
        double val = 0.0;
        for (int i = 0; i <= n; ++i) val += lam[i] * diff[p1.dof(mesh.cell(t)[i], c)];
        s += val * val;
      }
      acc += q.weights[k] * s;
    }
  }
  return std::sqrt(acc);
}

} // namespace psafem
