#pragma once

#include <functional>

#include <Eigen/Dense>

#include "psafem/mesh.hpp"

namespace psafem {

/// Row-wise lowest-order Raviart-Thomas tensor space: each of the n rows of
/// the tensor field is an RT0 vector field with one normal-flux dof per facet
/// (dof value = integral of the row's normal component over the facet, taken
/// w.r.t. the global facet normal).
struct RtTensorSpace {
  const Mesh* mesh = nullptr;

  explicit RtTensorSpace(const Mesh& m) : mesh(&m) {}

  int rows() const { return mesh->dim; }
  int dofs_per_row() const { return mesh->num_facets(); }
  int num_dofs() const { return rows() * dofs_per_row(); }
  int dof(int row, int facet) const { return row * dofs_per_row() + facet; }

  /// +1 if the global facet normal points out of cell t on that facet.
  double dof_sign(int t, int local_facet) const {
    int f = mesh->cell_facets[static_cast<size_t>(t) * (mesh->dim + 1) + local_facet];
    return mesh->facet_cells[f][0] == t ? 1.0 : -1.0;
  }
};

/// Cellwise-constant vector fields; dof = cell * n + component.
struct P0VectorSpace {
  const Mesh* mesh = nullptr;
  explicit P0VectorSpace(const Mesh& m) : mesh(&m) {}
  int num_dofs() const { return mesh->dim * mesh->num_cells(); }
  int dof(int cell, int comp) const { return cell * mesh->dim + comp; }
};

/// Continuous piecewise-linear vector fields with the nodal basis;
/// dof = vertex * n + component. No boundary conditions.
struct P1VectorSpace {
  const Mesh* mesh = nullptr;
  explicit P1VectorSpace(const Mesh& m) : mesh(&m) {}
  int num_dofs() const { return mesh->dim * mesh->num_vertices(); }
  int dof(int vertex, int comp) const { return vertex * mesh->dim + comp; }
};

/// Scalar RT0 basis of one cell: local facet i carries
///   phi_i(x) = k_i (x - p_i),  div phi_i = n k_i,
/// with k_i = sign / (n |T|) and p_i the vertex opposite facet i, so that the
/// total flux of phi_i through f_j w.r.t. the global normal is delta_ij.
struct CellRtBasis {
  int nfacets = 0;
  std::array<double, 4> k{};
  std::array<Eigen::Vector3d, 4> p{};
  std::array<int, 4> facet_id{};
};
CellRtBasis cell_rt_basis(const RtTensorSpace& space, int t);

/// Affine representation of a tensor coefficient field on one cell:
/// row i of the tensor is  A.row(i) + c[i] * x.
struct CellAffineTensor {
  Eigen::Matrix3d A = Eigen::Matrix3d::Zero();
  Eigen::Vector3d c = Eigen::Vector3d::Zero();
};
CellAffineTensor cell_rho_affine(const RtTensorSpace& space,
                                 const Eigen::VectorXd& coeffs, int t);

/// Pointwise tensor evaluation together with its derived quantities.
struct TensorFieldEval {
  Eigen::Matrix3d value = Eigen::Matrix3d::Zero();
  double trace = 0.0;
  Eigen::Matrix3d deviator = Eigen::Matrix3d::Zero();
  // 2D: rot(row i) in rot(i, 0); 3D: curl of row i in rot.row(i).
  Eigen::Matrix3d rot = Eigen::Matrix3d::Zero();
};

/// Barycentric coordinates of x in cell t (size dim+1).
Eigen::Vector4d barycentric(const Mesh& mesh, int t, const Eigen::Vector3d& x);

struct RtBasisValue {
  int dof;
  int row;
  Eigen::Vector3d value;
};

/// All nonzero tensor-row basis values of cell t at point x.
/// Throws if x lies outside cell t (barycentric coordinate < -1e-12).
std::vector<RtBasisValue> rt_basis_eval(const RtTensorSpace& space, int t,
                                        const Eigen::Vector3d& x);

using TensorField = std::function<Eigen::Matrix3d(const Eigen::Vector3d&)>;
using VectorField = std::function<Eigen::Vector3d(const Eigen::Vector3d&)>;

/// Raviart-Thomas interpolation: facet-flux moments per row. The default
/// facet rules are 2-point Gauss (2D) and 3-point edge-midpoint (3D);
/// `high_order` switches to degree-5+ facet rules for non-polynomial fields.
Eigen::VectorXd interpolate_rt(const RtTensorSpace& space, const TensorField& f,
                               bool high_order = false);

/// L2-orthogonal projection onto cellwise constants (degree-4 cell rule).
Eigen::VectorXd project_p0(const P0VectorSpace& space, const VectorField& g);

/// || div(Pi_h f) - P_h(div f) ||_{0,Omega} for the commuting-diagram check.
double check_commuting(const RtTensorSpace& rt, const P0VectorSpace& p0,
                       const TensorField& f, const VectorField& div_f,
                       bool high_order = false);

/// Evaluates chi_h = (1/mu){rho_h - c_trace tr(rho_h) I} at x in cell t,
/// with analytic per-row rot (2D) / curl (3D).
TensorFieldEval eval_tensor_field(const RtTensorSpace& space,
                                  const Eigen::VectorXd& coeffs, int t,
                                  const Eigen::Vector3d& x, double c_trace,
                                  double mu);

} // namespace psafem
