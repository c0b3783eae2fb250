#pragma once

#include "psafem/assembly.hpp"
#include "psafem/spaces.hpp"

namespace psafem {

/// Patch-averaging operator from cellwise-constant to continuous
/// piecewise-linear displacements:
///   (Theta v)(z) = sum_{T in omega_z} int_T v / |omega_z|.
/// Assembled once per mesh as a sparse P0 -> P1 matrix.
class ThetaOperator {
public:
  explicit ThetaOperator(const Mesh& mesh);

  const Mesh& mesh() const { return *mesh_; }
  const SparseMat& matrix() const { return theta_; }

  /// P1 coefficients of Theta applied to a P0 field.
  Eigen::VectorXd apply(const Eigen::VectorXd& p0_field) const;

  /// || Theta u - u ||^2_{0,T} with u the P0 input and Theta u from p1 coeffs.
  double local_residual_sq(const Eigen::VectorXd& p1, const Eigen::VectorXd& p0,
                           int t) const;

  /// || Theta u - u ||_{0,Omega}.
  double global_residual(const Eigen::VectorXd& p0_field) const;

private:
  const Mesh* mesh_;
  SparseMat theta_;
};

/// || Theta(P_h v) - Theta(v) ||_{0,Omega}, where Theta(v) uses exact cell
/// integrals of the callback (high-order quadrature).
double theta_projection_identity(const VectorField& v, const Mesh& mesh);

} // namespace psafem
