#pragma once

#include <Eigen/Sparse>

#include "psafem/material.hpp"
#include "psafem/spaces.hpp"

namespace psafem {

using SparseMat = Eigen::SparseMatrix<double>;

enum class AForm { original, deviatoric, limit };

/// Global matrix of the a-form on the RT tensor space.
///   original:   (1/mu) int xi:tau - (lam+mu)/(mu(n lam+(n+1)mu)) int tr xi tr tau
///   deviatoric: (1/mu) int xi^d:tau^d + 1/(n(n lam+(n+1)mu)) int tr xi tr tau
///   limit:      (1/mu) int xi:tau - 1/(n mu) int tr xi tr tau
/// The original form is undefined for limit materials.
SparseMat assemble_a(const RtTensorSpace& space, const MaterialParams& mat, AForm form);

/// b(tau, v) = int v . rowwise-div(tau); rows indexed by P0 dofs.
SparseMat assemble_b(const RtTensorSpace& rt, const P0VectorSpace& p0);

/// Diagonal mass matrix entries on the P0 vector space (|T| per component).
Eigen::VectorXd assemble_mass(const P0VectorSpace& p0);

/// Mean-trace constraint vector: c_j = int_Omega tr(phi_j).
Eigen::VectorXd assemble_trace_constraint(const RtTensorSpace& rt);

/// Assembled saddle system for the discrete eigenproblem.
struct SaddleSystem {
  SparseMat A;
  SparseMat B;
  Eigen::VectorXd M; // diagonal
  Eigen::VectorXd c;
  int n_rt = 0;
  int n_q = 0;
  // True when A is the limit form, whose restriction to the unbordered saddle
  // block is singular; `kernel` then holds the RT coefficients of the
  // identity tensor spanning that kernel.
  bool limit = false;
  Eigen::VectorXd kernel;
};

SaddleSystem assemble_system(const RtTensorSpace& rt, const P0VectorSpace& p0,
                             const MaterialParams& mat);

/// Matrix dump in MatrixMarket coordinate format.
void write_matrix_market(const SparseMat& m, const std::string& path);

} // namespace psafem
