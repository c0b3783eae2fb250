#pragma once

#include <cstdint>

#include "psafem/assembly.hpp"

namespace psafem {

struct SolverOptions {
  double tol = 1e-10;     // relative pencil residual
  int max_iters = 50;     // Arnoldi restarts
  int extra_block = 10;   // Krylov dimension = 4m + extra_block
  std::uint64_t seed = 20240915;
};

/// Eigenpairs of the saddle pencil, kappa ascending, ||u||_M = 1, sign fixed
/// so the largest-|entry| u component is positive.
struct MixedSolution {
  std::vector<double> kappas;
  std::vector<double> omegas; // sqrt(kappa)
  std::vector<Eigen::VectorXd> rho_coeffs;
  std::vector<Eigen::VectorXd> u_coeffs;
  std::vector<double> multipliers;
  std::vector<double> residuals; // relative pencil residuals
};

/// Sparse path: factor K = [[A,B^T,c],[B,0,0],[c^T,0,0]] once, run restarted
/// Arnoldi on x -> K^{-1} M_pencil x (M_pencil = -M on the u-block).
MixedSolution solve_eigs(const SaddleSystem& sys, int m, const SolverOptions& opts = {});

/// Dense QZ solve of the same pencil; independent oracle for small systems.
std::vector<double> dense_eig_oracle(const SaddleSystem& sys, int m);

/// min_{i != j} |kappa_i - kappa_j|.
double spectral_gap(const MixedSolution& sol, int j);

} // namespace psafem
