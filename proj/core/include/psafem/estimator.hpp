#pragma once

#include "psafem/eigensolver.hpp"
#include "psafem/material.hpp"
#include "psafem/postprocess.hpp"
#include "psafem/spaces.hpp"

namespace psafem {

/// Per-cell squared indicators with the 5-way term breakdown.
struct EstimatorField {
  // Per-cell contributions, each >= 0.
  std::vector<double> postprocess_term; // ||Theta u_h - u_h||^2_{0,T}
  std::vector<double> gradient_term;    // h_T^2 ||grad u_h - chi_h||^2_{0,T}
  std::vector<double> rot_term;         // h_T^2 ||rot/curl chi_h||^2_{0,T}
  std::vector<double> jump_term;        // interior tangential jumps
  std::vector<double> boundary_term;    // boundary tangential traces
  std::vector<double> per_cell;         // eta_T^2 = sum of the five
  double global_sq = 0.0;               // eta^2
  bool limit_variant = false;

  double eta() const { return std::sqrt(global_sq); }
  double eta_t(int t) const { return std::sqrt(per_cell[t]); }
};

/// Residual indicators for one eigenpair. `variant_limit` selects
/// c = 1/n instead of c = (lambda+mu)/(n lambda+(n+1) mu).
EstimatorField estimate(const Mesh& mesh, const RtTensorSpace& rt,
                        const Eigen::VectorXd& rho, const Eigen::VectorXd& u,
                        const MaterialParams& mat, const ThetaOperator& theta,
                        bool variant_limit);

/// eff(omega) = err(omega) / eta^2; throws when eta == 0.
double effectivity(double err_omega, const EstimatorField& field);

} // namespace psafem
