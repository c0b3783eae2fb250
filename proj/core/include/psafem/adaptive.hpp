#pragma once

#include <optional>
#include <string>

#include "psafem/estimator.hpp"

namespace psafem {

enum class EstimatorVariant { standard, limit, auto_from_nu };
enum class RefineMode { adaptive, uniform };

struct AdaptiveConfig {
  std::string geometry = "lshape2d";
  double nu = 0.35;
  double E = 1.0;
  int eig_index = 1;  // 1-based
  int num_eigs = 3;   // eigenpairs solved per level (>= eig_index)
  double beta = 0.5;
  long max_dofs = 200000;
  int max_iters = 200;
  EstimatorVariant variant = EstimatorVariant::auto_from_nu;
  RefineMode mode = RefineMode::adaptive;
  std::optional<double> ref_omega; // for err/eff columns
  SolverOptions solver;
  // Optional VTK snapshots: every k iterations into vtk_dir (empty = off).
  int vtk_every = 0;
  std::string vtk_dir;
};

struct TraceRow {
  int iter = 0;
  long N = 0; // dim(H x Q)
  long num_cells = 0;
  double omega_h = 0.0;
  double eta_sq = 0.0;
  double err = std::numeric_limits<double>::quiet_NaN();
  double eff = std::numeric_limits<double>::quiet_NaN();
  long num_marked = 0;
  double wall_ms = 0.0;
};

struct AdaptiveTrace {
  std::vector<TraceRow> rows;
  // Fitted quantities (populated by fit/extrapolate helpers).
  double extrapolated_omega = std::numeric_limits<double>::quiet_NaN();
  double fit_constant = std::numeric_limits<double>::quiet_NaN();
  double fit_exponent = std::numeric_limits<double>::quiet_NaN();
  double slope = std::numeric_limits<double>::quiet_NaN();
};

/// Maximal marking: cells with eta_T >= beta * max eta_T.
MarkSet mark_maximal(const EstimatorField& field, double beta);

/// The solve -> estimate -> mark -> refine loop. The dof budget is a hard
/// cap: the run stops once the next refinement would push N past max_dofs,
/// so every recorded row satisfies N <= max_dofs. The callback (if set)
/// observes every completed iteration.
struct IterationState {
  const Mesh* mesh;
  const MixedSolution* solution;
  const EstimatorField* field;
  const TraceRow* row;
  bool last = false; // no further refinement follows
};
using IterationCallback = std::function<void(const IterationState&)>;

AdaptiveTrace run(const AdaptiveConfig& config, const IterationCallback& cb = {});

/// Least-squares slope of log|omega_h - ref| vs log N over the last
/// max(4, ceil(len/2)) rows.
double fit_rate(const AdaptiveTrace& trace, double ref_omega);

struct Extrapolation {
  double omega = 0.0;
  double constant = 0.0;
  double alpha = 0.0; // h-exponent (= n * fitted N-exponent)
  double residual = 0.0;
};

/// Fits omega_h = omega + C N^{-alpha_tilde} on a uniform-refinement trace
/// and reports alpha = n * alpha_tilde (h ~ N^{-1/n}).
Extrapolation extrapolate(const AdaptiveTrace& trace, int dim);

} // namespace psafem
