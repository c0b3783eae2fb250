#include "psafem/selftest.hpp"

#include <cmath>
#include <ostream>
#include <sstream>

#include "psafem/adaptive.hpp"
#include "psafem/eigensolver.hpp"
#include "psafem/trace_io.hpp"

namespace psafem {

namespace {

void record(SelftestReport& rep, std::ostream* out, const std::string& group,
            const std::string& name, bool passed, double value, double tol) {
  std::ostringstream detail;
  detail << "value=" << value << " tol=" << tol;
  rep.checks.push_back({group, name, passed, detail.str()});
  if (out)
    *out << (passed ? "[ ok ] " : "[FAIL] ") << group << ": " << name << " ("
         << detail.str() << ")\n";
}

} // namespace

SelftestReport run_selftest(std::ostream* out) {
  SelftestReport rep;

  // Group 1: eigensolver against the dense reference on small meshes.
  for (const char* geom : {"unit_square", "unit_cube"}) {
    Mesh mesh = preset_mesh(geom);
    if (mesh.dim == 2) mesh = uniform_refine(mesh);
    MaterialParams mat = material(1.0, 0.3);
    RtTensorSpace rt(mesh);
    P0VectorSpace p0(mesh);
    SaddleSystem sys = assemble_system(rt, p0, mat);
    const int m = 3;
    MixedSolution sol = solve_eigs(sys, m);
    std::vector<double> ref = dense_eig_oracle(sys, m);
    double worst = 0.0;
    for (int j = 0; j < m; ++j)
      worst = std::max(worst, std::abs(sol.kappas[j] - ref[j]) / ref[j]);
    record(rep, out, "eigensolver", std::string("dense reference, ") + geom,
           worst < 1e-8, worst, 1e-8);
    double res = 0.0;
    for (double r : sol.residuals) res = std::max(res, r);
    record(rep, out, "eigensolver", std::string("pencil residual, ") + geom,
           res < 1e-9, res, 1e-9);
  }

  // Group 2: the deviatoric split agrees with the original a-form entrywise.
  {
    Mesh mesh = uniform_refine(preset_mesh("lshape2d"));
    MaterialParams mat = material(1.0, 0.4);
    RtTensorSpace rt(mesh);
    SparseMat a0 = assemble_a(rt, mat, AForm::original);
    SparseMat a1 = assemble_a(rt, mat, AForm::deviatoric);
    double diff = (Eigen::MatrixXd(a0) - Eigen::MatrixXd(a1)).cwiseAbs().maxCoeff();
    double scale = Eigen::MatrixXd(a0).cwiseAbs().maxCoeff();
    record(rep, out, "forms", "deviatoric split identity (2d)",
           diff < 1e-12 * scale, diff / scale, 1e-12);
  }

  // Group 3: commuting diagram div(Pi_h f) = P_h(div f) for a smooth field.
  for (const char* geom : {"unit_square", "unit_cube"}) {
    Mesh mesh = uniform_refine(preset_mesh(geom));
    RtTensorSpace rt(mesh);
    P0VectorSpace p0(mesh);
    const int n = mesh.dim;
    auto f = [n](const Eigen::Vector3d& x) {
      Eigen::Matrix3d m = Eigen::Matrix3d::Zero();
      for (int i = 0; i < n; ++i)
        for (int j = 0; j < n; ++j)
          m(i, j) = (i + 1) * x[j] * x[j] + x[(j + 1) % n];
      return m;
    };
    auto div_f = [n](const Eigen::Vector3d& x) {
      Eigen::Vector3d v = Eigen::Vector3d::Zero();
      for (int i = 0; i < n; ++i)
        for (int j = 0; j < n; ++j) v[i] += 2.0 * (i + 1) * x[j];
      return v;
    };
    double err = check_commuting(rt, p0, f, div_f);
    record(rep, out, "interpolation", std::string("commuting diagram, ") + geom,
           err < 1e-11, err, 1e-11);
  }

  // Group 4: Theta(P_h v) = Theta(v) for any v (projection identity).
  {
    Mesh mesh = uniform_refine(preset_mesh("lshape2d"));
    // Degree-4 polynomial: both quadrature paths integrate it exactly, so the
    // identity is tested to roundoff.
    auto v = [](const Eigen::Vector3d& x) {
      return Eigen::Vector3d(x[0] * x[0] * x[1] * x[1] + x[1], x[0] * x[0] * x[0] * x[0] - x[1] * x[1] * x[1], 0.0);
    };
    double err = theta_projection_identity(v, mesh);
    record(rep, out, "postprocess", "projection identity (2d)", err < 1e-12, err,
           1e-12);
  }

  // Group 5: estimator bookkeeping on a real eigenpair.
  {
    Mesh mesh = uniform_refine(preset_mesh("lshape2d"));
    MaterialParams mat = material(1.0, 0.3);
    RtTensorSpace rt(mesh);
    P0VectorSpace p0(mesh);
    SaddleSystem sys = assemble_system(rt, p0, mat);
    MixedSolution sol = solve_eigs(sys, 1);
    ThetaOperator theta(mesh);
    EstimatorField field =
        estimate(mesh, rt, sol.rho_coeffs[0], sol.u_coeffs[0], mat, theta, false);
    double sum = 0.0, min_term = 0.0;
    for (size_t t = 0; t < field.per_cell.size(); ++t) {
      sum += field.per_cell[t];
      min_term = std::min({min_term, field.postprocess_term[t], field.gradient_term[t],
                           field.rot_term[t], field.jump_term[t], field.boundary_term[t]});
      double parts = field.postprocess_term[t] + field.gradient_term[t] +
                     field.rot_term[t] + field.jump_term[t] + field.boundary_term[t];
      min_term = std::min(min_term, -std::abs(parts - field.per_cell[t]));
    }
    bool ok = std::abs(sum - field.global_sq) <= 1e-12 * field.global_sq &&
              min_term >= -1e-14 && field.global_sq > 0.0;
    record(rep, out, "estimator", "term bookkeeping (2d)", ok,
           std::abs(sum - field.global_sq), 1e-12 * field.global_sq);
  }

  // Group 6: trace CSV round-trips bit-exactly.
  {
    AdaptiveTrace trace;
    TraceRow r;
    r.iter = 0; r.N = 33; r.num_cells = 6; r.omega_h = 3.2687300000000001;
    r.eta_sq = 1.0 / 3.0; r.err = 1e-300; r.eff = 0.1 + 0.2; r.num_marked = 4;
    r.wall_ms = 12.5;
    trace.rows.push_back(r);
    std::string path = "/tmp/psafem_selftest_trace.csv";
    write_trace_csv(path, trace);
    AdaptiveTrace back = read_trace_csv(path);
    bool ok = back.rows.size() == 1 && back.rows[0].omega_h == r.omega_h &&
              back.rows[0].eta_sq == r.eta_sq && back.rows[0].err == r.err &&
              back.rows[0].eff == r.eff && back.rows[0].wall_ms == r.wall_ms &&
              back.rows[0].N == r.N;
    record(rep, out, "io", "trace csv round-trip", ok, ok ? 0.0 : 1.0, 0.0);
  }

  return rep;
}

} // namespace psafem
