#include "psafem/adaptive.hpp"

#include <chrono>
#include <cmath>

#include "psafem/vtk.hpp"

namespace psafem {

MarkSet mark_maximal(const EstimatorField& field, double beta) {
  if (!(beta > 0.0 && beta < 1.0)) throw std::invalid_argument("mark_maximal: beta must be in (0,1)");
  double max_eta = 0.0;
  for (double e2 : field.per_cell) max_eta = std::max(max_eta, std::sqrt(e2));
  if (max_eta <= 0.0) throw std::invalid_argument("mark_maximal: all-zero estimator field");
  MarkSet marks;
  marks.beta = beta;
  const double thresh = beta * max_eta;
  for (size_t t = 0; t < field.per_cell.size(); ++t)
    if (std::sqrt(field.per_cell[t]) >= thresh) marks.marked.push_back(static_cast<int>(t));
  return marks;
}

AdaptiveTrace run(const AdaptiveConfig& config, const IterationCallback& cb) {
  if (!(config.beta > 0.0 && config.beta < 1.0))
    throw std::invalid_argument("run: beta must be in (0,1)");
  if (config.eig_index < 1) throw std::invalid_argument("run: eig_index must be >= 1");

  MaterialParams mat = material(config.E, config.nu);
  bool limit_variant = config.variant == EstimatorVariant::limit ||
                       (config.variant == EstimatorVariant::auto_from_nu && mat.limit);
  const int m = std::max(config.num_eigs, config.eig_index);
  const int pair = config.eig_index - 1;

  Mesh mesh = preset_mesh(config.geometry);
  AdaptiveTrace trace;

  for (int iter = 0; iter < config.max_iters; ++iter) {
    auto t0 = std::chrono::steady_clock::now();

    RtTensorSpace rt(mesh);
    P0VectorSpace p0(mesh);
    SaddleSystem sys = assemble_system(rt, p0, mat);
    MixedSolution sol = solve_eigs(sys, m, config.solver);

    ThetaOperator theta(mesh);
    EstimatorField field = estimate(mesh, rt, sol.rho_coeffs[pair], sol.u_coeffs[pair],
                                    mat, theta, limit_variant);

    TraceRow row;
    row.iter = iter;
    row.N = sys.n_rt + sys.n_q;
    row.num_cells = mesh.num_cells();
    row.omega_h = sol.omegas[pair];
    row.eta_sq = field.global_sq;
    if (config.ref_omega) {
      row.err = std::abs(row.omega_h - *config.ref_omega);
      row.eff = effectivity(row.err, field);
    }

    // Refine first, then decide: the run never solves a mesh over the dof
    // budget, so the budget is a hard cap on problem size.
    bool stop = iter == config.max_iters - 1;
    Mesh next;
    if (!stop) {
      if (config.mode == RefineMode::adaptive) {
        MarkSet marks = mark_maximal(field, config.beta);
        next = refine(mesh, marks);
        row.num_marked = static_cast<long>(marks.marked.size());
      } else {
        next = uniform_refine(mesh);
        row.num_marked = mesh.num_cells();
      }
      long next_dofs = static_cast<long>(next.dim) * (next.num_facets() + next.num_cells());
      if (next_dofs > config.max_dofs) {
        stop = true;
        row.num_marked = 0;
      }
    }

    auto t1 = std::chrono::steady_clock::now();
    row.wall_ms = std::chrono::duration<double, std::milli>(t1 - t0).count();
    trace.rows.push_back(row);

    if (config.vtk_every > 0 && iter % config.vtk_every == 0 && !config.vtk_dir.empty())
      write_vtk(config.vtk_dir + "/iter_" + std::to_string(iter) + ".vtk", mesh, &field,
                &theta, &sol.u_coeffs[pair]);

    if (cb) cb({&mesh, &sol, &field, &trace.rows.back(), stop});
    if (stop) break;

    mesh = std::move(next);
  }
  return trace;
}

double fit_rate(const AdaptiveTrace& trace, double ref_omega) {
  const int len = static_cast<int>(trace.rows.size());
  if (len < 4) throw std::invalid_argument("fit_rate: need at least 4 iterations");
  const int use = std::max(4, (len + 1) / 2);
  const int begin = len - use;

  double sx = 0, sy = 0, sxx = 0, sxy = 0;
  int cnt = 0;
  for (int i = begin; i < len; ++i) {
    double err = std::abs(trace.rows[i].omega_h - ref_omega);
    if (err <= 0.0) throw std::invalid_argument("fit_rate: ref coincides with a computed omega");
    double x = std::log(static_cast<double>(trace.rows[i].N));
    double y = std::log(err);
    sx += x; sy += y; sxx += x * x; sxy += x * y;
    ++cnt;
  }
  double denom = cnt * sxx - sx * sx;
  if (std::abs(denom) < 1e-14) throw std::invalid_argument("fit_rate: degenerate abscissas");
  return (cnt * sxy - sx * sy) / denom;
}

namespace {

// For fixed alpha the model omega + C N^{-alpha} is linear in (omega, C);
// returns the SSR of the best linear fit.
double varpro_ssr(const std::vector<double>& N, const std::vector<double>& w,
                  double alpha, double* omega_out, double* c_out) {
  const int n = static_cast<int>(N.size());
  double s1 = n, sb = 0, sbb = 0, sw = 0, swb = 0;
  for (int i = 0; i < n; ++i) {
    double b = std::pow(N[i], -alpha);
    sb += b; sbb += b * b; sw += w[i]; swb += w[i] * b;
  }
  double det = s1 * sbb - sb * sb;
  if (std::abs(det) < 1e-300) return std::numeric_limits<double>::infinity();
  double omega = (sbb * sw - sb * swb) / det;
  double C = (s1 * swb - sb * sw) / det;
  if (omega_out) *omega_out = omega;
  if (c_out) *c_out = C;
  double ssr = 0;
  for (int i = 0; i < n; ++i) {
    double r = w[i] - omega - C * std::pow(N[i], -alpha);
    ssr += r * r;
  }
  return ssr;
}

} // namespace

Extrapolation extrapolate(const AdaptiveTrace& trace, int dim) {
  if (trace.rows.size() < 4) throw std::invalid_argument("extrapolate: need at least 4 levels");
  std::vector<double> N, w;
  for (const auto& r : trace.rows) {
    N.push_back(static_cast<double>(r.N));
    w.push_back(r.omega_h);
  }

  // Variable projection: coarse grid then golden-section on the N-exponent.
  double best_a = 0.5, best_ssr = std::numeric_limits<double>::infinity();
  for (double a = 0.05; a <= 3.0; a += 0.01) {
    double ssr = varpro_ssr(N, w, a, nullptr, nullptr);
    if (ssr < best_ssr) { best_ssr = ssr; best_a = a; }
  }
  double lo = std::max(0.01, best_a - 0.01), hi = std::min(3.5, best_a + 0.01);
  const double gr = (std::sqrt(5.0) - 1.0) / 2.0;
  double x1 = hi - gr * (hi - lo), x2 = lo + gr * (hi - lo);
  double f1 = varpro_ssr(N, w, x1, nullptr, nullptr);
  double f2 = varpro_ssr(N, w, x2, nullptr, nullptr);
  for (int it = 0; it < 200 && hi - lo > 1e-12; ++it) {
    if (f1 < f2) {
      hi = x2; x2 = x1; f2 = f1;
      x1 = hi - gr * (hi - lo);
      f1 = varpro_ssr(N, w, x1, nullptr, nullptr);
    } else {
      lo = x1; x1 = x2; f1 = f2;
      x2 = lo + gr * (hi - lo);
      f2 = varpro_ssr(N, w, x2, nullptr, nullptr);
    }
  }
  double a = 0.5 * (lo + hi);
  Extrapolation ex;
  ex.residual = std::sqrt(varpro_ssr(N, w, a, &ex.omega, &ex.constant));
  ex.alpha = dim * a;
  return ex;
}

} // namespace psafem
