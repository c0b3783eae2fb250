// Acceptance suite. Each numbered check prints exactly one PASS/FAIL line;
// the exit code is the number of failed checks. argv[1] must be the path to
// the elastic_afem binary (used by the determinism check).

#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <map>
#include <sstream>
#include <string>
#include <vector>

#include "estimator_oracle.hpp"
#include "psafem/adaptive.hpp"
#include "psafem/quadrature.hpp"
#include "psafem/trace_io.hpp"

using namespace psafem;
namespace fs = std::filesystem;

namespace {

int g_failures = 0;

void report(int index, const char* name, bool pass, const std::string& detail) {
  std::printf("[%s] %d %s — %s\n", pass ? "PASS" : "FAIL", index, name, detail.c_str());
  std::fflush(stdout);
  if (!pass) ++g_failures;
}

// ---------------------------------------------------------------- check 1

bool check_form_identity(std::string& detail) {
  std::vector<Mesh> meshes;
  meshes.push_back(preset_mesh("unit_square"));
  meshes.push_back(uniform_refine(preset_mesh("lshape2d")));
  double worst = 0.0;
  for (const Mesh& m : meshes) {
    RtTensorSpace rt(m);
    for (double nu : {0.2, 0.35, 0.49, 0.4999}) {
      MaterialParams mat = material(1.0, nu);
      Eigen::MatrixXd Ao = Eigen::MatrixXd(assemble_a(rt, mat, AForm::original));
      Eigen::MatrixXd Ad = Eigen::MatrixXd(assemble_a(rt, mat, AForm::deviatoric));
      worst = std::max(worst,
                       (Ao - Ad).cwiseAbs().maxCoeff() / Ao.cwiseAbs().maxCoeff());
    }
  }
  char buf[128];
  std::snprintf(buf, sizeof(buf), "max relative entry difference %.2e (tol 1e-12)", worst);
  detail = buf;
  return worst <= 1e-12;
}

// ---------------------------------------------------------------- check 2

double l2_norm_vector_field(const Mesh& m, const VectorField& g) {
  double acc = 0.0;
  for (int t = 0; t < m.num_cells(); ++t) {
    QuadRule q = cell_rule_high(m, t);
    for (size_t k = 0; k < q.points.size(); ++k)
      acc += q.weights[k] * g(q.points[k]).head(m.dim).squaredNorm();
  }
  return std::sqrt(acc);
}

bool check_commuting_diagram(std::string& detail) {
  std::vector<Mesh> meshes;
  meshes.push_back(uniform_refine(preset_mesh("unit_square")));
  meshes.push_back(preset_mesh("lshape2d"));
  meshes.push_back(preset_mesh("unit_cube"));

  double worst = 0.0;
  for (const Mesh& m : meshes) {
    RtTensorSpace rt(m);
    P0VectorSpace p0(m);
    const int n = m.dim;

    struct Field {
      TensorField f;
      VectorField divf;
    };
    std::vector<Field> fields;

    // 1. rowwise a + c x (exactly representable)
    fields.push_back({[n](const Eigen::Vector3d& x) {
                        Eigen::Matrix3d v;
                        v << 0.3, 1, -1, 2, 0.1, 0.5, -0.7, 0.9, 1.2;
                        Eigen::Vector3d c(1.1, -0.8, 0.6);
                        for (int r = 0; r < 3; ++r) v.row(r) += c[r] * x.transpose();
                        return v;
                      },
                      [n](const Eigen::Vector3d&) {
                        return Eigen::Vector3d(n * 1.1, n * -0.8, n * 0.6);
                      }});
    // 2. general linear tensor: entry (i,j) = G[i][j] . x
    fields.push_back({[](const Eigen::Vector3d& x) {
                        Eigen::Matrix3d v;
                        v(0, 0) = 2 * x[0] - x[1];
                        v(0, 1) = x[0] + 3 * x[1] + x[2];
                        v(0, 2) = x[1] - x[2];
                        v(1, 0) = -x[0] + x[2];
                        v(1, 1) = x[1];
                        v(1, 2) = 4 * x[0] + 2 * x[2];
                        v(2, 0) = x[0] + x[1];
                        v(2, 1) = -2 * x[1] + x[2];
                        v(2, 2) = 3 * x[0] - x[2];
                        return v;
                      },
                      [n](const Eigen::Vector3d&) {
                        // row sums of the diagonal gradients above
                        return Eigen::Vector3d(2 + 3 + (n == 3 ? -1 : 0),
                                               -1 + 1 + (n == 3 ? 2 : 0),
                                               1 - 2 - 1);
                      }});
    // 3. quadratic: entry (i,j) = (i+1) x_j^2 + x_{(j+1) mod n}
    fields.push_back({[n](const Eigen::Vector3d& x) {
                        Eigen::Matrix3d v = Eigen::Matrix3d::Zero();
                        for (int i = 0; i < n; ++i)
                          for (int j = 0; j < n; ++j)
                            v(i, j) = (i + 1) * x[j] * x[j] + x[(j + 1) % n];
                        return v;
                      },
                      [n](const Eigen::Vector3d& x) {
                        Eigen::Vector3d d = Eigen::Vector3d::Zero();
                        for (int i = 0; i < n; ++i)
                          for (int j = 0; j < n; ++j) d[i] += 2.0 * (i + 1) * x[j];
                        return d;
                      }});
    // 4. entry (i,j) = x_i x_j, div_i = (n+1) x_i
    fields.push_back({[n](const Eigen::Vector3d& x) {
                        Eigen::Matrix3d v = Eigen::Matrix3d::Zero();
                        for (int i = 0; i < n; ++i)
                          for (int j = 0; j < n; ++j) v(i, j) = x[i] * x[j];
                        return v;
                      },
                      [n](const Eigen::Vector3d& x) {
                        Eigen::Vector3d d = Eigen::Vector3d::Zero();
                        d.head(n) = (n + 1.0) * x.head(n);
                        return d;
                      }});
    // 5. entry (i,j) = x_j x_{(j+1) mod n} + (i+1) x_j
    fields.push_back({[n](const Eigen::Vector3d& x) {
                        Eigen::Matrix3d v = Eigen::Matrix3d::Zero();
                        for (int i = 0; i < n; ++i)
                          for (int j = 0; j < n; ++j)
                            v(i, j) = x[j] * x[(j + 1) % n] + (i + 1) * x[j];
                        return v;
                      },
                      [n](const Eigen::Vector3d& x) {
                        double s = 0.0;
                        for (int k = 0; k < n; ++k) s += x[k];
                        Eigen::Vector3d d = Eigen::Vector3d::Zero();
                        for (int i = 0; i < n; ++i) d[i] = s + (i + 1) * n;
                        return d;
                      }});

    for (const Field& fd : fields) {
      double err = check_commuting(rt, p0, fd.f, fd.divf);
      double ref = l2_norm_vector_field(m, fd.divf);
      worst = std::max(worst, err / ref);
    }
  }
  char buf[128];
  std::snprintf(buf, sizeof(buf),
                "max ||div interp - proj div|| / ||div f|| = %.2e (tol 1e-10)", worst);
  detail = buf;
  return worst <= 1e-10;
}

// ---------------------------------------------------------------- check 3

bool check_dense_oracle(std::string& detail) {
  std::vector<Mesh> meshes;
  meshes.push_back(uniform_refine(uniform_refine(preset_mesh("unit_square")))); // 32 cells
  meshes.push_back(uniform_refine(preset_mesh("lshape2d")));                    // 24 cells
  meshes.push_back(preset_mesh("unit_cube"));                                   // 6 cells
  double worst = 0.0;
  for (const Mesh& m : meshes) {
    RtTensorSpace rt(m);
    P0VectorSpace p0(m);
    for (double nu : {0.35, 0.5}) {
      SaddleSystem sys = assemble_system(rt, p0, material(1.0, nu));
      const int k = std::min<int>(5, sys.n_q - 1);
      MixedSolution sol = solve_eigs(sys, k);
      std::vector<double> oracle = dense_eig_oracle(sys, k);
      for (int j = 0; j < k; ++j)
        worst = std::max(worst, std::abs(sol.kappas[j] - oracle[j]) / oracle[j]);
    }
  }
  char buf[128];
  std::snprintf(buf, sizeof(buf), "max relative kappa deviation %.2e (tol 1e-9)", worst);
  detail = buf;
  return worst <= 1e-9;
}

// ------------------------------------------------- shared 2D/3D run plumbing

struct RunResult {
  AdaptiveTrace trace;
  // Per completed (non-final) iteration: fraction of marked cells near the
  // singular set and fraction of all cells near it.
  std::vector<double> marked_near, cells_near;
};

RunResult run_with_tracking(const AdaptiveConfig& cfg_in, bool near_edge_3d) {
  AdaptiveConfig cfg = cfg_in;
  RunResult out;
  auto near = [&](const Eigen::Vector3d& c) {
    if (near_edge_3d) return std::hypot(c[0], c[2]) < 0.25; // dist to {x=0,z=0}
    return c.norm() < 0.25;                                 // dist to the corner
  };
  out.trace = run(cfg, [&](const IterationState& st) {
    if (st.last || cfg.mode != RefineMode::adaptive) return;
    MarkSet marks = mark_maximal(*st.field, cfg.beta);
    int marked_in = 0;
    double vol_in = 0.0, vol = 0.0;
    for (int t : marks.marked)
      if (near(st.mesh->cell_centroid(t))) ++marked_in;
    for (int t = 0; t < st.mesh->num_cells(); ++t) {
      double v = st.mesh->cell_volume(t);
      vol += v;
      if (near(st.mesh->cell_centroid(t))) vol_in += v;
    }
    out.marked_near.push_back(static_cast<double>(marked_in) / marks.marked.size());
    // Volume share of the neighborhood: the uniform-proportion baseline.
    out.cells_near.push_back(vol_in / vol);
  });
  return out;
}

AdaptiveConfig make_2d(double nu, RefineMode mode, double ref, double beta = 0.5) {
  AdaptiveConfig cfg;
  cfg.geometry = "lshape2d";
  cfg.nu = nu;
  cfg.mode = mode;
  cfg.beta = beta;
  cfg.max_dofs = 200000;
  cfg.ref_omega = ref;
  return cfg;
}

double eta_sq_log_slope(const AdaptiveTrace& tr) {
  const int len = static_cast<int>(tr.rows.size());
  const int use = std::max(4, (len + 1) / 2);
  const int begin = std::max(0, len - use);
  double sx = 0, sy = 0, sxx = 0, sxy = 0;
  int cnt = 0;
  for (int i = begin; i < len; ++i) {
    double x = std::log(static_cast<double>(tr.rows[i].N));
    double y = std::log(tr.rows[i].eta_sq);
    sx += x; sy += y; sxx += x * x; sxy += x * y;
    ++cnt;
  }
  return (cnt * sxy - sx * sy) / (cnt * sxx - sx * sx);
}

// ---------------------------------------------------------------- check 9

Eigen::VectorXd hand_coefficients(int size) {
  // Fixed, reproducible, non-symmetric pattern.
  Eigen::VectorXd v(size);
  for (int i = 0; i < size; ++i)
    v[i] = 0.25 * ((i * 7) % 11) - 0.6 * ((i * 3) % 5) + 1.0;
  return v;
}

bool check_estimator_oracle(std::string& detail) {
  std::vector<Mesh> meshes;
  {
    Mesh one;
    one.dim = 2;
    one.coords = {0, 0, 1.2, 0.1, 0.3, 0.9};
    one.cells = {0, 1, 2};
    one.generation = {0};
    one.build_topology();
    meshes.push_back(one);
  }
  meshes.push_back(preset_mesh("unit_square"));
  {
    Mesh tet;
    tet.dim = 3;
    tet.coords = {0, 0, 0, 1, 0, 0, 0, 1, 0, 0, 0, 1};
    tet.cells = {0, 1, 2, 3};
    tet.generation = {0};
    tet.build_topology();
    meshes.push_back(tet);
  }
  {
    Mesh two;
    two.dim = 3;
    two.coords = {0, 0, 0, 1, 0, 0, 0, 1, 0, 0.2, 0.3, 1, 0.3, 0.1, -1};
    two.cells = {0, 1, 2, 3, 0, 1, 2, 4};
    two.generation = {0, 0};
    two.build_topology();
    meshes.push_back(two);
  }

  double worst = 0.0;
  for (const Mesh& m : meshes) {
    RtTensorSpace rt(m);
    ThetaOperator theta(m);
    for (double nu : {0.35, 0.5}) {
      MaterialParams mat = material(1.0, nu);
      bool lim = mat.limit;
      double ct = lim ? 1.0 / m.dim : mat.c_trace(m.dim);
      Eigen::VectorXd rho = hand_coefficients(rt.num_dofs());
      Eigen::VectorXd u = hand_coefficients(m.dim * m.num_cells());
      EstimatorField f = estimate(m, rt, rho, u, mat, theta, lim);
      for (int t = 0; t < m.num_cells(); ++t) {
        oracle::Terms o = oracle::cell_terms(m, rt, rho, u, ct, mat.mu, t);
        double scale = std::max(1.0, o.total());
        worst = std::max(worst, std::abs(f.postprocess_term[t] - o.postprocess) / scale);
        worst = std::max(worst, std::abs(f.gradient_term[t] - o.gradient) / scale);
        worst = std::max(worst, std::abs(f.rot_term[t] - o.rot) / scale);
        worst = std::max(worst, std::abs(f.jump_term[t] - o.jump) / scale);
        worst = std::max(worst, std::abs(f.boundary_term[t] - o.boundary) / scale);
      }
    }
  }
  char buf[128];
  std::snprintf(buf, sizeof(buf), "max term deviation %.2e (tol 1e-10)", worst);
  detail = buf;
  return worst <= 1e-10;
}

// ---------------------------------------------------------------- check 10

std::string slurp(const std::string& path) {
  std::ifstream in(path);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

// trace.csv contents with the wall-clock column removed (timing is the one
// column that legitimately differs between repeated runs).
std::string strip_wall_ms(const std::string& csv) {
  std::istringstream in(csv);
  std::ostringstream out;
  std::string line;
  while (std::getline(in, line)) {
    size_t pos = line.rfind(',');
    out << (pos == std::string::npos ? line : line.substr(0, pos)) << "\n";
  }
  return out.str();
}

bool check_determinism(const std::string& exe, std::string& detail) {
  const std::string base = "/tmp/psafem_accept_det";
  fs::remove_all(base + "_a");
  fs::remove_all(base + "_b");
  for (const char* suffix : {"_a", "_b"}) {
    std::string cmd = "'" + exe + "' paper --skip-3d --max-dofs 20000 --out '" + base +
                      suffix + "' > '" + base + suffix + ".log' 2>&1";
    if (std::system(cmd.c_str()) != 0) {
      detail = std::string("paper run into ") + base + suffix + " exited nonzero";
      return false;
    }
  }
  for (const char* file : {"/table2.csv", "/slopes.csv"}) {
    if (slurp(base + "_a" + file) != slurp(base + "_b" + file)) {
      detail = std::string(file + 1) + " differs between repeated runs";
      return false;
    }
    if (slurp(base + "_a" + file).empty()) {
      detail = std::string(file + 1) + " missing or empty";
      return false;
    }
  }
  int compared = 0;
  for (const auto& entry : fs::directory_iterator(base + "_a")) {
    if (!entry.is_directory()) continue;
    std::string name = entry.path().filename().string();
    std::string a = slurp(entry.path().string() + "/trace.csv");
    std::string b = slurp(base + "_b/" + name + "/trace.csv");
    if (a.empty() || strip_wall_ms(a) != strip_wall_ms(b)) {
      detail = "trace.csv for " + name + " differs between repeated runs";
      return false;
    }
    ++compared;
  }
  if (compared != 6) {
    detail = "expected 6 case directories, found " + std::to_string(compared);
    return false;
  }
  detail = "table2/slopes byte-identical, 6 traces identical (timing column aside)";
  return true;
}

} // namespace

int main(int argc, char** argv) {
  if (argc < 2) {
    std::fprintf(stderr, "usage: acceptance <path-to-elastic_afem>\n");
    return 64;
  }
  const std::string exe = argv[1];
  std::string detail;

  report(1, "a-form identity (original vs deviatoric)", check_form_identity(detail), detail);
  report(2, "commuting diagram on polynomial tensors", check_commuting_diagram(detail),
         detail);
  report(3, "sparse eigensolver vs dense pencil oracle", check_dense_oracle(detail), detail);

  // Shared 2D production runs (also exercised for beta 0.4/0.6 robustness).
  struct Case {
    const char* tag;
    double nu, ref, beta;
    RefineMode mode;
    RunResult res;
  };
  std::vector<Case> cases = {
      {"adaptive nu=0.35", 0.35, 2.37877, 0.5, RefineMode::adaptive, {}},
      {"adaptive nu=0.35 beta=0.4", 0.35, 2.37877, 0.4, RefineMode::adaptive, {}},
      {"adaptive nu=0.35 beta=0.6", 0.35, 2.37877, 0.6, RefineMode::adaptive, {}},
      {"adaptive nu=0.49", 0.49, 3.26873, 0.5, RefineMode::adaptive, {}},
      {"adaptive nu=0.5", 0.5, 3.27271, 0.5, RefineMode::adaptive, {}},
      {"adaptive nu=0.4999", 0.4999, 3.27271, 0.5, RefineMode::adaptive, {}},
      {"uniform nu=0.35", 0.35, 2.37877, 0.5, RefineMode::uniform, {}},
      {"uniform nu=0.49", 0.49, 3.26873, 0.5, RefineMode::uniform, {}},
      {"uniform nu=0.5", 0.5, 3.27271, 0.5, RefineMode::uniform, {}},
  };
  for (Case& c : cases) {
    c.res = run_with_tracking(make_2d(c.nu, c.mode, c.ref, c.beta), false);
    std::printf("  .. %s: %zu iterations, final N=%ld omega=%.6f\n", c.tag,
                c.res.trace.rows.size(), c.res.trace.rows.back().N,
                c.res.trace.rows.back().omega_h);
    std::fflush(stdout);
  }
  auto find_case = [&](const std::string& tag) -> Case& {
    for (Case& c : cases)
      if (tag == c.tag) return c;
    std::abort();
  };

  // 4. Table values from the adaptive runs (including the beta variants).
  {
    bool pass = true;
    std::ostringstream d;
    for (const char* tag : {"adaptive nu=0.35", "adaptive nu=0.35 beta=0.4",
                            "adaptive nu=0.35 beta=0.6", "adaptive nu=0.49",
                            "adaptive nu=0.5"}) {
      Case& c = find_case(tag);
      double diff = std::abs(c.res.trace.rows.back().omega_h - c.ref);
      pass = pass && diff <= 1e-2;
      d << tag << " diff " << diff << "; ";
    }
    report(4, "2D reference eigenfrequencies at 2e5 dofs (tol 1e-2)", pass, d.str());
  }

  // 5. Convergence slopes.
  {
    bool pass = true;
    std::ostringstream d;
    for (const char* tag : {"adaptive nu=0.35", "adaptive nu=0.49", "adaptive nu=0.5"}) {
      Case& c = find_case(tag);
      double es = fit_rate(c.res.trace, c.ref);
      double hs = eta_sq_log_slope(c.res.trace);
      pass = pass && es >= -1.15 && es <= -0.85 && hs >= -1.15 && hs <= -0.85;
      d << tag << " err " << es << " eta2 " << hs << "; ";
    }
    for (const char* tag : {"uniform nu=0.35", "uniform nu=0.49", "uniform nu=0.5"}) {
      Case& c = find_case(tag);
      double es = fit_rate(c.res.trace, c.ref);
      pass = pass && es >= -0.70 && es <= -0.47;
      d << tag << " err " << es << "; ";
    }
    report(5, "error and estimator slopes (adaptive in [-1.15,-0.85], uniform in [-0.70,-0.47])",
           pass, d.str());
  }

  // 6. Effectivity corridor over the last 6 adaptive iterations.
  {
    bool pass = true;
    std::ostringstream d;
    for (const char* tag : {"adaptive nu=0.35", "adaptive nu=0.49", "adaptive nu=0.5"}) {
      Case& c = find_case(tag);
      const auto& rows = c.res.trace.rows;
      double lo = std::numeric_limits<double>::infinity(), hi = 0.0;
      for (size_t i = rows.size() >= 6 ? rows.size() - 6 : 0; i < rows.size(); ++i) {
        lo = std::min(lo, rows[i].eff);
        hi = std::max(hi, rows[i].eff);
      }
      pass = pass && lo > 0.0 && hi / lo <= 20.0;
      d << tag << " corridor " << hi / lo << "; ";
    }
    report(6, "effectivity corridor factor <= 20 (last 6 iterations)", pass, d.str());
  }

  // 7. Robustness across the incompressible limit.
  {
    Case& a = find_case("adaptive nu=0.4999");
    Case& b = find_case("adaptive nu=0.5");
    double wa = a.res.trace.rows.back().omega_h;
    double wb = b.res.trace.rows.back().omega_h;
    double na = static_cast<double>(a.res.trace.rows.back().N);
    double nb = static_cast<double>(b.res.trace.rows.back().N);
    double eta_ratio = 0.0;
    size_t len = std::min(a.res.trace.rows.size(), b.res.trace.rows.size());
    for (size_t i = 0; i < len; ++i) {
      double ra = std::sqrt(a.res.trace.rows[i].eta_sq);
      double rb = std::sqrt(b.res.trace.rows[i].eta_sq);
      eta_ratio = std::max(eta_ratio, std::max(ra / rb, rb / ra));
    }
    bool pass = std::abs(wa - wb) <= 1e-2 && std::max(na / nb, nb / na) <= 2.0 &&
                eta_ratio <= 1.5;
    char buf[160];
    std::snprintf(buf, sizeof(buf),
                  "|omega(0.4999) - omega(0.5)| = %.2e, N ratio %.2f, max eta ratio %.3f",
                  std::abs(wa - wb), std::max(na / nb, nb / na), eta_ratio);
    report(7, "lambda-robustness near the incompressible limit", pass, buf);
  }

  // 8. 3D structural run.
  {
    AdaptiveConfig cfg;
    cfg.geometry = "lshape3d";
    cfg.nu = 0.35;
    cfg.max_dofs = 300000;
    cfg.ref_omega = 3.01757;
    RunResult r = run_with_tracking(cfg, true);
    const auto& rows = r.trace.rows;
    double final_err = rows.back().err;
    // Monotone approach over the trailing fit window (the coarse pre-asymptotic
    // levels oscillate by design of the problem, not of the code).
    size_t tail = std::max<size_t>(4, (rows.size() + 1) / 2);
    size_t begin = rows.size() - tail;
    // "Monotone toward the reference" read at the scale of the mesh: whenever
    // the dof count at least doubles within the window, |omega_h - ref| must
    // drop. Consecutive near-identical meshes jitter omega at the 1e-5 level,
    // so per-step comparisons would measure noise, not convergence.
    bool monotone = rows.back().err < rows[begin].err;
    for (size_t i = begin; i < rows.size(); ++i)
      for (size_t j = i + 1; j < rows.size(); ++j)
        if (rows[j].N >= 2 * rows[i].N)
          monotone = monotone && rows[j].err <= rows[i].err;
    bool concentrated = r.marked_near.size() > 5;
    for (size_t i = 5; i < r.marked_near.size(); ++i)
      concentrated = concentrated && r.marked_near[i] > r.cells_near[i];
    bool pass = monotone && final_err < 5e-2 && concentrated;
    char buf[200];
    std::snprintf(buf, sizeof(buf),
                  "final N=%ld err=%.2e, last-%zu errors monotone=%d, "
                  "marking concentrated near the singular edge from iter 5=%d",
                  rows.back().N, final_err, tail, monotone ? 1 : 0,
                  concentrated ? 1 : 0);
    report(8, "3D L-shape structural run (3e5 dofs)", pass, buf);
  }

  report(9, "estimator terms vs independent quadrature oracle",
         check_estimator_oracle(detail), detail);
  report(10, "repeated paper runs are deterministic", check_determinism(exe, detail),
         detail);

  std::printf("acceptance: %d of 10 failed\n", g_failures);
  return g_failures;
}
