#include "psafem/estimator.hpp"

#include <cmath>

#include "psafem/quadrature.hpp"

namespace psafem {

namespace {

// General affine tensor field chi(x) = C0 + sum_d x_d Cd[d] on one cell.
struct AffineTensor {
  Eigen::Matrix3d C0 = Eigen::Matrix3d::Zero();
  std::array<Eigen::Matrix3d, 3> Cd{Eigen::Matrix3d::Zero(), Eigen::Matrix3d::Zero(),
                                    Eigen::Matrix3d::Zero()};
  Eigen::Matrix3d eval(const Eigen::Vector3d& x, int dim) const {
    Eigen::Matrix3d v = C0;
    for (int d = 0; d < dim; ++d) v += x[d] * Cd[d];
    return v;
  }
};

// chi = (1/mu){rho - c_trace tr(rho) I} from the cell's affine rho rows.
AffineTensor chi_affine(const CellAffineTensor& rho, int n, double c_trace, double mu) {
  double tr0 = 0.0;
  for (int i = 0; i < n; ++i) tr0 += rho.A(i, i);
  AffineTensor chi;
  for (int i = 0; i < n; ++i) {
    for (int j = 0; j < n; ++j)
      chi.C0(i, j) = (rho.A(i, j) - c_trace * tr0 * (i == j ? 1.0 : 0.0)) / mu;
    for (int d = 0; d < n; ++d)
      for (int j = 0; j < n; ++j)
        chi.Cd[d](i, j) = (rho.c[i] * (j == d ? 1.0 : 0.0) -
                           c_trace * rho.c[d] * (i == j ? 1.0 : 0.0)) / mu;
  }
  return chi;
}

// Squared tangential trace of a tensor value on a facet with unit normal nrm.
double tangential_sq(const Eigen::Matrix3d& val, const Eigen::Vector3d& nrm, int dim) {
  double s = 0.0;
  if (dim == 2) {
    Eigen::Vector3d tang(nrm[1], -nrm[0], 0.0);
    for (int i = 0; i < 2; ++i) {
      double c = val.row(i).head(2).dot(tang.head(2));
      s += c * c;
    }
  } else {
    for (int i = 0; i < 3; ++i) {
      Eigen::Vector3d row = val.row(i);
      s += row.cross(nrm).squaredNorm();
    }
  }
  return s;
}

} // namespace

EstimatorField estimate(const Mesh& mesh, const RtTensorSpace& rt,
                        const Eigen::VectorXd& rho, const Eigen::VectorXd& u,
                        const MaterialParams& mat, const ThetaOperator& theta,
                        bool variant_limit) {
  if (rho.size() != rt.num_dofs() || u.size() != mesh.dim * mesh.num_cells())
    throw std::invalid_argument("estimate: eigenpair/mesh mismatch");

  const int n = mesh.dim;
  const int nc = mesh.num_cells();
  const double mu = mat.mu;
  const double ct = variant_limit ? 1.0 / n : mat.c_trace(n);

  EstimatorField out;
  out.limit_variant = variant_limit;
  out.postprocess_term.assign(nc, 0.0);
  out.gradient_term.assign(nc, 0.0);
  out.rot_term.assign(nc, 0.0);
  out.jump_term.assign(nc, 0.0);
  out.boundary_term.assign(nc, 0.0);
  out.per_cell.assign(nc, 0.0);

  Eigen::VectorXd theta_u = theta.apply(u);

  std::vector<AffineTensor> chi(nc);
  for (int t = 0; t < nc; ++t)
    chi[t] = chi_affine(cell_rho_affine(rt, rho, t), n, ct, mu);

  for (int t = 0; t < nc; ++t) {
    const double hT = mesh.cell_diameter(t);

    out.postprocess_term[t] = theta.local_residual_sq(theta_u, u, t);

    // grad u_h is cellwise constant and identically zero for k = 0; the
    // subtraction is kept so the formula reads as written.
    Eigen::Matrix3d grad_u = Eigen::Matrix3d::Zero();
    QuadRule q = cell_rule(mesh, t);
    double acc = 0.0;
    for (size_t k = 0; k < q.points.size(); ++k) {
      Eigen::Matrix3d diff = grad_u - chi[t].eval(q.points[k], n);
      double s = 0.0;
      for (int i = 0; i < n; ++i) s += diff.row(i).head(n).squaredNorm();
      acc += q.weights[k] * s;
    }
    out.gradient_term[t] = hT * hT * acc;

    TensorFieldEval ev = eval_tensor_field(rt, rho, t, mesh.cell_centroid(t), ct, mu);
    double rot_sq = n == 2 ? ev.rot.col(0).head(2).squaredNorm() : ev.rot.squaredNorm();
    out.rot_term[t] = hT * hT * rot_sq * mesh.cell_volume(t);
  }

  // Facet terms: evaluated once per facet; interior contributions are added
  // to both incident cells, matching the per-T facet sums.
  for (int f = 0; f < mesh.num_facets(); ++f) {
    const double he = mesh.facet_diameter(f);
    const Eigen::Vector3d nrm = mesh.facet_normal(f);
    const int t0 = mesh.facet_cells[f][0];
    const int t1 = mesh.facet_cells[f][1];
    QuadRule q = facet_rule(mesh, f);
    double acc = 0.0;
    for (size_t k = 0; k < q.points.size(); ++k) {
      Eigen::Matrix3d val = chi[t0].eval(q.points[k], n);
      if (t1 >= 0) val -= chi[t1].eval(q.points[k], n);
      acc += q.weights[k] * tangential_sq(val, nrm, n);
    }
    if (t1 >= 0) {
      out.jump_term[t0] += he * acc;
      out.jump_term[t1] += he * acc;
    } else {
      out.boundary_term[t0] += he * acc;
    }
  }

  for (int t = 0; t < nc; ++t) {
    out.per_cell[t] = out.postprocess_term[t] + out.gradient_term[t] +
                      out.rot_term[t] + out.jump_term[t] + out.boundary_term[t];
    out.global_sq += out.per_cell[t];
  }
  return out;
}

double effectivity(double err_omega, const EstimatorField& field) {
  if (field.global_sq <= 0.0) throw std::domain_error("effectivity: zero estimator");
  return err_omega / field.global_sq;
}

} // namespace psafem
