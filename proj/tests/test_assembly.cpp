#include <doctest.h>

#include <Eigen/Dense>
#include <cmath>

#include "psafem/assembly.hpp"
#include "psafem/spaces.hpp"

using namespace psafem;

namespace {

// Orthonormal basis of null(B) ∩ null(c^T) via dense SVD.
Eigen::MatrixXd constraint_kernel(const SparseMat& B, const Eigen::VectorXd& c) {
  Eigen::MatrixXd C(B.rows() + 1, B.cols());
  C.topRows(B.rows()) = Eigen::MatrixXd(B);
  C.bottomRows(1) = c.transpose();
  Eigen::JacobiSVD<Eigen::MatrixXd> svd(C, Eigen::ComputeFullV);
  int rank = 0;
  double tol = 1e-12 * svd.singularValues()[0];
  for (int i = 0; i < svd.singularValues().size(); ++i)
    if (svd.singularValues()[i] > tol) ++rank;
  return svd.matrixV().rightCols(B.cols() - rank);
}

Eigen::VectorXd identity_coeffs(const RtTensorSpace& rt) {
  return interpolate_rt(rt, [](const Eigen::Vector3d&) {
    return Eigen::Matrix3d(Eigen::Matrix3d::Identity());
  });
}

} // namespace

TEST_CASE("material: Lame parameters and limit flag") {
  MaterialParams m = material(1.0, 0.35);
  CHECK(m.lambda == doctest::Approx(0.864197530864197).epsilon(1e-13));
  CHECK(m.mu == doctest::Approx(1.0 / 2.7).epsilon(1e-14));
  CHECK_FALSE(m.limit);

  MaterialParams lim = material(1.0, 0.5);
  CHECK(lim.limit);
  CHECK(lim.mu == doctest::Approx(1.0 / 3.0).epsilon(1e-14));
  CHECK(std::isinf(lim.lambda));
  CHECK(lim.c_trace(2) == doctest::Approx(0.5).epsilon(1e-14));
  CHECK(lim.c_trace(3) == doctest::Approx(1.0 / 3.0).epsilon(1e-14));

  MaterialParams near = material(1.0, 0.49);
  CHECK(near.lambda == doctest::Approx(0.49 / (1.49 * 0.02)).epsilon(1e-12));
  double ct = near.c_trace(2);
  CHECK(ct > 1.0 / 3.0);
  CHECK(ct < 0.5);
  CHECK(ct == doctest::Approx((near.lambda + near.mu) / (2 * near.lambda + 3 * near.mu))
                  .epsilon(1e-14));

  CHECK_THROWS_AS(material(-1.0, 0.3), std::invalid_argument);
  CHECK_THROWS_AS(material(1.0, 0.6), std::invalid_argument);
  CHECK_THROWS_AS(material(1.0, 0.0), std::invalid_argument);
}

TEST_CASE("assemble_a: original and deviatoric forms agree entrywise") {
  for (const char* name : {"lshape2d", "unit_cube"}) {
    Mesh m = uniform_refine(preset_mesh(name));
    RtTensorSpace rt(m);
    for (double nu : {0.2, 0.35, 0.49, 0.4999}) {
      MaterialParams mat = material(1.0, nu);
      Eigen::MatrixXd Ao = Eigen::MatrixXd(assemble_a(rt, mat, AForm::original));
      Eigen::MatrixXd Ad = Eigen::MatrixXd(assemble_a(rt, mat, AForm::deviatoric));
      double scale = Ao.cwiseAbs().maxCoeff();
      CHECK((Ao - Ad).cwiseAbs().maxCoeff() <= 1e-12 * scale);
      CHECK((Ao - Ao.transpose()).cwiseAbs().maxCoeff() <= 1e-13 * scale);
    }
  }
}

TEST_CASE("assemble_a: original form rejects the limit material") {
  Mesh m = preset_mesh("unit_square");
  RtTensorSpace rt(m);
  CHECK_THROWS(assemble_a(rt, material(1.0, 0.5), AForm::original));
}

TEST_CASE("assemble_a: a(I,I) closed forms, limit annihilates the identity") {
  for (const char* name : {"lshape2d", "unit_cube"}) {
    Mesh m = preset_mesh(name);
    RtTensorSpace rt(m);
    const int n = m.dim;
    const double vol = m.total_volume();
    Eigen::VectorXd id = identity_coeffs(rt);

    MaterialParams mat = material(1.0, 0.35);
    double expect = n * vol / (n * mat.lambda + (n + 1) * mat.mu);
    for (AForm f : {AForm::original, AForm::deviatoric}) {
      SparseMat A = assemble_a(rt, mat, f);
      CHECK(id.dot(A * id) == doctest::Approx(expect).epsilon(1e-11));
    }

    SparseMat Alim = assemble_a(rt, material(1.0, 0.5), AForm::limit);
    double scale = Eigen::MatrixXd(Alim).cwiseAbs().maxCoeff();
    CHECK(std::abs(id.dot(Alim * id)) <= 1e-11 * scale * id.squaredNorm());
  }
}

TEST_CASE("assemble_a: lambda-continuity of the deviatoric form at nu -> 1/2") {
  Mesh m = uniform_refine(preset_mesh("unit_square"));
  RtTensorSpace rt(m);
  Eigen::MatrixXd Ad =
      Eigen::MatrixXd(assemble_a(rt, material(1.0, 0.499999), AForm::deviatoric));
  Eigen::MatrixXd Al = Eigen::MatrixXd(assemble_a(rt, material(1.0, 0.5), AForm::limit));
  CHECK((Ad - Al).cwiseAbs().maxCoeff() <= 1e-4 * Al.cwiseAbs().maxCoeff());
}

TEST_CASE("assemble_a: definiteness and kernel ellipticity") {
  Mesh m = preset_mesh("unit_square");
  RtTensorSpace rt(m);
  P0VectorSpace p0(m);
  SparseMat B = assemble_b(rt, p0);
  Eigen::VectorXd c = assemble_trace_constraint(rt);
  Eigen::MatrixXd Z = constraint_kernel(B, c);
  REQUIRE(Z.cols() > 0);

  for (double nu : {0.2, 0.35, 0.49}) {
    Eigen::MatrixXd A = Eigen::MatrixXd(assemble_a(rt, material(1.0, nu), AForm::deviatoric));
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(A);
    CHECK(es.eigenvalues().minCoeff() > 0.0);
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> esk(Z.transpose() * A * Z);
    CHECK(esk.eigenvalues().minCoeff() > 0.0);
  }

  Eigen::MatrixXd Al = Eigen::MatrixXd(assemble_a(rt, material(1.0, 0.5), AForm::limit));
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(Al);
  CHECK(es.eigenvalues().minCoeff() >= -1e-12 * es.eigenvalues().cwiseAbs().maxCoeff());
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> esk(Z.transpose() * Al * Z);
  CHECK(esk.eigenvalues().minCoeff() > 0.0);
}

TEST_CASE("assemble_b: constant-divergence pairing and divergence-free kernel") {
  Mesh m = preset_mesh("lshape2d");
  RtTensorSpace rt(m);
  P0VectorSpace p0(m);
  SparseMat B = assemble_b(rt, p0);
  const int n = m.dim;

  // Rowwise a + d_r/n * x field: div(row r) = d_r on every cell.
  Eigen::Vector3d d(2.0, -1.5, 0.0);
  Eigen::VectorXd tau = interpolate_rt(rt, [&](const Eigen::Vector3d& x) {
    Eigen::Matrix3d v = Eigen::Matrix3d::Zero();
    for (int r = 0; r < n; ++r) v.row(r) = d[r] / n * x.transpose();
    return v;
  });
  Eigen::VectorXd Bt = B * tau;
  for (int t = 0; t < m.num_cells(); ++t)
    for (int r = 0; r < n; ++r)
      CHECK(Bt[p0.dof(t, r)] == doctest::Approx(d[r] * m.cell_volume(t)).epsilon(1e-12));

  // Constant tensor fields are divergence free.
  Eigen::Matrix3d C;
  C << 1, 2, 0, -1, 3, 0, 0, 0, 0;
  Eigen::VectorXd cst = interpolate_rt(rt, [&](const Eigen::Vector3d&) { return C; });
  CHECK((B * cst).cwiseAbs().maxCoeff() <= 1e-12);

  // Row sums over one cell track facet incidence signs: summing B columns of
  // all dofs of one row on one cell gives sum of k_i * n * |T| = sum of signs.
  CellRtBasis b = cell_rt_basis(rt, 0);
  for (int r = 0; r < n; ++r) {
    double rowsum = 0, signsum = 0;
    for (int i = 0; i <= n; ++i) {
      Eigen::VectorXd e = Eigen::VectorXd::Zero(rt.num_dofs());
      e[rt.dof(r, b.facet_id[i])] = 1.0;
      rowsum += (B * e)[p0.dof(0, r)];
      signsum += rt.dof_sign(0, i);
    }
    CHECK(rowsum == doctest::Approx(signsum).epsilon(1e-12));
  }
}

TEST_CASE("assemble_mass: diagonal cell volumes") {
  Mesh m = preset_mesh("unit_square");
  P0VectorSpace p0(m);
  Eigen::VectorXd M = assemble_mass(p0);
  REQUIRE(M.size() == 4);
  for (int i = 0; i < 4; ++i) CHECK(M[i] == doctest::Approx(0.5).epsilon(1e-14));

  for (const char* name : {"lshape2d", "unit_cube"}) {
    Mesh mm = uniform_refine(preset_mesh(name));
    P0VectorSpace pp(mm);
    Eigen::VectorXd Mm = assemble_mass(pp);
    CHECK(Mm.sum() == doctest::Approx(mm.dim * mm.total_volume()).epsilon(1e-12));
    CHECK(Mm.minCoeff() > 0.0);
  }
}

TEST_CASE("assemble_trace_constraint: trace functional examples") {
  for (const char* name : {"lshape2d", "unit_cube"}) {
    Mesh m = preset_mesh(name);
    RtTensorSpace rt(m);
    const int n = m.dim;
    Eigen::VectorXd c = assemble_trace_constraint(rt);
    CHECK(c.norm() > 0.0);

    // Interpolant of the identity: integral of trace is n |Omega|.
    CHECK(c.dot(identity_coeffs(rt)) ==
          doctest::Approx(n * m.total_volume()).epsilon(1e-12));

    // A trace-free field has zero functional value.
    Eigen::Matrix3d S = Eigen::Matrix3d::Zero();
    S(0, 1) = 2.0;
    S(1, 0) = -1.0;
    S(0, 0) = 1.0;
    S(1, 1) = -1.0;
    Eigen::VectorXd tf = interpolate_rt(rt, [&](const Eigen::Vector3d&) { return S; });
    CHECK(std::abs(c.dot(tf)) <= 1e-12 * c.norm() * tf.norm());
  }
}

TEST_CASE("assemble_system: blocks consistent, limit kernel annihilated") {
  Mesh m = uniform_refine(preset_mesh("unit_square"));
  RtTensorSpace rt(m);
  P0VectorSpace p0(m);

  SaddleSystem sys = assemble_system(rt, p0, material(1.0, 0.35));
  CHECK(sys.n_rt == rt.num_dofs());
  CHECK(sys.n_q == p0.num_dofs());
  CHECK_FALSE(sys.limit);
  CHECK((Eigen::MatrixXd(sys.A) -
         Eigen::MatrixXd(assemble_a(rt, material(1.0, 0.35), AForm::deviatoric)))
            .cwiseAbs()
            .maxCoeff() <= 1e-14);

  SaddleSystem lim = assemble_system(rt, p0, material(1.0, 0.5));
  CHECK(lim.limit);
  REQUIRE(lim.kernel.size() == rt.num_dofs());
  // The advertised kernel really is the interpolant of the identity tensor and
  // is annihilated by both A_limit and B.
  CHECK((lim.kernel - identity_coeffs(rt)).cwiseAbs().maxCoeff() <= 1e-12);
  CHECK((lim.A * lim.kernel).cwiseAbs().maxCoeff() <=
        1e-12 * Eigen::MatrixXd(lim.A).cwiseAbs().maxCoeff());
  CHECK((lim.B * lim.kernel).cwiseAbs().maxCoeff() <= 1e-12);
}
