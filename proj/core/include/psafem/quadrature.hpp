#pragma once

#include <vector>

#include <Eigen/Dense>

#include "psafem/mesh.hpp"

namespace psafem {

/// Physical-space quadrature points with weights summing to the measure of
/// the integration domain.
struct QuadRule {
  std::vector<Eigen::Vector3d> points;
  std::vector<double> weights;
};

/// Cell rule exact for polynomials of degree 4 (2D: 6-point Dunavant,
/// 3D: 11-point Keast).
QuadRule cell_rule(const Mesh& mesh, int t);

/// Higher-order cell rule (2D: degree 6, 12-point Dunavant; 3D: degree 5).
QuadRule cell_rule_high(const Mesh& mesh, int t);

/// Facet rule exact for degree 5 (2D edges: 3-point Gauss;
/// 3D triangle facets: 7-point rule).
QuadRule facet_rule(const Mesh& mesh, int f);

/// Gauss rule on an arbitrary segment [a,b] with npts in {1,2,3,5}.
QuadRule segment_rule(const Eigen::Vector3d& a, const Eigen::Vector3d& b, int npts);

} // namespace psafem
