#pragma once

#include <string>

#include "psafem/estimator.hpp"
#include "psafem/postprocess.hpp"

namespace psafem {

/// Legacy ASCII VTK (UNSTRUCTURED_GRID). Cell data: generation and, when an
/// estimator field is given, eta_T^2 with its term breakdown. When a theta
/// operator and P0 displacement are given, Theta u_h is written as point data.
void write_vtk(const std::string& path, const Mesh& mesh,
               const EstimatorField* field = nullptr,
               const ThetaOperator* theta = nullptr,
               const Eigen::VectorXd* u_p0 = nullptr);

} // namespace psafem
