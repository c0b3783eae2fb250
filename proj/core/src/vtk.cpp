#include "psafem/vtk.hpp"

#include <fstream>
#include <iomanip>

namespace psafem {

void write_vtk(const std::string& path, const Mesh& mesh, const EstimatorField* field,
               const ThetaOperator* theta, const Eigen::VectorXd* u_p0) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("write_vtk: cannot open " + path);
  out << std::setprecision(17);

  out << "# vtk DataFile Version 3.0\n";
  out << "psafem mesh\n";
  out << "ASCII\n";
  out << "DATASET UNSTRUCTURED_GRID\n";

  const int nv = mesh.num_vertices();
  out << "POINTS " << nv << " double\n";
  for (int v = 0; v < nv; ++v) {
    Eigen::Vector3d p = mesh.vertex(v);
    out << p[0] << " " << p[1] << " " << p[2] << "\n";
  }

  const int nc = mesh.num_cells();
  const int k = mesh.dim + 1;
  out << "CELLS " << nc << " " << nc * (k + 1) << "\n";
  for (int t = 0; t < nc; ++t) {
    out << k;
    for (int i = 0; i < k; ++i) out << " " << mesh.cell(t)[i];
    out << "\n";
  }
  out << "CELL_TYPES " << nc << "\n";
  const int vtk_type = mesh.dim == 2 ? 5 : 10; // triangle / tetra
  for (int t = 0; t < nc; ++t) out << vtk_type << "\n";

  out << "CELL_DATA " << nc << "\n";
  auto scalar = [&](const std::string& name, auto&& get) {
    out << "SCALARS " << name << " double 1\nLOOKUP_TABLE default\n";
    for (int t = 0; t < nc; ++t) out << get(t) << "\n";
  };
  scalar("generation", [&](int t) { return static_cast<double>(mesh.generation[t]); });
  if (field) {
    scalar("eta_sq", [&](int t) { return field->per_cell[t]; });
    scalar("term_postprocess", [&](int t) { return field->postprocess_term[t]; });
    scalar("term_gradient", [&](int t) { return field->gradient_term[t]; });
    scalar("term_rot", [&](int t) { return field->rot_term[t]; });
    scalar("term_jump", [&](int t) { return field->jump_term[t]; });
    scalar("term_boundary", [&](int t) { return field->boundary_term[t]; });
  }

  if (theta && u_p0) {
    Eigen::VectorXd p1 = theta->apply(*u_p0);
    out << "POINT_DATA " << nv << "\n";
    out << "VECTORS displacement double\n";
    for (int v = 0; v < nv; ++v) {
      double x = p1[v * mesh.dim + 0];
      double y = p1[v * mesh.dim + 1];
      double z = mesh.dim == 3 ? p1[v * mesh.dim + 2] : 0.0;
      out << x << " " << y << " " << z << "\n";
    }
  }
}

} // namespace psafem
