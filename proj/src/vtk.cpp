#include "pfrac/vtk.hpp"

#include <fstream>
#include <stdexcept>

namespace pfrac {

void write_vtk(const Mesh& mesh, const State& state, const std::string& path) {
  if (state.D.size() != mesh.node_count() || state.U.size() != 2 * mesh.node_count())
    throw std::invalid_argument("write_vtk: state does not match mesh");
  std::ofstream f(path);
  if (!f) throw std::runtime_error("write_vtk: cannot open '" + path + "'");
  f.precision(12);
  f << "# vtk DataFile Version 3.0\n";
  f << "phase-field fracture snapshot\n";
  f << "ASCII\n";
  f << "DATASET UNSTRUCTURED_GRID\n";
  f << "POINTS " << mesh.node_count() << " double\n";
  for (const auto& n : mesh.nodes) f << n[0] << " " << n[1] << " 0\n";
  f << "CELLS " << mesh.element_count() << " " << 5 * mesh.element_count() << "\n";
  for (const auto& e : mesh.elements) f << "4 " << e[0] << " " << e[1] << " " << e[2] << " " << e[3] << "\n";
  f << "CELL_TYPES " << mesh.element_count() << "\n";
  for (int e = 0; e < mesh.element_count(); ++e) f << "9\n";
  f << "POINT_DATA " << mesh.node_count() << "\n";
  f << "SCALARS damage double 1\n";
  f << "LOOKUP_TABLE default\n";
  for (int i = 0; i < mesh.node_count(); ++i) f << state.D[i] << "\n";
  f << "VECTORS displacement double\n";
  for (int i = 0; i < mesh.node_count(); ++i) f << state.U[2 * i] << " " << state.U[2 * i + 1] << " 0\n";
  if (!f) throw std::runtime_error("write_vtk: write failed for '" + path + "'");
}

}  // namespace pfrac
