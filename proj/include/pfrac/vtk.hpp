#pragma once

#include <string>

#include "pfrac/assembly.hpp"
#include "pfrac/mesh.hpp"

namespace pfrac {

/// Legacy ASCII VTK unstructured grid with point data "damage" (scalar)
/// and "displacement" (vector), cells as VTK_QUAD.
void write_vtk(const Mesh& mesh, const State& state, const std::string& path);

}  // namespace pfrac
