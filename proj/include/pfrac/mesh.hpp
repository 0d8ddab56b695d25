#pragma once

#include <array>
#include <map>
#include <stdexcept>
#include <string>
#include <vector>

namespace pfrac {

/// Error with a structural cause (invalid topology, missing references).
struct StructuralError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

/// 2D quadrilateral mesh. Slit notches are realized by duplicated nodes:
/// coincident coordinates, distinct indices, never connected across the slit.
struct Mesh {
  std::vector<std::array<double, 2>> nodes;       // mm
  std::vector<std::array<int, 4>> elements;       // counter-clockwise
  std::map<std::string, std::vector<int>> boundary_sets;
  double thickness = 1.0;                         // mm

  int node_count() const { return static_cast<int>(nodes.size()); }
  int element_count() const { return static_cast<int>(elements.size()); }

  /// Checks element validity and positive Jacobians at the 2x2 Gauss
  /// points; throws StructuralError on violation.
  void validate() const;
};

enum class Benchmark { senp_tension, senp_shear, three_point_bending, l_panel };

Benchmark benchmark_from_name(const std::string& name);
std::string benchmark_name(Benchmark b);

/// Geometry request for one of the four benchmark problems. The element
/// size inside the fracture band is refinement_ratio * l; coarse_h is used
/// elsewhere. Benchmark dimensions follow the standard configurations of
/// the underlying experiments (unit SENP square, 8x2 beam with a 0.4 mm
/// notch, 500 mm L-panel with a 250 mm cut-out loaded 30 mm from the
/// right edge).
struct GeometrySpec {
  Benchmark benchmark = Benchmark::senp_tension;
  double l = 0.0;                  // characteristic length (mm)
  double refinement_ratio = 0.2;   // target in-band h as fraction of l
  double coarse_h = 0.0;           // element size outside the band (mm)
  double thickness = 0.0;          // 0: benchmark default (1 mm; 100 mm L-panel)
};

Mesh build_benchmark_mesh(const GeometrySpec& spec);

/// Native JSON mesh dump ({nodes, elements, boundary_sets, thickness}).
std::string write_mesh_json(const Mesh& mesh);
Mesh read_mesh_json(const std::string& text);

}  // namespace pfrac
