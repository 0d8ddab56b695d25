#pragma once

#include <functional>
#include <string>
#include <vector>

#include "pfrac/mesh.hpp"

namespace pfrac {

/// Prescribed displacement on one component of a named node set; the
/// value is a function of pseudo-time.
struct BcSpec {
  std::string set;
  int component = 0;  // 0: x, 1: y
  std::function<double(double)> value;
};

/// Ordered map from global displacement DOF (2*node + component) to its
/// prescribed value function, sorted by DOF index.
struct DirichletMap {
  std::vector<int> dofs;
  std::vector<std::function<double(double)>> values;

  int count() const { return static_cast<int>(dofs.size()); }
};

/// Resolves boundary specs against the mesh sets. Throws on unknown set
/// names and on duplicate DOFs with conflicting value functions
/// (functions compared by probing a few sample times).
DirichletMap extract_dirichlet_dofs(const Mesh& mesh, const std::vector<BcSpec>& specs);

}  // namespace pfrac
