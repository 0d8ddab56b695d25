#include "pfrac/bc.hpp"

#include <cmath>
#include <map>

namespace pfrac {

DirichletMap extract_dirichlet_dofs(const Mesh& mesh, const std::vector<BcSpec>& specs) {
  std::map<int, std::function<double(double)>> by_dof;
  for (const auto& spec : specs) {
    auto it = mesh.boundary_sets.find(spec.set);
    if (it == mesh.boundary_sets.end()) throw StructuralError("unknown boundary set '" + spec.set + "'");
    if (spec.component != 0 && spec.component != 1)
      throw std::invalid_argument("dirichlet component must be 0 (x) or 1 (y)");
    for (int node : it->second) {
      const int dof = 2 * node + spec.component;
      auto existing = by_dof.find(dof);
      if (existing != by_dof.end()) {
        for (double t : {0.0, 0.5, 1.0}) {
          if (std::abs(existing->second(t) - spec.value(t)) > 1e-14)
            throw std::invalid_argument("conflicting Dirichlet values on DOF " + std::to_string(dof));
        }
        continue;
      }
      by_dof[dof] = spec.value;
    }
  }
  DirichletMap m;
  m.dofs.reserve(by_dof.size());
  m.values.reserve(by_dof.size());
  for (auto& [dof, fn] : by_dof) {
    m.dofs.push_back(dof);
    m.values.push_back(std::move(fn));
  }
  return m;
}

}  // namespace pfrac
