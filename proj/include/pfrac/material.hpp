#pragma once

#include <stdexcept>

namespace pfrac {

/// Isotropic brittle material under plane strain.
/// Units: mm, N, MPa; energies in N·mm.
struct MaterialParams {
  double E = 0.0;       // Young's modulus [MPa]
  double nu = 0.0;      // Poisson ratio [-]
  double lambda = 0.0;  // Lamé first parameter, plane strain [MPa]
  double mu = 0.0;      // shear modulus [MPa]
  double Gc = 0.0;      // critical energy release rate [N/mm]
  double l = 0.0;       // regularization length [mm]
  double gamma = 0.0;   // irreversibility penalty coefficient [N/mm^3]
  double tol_ir = 0.0;  // irreversibility tolerance [-]
};

struct LameConstants {
  double lambda;
  double mu;
};

/// Plane-strain Lamé constants from engineering constants.
inline LameConstants lame_from_engineering(double E, double nu) {
  if (!(E > 0.0)) throw std::invalid_argument("lame_from_engineering: E must be positive");
  if (!(nu >= 0.0 && nu < 0.5)) throw std::invalid_argument("lame_from_engineering: nu must be in [0, 0.5)");
  return {E * nu / ((1.0 + nu) * (1.0 - 2.0 * nu)), E / (2.0 * (1.0 + nu))};
}

/// Fixed optimal penalty coefficient gamma = (Gc/l) * 27 / (64 * tol_ir^2).
inline double penalty_gamma(double Gc, double l, double tol_ir) {
  if (!(Gc > 0.0 && l > 0.0 && tol_ir > 0.0))
    throw std::invalid_argument("penalty_gamma: Gc, l, tol_ir must be positive");
  return (Gc / l) * 27.0 / (64.0 * tol_ir * tol_ir);
}

inline MaterialParams make_material(double E, double nu, double Gc, double l, double tol_ir) {
  MaterialParams m;
  m.E = E;
  m.nu = nu;
  auto lame = lame_from_engineering(E, nu);
  m.lambda = lame.lambda;
  m.mu = lame.mu;
  if (!(Gc > 0.0)) throw std::invalid_argument("make_material: Gc must be positive");
  if (!(l > 0.0)) throw std::invalid_argument("make_material: l must be positive");
  m.Gc = Gc;
  m.l = l;
  m.tol_ir = tol_ir;
  m.gamma = penalty_gamma(Gc, l, tol_ir);
  return m;
}

}  // namespace pfrac
