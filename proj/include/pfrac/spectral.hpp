#pragma once

#include <Eigen/Dense>

#include "pfrac/material.hpp"

namespace pfrac {

/// Symmetric 2x2 tensor, tensor components (xy stored once).
struct Sym2 {
  double xx = 0.0;
  double yy = 0.0;
  double xy = 0.0;

  double trace() const { return xx + yy; }

  /// Double contraction a : b.
  double ddot(const Sym2& o) const { return xx * o.xx + yy * o.yy + 2.0 * xy * o.xy; }

  Sym2 operator+(const Sym2& o) const { return {xx + o.xx, yy + o.yy, xy + o.xy}; }
  Sym2 operator-(const Sym2& o) const { return {xx - o.xx, yy - o.yy, xy - o.xy}; }
  Sym2 operator*(double s) const { return {xx * s, yy * s, xy * s}; }
};

/// Stress-like Voigt vector (s_xx, s_yy, s_xy).
inline Eigen::Vector3d to_voigt_stress(const Sym2& s) { return {s.xx, s.yy, s.xy}; }

/// Tangents are 3x3 Voigt matrices mapping engineering strain
/// (e_xx, e_yy, 2 e_xy) to stress (s_xx, s_yy, s_xy).
using Tangent = Eigen::Matrix3d;

/// Eigendecomposition of a symmetric 2x2 tensor; lam1 >= lam2,
/// eigenvector sign fixed so the first nonzero component is positive.
struct Eig2 {
  double lam1, lam2;
  Eigen::Vector2d v1, v2;
};

Eig2 eig2(const Sym2& e);

/// Spectral tension/compression split of the strain tensor and the
/// derived stresses sigma+- = lambda <tr e>+- I + 2 mu e+-, together with
/// the tangent d(sigma+)/de. Ramp derivative at zero follows <z>+' = 0,
/// <z>-' = 1 at z = 0, so the plus/minus tangents partition the isotropic
/// elasticity tensor exactly.
struct SplitState {
  Sym2 e;
  double lam1 = 0.0, lam2 = 0.0;
  Eigen::Vector2d v1{1.0, 0.0}, v2{0.0, 1.0};
  Sym2 e_plus, e_minus;
  Sym2 sigma_plus, sigma_minus;
  Tangent tangent_plus = Tangent::Zero();   // d sigma+ / de
  Tangent tangent_minus = Tangent::Zero();  // d sigma- / de
};

SplitState spectral_split(const Sym2& e, const MaterialParams& mat);

/// Pointwise (non-gradient) part of the regularized energy density:
/// elastic term with degradation, AT1 local term (3Gc/8)(d/l), and the
/// quadratic irreversibility penalty. The l|grad d|^2 contribution is
/// integrated during assembly, not here.
double energy_density(const Sym2& e, double d, double d_prev, const MaterialParams& mat);

/// Isotropic plane-strain elasticity tangent in Voigt form.
Tangent isotropic_tangent(double lambda, double mu);

}  // namespace pfrac
