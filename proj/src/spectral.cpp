#include "pfrac/spectral.hpp"

#include <algorithm>
#include <cmath>

namespace pfrac {

namespace {

inline double ramp_pos(double z) { return z > 0.0 ? z : 0.0; }
inline double ramp_neg(double z) { return z < 0.0 ? z : 0.0; }

// Heaviside conventions matching the ramp derivatives at zero:
// H+(0) = 0 and H-(0) = 1, so H+ + H- = 1 everywhere.
inline double heaviside_pos(double z) { return z > 0.0 ? 1.0 : 0.0; }
inline double heaviside_neg(double z) { return z <= 0.0 ? 1.0 : 0.0; }

// Fix sign so that the first component with magnitude above a relative
// floor is positive; keeps assembled Jacobians reproducible.
inline Eigen::Vector2d canonical_sign(Eigen::Vector2d v) {
  const double floor = 1e-14 * (std::abs(v(0)) + std::abs(v(1)));
  double lead = v(0);
  if (std::abs(lead) <= floor) lead = v(1);
  if (lead < 0.0) v = -v;
  return v;
}

}  // namespace

Eig2 eig2(const Sym2& e) {
  Eig2 out;
  const double mean = 0.5 * (e.xx + e.yy);
  const double diff = 0.5 * (e.xx - e.yy);
  const double r = std::hypot(diff, e.xy);
  out.lam1 = mean + r;
  out.lam2 = mean - r;
  if (r <= 1e-30 * (1.0 + std::abs(mean))) {
    out.v1 = {1.0, 0.0};
    out.v2 = {0.0, 1.0};
    return out;
  }
  // Pick the better-conditioned column of (e - lam2 I) for v1.
  Eigen::Vector2d a{e.xx - out.lam2, e.xy};
  Eigen::Vector2d b{e.xy, e.yy - out.lam2};
  Eigen::Vector2d v = (a.squaredNorm() >= b.squaredNorm()) ? a : b;
  v.normalize();
  out.v1 = canonical_sign(v);
  out.v2 = canonical_sign(Eigen::Vector2d{-out.v1(1), out.v1(0)});
  return out;
}

Tangent isotropic_tangent(double lambda, double mu) {
  Tangent c = Tangent::Zero();
  c(0, 0) = lambda + 2.0 * mu;
  c(1, 1) = lambda + 2.0 * mu;
  c(0, 1) = c(1, 0) = lambda;
  c(2, 2) = mu;
  return c;
}

SplitState spectral_split(const Sym2& e, const MaterialParams& mat) {
  SplitState s;
  s.e = e;
  const Eig2 eg = eig2(e);
  s.lam1 = eg.lam1;
  s.lam2 = eg.lam2;
  s.v1 = eg.v1;
  s.v2 = eg.v2;

  const double lp1 = ramp_pos(eg.lam1);
  const double lp2 = ramp_pos(eg.lam2);
  auto dyad = [](const Eigen::Vector2d& v) -> Sym2 {
    return {v(0) * v(0), v(1) * v(1), v(0) * v(1)};
  };
  const Sym2 m1 = dyad(eg.v1);
  const Sym2 m2 = dyad(eg.v2);
  s.e_plus = m1 * lp1 + m2 * lp2;
  s.e_minus = e - s.e_plus;

  const double tr = e.trace();
  const double trp = ramp_pos(tr);
  const double trn = ramp_neg(tr);
  const Sym2 I{1.0, 1.0, 0.0};
  s.sigma_plus = I * (mat.lambda * trp) + s.e_plus * (2.0 * mat.mu);
  s.sigma_minus = I * (mat.lambda * trn) + s.e_minus * (2.0 * mat.mu);

  // Projector d(e+)/de in Voigt form. In the eigenframe the three modes
  // are the two eigen-dyads and the mixed dyad; the mixed coefficient is
  // (<lam1>+ - <lam2>+)/(lam1 - lam2), with the same-sign limit at
  // eigenvalue coincidence (a straddling pair cannot coincide).
  const double h1 = heaviside_pos(eg.lam1);
  const double h2 = heaviside_pos(eg.lam2);
  const double gap = eg.lam1 - eg.lam2;
  double beta;
  if (gap <= 1e-12 * std::max(1.0, std::abs(eg.lam1) + std::abs(eg.lam2))) {
    beta = h1;
  } else {
    beta = (lp1 - lp2) / gap;
  }
  const double inv_sqrt2 = 1.0 / std::sqrt(2.0);
  const Sym2 m12{2.0 * eg.v1(0) * eg.v2(0) * inv_sqrt2, 2.0 * eg.v1(1) * eg.v2(1) * inv_sqrt2,
                 (eg.v1(0) * eg.v2(1) + eg.v1(1) * eg.v2(0)) * inv_sqrt2};

  const Eigen::Vector3d n1 = to_voigt_stress(m1);
  const Eigen::Vector3d n2 = to_voigt_stress(m2);
  const Eigen::Vector3d n12 = to_voigt_stress(m12);
  const Tangent proj_plus =
      h1 * n1 * n1.transpose() + h2 * n2 * n2.transpose() + beta * n12 * n12.transpose();

  const Eigen::Vector3d iv{1.0, 1.0, 0.0};
  const Tangent vol = iv * iv.transpose();
  Tangent sym_id = Tangent::Zero();
  sym_id(0, 0) = sym_id(1, 1) = 1.0;
  sym_id(2, 2) = 0.5;

  s.tangent_plus = mat.lambda * heaviside_pos(tr) * vol + 2.0 * mat.mu * proj_plus;
  s.tangent_minus = mat.lambda * heaviside_neg(tr) * vol + 2.0 * mat.mu * (sym_id - proj_plus);
  return s;
}

double energy_density(const Sym2& e, double d, double d_prev, const MaterialParams& mat) {
  const SplitState s = spectral_split(e, mat);
  const double g = (1.0 - d) * (1.0 - d);
  const double elastic = 0.5 * (s.sigma_plus * g + s.sigma_minus).ddot(e);
  const double surface_local = (3.0 * mat.Gc / 8.0) * (d / mat.l);
  const double viol = ramp_neg(d - d_prev);
  const double penalty = 0.5 * mat.gamma * viol * viol;
  return elastic + surface_local + penalty;
}

}  // namespace pfrac
