#pragma once

// Shared helpers and independent oracles for the test suites.

#include <Eigen/Dense>

#include <random>

#include "pfrac/assembly.hpp"
#include "pfrac/mesh.hpp"
#include "pfrac/sparse.hpp"
#include "pfrac/spectral.hpp"

namespace testsupport {

using namespace pfrac;

/// Plain rectangular nx x ny mesh on [0,w] x [0,hgt], no slit.
inline Mesh rectangle_mesh(int nx, int ny, double w = 1.0, double hgt = 1.0, double thickness = 1.0) {
  Mesh m;
  m.thickness = thickness;
  for (int iy = 0; iy <= ny; ++iy)
    for (int ix = 0; ix <= nx; ++ix) m.nodes.push_back({w * ix / nx, hgt * iy / ny});
  auto node = [&](int ix, int iy) { return iy * (nx + 1) + ix; };
  for (int iy = 0; iy < ny; ++iy)
    for (int ix = 0; ix < nx; ++ix)
      m.elements.push_back({node(ix, iy), node(ix + 1, iy), node(ix + 1, iy + 1), node(ix, iy + 1)});
  std::vector<int> bottom, top;
  for (int ix = 0; ix <= nx; ++ix) {
    bottom.push_back(node(ix, 0));
    top.push_back(node(ix, ny));
  }
  m.boundary_sets["bottom_edge"] = bottom;
  m.boundary_sets["top_edge"] = top;
  return m;
}

inline Eigen::MatrixXd dense_from_sym(const SparseSymmetric& a) {
  Eigen::MatrixXd d = Eigen::MatrixXd::Zero(a.n, a.n);
  for (int c = 0; c < a.n; ++c)
    for (int p = a.col_ptr[c]; p < a.col_ptr[c + 1]; ++p) {
      d(a.row_idx[p], c) = a.values[p];
      d(c, a.row_idx[p]) = a.values[p];
    }
  return d;
}

inline Eigen::MatrixXd dense_from_csc(const CscMatrix& a) {
  Eigen::MatrixXd d = Eigen::MatrixXd::Zero(a.rows, a.cols);
  for (int c = 0; c < a.cols; ++c)
    for (int p = a.col_ptr[c]; p < a.col_ptr[c + 1]; ++p) d(a.row_idx[p], c) = a.values[p];
  return d;
}

/// Independent small-strain isotropic elasticity assembly (unsplit
/// constitutive law) used as the oracle for the momentum residual.
inline Eigen::VectorXd oracle_elastic_residual(const Mesh& mesh, const Eigen::VectorXd& u,
                                               double lambda, double mu) {
  Eigen::VectorXd r = Eigen::VectorXd::Zero(2 * mesh.node_count());
  const double gp = 1.0 / std::sqrt(3.0);
  for (const auto& el : mesh.elements) {
    for (double xi : {-gp, gp})
      for (double eta : {-gp, gp}) {
        const double dxi[4] = {-0.25 * (1 - eta), 0.25 * (1 - eta), 0.25 * (1 + eta), -0.25 * (1 + eta)};
        const double deta[4] = {-0.25 * (1 - xi), -0.25 * (1 + xi), 0.25 * (1 + xi), 0.25 * (1 - xi)};
        double j00 = 0, j01 = 0, j10 = 0, j11 = 0;
        for (int k = 0; k < 4; ++k) {
          j00 += dxi[k] * mesh.nodes[el[k]][0];
          j01 += dxi[k] * mesh.nodes[el[k]][1];
          j10 += deta[k] * mesh.nodes[el[k]][0];
          j11 += deta[k] * mesh.nodes[el[k]][1];
        }
        const double det = j00 * j11 - j01 * j10;
        double gx[4], gy[4];
        for (int k = 0; k < 4; ++k) {
          gx[k] = (dxi[k] * j11 - deta[k] * j01) / det;
          gy[k] = (-dxi[k] * j10 + deta[k] * j00) / det;
        }
        double exx = 0, eyy = 0, exy = 0;
        for (int k = 0; k < 4; ++k) {
          exx += gx[k] * u[2 * el[k]];
          eyy += gy[k] * u[2 * el[k] + 1];
          exy += 0.5 * (gy[k] * u[2 * el[k]] + gx[k] * u[2 * el[k] + 1]);
        }
        const double tr = exx + eyy;
        const double sxx = lambda * tr + 2.0 * mu * exx;
        const double syy = lambda * tr + 2.0 * mu * eyy;
        const double sxy = 2.0 * mu * exy;
        const double w = det * mesh.thickness;
        for (int k = 0; k < 4; ++k) {
          r[2 * el[k]] += (gx[k] * sxx + gy[k] * sxy) * w;
          r[2 * el[k] + 1] += (gy[k] * syy + gx[k] * sxy) * w;
        }
      }
  }
  return r;
}

/// Random state kept away from the non-smooth points of the split and of
/// the penalty ramp so central finite differences are valid.
inline State random_admissible_state(const Mesh& mesh, const MaterialParams& mat, std::mt19937& rng,
                                     double u_scale, double fd_step) {
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  const int m = mesh.node_count();
  while (true) {
    State s = State::zero(m);
    for (int i = 0; i < 2 * m; ++i) s.U[i] = u_scale * u(rng);
    for (int i = 0; i < m; ++i) {
      s.D[i] = 0.4 + 0.25 * u(rng);
      s.D_prev[i] = s.D[i] - 0.2 * (0.3 + std::abs(u(rng)));  // keep |D - D_prev| away from 0
      if (u(rng) > 0.6) s.D_prev[i] = s.D[i] + 0.2 * (0.3 + std::abs(u(rng)));
    }
    s.D_prev2 = s.D_prev;
    // Check smoothness margins at every Gauss point.
    bool ok = true;
    const double gp = 1.0 / std::sqrt(3.0);
    for (const auto& el : mesh.elements) {
      for (double xi : {-gp, gp}) {
        for (double eta : {-gp, gp}) {
          const double dxi[4] = {-0.25 * (1 - eta), 0.25 * (1 - eta), 0.25 * (1 + eta), -0.25 * (1 + eta)};
          const double deta[4] = {-0.25 * (1 - xi), -0.25 * (1 + xi), 0.25 * (1 + xi), 0.25 * (1 - xi)};
          double j00 = 0, j01 = 0, j10 = 0, j11 = 0;
          for (int k = 0; k < 4; ++k) {
            j00 += dxi[k] * mesh.nodes[el[k]][0];
            j01 += dxi[k] * mesh.nodes[el[k]][1];
            j10 += deta[k] * mesh.nodes[el[k]][0];
            j11 += deta[k] * mesh.nodes[el[k]][1];
          }
          const double det = j00 * j11 - j01 * j10;
          double gx[4], gy[4];
          for (int k = 0; k < 4; ++k) {
            gx[k] = (dxi[k] * j11 - deta[k] * j01) / det;
            gy[k] = (-dxi[k] * j10 + deta[k] * j00) / det;
          }
          Sym2 e;
          double d = 0, dp = 0;
          const double n[4] = {0.25 * (1 - xi) * (1 - eta), 0.25 * (1 + xi) * (1 - eta),
                               0.25 * (1 + xi) * (1 + eta), 0.25 * (1 - xi) * (1 + eta)};
          for (int k = 0; k < 4; ++k) {
            e.xx += gx[k] * s.U[2 * el[k]];
            e.yy += gy[k] * s.U[2 * el[k] + 1];
            e.xy += 0.5 * (gy[k] * s.U[2 * el[k]] + gx[k] * s.U[2 * el[k] + 1]);
            d += n[k] * s.D[el[k]];
            dp += n[k] * s.D_prev[el[k]];
          }
          const auto eg = eig2(e);
          const double margin = 50.0 * fd_step;
          if (std::abs(eg.lam1) < margin || std::abs(eg.lam2) < margin || std::abs(e.trace()) < margin ||
              std::abs(eg.lam1 - eg.lam2) < margin || std::abs(d - dp) < margin)
            ok = false;
        }
        if (!ok) break;
      }
      if (!ok) break;
    }
    if (ok) return s;
  }
}

}  // namespace testsupport
