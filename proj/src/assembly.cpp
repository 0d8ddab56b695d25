#include "pfrac/assembly.hpp"

#include <algorithm>
#include <cmath>
#include <cstdlib>
#include <stdexcept>
#include <thread>

#include "pfrac/spectral.hpp"

namespace pfrac {

namespace {

int env_threads() {
  const char* s = std::getenv("PFRAC_THREADS");
  if (!s) return 1;
  const int v = std::atoi(s);
  return v < 1 ? 1 : std::min(v, 64);
}

}  // namespace

Assembler::Assembler(const Mesh& mesh, const MaterialParams& mat, const DirichletMap& dirichlet)
    : mesh_(&mesh), mat_(mat), dirichlet_(dirichlet), m_(mesh.node_count()) {
  // Free displacement DOFs and the reduced index map.
  std::vector<char> constrained(2 * m_, 0);
  for (int dof : dirichlet_.dofs) {
    if (dof < 0 || dof >= 2 * m_) throw std::out_of_range("dirichlet DOF out of range");
    constrained[dof] = 1;
  }
  red_u_.assign(2 * m_, -1);
  for (int dof = 0; dof < 2 * m_; ++dof) {
    if (!constrained[dof]) {
      red_u_[dof] = static_cast<int>(free_u_.size());
      free_u_.push_back(dof);
    }
  }

  // Quadrature cache: shape values, global gradients and weights.
  const double gp = 1.0 / std::sqrt(3.0);
  gauss_.resize(4 * mesh.element_count());
  for (int e = 0; e < mesh.element_count(); ++e) {
    const auto& el = mesh.elements[e];
    int q = 0;
    for (double eta : {-gp, gp}) {
      for (double xi : {-gp, gp}) {
        GaussPoint& g = gauss_[4 * e + q];
        const double n[4] = {0.25 * (1 - xi) * (1 - eta), 0.25 * (1 + xi) * (1 - eta),
                             0.25 * (1 + xi) * (1 + eta), 0.25 * (1 - xi) * (1 + eta)};
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
        if (det <= 0.0) throw StructuralError("assembler: non-positive Jacobian");
        const double i00 = j11 / det, i01 = -j01 / det, i10 = -j10 / det, i11 = j00 / det;
        for (int k = 0; k < 4; ++k) {
          g.n[k] = n[k];
          g.dndx[k][0] = dxi[k] * i00 + deta[k] * i10;
          g.dndx[k][1] = dxi[k] * i01 + deta[k] * i11;
        }
        g.jxw = det * mesh.thickness;
        ++q;
      }
    }
  }

  // Sparsity patterns on reduced indices.
  const int nfu = free_u_count();
  const int nred = nfu + m_;
  std::vector<std::pair<int, int>> sym_entries, qm_entries, uu_entries, dd_entries;
  sym_entries.reserve(mesh.element_count() * 78);
  qm_entries.reserve(mesh.element_count() * 120);
  uu_entries.reserve(mesh.element_count() * 36);
  dd_entries.reserve(mesh.element_count() * 10);
  for (int e = 0; e < mesh.element_count(); ++e) {
    const auto& el = mesh.elements[e];
    int red[12];
    for (int a = 0; a < 4; ++a) {
      red[2 * a] = red_u_[2 * el[a]];
      red[2 * a + 1] = red_u_[2 * el[a] + 1];
      red[8 + a] = nfu + el[a];
    }
    for (int i = 0; i < 12; ++i) {
      if (red[i] < 0) continue;
      for (int j = 0; j <= i; ++j) {
        if (red[j] < 0) continue;
        sym_entries.emplace_back(red[i], red[j]);
      }
    }
    for (int i = 0; i < 12; ++i) {
      if (red[i] < 0) continue;
      for (int j = 0; j < 12; ++j) {
        if (red[j] < 0) continue;
        const bool ud = i < 8 && j >= 8;
        if (!ud) qm_entries.emplace_back(red[i], red[j]);
      }
    }
    for (int i = 0; i < 8; ++i) {
      if (red[i] < 0) continue;
      for (int j = 0; j <= i; ++j)
        if (red[j] >= 0) uu_entries.emplace_back(red[i], red[j]);
    }
    for (int a = 0; a < 4; ++a)
      for (int b = 0; b <= a; ++b) dd_entries.emplace_back(std::max(el[a], el[b]), std::min(el[a], el[b]));
  }
  full_sym_ = build_sym_pattern(nred, sym_entries);
  qm_ = build_pattern(nred, nred, qm_entries);
  uu_ = build_sym_pattern(nfu, uu_entries);
  dd_ = build_sym_pattern(m_, dd_entries);
}

void Assembler::impose_dirichlet(State& state, double t) const {
  for (int k = 0; k < dirichlet_.count(); ++k) state.U[dirichlet_.dofs[k]] = dirichlet_.values[k](t);
}

Eigen::VectorXd Assembler::reduce_stacked(const Eigen::VectorXd& ru, const Eigen::VectorXd& rd) const {
  const int nfu = free_u_count();
  Eigen::VectorXd out(nfu + m_);
  for (int k = 0; k < nfu; ++k) out[k] = ru[free_u_[k]];
  out.segment(nfu, m_) = rd;
  return out;
}

void Assembler::apply_stacked_step(State& state, const Eigen::VectorXd& delta, double alpha) const {
  const int nfu = free_u_count();
  for (int k = 0; k < nfu; ++k) state.U[free_u_[k]] += alpha * delta[k];
  state.D += alpha * delta.segment(nfu, m_);
}

// Shared element kernel. jacobian_kind: 0 none, 1 full stacked symmetric,
// 2 quasi-monolithic stacked, 3 uu block, 4 dd block.
void Assembler::element_loop(const State& state, AssemblyMode mode, const Eigen::VectorXd* d_tilde,
                             bool want_residual, bool want_energy, int jacobian_kind,
                             Eigen::VectorXd* ru, Eigen::VectorXd* rd, double* energy) const {
  if (state.U.size() != 2 * m_ || state.D.size() != m_ || state.D_prev.size() != m_)
    throw std::invalid_argument("assembler: state dimension mismatch");
  if (mode == AssemblyMode::quasi_mono && d_tilde == nullptr)
    throw std::invalid_argument("assembler: quasi_mono mode needs an extrapolated field");
  if (d_tilde && d_tilde->size() != m_) throw std::invalid_argument("assembler: d_tilde dimension mismatch");

  const Mesh& mesh = *mesh_;
  const int nfu = free_u_count();
  const int nelem = mesh.element_count();

  SparseSymmetric* sym_target = jacobian_kind == 1 ? &full_sym_ : jacobian_kind == 3 ? &uu_ : jacobian_kind == 4 ? &dd_ : nullptr;
  CscMatrix* csc_target = jacobian_kind == 2 ? &qm_ : nullptr;
  if (sym_target) sym_target->set_zero();
  if (csc_target) csc_target->set_zero();
  if (want_residual) {
    ru->setZero(2 * m_);
    rd->setZero(m_);
  }
  if (want_energy) *energy = 0.0;

  const int nthreads = nelem >= 512 ? env_threads() : 1;

  auto process_range = [&](int ebegin, int eend, Eigen::VectorXd* t_ru, Eigen::VectorXd* t_rd,
                           double* t_energy, std::vector<double>* t_sym, std::vector<double>* t_csc) {
    double ke[12][12];
    for (int e = ebegin; e < eend; ++e) {
      const auto& el = mesh.elements[e];
      double ux[4], uy[4], dl[4], dpl[4], dtl[4];
      for (int a = 0; a < 4; ++a) {
        ux[a] = state.U[2 * el[a]];
        uy[a] = state.U[2 * el[a] + 1];
        dl[a] = state.D[el[a]];
        dpl[a] = state.D_prev[el[a]];
        dtl[a] = d_tilde ? (*d_tilde)[el[a]] : 0.0;
      }
      const bool want_k = jacobian_kind != 0;
      if (want_k)
        for (auto& row : ke) std::fill(std::begin(row), std::end(row), 0.0);
      double fe_u[8] = {0};
      double fe_d[4] = {0};
      double ee = 0.0;

      for (int q = 0; q < 4; ++q) {
        const GaussPoint& g = gauss_[4 * e + q];
        Sym2 eps;
        double d = 0, dp = 0, dt = 0, gx = 0, gy = 0;
        for (int a = 0; a < 4; ++a) {
          eps.xx += g.dndx[a][0] * ux[a];
          eps.yy += g.dndx[a][1] * uy[a];
          eps.xy += 0.5 * (g.dndx[a][1] * ux[a] + g.dndx[a][0] * uy[a]);
          d += g.n[a] * dl[a];
          dp += g.n[a] * dpl[a];
          dt += g.n[a] * dtl[a];
          gx += g.dndx[a][0] * dl[a];
          gy += g.dndx[a][1] * dl[a];
        }
        const SplitState sp = spectral_split(eps, mat_);
        const double deg = mode == AssemblyMode::quasi_mono ? dt : d;
        const double gu = (1.0 - deg) * (1.0 - deg);
        const double s_pe = sp.sigma_plus.ddot(eps);  // sigma+ : e = 2 psi+
        const double viol = std::min(0.0, d - dp);
        const double w = g.jxw;

        if (want_residual || want_k) {
          const Sym2 sig_eff = sp.sigma_plus * gu + sp.sigma_minus;
          if (want_residual) {
            for (int a = 0; a < 4; ++a) {
              fe_u[2 * a] += (g.dndx[a][0] * sig_eff.xx + g.dndx[a][1] * sig_eff.xy) * w;
              fe_u[2 * a + 1] += (g.dndx[a][1] * sig_eff.yy + g.dndx[a][0] * sig_eff.xy) * w;
              fe_d[a] += (-(1.0 - d) * g.n[a] * s_pe +
                          (3.0 * mat_.Gc / 8.0) * (g.n[a] / mat_.l + 2.0 * mat_.l * (gx * g.dndx[a][0] + gy * g.dndx[a][1])) +
                          mat_.gamma * g.n[a] * viol) *
                         w;
            }
          }
          if (want_k) {
            const bool with_uu = jacobian_kind != 4;
            const bool with_dd = jacobian_kind == 1 || jacobian_kind == 2 || jacobian_kind == 4;
            const bool with_ud = jacobian_kind == 1;
            const bool with_du = jacobian_kind == 1 || jacobian_kind == 2;
            if (with_uu) {
              const Tangent c = gu * sp.tangent_plus + sp.tangent_minus;
              for (int b = 0; b < 4; ++b) {
                // C * B_b columns (x and y nodal directions)
                const double cb[3][2] = {
                    {c(0, 0) * g.dndx[b][0] + c(0, 2) * g.dndx[b][1], c(0, 1) * g.dndx[b][1] + c(0, 2) * g.dndx[b][0]},
                    {c(1, 0) * g.dndx[b][0] + c(1, 2) * g.dndx[b][1], c(1, 1) * g.dndx[b][1] + c(1, 2) * g.dndx[b][0]},
                    {c(2, 0) * g.dndx[b][0] + c(2, 2) * g.dndx[b][1], c(2, 1) * g.dndx[b][1] + c(2, 2) * g.dndx[b][0]}};
                for (int a = 0; a < 4; ++a) {
                  for (int j = 0; j < 2; ++j) {
                    ke[2 * a][2 * b + j] += (g.dndx[a][0] * cb[0][j] + g.dndx[a][1] * cb[2][j]) * w;
                    ke[2 * a + 1][2 * b + j] += (g.dndx[a][1] * cb[1][j] + g.dndx[a][0] * cb[2][j]) * w;
                  }
                }
              }
            }
            if (with_ud || with_du) {
              // B_a^T sigma+ per node (the d-derivative of the momentum
              // residual and its transpose).
              double bs[4][2];
              for (int a = 0; a < 4; ++a) {
                bs[a][0] = g.dndx[a][0] * sp.sigma_plus.xx + g.dndx[a][1] * sp.sigma_plus.xy;
                bs[a][1] = g.dndx[a][1] * sp.sigma_plus.yy + g.dndx[a][0] * sp.sigma_plus.xy;
              }
              const double f = -2.0 * (1.0 - d) * w;
              for (int a = 0; a < 4; ++a)
                for (int b = 0; b < 4; ++b)
                  for (int j = 0; j < 2; ++j) {
                    if (with_ud) ke[2 * a + j][8 + b] += f * g.n[b] * bs[a][j];
                    if (with_du) ke[8 + a][2 * b + j] += f * g.n[a] * bs[b][j];
                  }
            }
            if (with_dd) {
              const double hneg = (d - dp) <= 0.0 ? 1.0 : 0.0;
              for (int a = 0; a < 4; ++a)
                for (int b = 0; b < 4; ++b)
                  ke[8 + a][8 + b] += (g.n[a] * g.n[b] * s_pe +
                                       (3.0 * mat_.Gc / 8.0) * 2.0 * mat_.l *
                                           (g.dndx[a][0] * g.dndx[b][0] + g.dndx[a][1] * g.dndx[b][1]) +
                                       mat_.gamma * g.n[a] * g.n[b] * hneg) *
                                      w;
            }
          }
        }
        if (want_energy) {
          const double gd = (1.0 - d) * (1.0 - d);
          ee += (0.5 * (sp.sigma_plus * gd + sp.sigma_minus).ddot(eps) +
                 (3.0 * mat_.Gc / 8.0) * (d / mat_.l + mat_.l * (gx * gx + gy * gy)) +
                 0.5 * mat_.gamma * viol * viol) *
                w;
        }
      }

      // Scatter.
      if (want_residual) {
        for (int a = 0; a < 4; ++a) {
          (*t_ru)[2 * el[a]] += fe_u[2 * a];
          (*t_ru)[2 * el[a] + 1] += fe_u[2 * a + 1];
          (*t_rd)[el[a]] += fe_d[a];
        }
      }
      if (want_energy) *t_energy += ee;
      if (jacobian_kind == 1 || jacobian_kind == 2) {
        int red[12];
        for (int a = 0; a < 4; ++a) {
          red[2 * a] = red_u_[2 * el[a]];
          red[2 * a + 1] = red_u_[2 * el[a] + 1];
          red[8 + a] = nfu + el[a];
        }
        if (jacobian_kind == 1) {
          for (int i = 0; i < 12; ++i) {
            if (red[i] < 0) continue;
            for (int j = 0; j <= i; ++j) {
              if (red[j] < 0) continue;
              // symmetric scatter: lower triangle of the reduced matrix
              int r = red[i], c = red[j];
              if (r < c) std::swap(r, c);
              const auto begin = full_sym_.row_idx.begin() + full_sym_.col_ptr[c];
              const auto end = full_sym_.row_idx.begin() + full_sym_.col_ptr[c + 1];
              const auto it = std::lower_bound(begin, end, r);
              const size_t off = it - full_sym_.row_idx.begin();
              (t_sym ? (*t_sym)[off] : full_sym_.values[off]) += 0.5 * (ke[i][j] + ke[j][i]);
            }
          }
        } else {
          for (int i = 0; i < 12; ++i) {
            if (red[i] < 0) continue;
            for (int j = 0; j < 12; ++j) {
              if (red[j] < 0) continue;
              if (i < 8 && j >= 8) continue;  // structural zero in quasi-mono mode
              const auto begin = qm_.row_idx.begin() + qm_.col_ptr[red[j]];
              const auto end = qm_.row_idx.begin() + qm_.col_ptr[red[j] + 1];
              const auto it = std::lower_bound(begin, end, red[i]);
              const size_t off = it - qm_.row_idx.begin();
              (t_csc ? (*t_csc)[off] : qm_.values[off]) += ke[i][j];
            }
          }
        }
      } else if (jacobian_kind == 3) {
        for (int a = 0; a < 4; ++a)
          for (int i = 0; i < 2; ++i) {
            const int ri = red_u_[2 * el[a] + i];
            if (ri < 0) continue;
            for (int b = 0; b < 4; ++b)
              for (int j = 0; j < 2; ++j) {
                const int rj = red_u_[2 * el[b] + j];
                if (rj < 0 || rj > ri) continue;
                int r = ri, c = rj;
                const auto begin = uu_.row_idx.begin() + uu_.col_ptr[c];
                const auto it = std::lower_bound(begin, uu_.row_idx.begin() + uu_.col_ptr[c + 1], r);
                const size_t off = it - uu_.row_idx.begin();
                (t_sym ? (*t_sym)[off] : uu_.values[off]) += 0.5 * (ke[2 * a + i][2 * b + j] + ke[2 * b + j][2 * a + i]);
              }
          }
      } else if (jacobian_kind == 4) {
        for (int a = 0; a < 4; ++a)
          for (int b = 0; b < 4; ++b) {
            if (el[b] > el[a]) continue;
            const auto begin = dd_.row_idx.begin() + dd_.col_ptr[el[b]];
            const auto it = std::lower_bound(begin, dd_.row_idx.begin() + dd_.col_ptr[el[b] + 1], el[a]);
            const size_t off = it - dd_.row_idx.begin();
            (t_sym ? (*t_sym)[off] : dd_.values[off]) += 0.5 * (ke[8 + a][8 + b] + ke[8 + b][8 + a]);
          }
      }
    }
  };

  if (nthreads == 1) {
    process_range(0, nelem, ru, rd, energy, nullptr, nullptr);
    return;
  }

  // Deterministic parallel assembly: contiguous ranges, per-thread value
  // buffers, merged in thread order.
  std::vector<Eigen::VectorXd> t_ru(nthreads), t_rd(nthreads);
  std::vector<double> t_energy(nthreads, 0.0);
  std::vector<std::vector<double>> t_sym(nthreads), t_csc(nthreads);
  std::vector<std::thread> threads;
  const size_t sym_n = sym_target ? sym_target->values.size() : 0;
  const size_t csc_n = csc_target ? csc_target->values.size() : 0;
  for (int t = 0; t < nthreads; ++t) {
    const int b = nelem * t / nthreads;
    const int e = nelem * (t + 1) / nthreads;
    threads.emplace_back([&, t, b, e] {
      if (want_residual) {
        t_ru[t].setZero(2 * m_);
        t_rd[t].setZero(m_);
      }
      if (sym_n) t_sym[t].assign(sym_n, 0.0);
      if (csc_n) t_csc[t].assign(csc_n, 0.0);
      process_range(b, e, want_residual ? &t_ru[t] : nullptr, want_residual ? &t_rd[t] : nullptr,
                    &t_energy[t], sym_n ? &t_sym[t] : nullptr, csc_n ? &t_csc[t] : nullptr);
    });
  }
  for (auto& th : threads) th.join();
  for (int t = 0; t < nthreads; ++t) {
    if (want_residual) {
      *ru += t_ru[t];
      *rd += t_rd[t];
    }
    if (want_energy) *energy += t_energy[t];
    if (sym_n)
      for (size_t k = 0; k < sym_n; ++k) sym_target->values[k] += t_sym[t][k];
    if (csc_n)
      for (size_t k = 0; k < csc_n; ++k) csc_target->values[k] += t_csc[t][k];
  }
}

void Assembler::residual(const State& state, AssemblyMode mode, const Eigen::VectorXd* d_tilde,
                         Eigen::VectorXd& ru, Eigen::VectorXd& rd) const {
  element_loop(state, mode, d_tilde, true, false, 0, &ru, &rd, nullptr);
}

double Assembler::total_energy(const State& state) const {
  double e = 0.0;
  element_loop(state, AssemblyMode::full, nullptr, false, true, 0, nullptr, nullptr, &e);
  return e;
}

const SparseSymmetric& Assembler::jacobian_full_reduced(const State& state) {
  element_loop(state, AssemblyMode::full, nullptr, false, false, 1, nullptr, nullptr, nullptr);
  return full_sym_;
}

const CscMatrix& Assembler::jacobian_qm_reduced(const State& state, const Eigen::VectorXd& d_tilde) {
  element_loop(state, AssemblyMode::quasi_mono, &d_tilde, false, false, 2, nullptr, nullptr, nullptr);
  return qm_;
}

const SparseSymmetric& Assembler::jacobian_uu_reduced(const State& state) {
  element_loop(state, AssemblyMode::full, nullptr, false, false, 3, nullptr, nullptr, nullptr);
  return uu_;
}

const SparseSymmetric& Assembler::jacobian_dd(const State& state) {
  element_loop(state, AssemblyMode::full, nullptr, false, false, 4, nullptr, nullptr, nullptr);
  return dd_;
}

double Assembler::reaction_force(const State& state, const std::string& set, int component,
                                 AssemblyMode mode, const Eigen::VectorXd* d_tilde) const {
  auto it = mesh_->boundary_sets.find(set);
  if (it == mesh_->boundary_sets.end()) throw StructuralError("unknown boundary set '" + set + "'");
  Eigen::VectorXd ru, rd;
  residual(state, mode, d_tilde, ru, rd);
  double sum = 0.0;
  for (int node : it->second) sum += ru[2 * node + component];
  return sum;
}

std::vector<double> ReducedSystem::recover(const std::vector<double>& reduced_solution) const {
  std::vector<double> full = prescribed;
  for (size_t k = 0; k < free_index.size(); ++k) full[free_index[k]] = reduced_solution[k];
  return full;
}

ReducedSystem apply_dirichlet_reduction(const CscMatrix& j, const std::vector<double>& r,
                                        const DirichletMap& bc, double t) {
  const int n = j.rows;
  if (j.cols != n || static_cast<int>(r.size()) != n)
    throw std::invalid_argument("apply_dirichlet_reduction: dimension mismatch");
  std::vector<double> g(n, 0.0);
  std::vector<char> fixed(n, 0);
  for (int k = 0; k < bc.count(); ++k) {
    const int dof = bc.dofs[k];
    if (dof < 0 || dof >= n) throw std::out_of_range("apply_dirichlet_reduction: constrained DOF out of range");
    fixed[dof] = 1;
    g[dof] = bc.values[k](t);
  }
  ReducedSystem out;
  std::vector<int> red(n, -1);
  for (int i = 0; i < n; ++i) {
    if (!fixed[i]) {
      red[i] = static_cast<int>(out.free_index.size());
      out.free_index.push_back(i);
    }
  }
  out.prescribed = g;
  const int nred = static_cast<int>(out.free_index.size());
  out.rhs.assign(nred, 0.0);
  for (int i = 0; i < n; ++i)
    if (red[i] >= 0) out.rhs[red[i]] = -r[i];
  std::vector<std::pair<int, int>> entries;
  std::vector<double> vals;
  for (int c = 0; c < n; ++c) {
    for (int p = j.col_ptr[c]; p < j.col_ptr[c + 1]; ++p) {
      const int rr = j.row_idx[p];
      const double v = j.values[p];
      if (fixed[c]) {
        // Move the known column to the right-hand side.
        if (red[rr] >= 0) out.rhs[red[rr]] -= v * g[c];
      } else if (red[rr] >= 0) {
        entries.emplace_back(red[rr], red[c]);
        vals.push_back(v);
      }
    }
  }
  // entries are unique and already column-sorted; build directly.
  out.matrix = build_pattern(nred, nred, entries);
  for (size_t k = 0; k < vals.size(); ++k) out.matrix.values[k] = vals[k];
  return out;
}

}  // namespace pfrac
