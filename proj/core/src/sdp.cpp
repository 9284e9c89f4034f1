#include "rosyn/sdp.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <iostream>
#include <ostream>
#include <stdexcept>
#include <string>

namespace rosyn {

// ---------------------------------------------------------------------------
// SdpProblem

SdpProblem::SdpProblem(int num_vars)
    : c_(Eigen::VectorXd::Zero(num_vars)),
      lower_(num_vars, std::numeric_limits<double>::quiet_NaN()) {
  if (num_vars < 0) throw std::invalid_argument("negative variable count");
}

int SdpProblem::add_block(int size) {
  if (size < 1) throw std::invalid_argument("block size must be positive");
  Block b;
  b.size = size;
  b.f0 = Eigen::MatrixXd::Zero(size, size);
  blocks_.push_back(std::move(b));
  return static_cast<int>(blocks_.size()) - 1;
}

void SdpProblem::set_objective(const Eigen::VectorXd& c) {
  if (c.size() != c_.size()) throw std::invalid_argument("objective size");
  c_ = c;
}

void SdpProblem::add_constant_entry(int block, int r, int c, double value) {
  Block& b = blocks_.at(block);
  if (r < 0 || c < 0 || r >= b.size || c >= b.size) {
    throw std::invalid_argument("constant entry out of block range");
  }
  b.f0(r, c) += value;
  if (r != c) b.f0(c, r) += value;
}

void SdpProblem::add_entry(int block, int r, int c, int var, double value) {
  Block& b = blocks_.at(block);
  if (r < 0 || c < 0 || r >= b.size || c >= b.size) {
    throw std::invalid_argument("coefficient entry out of block range");
  }
  if (var < 0 || var >= num_vars()) {
    throw std::invalid_argument("coefficient variable out of range");
  }
  if (value == 0.0) return;
  b.entries.push_back({var, r, c, value});
  if (r != c) b.entries.push_back({var, c, r, value});
}

void SdpProblem::add_constant(int block, const Eigen::MatrixXd& m) {
  Block& b = blocks_.at(block);
  if (m.rows() != b.size || m.cols() != b.size) {
    throw std::invalid_argument("constant matrix has wrong size");
  }
  const double asym = (m - m.transpose()).cwiseAbs().maxCoeff();
  if (asym > 1e-10) {
    std::cerr << "rosyn::SdpProblem: symmetrizing constant with asymmetry "
              << asym << "\n";
  }
  b.f0 += 0.5 * (m + m.transpose());
}

void SdpProblem::add_matrix(int block, int var, const Eigen::MatrixXd& m) {
  Block& b = blocks_.at(block);
  if (m.rows() != b.size || m.cols() != b.size) {
    throw std::invalid_argument("coefficient matrix has wrong size");
  }
  const double asym = (m - m.transpose()).cwiseAbs().maxCoeff();
  if (asym > 1e-10) {
    std::cerr << "rosyn::SdpProblem: symmetrizing coefficient with asymmetry "
              << asym << "\n";
  }
  const Eigen::MatrixXd s = 0.5 * (m + m.transpose());
  for (int r = 0; r < b.size; ++r) {
    for (int c = r; c < b.size; ++c) {
      if (s(r, c) != 0.0) add_entry(block, r, c, var, s(r, c));
    }
  }
}

void SdpProblem::add_equality(const Eigen::VectorXd& row, double rhs) {
  if (row.size() != c_.size()) throw std::invalid_argument("equality size");
  eq_rows_.push_back(row);
  eq_rhs_.push_back(rhs);
}

void SdpProblem::set_lower_bound(int var, double bound) {
  if (var < 0 || var >= num_vars()) throw std::invalid_argument("bound var");
  lower_[var] = bound;
}

void SdpProblem::dump(std::ostream& os) const {
  os << "sdp vars " << num_vars() << " blocks " << num_blocks() << "\n";
  for (int i = 0; i < num_vars(); ++i) {
    if (c_(i) != 0.0) os << "c " << i << " " << c_(i) << "\n";
  }
  for (int b = 0; b < num_blocks(); ++b) {
    const Block& blk = blocks_[b];
    os << "block " << b << " size " << blk.size << "\n";
    for (int r = 0; r < blk.size; ++r) {
      for (int c = r; c < blk.size; ++c) {
        if (blk.f0(r, c) != 0.0) {
          os << b << " " << r << " " << c << " -1 " << blk.f0(r, c) << "\n";
        }
      }
    }
    for (const Entry& e : blk.entries) {
      if (e.row <= e.col) {
        os << b << " " << e.row << " " << e.col << " " << e.var << " "
           << e.value << "\n";
      }
    }
  }
  for (size_t r = 0; r < eq_rhs_.size(); ++r) {
    os << "eq";
    for (int i = 0; i < eq_rows_[r].size(); ++i) os << " " << eq_rows_[r](i);
    os << " rhs " << eq_rhs_[r] << "\n";
  }
  for (int i = 0; i < num_vars(); ++i) {
    if (!std::isnan(lower_[i])) os << "lb " << i << " " << lower_[i] << "\n";
  }
}

const char* to_string(SdpStatus s) {
  switch (s) {
    case SdpStatus::Optimal: return "optimal";
    case SdpStatus::Infeasible: return "infeasible";
    case SdpStatus::Unbounded: return "unbounded";
    case SdpStatus::MaxIter: return "max_iter";
  }
  return "unknown";
}

std::pair<double, Eigen::VectorXd> min_eig_vec(const Eigen::MatrixXd& S) {
  if (S.rows() != S.cols()) throw std::invalid_argument("not square");
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(0.5 * (S + S.transpose()));
  Eigen::VectorXd v = es.eigenvectors().col(0);
  const double scale = v.cwiseAbs().maxCoeff();
  for (int i = 0; i < v.size(); ++i) {
    if (std::abs(v(i)) > 1e-12 * scale) {
      if (v(i) < 0) v = -v;
      break;
    }
  }
  return {es.eigenvalues()(0), v};
}

// ---------------------------------------------------------------------------
// Interior-point core: minimize c'y s.t. F_0^b + sum_i y_i F_i^b >= 0,
// solved on the homogeneous self-dual embedding of the conic pair
//   (P) min <F0,X> s.t. <F_i,X> = c_i, X >= 0      (multiplier side)
//   (D) the LMI problem itself.
// Residual conventions:
//   rp = c*tau - <F,X>,  Rd = F0*tau + sum_i y_i F_i - S,
//   rg = -c'y - <F0,X> - kappa.

namespace {

using Entry = SdpProblem::Entry;

struct ConicBlock {
  int size = 0;
  Eigen::MatrixXd f0;
  std::vector<Entry> entries;
};

struct ConicProblem {
  Eigen::VectorXd c;
  std::vector<ConicBlock> blocks;
};

void accumulate_afx(const std::vector<Entry>& entries, const Eigen::MatrixXd& m,
                    Eigen::VectorXd& out) {
  for (const auto& e : entries) out(e.var) += e.value * m(e.row, e.col);
}

void accumulate_fsum(const std::vector<Entry>& entries,
                     const Eigen::VectorXd& y, Eigen::MatrixXd& dst) {
  for (const auto& e : entries) dst(e.row, e.col) += e.value * y(e.var);
}

// Largest alpha with P + alpha*D >= 0 for P = L L' > 0.
double max_psd_step(const Eigen::LLT<Eigen::MatrixXd>& llt,
                    const Eigen::MatrixXd& d) {
  const Eigen::MatrixXd l = llt.matrixL();
  Eigen::MatrixXd m = l.triangularView<Eigen::Lower>().solve(d);
  m = l.triangularView<Eigen::Lower>().solve(m.transpose()).eval();
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(0.5 * (m + m.transpose()),
                                                    Eigen::EigenvaluesOnly);
  const double lam = es.eigenvalues()(0);
  if (lam >= 0) return std::numeric_limits<double>::infinity();
  return -1.0 / lam;
}

struct NtScaling {
  // W = R R' with R' S R = R^{-1} X R^{-T} = diag(sigma).
  Eigen::MatrixXd R, Rt, Rinv, W;
  Eigen::VectorXd sigma;
};

NtScaling nt_scaling(const Eigen::LLT<Eigen::MatrixXd>& lltX,
                     const Eigen::LLT<Eigen::MatrixXd>& lltS) {
  const Eigen::MatrixXd Lx = lltX.matrixL();
  const Eigen::MatrixXd Ls = lltS.matrixL();
  Eigen::JacobiSVD<Eigen::MatrixXd> svd(
      Ls.transpose() * Lx, Eigen::ComputeFullU | Eigen::ComputeFullV);
  NtScaling nt;
  nt.sigma = svd.singularValues();
  nt.R = Lx * svd.matrixV() * nt.sigma.cwiseSqrt().cwiseInverse().asDiagonal();
  nt.Rt = nt.R.transpose();
  // R^{-1} = sqrt(Sigma) V' Lx^{-1}
  Eigen::MatrixXd lxinv_t = Lx.triangularView<Eigen::Lower>().solve(
      Eigen::MatrixXd::Identity(Lx.rows(), Lx.cols()));
  nt.Rinv = nt.sigma.cwiseSqrt().asDiagonal() * svd.matrixV().transpose() *
            lxinv_t;
  nt.W = nt.R * nt.Rt;
  return nt;
}

struct IpmState {
  std::vector<Eigen::MatrixXd> X, S;
  Eigen::VectorXd y;
  double tau = 1.0, kappa = 1.0;
};

struct Residuals {
  Eigen::VectorXd rp;
  std::vector<Eigen::MatrixXd> Rd;
  double rg = 0.0;
  double rp_norm = 0.0, rd_norm = 0.0;
};

Residuals compute_residuals(const ConicProblem& p, const IpmState& st) {
  const int d = static_cast<int>(p.c.size());
  Residuals r;
  r.rp = p.c * st.tau;
  double f0x = 0.0;
  r.Rd.resize(p.blocks.size());
  for (size_t b = 0; b < p.blocks.size(); ++b) {
    const ConicBlock& blk = p.blocks[b];
    Eigen::VectorXd afx = Eigen::VectorXd::Zero(d);
    accumulate_afx(blk.entries, st.X[b], afx);
    r.rp -= afx;
    Eigen::MatrixXd rd = blk.f0 * st.tau - st.S[b];
    accumulate_fsum(blk.entries, st.y, rd);
    r.Rd[b] = 0.5 * (rd + rd.transpose());
    f0x += (blk.f0.array() * st.X[b].array()).sum();
  }
  r.rg = -p.c.dot(st.y) - f0x - st.kappa;
  r.rp_norm = r.rp.norm();
  double rd2 = 0.0;
  for (const auto& m : r.Rd) rd2 += m.squaredNorm();
  r.rd_norm = std::sqrt(rd2);
  return r;
}

struct Direction {
  std::vector<Eigen::MatrixXd> dX, dS;
  Eigen::VectorXd dy;
  double dtau = 0.0, dkappa = 0.0;
};

struct SchurContext {
  std::vector<NtScaling> nt;
  Eigen::MatrixXd M;
  Eigen::LDLT<Eigen::MatrixXd> mldlt;
  Eigen::VectorXd u;   // <F_i, W F0 W>
  double f0wf0 = 0.0;  // <F0, W F0 W>
  Eigen::VectorXd afx_wrdw;
  double f0_wrdw = 0.0;
  std::vector<Eigen::MatrixXd> WRdW;
};

bool build_schur(const ConicProblem& p, const Residuals& res,
                 const std::vector<Eigen::LLT<Eigen::MatrixXd>>& lltX,
                 const std::vector<Eigen::LLT<Eigen::MatrixXd>>& lltS,
                 SchurContext& ctx) {
  const int d = static_cast<int>(p.c.size());
  ctx.nt.clear();
  ctx.M = Eigen::MatrixXd::Zero(d, d);
  ctx.u = Eigen::VectorXd::Zero(d);
  ctx.f0wf0 = 0.0;
  ctx.afx_wrdw = Eigen::VectorXd::Zero(d);
  ctx.f0_wrdw = 0.0;
  ctx.WRdW.resize(p.blocks.size());

  for (size_t b = 0; b < p.blocks.size(); ++b) {
    const ConicBlock& blk = p.blocks[b];
    ctx.nt.push_back(nt_scaling(lltX[b], lltS[b]));
    const Eigen::MatrixXd& W = ctx.nt.back().W;

    // M_ij += <F_i, W F_j W> from the mirrored entry lists: each unordered
    // entry pair contributes to one ordered cell and its mirror.
    const auto& es = blk.entries;
    for (size_t t = 0; t < es.size(); ++t) {
      for (size_t s = t; s < es.size(); ++s) {
        const double v = es[t].value * es[s].value *
                         W(es[t].row, es[s].row) * W(es[t].col, es[s].col);
        const int i = es[t].var, j = es[s].var;
        if (i == j) {
          ctx.M(i, i) += (t == s) ? v : 2.0 * v;
        } else if (i < j) {
          ctx.M(i, j) += v;
        } else {
          ctx.M(j, i) += v;
        }
      }
    }

    const Eigen::MatrixXd WF0W = W * blk.f0 * W;
    accumulate_afx(blk.entries, WF0W, ctx.u);
    ctx.f0wf0 += (blk.f0.array() * WF0W.array()).sum();

    ctx.WRdW[b] = W * res.Rd[b] * W;
    accumulate_afx(blk.entries, ctx.WRdW[b], ctx.afx_wrdw);
    ctx.f0_wrdw += (blk.f0.array() * ctx.WRdW[b].array()).sum();
  }
  ctx.M = Eigen::MatrixXd(ctx.M.selfadjointView<Eigen::Upper>());

  const double ridge = 1e-13 * (1.0 + ctx.M.trace() / std::max(1, d));
  Eigen::MatrixXd Mr = ctx.M;
  Mr.diagonal().array() += ridge;
  ctx.mldlt.compute(Mr);
  return ctx.mldlt.info() == Eigen::Success;
}

Eigen::VectorXd solve_refined(const SchurContext& ctx,
                              const Eigen::VectorXd& rhs) {
  Eigen::VectorXd x = ctx.mldlt.solve(rhs);
  x += ctx.mldlt.solve(rhs - ctx.M * x);
  return x;
}

Direction solve_direction(const ConicProblem& p, const IpmState& st,
                          const Residuals& res, const SchurContext& ctx,
                          const std::vector<Eigen::MatrixXd>& rhs_comp,
                          double rhs_tk, double eta) {
  const int d = static_cast<int>(p.c.size());
  Eigen::VectorXd q = Eigen::VectorXd::Zero(d);
  double f0_rhs = 0.0;
  for (size_t b = 0; b < p.blocks.size(); ++b) {
    accumulate_afx(p.blocks[b].entries, rhs_comp[b], q);
    f0_rhs += (p.blocks[b].f0.array() * rhs_comp[b].array()).sum();
  }
  q -= eta * ctx.afx_wrdw;
  q -= eta * res.rp;

  const Eigen::VectorXd y1 = solve_refined(ctx, p.c + ctx.u);
  const Eigen::VectorXd y2 = solve_refined(ctx, q);

  const double lhs_tau = ctx.f0wf0 + st.kappa / st.tau - (ctx.u - p.c).dot(y1);
  const double rhs_tau = -eta * res.rg + f0_rhs - eta * ctx.f0_wrdw +
                         rhs_tk / st.tau - (ctx.u - p.c).dot(y2);

  Direction dir;
  dir.dtau = (std::abs(lhs_tau) > 1e-300) ? rhs_tau / lhs_tau : 0.0;
  dir.dy = y2 - dir.dtau * y1;
  dir.dkappa = (rhs_tk - st.kappa * dir.dtau) / st.tau;
  dir.dX.resize(p.blocks.size());
  dir.dS.resize(p.blocks.size());
  for (size_t b = 0; b < p.blocks.size(); ++b) {
    const ConicBlock& blk = p.blocks[b];
    Eigen::MatrixXd dS = blk.f0 * dir.dtau + eta * res.Rd[b];
    accumulate_fsum(blk.entries, dir.dy, dS);
    dS = 0.5 * (dS + dS.transpose()).eval();
    dir.dS[b] = dS;
    const Eigen::MatrixXd& W = ctx.nt[b].W;
    Eigen::MatrixXd dX = rhs_comp[b] - W * dS * W;
    dir.dX[b] = 0.5 * (dX + dX.transpose());
  }
  return dir;
}

double max_step(const IpmState& st,
                const std::vector<Eigen::LLT<Eigen::MatrixXd>>& lltX,
                const std::vector<Eigen::LLT<Eigen::MatrixXd>>& lltS,
                const Direction& dir) {
  double alpha = std::numeric_limits<double>::infinity();
  for (size_t b = 0; b < st.X.size(); ++b) {
    alpha = std::min(alpha, max_psd_step(lltX[b], dir.dX[b]));
    alpha = std::min(alpha, max_psd_step(lltS[b], dir.dS[b]));
  }
  if (dir.dtau < 0) alpha = std::min(alpha, -st.tau / dir.dtau);
  if (dir.dkappa < 0) alpha = std::min(alpha, -st.kappa / dir.dkappa);
  return alpha;
}

}  // namespace

SdpSolution solve(const SdpProblem& problem, const SdpOptions& opts) {
  const int d0 = problem.num_vars();
  const int num_user_blocks = problem.num_blocks();

  // Lower bounds become 1x1 blocks.
  ConicProblem full;
  full.c = problem.objective();
  for (int b = 0; b < num_user_blocks; ++b) {
    const auto& src = problem.block(b);
    full.blocks.push_back({src.size, src.f0, src.entries});
  }
  for (int i = 0; i < d0; ++i) {
    const double lo = problem.lower_bounds()[i];
    if (!std::isnan(lo)) {
      ConicBlock blk;
      blk.size = 1;
      blk.f0 = Eigen::MatrixXd::Constant(1, 1, -lo);
      blk.entries.push_back({i, 0, 0, 1.0});
      full.blocks.push_back(std::move(blk));
    }
  }

  SdpSolution sol;

  // Equality elimination through a nullspace basis.
  Eigen::VectorXd x_part = Eigen::VectorXd::Zero(d0);
  Eigen::MatrixXd null_basis = Eigen::MatrixXd::Identity(d0, d0);
  const int num_eq = problem.num_equalities();
  if (num_eq > 0) {
    Eigen::MatrixXd Aeq(num_eq, d0);
    Eigen::VectorXd beq(num_eq);
    for (int r = 0; r < num_eq; ++r) {
      Aeq.row(r) = problem.equality_rows()[r].transpose();
      beq(r) = problem.equality_rhs()[r];
    }
    Eigen::ColPivHouseholderQR<Eigen::MatrixXd> qr(Aeq);
    x_part = qr.solve(beq);
    const double eq_res = (Aeq * x_part - beq).norm();
    if (eq_res > 1e-8 * (1.0 + beq.norm())) {
      sol.status = SdpStatus::Infeasible;
      sol.x = x_part;
      sol.eq_residual = eq_res;
      return sol;
    }
    Eigen::ColPivHouseholderQR<Eigen::MatrixXd> qrt(Aeq.transpose());
    const int rank = static_cast<int>(qrt.rank());
    Eigen::MatrixXd Qfull =
        qrt.householderQ() * Eigen::MatrixXd::Identity(d0, d0);
    null_basis = Qfull.rightCols(d0 - rank);
  }
  const int d = static_cast<int>(null_basis.cols());

  ConicProblem p;
  double obj_offset = 0.0;
  if (num_eq > 0) {
    p.c = null_basis.transpose() * full.c;
    obj_offset = full.c.dot(x_part);
    for (const ConicBlock& src : full.blocks) {
      ConicBlock blk;
      blk.size = src.size;
      blk.f0 = src.f0;
      accumulate_fsum(src.entries, x_part, blk.f0);
      std::vector<Eigen::MatrixXd> dense(
          d0, Eigen::MatrixXd::Zero(src.size, src.size));
      for (const auto& e : src.entries) dense[e.var](e.row, e.col) += e.value;
      for (int j = 0; j < d; ++j) {
        Eigen::MatrixXd fj = Eigen::MatrixXd::Zero(src.size, src.size);
        for (int i = 0; i < d0; ++i) {
          if (null_basis(i, j) != 0.0) fj += null_basis(i, j) * dense[i];
        }
        for (int r = 0; r < src.size; ++r) {
          for (int c = 0; c < src.size; ++c) {
            if (fj(r, c) != 0.0) blk.entries.push_back({j, r, c, fj(r, c)});
          }
        }
      }
      p.blocks.push_back(std::move(blk));
    }
  } else {
    p = std::move(full);
  }

  auto finalize = [&](SdpSolution& s, const Eigen::VectorXd& x_reduced) {
    s.x = x_part + null_basis * x_reduced;
    s.block_min_eig.clear();
    for (int b = 0; b < num_user_blocks; ++b) {
      const auto& blk = problem.block(b);
      Eigen::MatrixXd slack = blk.f0;
      accumulate_fsum(blk.entries, s.x, slack);
      Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(
          0.5 * (slack + slack.transpose()), Eigen::EigenvaluesOnly);
      s.block_min_eig.push_back(es.eigenvalues()(0));
    }
    s.objective = problem.objective().dot(s.x);
    double eq2 = 0.0;
    for (int r = 0; r < num_eq; ++r) {
      const double v =
          problem.equality_rows()[r].dot(s.x) - problem.equality_rhs()[r];
      eq2 += v * v;
    }
    s.eq_residual = std::sqrt(eq2);
  };

  // Degenerate shapes: no free variables or no cone at all.
  if (d == 0 || p.blocks.empty()) {
    if (!p.blocks.empty()) {
      double min_eig = std::numeric_limits<double>::infinity();
      for (const auto& blk : p.blocks) {
        Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(
            blk.f0, Eigen::EigenvaluesOnly);
        min_eig = std::min(min_eig, es.eigenvalues()(0));
      }
      sol.status = min_eig >= -opts.tol_psd ? SdpStatus::Optimal
                                            : SdpStatus::Infeasible;
    } else {
      sol.status = (d == 0 || p.c.norm() <= 1e-12) ? SdpStatus::Optimal
                                                   : SdpStatus::Unbounded;
    }
    finalize(sol, Eigen::VectorXd::Zero(d));
    sol.rel_gap = 0.0;
    sol.dual_objective = sol.objective;
    sol.duals.assign(num_user_blocks, Eigen::MatrixXd());
    return sol;
  }

  // Block and objective scaling.
  std::vector<double> block_scale(p.blocks.size(), 1.0);
  for (size_t b = 0; b < p.blocks.size(); ++b) {
    double mx = p.blocks[b].f0.size() > 0
                    ? p.blocks[b].f0.cwiseAbs().maxCoeff()
                    : 0.0;
    for (const auto& e : p.blocks[b].entries)
      mx = std::max(mx, std::abs(e.value));
    block_scale[b] = std::max(1.0, mx);
    p.blocks[b].f0 /= block_scale[b];
    for (auto& e : p.blocks[b].entries) e.value /= block_scale[b];
  }
  const double c_scale = std::max(1.0, p.c.cwiseAbs().maxCoeff());
  p.c /= c_scale;

  double f0norm = 0.0;
  for (const auto& blk : p.blocks) f0norm += blk.f0.squaredNorm();
  f0norm = std::sqrt(f0norm);

  IpmState st;
  st.y = Eigen::VectorXd::Zero(d);
  int nu = 1;
  for (const auto& blk : p.blocks) {
    st.X.push_back(Eigen::MatrixXd::Identity(blk.size, blk.size));
    st.S.push_back(Eigen::MatrixXd::Identity(blk.size, blk.size));
    nu += blk.size;
  }

  auto gap_of = [&](const IpmState& s) {
    double g = s.tau * s.kappa;
    for (size_t b = 0; b < p.blocks.size(); ++b) {
      g += (s.X[b].array() * s.S[b].array()).sum();
    }
    return g;
  };

  const double ray_tol = 1e-7;
  SchurContext ctx;
  std::vector<Eigen::LLT<Eigen::MatrixXd>> lltX(p.blocks.size()),
      lltS(p.blocks.size());
  SdpStatus status = SdpStatus::MaxIter;
  int iter = 0;
  bool numeric_stop = false;

  for (iter = 0; iter < opts.max_iter && !numeric_stop; ++iter) {
    const Residuals res = compute_residuals(p, st);
    const double mu = gap_of(st) / nu;

    double f0x = 0.0;
    for (size_t b = 0; b < p.blocks.size(); ++b) {
      f0x += (p.blocks[b].f0.array() * st.X[b].array()).sum();
    }
    const double cy = p.c.dot(st.y);
    const double pres = res.rp_norm / st.tau / (1.0 + p.c.norm());
    const double dres = res.rd_norm / st.tau / (1.0 + f0norm);
    const double gap = gap_of(st) - st.tau * st.kappa;
    const double rel_gap = gap / (st.tau * st.tau) /
                           (1.0 + std::abs(cy / st.tau) +
                            std::abs(f0x / st.tau));

    if (opts.verbose) {
      std::printf(
          "it %3d  mu %9.2e  pres %9.2e  dres %9.2e  gap %9.2e  tau %8.2e  "
          "kappa %8.2e\n",
          iter, mu, pres, dres, rel_gap, st.tau, st.kappa);
    }

    if (pres <= opts.tol_feas && dres <= opts.tol_feas &&
        rel_gap <= opts.tol_gap) {
      status = SdpStatus::Optimal;
      break;
    }

    // Classification once the embedding collapses (tau -> 0).
    if ((st.tau < 1e-9 * std::max(1.0, st.kappa) && mu < 1e-9) ||
        (st.tau < 1e-7 && st.kappa > 1e8 * st.tau)) {
      Eigen::VectorXd ray_y = st.y / std::max(1e-300, st.y.norm());
      double ray_min_eig = std::numeric_limits<double>::infinity();
      double fs_scale = 0.0;
      for (size_t b = 0; b < p.blocks.size(); ++b) {
        Eigen::MatrixXd fs =
            Eigen::MatrixXd::Zero(p.blocks[b].size, p.blocks[b].size);
        accumulate_fsum(p.blocks[b].entries, ray_y, fs);
        fs = 0.5 * (fs + fs.transpose()).eval();
        fs_scale = std::max(fs_scale, fs.cwiseAbs().maxCoeff());
        Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(
            fs, Eigen::EigenvaluesOnly);
        ray_min_eig = std::min(ray_min_eig, es.eigenvalues()(0));
      }
      const double cray = p.c.dot(ray_y);
      if (cray < -ray_tol && ray_min_eig >= -ray_tol * std::max(1.0, fs_scale)) {
        status = SdpStatus::Unbounded;
        sol.status = status;
        sol.iterations = iter;
        sol.x = null_basis * ray_y;  // improving direction
        sol.duals.assign(num_user_blocks, Eigen::MatrixXd());
        return sol;
      }
      double xnorm = 0.0;
      for (const auto& Xb : st.X) xnorm += Xb.squaredNorm();
      xnorm = std::max(std::sqrt(xnorm), 1e-300);
      Eigen::VectorXd fx = Eigen::VectorXd::Zero(d);
      double f0x_ray = 0.0;
      for (size_t b = 0; b < p.blocks.size(); ++b) {
        accumulate_afx(p.blocks[b].entries, st.X[b], fx);
        f0x_ray += (p.blocks[b].f0.array() * st.X[b].array()).sum();
      }
      if (f0x_ray / xnorm < -ray_tol && fx.norm() / xnorm < ray_tol) {
        status = SdpStatus::Infeasible;
        sol.status = status;
        sol.iterations = iter;
        finalize(sol, st.y / std::max(st.tau, 1e-300));
        sol.objective = std::numeric_limits<double>::quiet_NaN();
        sol.dual_objective = std::numeric_limits<double>::quiet_NaN();
        sol.duals.assign(num_user_blocks, Eigen::MatrixXd());
        return sol;
      }
      status = SdpStatus::MaxIter;  // collapsed without certificate
      break;
    }

    for (size_t b = 0; b < p.blocks.size(); ++b) {
      lltX[b].compute(st.X[b]);
      lltS[b].compute(st.S[b]);
      if (lltX[b].info() != Eigen::Success ||
          lltS[b].info() != Eigen::Success) {
        numeric_stop = true;
      }
    }
    if (numeric_stop) break;
    if (!build_schur(p, res, lltX, lltS, ctx)) break;

    // Predictor.
    std::vector<Eigen::MatrixXd> rhs_aff;
    rhs_aff.reserve(p.blocks.size());
    for (size_t b = 0; b < p.blocks.size(); ++b) rhs_aff.push_back(-st.X[b]);
    const Direction aff =
        solve_direction(p, st, res, ctx, rhs_aff, -st.tau * st.kappa, 1.0);
    const double alpha_aff = std::min(1.0, max_step(st, lltX, lltS, aff));

    double gap_aff = (st.tau + alpha_aff * aff.dtau) *
                     (st.kappa + alpha_aff * aff.dkappa);
    for (size_t b = 0; b < p.blocks.size(); ++b) {
      gap_aff += ((st.X[b] + alpha_aff * aff.dX[b]).array() *
                  (st.S[b] + alpha_aff * aff.dS[b]).array())
                     .sum();
    }
    double sigma = std::pow(gap_aff / gap_of(st), 3);
    sigma = std::clamp(sigma, 1e-8, 1.0);

    // Corrector in the scaled frame where both cone variables are diagonal.
    std::vector<Eigen::MatrixXd> rhs_cmb(p.blocks.size());
    for (size_t b = 0; b < p.blocks.size(); ++b) {
      const NtScaling& nt = ctx.nt[b];
      const int m = p.blocks[b].size;
      const Eigen::MatrixXd DXa = nt.Rinv * aff.dX[b] * nt.Rinv.transpose();
      const Eigen::MatrixXd DSa = nt.Rt * aff.dS[b] * nt.R;
      const Eigen::MatrixXd cross =
          0.5 * (DXa * DSa + DSa.transpose() * DXa.transpose());
      Eigen::MatrixXd U(m, m);
      for (int i = 0; i < m; ++i) {
        for (int j = 0; j < m; ++j) {
          double rhs = -cross(i, j);
          if (i == j) rhs += sigma * mu - nt.sigma(i) * nt.sigma(i);
          U(i, j) = 2.0 * rhs / (nt.sigma(i) + nt.sigma(j));
        }
      }
      rhs_cmb[b] = nt.R * U * nt.Rt;
    }
    const double rhs_tk =
        sigma * mu - st.tau * st.kappa - aff.dtau * aff.dkappa;
    const Direction dir =
        solve_direction(p, st, res, ctx, rhs_cmb, rhs_tk, 1.0 - sigma);

    double alpha =
        std::min(1.0, opts.step_fraction * max_step(st, lltX, lltS, dir));
    for (int tries = 0; tries < 12; ++tries) {
      bool ok = st.tau + alpha * dir.dtau > 0 &&
                st.kappa + alpha * dir.dkappa > 0;
      for (size_t b = 0; ok && b < p.blocks.size(); ++b) {
        ok = Eigen::LLT<Eigen::MatrixXd>(
                 (st.X[b] + alpha * dir.dX[b]).eval())
                     .info() == Eigen::Success &&
             Eigen::LLT<Eigen::MatrixXd>(
                 (st.S[b] + alpha * dir.dS[b]).eval())
                     .info() == Eigen::Success;
      }
      if (ok) break;
      alpha *= 0.8;
      if (tries == 11) numeric_stop = true;
    }
    if (numeric_stop) break;

    for (size_t b = 0; b < p.blocks.size(); ++b) {
      st.X[b] += alpha * dir.dX[b];
      st.X[b] = 0.5 * (st.X[b] + st.X[b].transpose()).eval();
      st.S[b] += alpha * dir.dS[b];
      st.S[b] = 0.5 * (st.S[b] + st.S[b].transpose()).eval();
    }
    st.y += alpha * dir.dy;
    st.tau += alpha * dir.dtau;
    st.kappa += alpha * dir.dkappa;
  }

  sol.status = status;
  sol.iterations = iter;
  finalize(sol, st.y / st.tau);

  double dual_obj_scaled = 0.0;
  sol.duals.clear();
  for (size_t b = 0; b < p.blocks.size(); ++b) {
    dual_obj_scaled -= (p.blocks[b].f0.array() * st.X[b].array()).sum();
    if (static_cast<int>(b) < num_user_blocks) {
      sol.duals.push_back(st.X[b] / st.tau * (c_scale / block_scale[b]));
    }
  }
  sol.dual_objective = dual_obj_scaled / st.tau * c_scale + obj_offset;

  double f0x = 0.0;
  for (size_t b = 0; b < p.blocks.size(); ++b) {
    f0x += (p.blocks[b].f0.array() * st.X[b].array()).sum();
  }
  sol.rel_gap = (gap_of(st) - st.tau * st.kappa) / (st.tau * st.tau) /
                (1.0 + std::abs(p.c.dot(st.y) / st.tau) +
                 std::abs(f0x / st.tau));
  return sol;
}

}  // namespace rosyn
