#include "rosyn/synthesis.hpp"

#include <algorithm>
#include <cmath>
#include <future>
#include <stdexcept>
#include <thread>

#include "rosyn/ltv_system.hpp"

namespace rosyn {

Eigen::MatrixXd LiftedVars::full_X() const {
  const int q = ny * na;
  Eigen::MatrixXd full = Eigen::MatrixXd::Zero(q, q);
  for (size_t p = 0; p < support.size(); ++p) {
    for (size_t r = 0; r < support.size(); ++r) {
      full(support[p], support[r]) = X(p, r);
    }
  }
  return full;
}

Eigen::VectorXd LiftedVars::full_phi_vec() const {
  Eigen::VectorXd full = Eigen::VectorXd::Zero(ny * na);
  for (size_t p = 0; p < support.size(); ++p) full(support[p]) = phi_vec(p);
  return full;
}

Eigen::MatrixXd LiftedVars::augmented() const {
  const int q = static_cast<int>(support.size());
  Eigen::MatrixXd aug(q + 1, q + 1);
  aug.topLeftCorner(q, q) = X;
  aug.block(0, q, q, 1) = phi_vec;
  aug.block(q, 0, 1, q) = phi_vec.transpose();
  aug(q, q) = 1.0;
  return aug;
}

bool rank1_lift_check(const Eigen::MatrixXd& S, const Eigen::VectorXd& a,
                      double tol_psd, double tol_rank) {
  if (S.rows() != S.cols() || S.rows() != a.size()) {
    throw std::invalid_argument("rank1_lift_check dimension mismatch");
  }
  const int n = static_cast<int>(a.size());
  Eigen::MatrixXd aug(n + 1, n + 1);
  aug.topLeftCorner(n, n) = 0.5 * (S + S.transpose());
  aug.block(0, n, n, 1) = a;
  aug.block(n, 0, 1, n) = a.transpose();
  aug(n, n) = 1.0;
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(aug,
                                                    Eigen::EigenvaluesOnly);
  const double scale = std::max(1.0, es.eigenvalues().cwiseAbs().maxCoeff());
  if (es.eigenvalues()(0) < -tol_psd * scale) return false;

  Eigen::JacobiSVD<Eigen::MatrixXd> svd(S);
  const double s1 = svd.singularValues()(0);
  if (n < 2) return true;
  const double s2 = svd.singularValues()(1);
  return s2 / std::max(s1, tol_rank) <= tol_rank;
}

std::vector<std::pair<int, int>> propagate_sparsity(
    const std::vector<int>& zero_idx, int q) {
  std::vector<bool> zero(q, false);
  for (int i : zero_idx) {
    if (i < 0 || i >= q) throw std::invalid_argument("zero index range");
    zero[i] = true;
  }
  std::vector<std::pair<int, int>> out;
  for (int r = 0; r < q; ++r) {
    for (int c = 0; c < q; ++c) {
      if (zero[r] || zero[c]) out.emplace_back(r, c);
    }
  }
  return out;
}

const char* to_string(SynthesisStrategy s) {
  switch (s) {
    case SynthesisStrategy::FixedLambdaIRM: return "fixed_lambda_irm";
    case SynthesisStrategy::ShorPlusEval: return "shor_plus_eval";
    case SynthesisStrategy::Hinf: return "hinf";
  }
  return "unknown";
}

double hinf_norm_sq(const ClosedLoopMaps& maps) {
  const Eigen::MatrixXd W = maps.psi.transpose() * maps.psi +
                            maps.phi_u.transpose() * maps.phi_u;
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(W,
                                                    Eigen::EigenvaluesOnly);
  return es.eigenvalues().maxCoeff();
}

// ---------------------------------------------------------------------------

namespace {

// Plant-dependent affine structure of the synthesis programs. All response
// components are affine in the free causal parameter L:
//   M = L Gy,  N = Hu L,  R = resolvent + Hu L Gy,
//   Phi   = Tya + Tyu L Tya,   Phi_u = L Tya,   Psi = Fa + E L Tya,
// with Tya the open-loop attack-to-output map and Tyu the open-loop
// input-to-output map. The achievability equalities hold identically.
struct Workspace {
  LiftedSystem sys;
  ClairvoyantData clair;
  Eigen::MatrixXd resolvent;  // (I-ZA)^{-1}
  Eigen::MatrixXd Hu;         // (I-ZA)^{-1} ZBu
  Eigen::MatrixXd Gy;         // Cy (I-ZA)^{-1}
  Eigen::MatrixXd Tya;        // Cy (I-ZA)^{-1} Ba + Dya
  Eigen::MatrixXd Tyu;        // Cy (I-ZA)^{-1} ZBu

  std::vector<std::pair<int, int>> l_support;  // free entries of L
  std::vector<int> phi_support;                // retained vec(Phi) indices
  Eigen::VectorXd phi_const;                   // over the retained support
  Eigen::MatrixXd phi_coef;                    // support x nL
  Eigen::MatrixXd psi_const;                   // Nz x Na
  std::vector<Eigen::MatrixXd> psi_coef;       // per L var
  std::vector<Eigen::MatrixXd> phiu_coef;      // per L var

  std::vector<Eigen::VectorXd> eq_rows;  // topology equalities over L vars
  std::vector<double> eq_rhs;

  int nL() const { return static_cast<int>(l_support.size()); }
  int phi_row(int p) const { return phi_support[p] % sys.Ny; }
  int phi_col(int p) const { return phi_support[p] / sys.Ny; }

  SlsResponse response_from_l(const Eigen::MatrixXd& Lmat) const {
    SlsResponse w;
    w.L = Lmat;
    w.M = Lmat * Gy;
    w.N = Hu * Lmat;
    w.R = resolvent + Hu * Lmat * Gy;
    return w;
  }

  Eigen::MatrixXd l_matrix(const Eigen::VectorXd& x) const {
    Eigen::MatrixXd Lmat = Eigen::MatrixXd::Zero(sys.Nu, sys.Ny);
    for (int v = 0; v < nL(); ++v) {
      Lmat(l_support[v].first, l_support[v].second) = x(v);
    }
    return Lmat;
  }
};

int a_col_time(const LiftedSystem& sys, int col) {
  return col < sys.nx ? 0 : (col - sys.nx) / sys.na;
}

Workspace build_workspace(const LtvSystem& plant,
                          const std::optional<SlsMask>& mask) {
  Workspace ws;
  ws.sys = lift(plant);
  const LiftedSystem& sys = ws.sys;
  ws.clair = clairvoyant(sys);
  ws.resolvent = sys.solve_causal(Eigen::MatrixXd::Identity(sys.Nx, sys.Nx));
  ws.Hu = sys.solve_causal(sys.ZBu);
  ws.Gy = sys.Cy * ws.resolvent;
  ws.Tyu = sys.Cy * ws.Hu;
  ws.Tya = ws.Gy * sys.Ba + sys.Dya;

  for (int r = 0; r < sys.Nu; ++r) {
    for (int c = 0; c < sys.Ny; ++c) {
      if (!causal_entry(r, c, sys.nu, sys.ny)) continue;
      if (mask && !mask->L(r, c)) continue;
      ws.l_support.emplace_back(r, c);
    }
  }
  const int nL = ws.nL();

  // Coefficients first over the causal support of Phi, then drop entries
  // that are identically zero (structural zeros plus mask-induced ones);
  // their lifted rows and columns disappear with them.
  std::vector<int> causal_support;
  for (int a = 0; a < sys.Na; ++a) {
    for (int i = 0; i < sys.Ny; ++i) {
      if (a_col_time(sys, a) <= i / sys.ny) {
        causal_support.push_back(i + a * sys.Ny);
      }
    }
  }
  std::sort(causal_support.begin(), causal_support.end());
  std::vector<int> kept;
  std::vector<Eigen::VectorXd> kept_coef;
  std::vector<double> kept_const;
  for (int full : causal_support) {
    const int i = full % sys.Ny;
    const int a = full / sys.Ny;
    Eigen::VectorXd coef = Eigen::VectorXd::Zero(nL);
    for (int v = 0; v < nL; ++v) {
      coef(v) = ws.Tyu(i, ws.l_support[v].first) *
                ws.Tya(ws.l_support[v].second, a);
    }
    const double cst = ws.Tya(i, a);
    if (cst == 0.0 && coef.isZero(0.0)) continue;
    kept.push_back(full);
    kept_coef.push_back(coef);
    kept_const.push_back(cst);
  }
  ws.phi_support = kept;
  ws.phi_const = Eigen::VectorXd::Zero(kept.size());
  ws.phi_coef = Eigen::MatrixXd::Zero(kept.size(), nL);
  for (size_t p = 0; p < kept.size(); ++p) {
    ws.phi_const(p) = kept_const[p];
    ws.phi_coef.row(p) = kept_coef[p].transpose();
  }

  ws.psi_const = ws.clair.F_Ba;
  ws.psi_coef.reserve(nL);
  ws.phiu_coef.reserve(nL);
  for (int v = 0; v < nL; ++v) {
    const auto [r, c] = ws.l_support[v];
    Eigen::MatrixXd pc = Eigen::MatrixXd::Zero(sys.Nz, sys.Na);
    pc = ws.clair.E.col(r) * ws.Tya.row(c);
    ws.psi_coef.push_back(pc);
    Eigen::MatrixXd uc = Eigen::MatrixXd::Zero(sys.Nu, sys.Na);
    uc.row(r) = ws.Tya.row(c);
    ws.phiu_coef.push_back(uc);
  }

  // Topology masks on R, N, M become affine equalities on L.
  if (mask) {
    auto add_zero_rows = [&](const Eigen::Array<bool, Eigen::Dynamic,
                                                Eigen::Dynamic>& allowed,
                             auto&& coef_of, auto&& const_of, int rows,
                             int cols, int rw, int cw, bool strict) {
      for (int i = 0; i < rows; ++i) {
        for (int j = 0; j < cols; ++j) {
          if (allowed(i, j)) continue;
          if (!causal_entry(i, j, rw, cw, strict)) continue;  // already zero
          Eigen::VectorXd row = Eigen::VectorXd::Zero(nL);
          for (int v = 0; v < nL; ++v) row(v) = coef_of(i, j, v);
          const double rhs = -const_of(i, j);
          if (row.isZero(0.0) && rhs == 0.0) continue;
          ws.eq_rows.push_back(row);
          ws.eq_rhs.push_back(rhs);
        }
      }
    };
    const auto& sysr = ws.sys;
    add_zero_rows(
        mask->R,
        [&](int i, int j, int v) {
          return ws.Hu(i, ws.l_support[v].first) *
                 ws.Gy(ws.l_support[v].second, j);
        },
        [&](int i, int j) { return ws.resolvent(i, j); }, sysr.Nx, sysr.Nx,
        sysr.nx, sysr.nx, false);
    add_zero_rows(
        mask->N,
        [&](int i, int j, int v) {
          return ws.l_support[v].second == j
                     ? ws.Hu(i, ws.l_support[v].first)
                     : 0.0;
        },
        [&](int, int) { return 0.0; }, sysr.Nx, sysr.Ny, sysr.nx, sysr.ny,
        true);
    add_zero_rows(
        mask->M,
        [&](int i, int j, int v) {
          return ws.l_support[v].first == i
                     ? ws.Gy(ws.l_support[v].second, j)
                     : 0.0;
        },
        [&](int, int) { return 0.0; }, sysr.Nu, sysr.Nx, sysr.nu, sysr.nx,
        false);
  }
  return ws;
}

// Variable layout of one synthesis SDP.
struct Layout {
  std::vector<std::vector<int>> groups;  // lifting blocks: reduced indices
  std::vector<int> group_var_offset;
  int num_l = 0;
  int num_x = 0;
  int lam = -1, lam_inv = -1, lam11 = -1, lam22 = -1;
  int total = 0;
  bool joint = false;

  int xvar(int g, int lp, int lq) const {
    const int s = static_cast<int>(groups[g].size());
    return group_var_offset[g] + lp * s - lp * (lp - 1) / 2 + (lq - lp);
  }
};

Layout make_layout(const Workspace& ws, bool full_lifting, bool joint) {
  Layout lay;
  lay.joint = joint;
  lay.num_l = ws.nL();
  const int q = static_cast<int>(ws.phi_support.size());
  if (full_lifting) {
    std::vector<int> all(q);
    for (int p = 0; p < q; ++p) all[p] = p;
    lay.groups.push_back(std::move(all));
  } else {
    std::vector<std::vector<int>> by_row(ws.sys.Ny);
    for (int p = 0; p < q; ++p) by_row[ws.phi_row(p)].push_back(p);
    for (auto& g : by_row) {
      if (!g.empty()) lay.groups.push_back(std::move(g));
    }
  }
  int var = lay.num_l;
  for (const auto& g : lay.groups) {
    lay.group_var_offset.push_back(var);
    const int s = static_cast<int>(g.size());
    var += s * (s + 1) / 2;
  }
  lay.num_x = var - lay.num_l;
  if (joint) {
    lay.lam = var++;
    lay.lam_inv = var++;
    lay.lam11 = var++;
    lay.lam22 = var++;
  }
  lay.total = var;
  return lay;
}

// Builds the constraint system: the main LMI, one PSD lifting block per
// group, and (joint) the 2x2 lambda lifting. lambda_fixed is used when
// !joint; the joint program carries lambda as a variable.
SdpProblem build_program(const Workspace& ws, const Layout& lay,
                         double lambda_fixed, double lambda_min) {
  const LiftedSystem& sys = ws.sys;
  const int na = sys.Na, nz = sys.Nz, nu = sys.Nu;
  SdpProblem prob(lay.total);

  const int big = prob.add_block(na + nz + nu);
  // (1,1) corner: Q (fixed lambda) or lambda_inv * Q (joint).
  for (int a = 0; a < na; ++a) {
    for (int b = a; b < na; ++b) {
      if (ws.clair.Q(a, b) == 0.0) continue;
      if (lay.joint) {
        prob.add_entry(big, a, b, lay.lam_inv, ws.clair.Q(a, b));
      } else {
        prob.add_constant_entry(big, a, b, ws.clair.Q(a, b));
      }
    }
  }
  // ell(X): X_{(i,a),(i,b)} lands on (a, b), scaled by lambda in the
  // fixed-lambda program (Q + lambda ell(X)) and by one in the joint form
  // (lambda_inv Q + ell(X)).
  const double ell_scale = lay.joint ? 1.0 : lambda_fixed;
  for (size_t g = 0; g < lay.groups.size(); ++g) {
    const auto& grp = lay.groups[g];
    const int s = static_cast<int>(grp.size());
    for (int lp = 0; lp < s; ++lp) {
      for (int lq = lp; lq < s; ++lq) {
        const int p = grp[lp], r = grp[lq];
        if (ws.phi_row(p) != ws.phi_row(r)) continue;
        prob.add_entry(big, ws.phi_col(p), ws.phi_col(r),
                       lay.xvar(static_cast<int>(g), lp, lq), ell_scale);
      }
    }
  }
  // Psi rows and Phi_u rows with their identity (or lambda I) diagonals.
  for (int zi = 0; zi < nz; ++zi) {
    for (int a = 0; a < na; ++a) {
      if (ws.psi_const(zi, a) != 0.0) {
        prob.add_constant_entry(big, na + zi, a, ws.psi_const(zi, a));
      }
      for (int v = 0; v < lay.num_l; ++v) {
        if (ws.psi_coef[v](zi, a) != 0.0) {
          prob.add_entry(big, na + zi, a, v, ws.psi_coef[v](zi, a));
        }
      }
    }
  }
  for (int ui = 0; ui < nu; ++ui) {
    for (int a = 0; a < na; ++a) {
      for (int v = 0; v < lay.num_l; ++v) {
        if (ws.phiu_coef[v](ui, a) != 0.0) {
          prob.add_entry(big, na + nz + ui, a, v, ws.phiu_coef[v](ui, a));
        }
      }
    }
  }
  for (int k = 0; k < nz + nu; ++k) {
    if (lay.joint) {
      prob.add_entry(big, na + k, na + k, lay.lam, 1.0);
    } else {
      prob.add_constant_entry(big, na + k, na + k, 1.0);
    }
  }

  // Lifting blocks [X_g, phi_g; phi_g', 1].
  for (size_t g = 0; g < lay.groups.size(); ++g) {
    const auto& grp = lay.groups[g];
    const int s = static_cast<int>(grp.size());
    const int blk = prob.add_block(s + 1);
    for (int lp = 0; lp < s; ++lp) {
      for (int lq = lp; lq < s; ++lq) {
        prob.add_entry(blk, lp, lq, lay.xvar(static_cast<int>(g), lp, lq),
                       1.0);
      }
      const int p = grp[lp];
      if (ws.phi_const(p) != 0.0) {
        prob.add_constant_entry(blk, lp, s, ws.phi_const(p));
      }
      for (int v = 0; v < lay.num_l; ++v) {
        if (ws.phi_coef(p, v) != 0.0) {
          prob.add_entry(blk, lp, s, v, ws.phi_coef(p, v));
        }
      }
    }
    prob.add_constant_entry(blk, s, s, 1.0);
  }

  if (lay.joint) {
    // [Lam, lambda_vec; lambda_vec', 1] with Lam12 = Lam21 = 1.
    const int blk = prob.add_block(3);
    prob.add_entry(blk, 0, 0, lay.lam11, 1.0);
    prob.add_entry(blk, 1, 1, lay.lam22, 1.0);
    prob.add_constant_entry(blk, 0, 1, 1.0);
    prob.add_entry(blk, 0, 2, lay.lam, 1.0);
    prob.add_entry(blk, 1, 2, lay.lam_inv, 1.0);
    prob.add_constant_entry(blk, 2, 2, 1.0);
    prob.set_lower_bound(lay.lam, lambda_min);
    prob.set_lower_bound(lay.lam_inv, 0.0);
  }

  for (size_t r = 0; r < ws.eq_rows.size(); ++r) {
    Eigen::VectorXd row = Eigen::VectorXd::Zero(lay.total);
    row.head(lay.num_l) = ws.eq_rows[r];
    prob.add_equality(row, ws.eq_rhs[r]);
  }
  return prob;
}

// trace(aug) - v' aug v for every lifting block, plus alpha*lambda for the
// joint program. Inflation vectors may be empty (pure trace).
Eigen::VectorXd irm_objective(const Workspace& ws, const Layout& lay,
                              double alpha,
                              const std::vector<Eigen::VectorXd>& inflation,
                              const Eigen::VectorXd& lambda_inflation) {
  Eigen::VectorXd c = Eigen::VectorXd::Zero(lay.total);
  if (lay.joint) c(lay.lam) += alpha;
  for (size_t g = 0; g < lay.groups.size(); ++g) {
    const auto& grp = lay.groups[g];
    const int s = static_cast<int>(grp.size());
    const bool has_v = g < inflation.size() && inflation[g].size() == s + 1;
    for (int lp = 0; lp < s; ++lp) {
      for (int lq = lp; lq < s; ++lq) {
        const int var = lay.xvar(static_cast<int>(g), lp, lq);
        if (lp == lq) c(var) += 1.0;
        if (has_v) {
          const double vv = inflation[g](lp) * inflation[g](lq);
          c(var) -= (lp == lq) ? vv : 2.0 * vv;
        }
      }
      if (has_v) {
        const double w = -2.0 * inflation[g](s) * inflation[g](lp);
        for (int v = 0; v < lay.num_l; ++v) {
          c(v) += w * ws.phi_coef(grp[lp], v);
        }
      }
    }
  }
  if (lay.joint) {
    c(lay.lam11) += 1.0;
    c(lay.lam22) += 1.0;
    if (lambda_inflation.size() == 3) {
      const auto& v = lambda_inflation;
      c(lay.lam11) -= v(0) * v(0);
      c(lay.lam22) -= v(1) * v(1);
      c(lay.lam) -= 2.0 * v(0) * v(2);
      c(lay.lam_inv) -= 2.0 * v(1) * v(2);
    }
  }
  return c;
}

struct Assembled {
  Eigen::MatrixXd Lmat;
  SlsResponse omega;
  LiftedVars lifted;
  std::vector<Eigen::MatrixXd> aug_blocks;  // per group
  double worst_ratio = 0.0;
  double lambda = 0.0;
};

double sigma_ratio(const Eigen::MatrixXd& aug) {
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(aug,
                                                    Eigen::EigenvaluesOnly);
  const int n = static_cast<int>(aug.rows());
  const double top = std::max(es.eigenvalues()(n - 1), 1e-300);
  const double second = n > 1 ? std::max(es.eigenvalues()(n - 2), 0.0) : 0.0;
  return second / top;
}

Assembled assemble(const Workspace& ws, const Layout& lay,
                   const Eigen::VectorXd& x, double lambda_fixed) {
  Assembled out;
  out.Lmat = ws.l_matrix(x.head(lay.num_l));
  out.omega = ws.response_from_l(out.Lmat);
  out.lambda = lay.joint ? x(lay.lam) : lambda_fixed;

  const int q = static_cast<int>(ws.phi_support.size());
  out.lifted.ny = ws.sys.Ny;
  out.lifted.na = ws.sys.Na;
  out.lifted.support = ws.phi_support;
  out.lifted.phi_vec = ws.phi_const + ws.phi_coef * x.head(lay.num_l);
  // Off-block entries are not decision variables under per-row liftings;
  // their rank-one completion keeps the assembled matrix consistent with
  // the single-lifting form (X dominates phi phi' iff every block
  // dominates its own outer product).
  out.lifted.X = lay.groups.size() > 1
                     ? Eigen::MatrixXd(out.lifted.phi_vec *
                                       out.lifted.phi_vec.transpose())
                     : Eigen::MatrixXd::Zero(q, q);

  double worst = 0.0;
  for (size_t g = 0; g < lay.groups.size(); ++g) {
    const auto& grp = lay.groups[g];
    const int s = static_cast<int>(grp.size());
    Eigen::MatrixXd aug = Eigen::MatrixXd::Zero(s + 1, s + 1);
    for (int lp = 0; lp < s; ++lp) {
      for (int lq = lp; lq < s; ++lq) {
        const double v = x(lay.xvar(static_cast<int>(g), lp, lq));
        aug(lp, lq) = aug(lq, lp) = v;
        out.lifted.X(grp[lp], grp[lq]) = v;
        out.lifted.X(grp[lq], grp[lp]) = v;
      }
      aug(lp, s) = aug(s, lp) = out.lifted.phi_vec(grp[lp]);
    }
    aug(s, s) = 1.0;
    out.aug_blocks.push_back(aug);
    worst = std::max(worst, sigma_ratio(aug));
  }
  if (lay.joint) {
    out.lifted.has_lambda_lift = true;
    out.lifted.lambda_pair << x(lay.lam), x(lay.lam_inv);
    out.lifted.Lambda.resize(2, 2);
    out.lifted.Lambda << x(lay.lam11), 1.0, 1.0, x(lay.lam22);
    Eigen::MatrixXd laug(3, 3);
    laug << x(lay.lam11), 1.0, x(lay.lam), 1.0, x(lay.lam22), x(lay.lam_inv),
        x(lay.lam), x(lay.lam_inv), 1.0;
    worst = std::max(worst, sigma_ratio(laug));
  }
  out.worst_ratio = worst;
  return out;
}

std::vector<Eigen::VectorXd> inflation_from(const Assembled& a) {
  std::vector<Eigen::VectorXd> v;
  for (const auto& aug : a.aug_blocks) {
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(aug);
    v.push_back(es.eigenvectors().col(aug.rows() - 1));
  }
  return v;
}

bool use_full_lifting(const Workspace& ws, const SynthesisOptions& opts) {
  switch (opts.lifting) {
    case LiftingMode::Full: return true;
    case LiftingMode::RowStrata: return false;
    case LiftingMode::Auto:
      return static_cast<int>(ws.phi_support.size()) <=
             opts.full_lifting_max_support;
  }
  return true;
}

RegretCertificate certify(const Workspace& ws, const SlsResponse& omega,
                          const StealthSpec& spec, const SdpOptions& sdp) {
  const ClosedLoopMaps maps = closed_loop_maps(omega, ws.sys);
  return regret_metric_from_maps(maps, ws.clair.Q, spec, sdp);
}

// Shared IRM driver on a fixed-lambda (or joint) program.
std::optional<SynthesisResult> run_irm(const Workspace& ws,
                                       const StealthSpec& spec,
                                       double lambda_bar, bool joint,
                                       int iter_budget,
                                       const SynthesisOptions& opts,
                                       SynthesisStrategy tag) {
  const Layout lay = make_layout(ws, use_full_lifting(ws, opts), joint);
  SdpProblem prob = build_program(ws, lay, lambda_bar, opts.lambda_min);

  std::vector<Eigen::VectorXd> inflation;
  Eigen::VectorXd lambda_inflation;

  SynthesisResult best;
  best.strategy = tag;
  best.shor_lower_bound = std::numeric_limits<double>::quiet_NaN();
  bool have_best = false;
  double best_mu = std::numeric_limits<double>::infinity();
  double prev_ratio = std::numeric_limits<double>::infinity();
  int stall = 0;

  for (int it = 0; it < iter_budget; ++it) {
    prob.set_objective(
        irm_objective(ws, lay, spec.alpha, inflation, lambda_inflation));
    const SdpSolution sol = solve(prob, opts.sdp);
    if (sol.status == SdpStatus::Infeasible) {
      return std::nullopt;  // only reachable with mask equalities
    }
    if (sol.status == SdpStatus::Unbounded) return std::nullopt;

    Assembled asm_it = assemble(ws, lay, sol.x, lambda_bar);
    RegretCertificate cert = certify(ws, asm_it.omega, spec, opts.sdp);
    const double mu = cert.status == RegretStatus::Optimal
                          ? cert.mu_star
                          : std::numeric_limits<double>::infinity();

    IrmIterate log;
    log.iteration = it;
    log.sigma_ratio = asm_it.worst_ratio;
    log.objective = sol.objective;
    log.certified_mu = mu;

    if (!have_best || mu < best_mu) {
      best_mu = mu;
      best.omega = asm_it.omega;
      best.lambda = asm_it.lambda;
      best.certificate = cert;
      best.lifted = asm_it.lifted;
      have_best = true;
    }
    best.irm_log.push_back(log);
    best.mu_bar = asm_it.lambda * spec.alpha;

    // A fixed point must come from a clean solve, be numerically rank one,
    // and actually meet the program target: the re-evaluated certificate
    // is the arbiter.
    const double target = asm_it.lambda * spec.alpha;
    const double tol_irm = 1e-6 + 1e-3 * target;
    if (sol.status == SdpStatus::Optimal &&
        asm_it.worst_ratio <= opts.tol_rank && mu <= target + tol_irm) {
      best.rank_converged = true;
      best.omega = asm_it.omega;
      best.lambda = asm_it.lambda;
      best.certificate = cert;
      best.lifted = asm_it.lifted;
      best.gain = extract_gain(best.omega, ws.sys, opts.tol_feas);
      return best;
    }

    if (sol.status != SdpStatus::Optimal) break;  // no further progress

    // Stall detection: stop burning budget when the ratio plateaus.
    if (it >= 3 && asm_it.worst_ratio > 0.97 * prev_ratio) {
      if (++stall >= 3) break;
    } else {
      stall = 0;
    }
    prev_ratio = asm_it.worst_ratio;

    inflation = inflation_from(asm_it);
    if (joint) {
      Eigen::MatrixXd laug(3, 3);
      laug << asm_it.lifted.Lambda(0, 0), 1.0, asm_it.lifted.lambda_pair(0),
          1.0, asm_it.lifted.Lambda(1, 1), asm_it.lifted.lambda_pair(1),
          asm_it.lifted.lambda_pair(0), asm_it.lifted.lambda_pair(1), 1.0;
      Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(laug);
      lambda_inflation = es.eigenvectors().col(2);
    }
  }

  if (!have_best) return std::nullopt;
  best.rank_converged = false;
  best.gain = extract_gain(best.omega, ws.sys, opts.tol_feas);
  return best;
}

}  // namespace

// ---------------------------------------------------------------------------
// Public operations

std::optional<SynthesisResult> fixed_lambda_synthesis(
    const LtvSystem& sys, const StealthSpec& spec, double lambda_bar,
    const std::optional<SlsMask>& mask, const SynthesisOptions& opts) {
  if (!(lambda_bar > 0)) {
    throw std::invalid_argument("lambda_bar must be positive");
  }
  const Workspace ws = build_workspace(sys, mask);
  return run_irm(ws, spec, lambda_bar, /*joint=*/false, opts.max_irm_iters,
                 opts, SynthesisStrategy::FixedLambdaIRM);
}

std::optional<SynthesisResult> joint_synthesis(const LtvSystem& sys,
                                               const StealthSpec& spec,
                                               const std::optional<SlsMask>& mask,
                                               const SynthesisOptions& opts) {
  const Workspace ws = build_workspace(sys, mask);
  return run_irm(ws, spec, 0.0, /*joint=*/true, opts.max_irm_iters, opts,
                 SynthesisStrategy::FixedLambdaIRM);
}

ShorRelaxation shor_relax(const LtvSystem& sys, const StealthSpec& spec,
                          const std::optional<SlsMask>& mask,
                          const SynthesisOptions& opts) {
  const Workspace ws = build_workspace(sys, mask);
  const Layout lay = make_layout(ws, use_full_lifting(ws, opts), true);
  SdpProblem prob = build_program(ws, lay, 0.0, opts.lambda_min);
  Eigen::VectorXd c = Eigen::VectorXd::Zero(lay.total);
  c(lay.lam) = spec.alpha;
  prob.set_objective(c);
  const SdpSolution sol = solve(prob, opts.sdp);

  ShorRelaxation out;
  if (sol.status == SdpStatus::Infeasible) {
    out.feasible = false;
    return out;
  }
  if (sol.status != SdpStatus::Optimal && sol.status != SdpStatus::MaxIter) {
    out.feasible = false;
    return out;
  }
  out.feasible = true;
  // Regret is nonnegative, so zero is always a valid bound; only a clean
  // solve may report more.
  out.lower_bound =
      sol.status == SdpStatus::Optimal ? std::max(0.0, sol.objective) : 0.0;
  const Assembled a = assemble(ws, lay, sol.x, 0.0);
  out.omega = a.omega;
  out.lifted = a.lifted;
  return out;
}

SynthesisResult hinf_synthesis(const LtvSystem& sys, const StealthSpec& spec,
                               const std::optional<SlsMask>& mask,
                               const SynthesisOptions& opts) {
  const Workspace ws = build_workspace(sys, mask);
  const LiftedSystem& ls = ws.sys;
  const int na = ls.Na, nz = ls.Nz, nu = ls.Nu;
  const int nL = ws.nL();
  const int lam = nL;

  SdpProblem prob(nL + 1);
  const int big = prob.add_block(na + nz + nu);
  for (int a = 0; a < na; ++a) prob.add_entry(big, a, a, lam, 1.0);
  for (int zi = 0; zi < nz; ++zi) {
    for (int a = 0; a < na; ++a) {
      if (ws.psi_const(zi, a) != 0.0) {
        prob.add_constant_entry(big, na + zi, a, ws.psi_const(zi, a));
      }
      for (int v = 0; v < nL; ++v) {
        if (ws.psi_coef[v](zi, a) != 0.0) {
          prob.add_entry(big, na + zi, a, v, ws.psi_coef[v](zi, a));
        }
      }
    }
  }
  for (int ui = 0; ui < nu; ++ui) {
    for (int a = 0; a < na; ++a) {
      for (int v = 0; v < nL; ++v) {
        if (ws.phiu_coef[v](ui, a) != 0.0) {
          prob.add_entry(big, na + nz + ui, a, v, ws.phiu_coef[v](ui, a));
        }
      }
    }
  }
  for (int k = 0; k < nz + nu; ++k) {
    prob.add_constant_entry(big, na + k, na + k, 1.0);
  }
  for (size_t r = 0; r < ws.eq_rows.size(); ++r) {
    Eigen::VectorXd row = Eigen::VectorXd::Zero(nL + 1);
    row.head(nL) = ws.eq_rows[r];
    prob.add_equality(row, ws.eq_rhs[r]);
  }
  Eigen::VectorXd c = Eigen::VectorXd::Zero(nL + 1);
  c(lam) = spec.alpha;
  prob.set_objective(c);
  prob.set_lower_bound(lam, 0.0);

  const SdpSolution sol = solve(prob, opts.sdp);
  if (sol.status == SdpStatus::Infeasible) {
    throw InfeasibleProblem("mask admits no achievable response");
  }
  if (sol.status != SdpStatus::Optimal) {
    throw std::runtime_error("worst-case gain synthesis failed: " +
                             std::string(to_string(sol.status)));
  }

  SynthesisResult out;
  out.strategy = SynthesisStrategy::Hinf;
  out.lambda = sol.x(lam);
  out.mu_bar = sol.x(lam) * spec.alpha;
  out.omega = ws.response_from_l(ws.l_matrix(sol.x.head(nL)));
  out.gain = extract_gain(out.omega, ws.sys, opts.tol_feas);
  out.certificate = certify(ws, out.omega, spec, opts.sdp);
  out.rank_converged = true;
  return out;
}

SynthesisResult synthesize(const LtvSystem& sys, const StealthSpec& spec,
                           SynthesisStrategy strategy,
                           const std::optional<SlsMask>& mask,
                           const SynthesisOptions& opts) {
  if (strategy == SynthesisStrategy::Hinf) {
    return hinf_synthesis(sys, spec, mask, opts);
  }

  const Workspace ws = build_workspace(sys, mask);
  SynthesisResult hinf = hinf_synthesis(sys, spec, mask, opts);
  const ShorRelaxation shor = shor_relax(sys, spec, mask, opts);
  if (!shor.feasible) {
    throw InfeasibleProblem("mask admits no achievable response");
  }

  const double lambda_hi =
      std::max(hinf.certificate.lambda_star, opts.lambda_min * 10);
  const double lambda_lo =
      std::clamp(shor.lower_bound / spec.alpha, opts.lambda_min, lambda_hi);

  auto with_bookkeeping = [&](SynthesisResult r) {
    r.strategy = strategy;
    r.shor_lower_bound = shor.lower_bound;
    return r;
  };

  // Seed the candidate pool with the baseline response: it is feasible for
  // the regret program, so the search can only improve on it. A converged
  // rank-one candidate within the search tolerance of the best certificate
  // is preferred as the returned artifact.
  SynthesisResult best = hinf;
  double best_mu = hinf.certificate.status == RegretStatus::Optimal
                       ? hinf.certificate.mu_star
                       : std::numeric_limits<double>::infinity();
  std::optional<SynthesisResult> best_converged;
  double best_converged_mu = std::numeric_limits<double>::infinity();
  auto consider = [&](const SynthesisResult& cand) {
    if (cand.certificate.status != RegretStatus::Optimal) return;
    const double mu = cand.certificate.mu_star;
    const double tie_break =
        cand.omega.R.norm() + cand.omega.L.norm();  // deterministic ties
    const double best_tie = best.omega.R.norm() + best.omega.L.norm();
    if (mu < best_mu - 1e-12 * std::max(1.0, best_mu) ||
        (std::abs(mu - best_mu) <= 1e-12 * std::max(1.0, best_mu) &&
         tie_break < best_tie)) {
      best_mu = mu;
      best = cand;
    }
    if (cand.rank_converged && mu < best_converged_mu) {
      best_converged_mu = mu;
      best_converged = cand;
    }
  };
  auto pick = [&]() {
    if (best_converged &&
        best_converged_mu <= best_mu * (1.0 + opts.lambda_rel_tol) + 1e-12) {
      return *best_converged;
    }
    return best;
  };

  if (strategy == SynthesisStrategy::ShorPlusEval) {
    // Fixed-lambda rank-relaxed solves over a geometric grid, each scored
    // by its true certified regret.
    std::vector<double> grid;
    for (int k = 0; k < opts.grid_points; ++k) {
      const double t = opts.grid_points == 1
                           ? 1.0
                           : static_cast<double>(k) / (opts.grid_points - 1);
      grid.push_back(lambda_lo * std::pow(lambda_hi / lambda_lo, t));
    }
    const int hw = opts.threads > 0
                       ? opts.threads
                       : static_cast<int>(std::thread::hardware_concurrency());
    const int workers = std::max(1, hw);
    std::vector<std::optional<SynthesisResult>> results(grid.size());
    for (size_t base = 0; base < grid.size();
         base += static_cast<size_t>(workers)) {
      std::vector<std::future<std::optional<SynthesisResult>>> futs;
      for (size_t k = base;
           k < std::min(grid.size(), base + static_cast<size_t>(workers));
           ++k) {
        futs.push_back(std::async(std::launch::async, [&, k] {
          return run_irm(ws, spec, grid[k], false, 1, opts,
                         SynthesisStrategy::ShorPlusEval);
        }));
      }
      for (size_t j = 0; j < futs.size(); ++j) {
        results[base + j] = futs[j].get();
      }
    }
    for (const auto& r : results) {
      if (r) consider(*r);
    }
    return with_bookkeeping(pick());
  }

  // FixedLambdaIRM: monotone bracketing on the geometric grid, then
  // bisection in the log domain, scoring every certified iterate.
  auto trial = [&](double lambda_bar, int budget) {
    auto r = run_irm(ws, spec, lambda_bar, false, budget, opts,
                     SynthesisStrategy::FixedLambdaIRM);
    if (r) consider(*r);
    return r && r->rank_converged;
  };

  std::vector<double> grid;
  for (int k = 0; k < opts.grid_points; ++k) {
    const double t = opts.grid_points == 1
                         ? 1.0
                         : static_cast<double>(k) / (opts.grid_points - 1);
    grid.push_back(lambda_lo * std::pow(lambda_hi / lambda_lo, t));
  }
  // Feasibility is monotone in lambda, so bracket with a binary search
  // over grid indices.
  int lo_idx = -1;                                   // infeasible (unknown)
  int hi_idx = static_cast<int>(grid.size()) - 1;    // feasible candidate
  if (!trial(grid[hi_idx], opts.trial_irm_iters)) {
    // Even the largest grid point did not reach rank one; fall back to the
    // best certified candidate seen (at worst the baseline).
    return with_bookkeeping(pick());
  }
  if (grid.size() > 1 && trial(grid[0], opts.trial_irm_iters)) {
    hi_idx = 0;
  } else if (grid.size() > 1) {
    lo_idx = 0;
    int lo = 0, hi = hi_idx;
    while (hi - lo > 1) {
      const int mid = (lo + hi) / 2;
      if (trial(grid[mid], opts.trial_irm_iters)) {
        hi = mid;
      } else {
        lo = mid;
      }
    }
    hi_idx = hi;
    lo_idx = lo;
  }
  double lam_hi = grid[hi_idx];
  double lam_lo = lo_idx >= 0 ? grid[lo_idx] : lambda_lo;
  for (int step = 0; step < opts.bisect_steps; ++step) {
    if (lam_hi / lam_lo <= 1.0 + opts.lambda_rel_tol) break;
    const double mid = std::sqrt(lam_hi * lam_lo);
    if (trial(mid, opts.trial_irm_iters)) {
      lam_hi = mid;
    } else {
      lam_lo = mid;
    }
  }

  // Final full-budget run at the smallest feasible lambda found.
  auto final_run = run_irm(ws, spec, lam_hi, false, opts.max_irm_iters, opts,
                           SynthesisStrategy::FixedLambdaIRM);
  if (final_run) consider(*final_run);
  return with_bookkeeping(pick());
}

}  // namespace rosyn
