#pragma once

#include <Eigen/Dense>

#include "rosyn/ltv_system.hpp"

namespace rosyn {

/// Stacked finite-horizon operator form of an LtvSystem. Signals are
/// stacked over k = 0..T; the disturbance vector is a = [x0; a_0; ...;
/// a_{T-1}] so Na = nx + T*na. With Z the block-downshift operator, the
/// trajectories of the underlying recursion satisfy
///
///   x = Z A x + Z Bu u + Ba a
///   y = Cy x + Dya a
///   z = Cz x + Dzu u
///
/// Dya places the per-step feedthrough Dya_k on the (row k, column block
/// a_k) position, so a sensor attack at step k corrupts y_k; the x0 column
/// block and the terminal y_T row block carry no feedthrough.
struct LiftedSystem {
  int horizon = 0;
  int nx = 0, nu = 0, na = 0, ny = 0, nz = 0;  // per-step widths
  int Nx = 0, Nu = 0, Na = 0, Ny = 0, Nz = 0;  // stacked dims

  Eigen::MatrixXd A;    // blkdiag(A_0..A_{T-1}, 0)
  Eigen::MatrixXd Bu;   // blkdiag(Bu_0..Bu_{T-1}, 0)
  Eigen::MatrixXd Ba;   // blkdiag(I, Ba_0..Ba_{T-1})
  Eigen::MatrixXd Cy;   // blkdiag(Cy_0..Cy_T)
  Eigen::MatrixXd Cz;   // blkdiag(Cz_0..Cz_T)
  Eigen::MatrixXd Dya;  // aligned sensor-attack feedthrough, Ny x Na
  Eigen::MatrixXd Dzu;  // blkdiag(Dzu_0..Dzu_T)
  Eigen::MatrixXd Z;    // block downshift, nilpotent of index T+1

  Eigen::MatrixXd ZA;   // Z * A
  Eigen::MatrixXd ZBu;  // Z * Bu

  /// Column offset of attack block `b` inside a: block 0 is x0 (width nx),
  /// block j+1 is a_j (width na).
  int a_col_offset(int block) const { return block == 0 ? 0 : nx + (block - 1) * na; }
  int a_col_width(int block) const { return block == 0 ? nx : na; }
  /// Time step at which attack block `b` acts (x0 acts at step 0).
  int a_col_time(int block) const { return block == 0 ? 0 : block - 1; }
  int num_a_blocks() const { return horizon + 1; }

  /// (I - Z A), unit lower-triangular.
  Eigen::MatrixXd causal_resolvent_factor() const;
  /// Solves (I - Z A) X = rhs by forward substitution.
  Eigen::MatrixXd solve_causal(const Eigen::MatrixXd& rhs) const;
};

/// Builds the stacked operator form. The input system must be valid.
LiftedSystem lift(const LtvSystem& sys);

}  // namespace rosyn
