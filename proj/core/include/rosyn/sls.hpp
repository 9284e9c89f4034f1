#pragma once

#include <Eigen/Dense>
#include <optional>
#include <utility>

#include "rosyn/lifted_system.hpp"

namespace rosyn {

/// Closed-loop system response Omega = (R, N, M, L) mapping the stacked
/// disturbances (d_x, d_y) to (x, u). Achievable responses live on the
/// causal block-lower-triangular support: R has identity diagonal blocks,
/// N has zero diagonal blocks, M and L include their diagonals.
struct SlsResponse {
  Eigen::MatrixXd R;  // Nx x Nx
  Eigen::MatrixXd N;  // Nx x Ny
  Eigen::MatrixXd M;  // Nu x Nx
  Eigen::MatrixXd L;  // Nu x Ny
};

/// Attack-to-signal maps of a response on a given plant.
struct ClosedLoopMaps {
  Eigen::MatrixXd phi_x;  // Nx x Na
  Eigen::MatrixXd phi_u;  // Nu x Na
  Eigen::MatrixXd phi;    // Ny x Na, measurement deviation map
  Eigen::MatrixXd psi;    // Nz x Na, regulated output map
};

/// Clairvoyant (non-causal) data: E maps inputs to regulated outputs
/// through the dynamics, F maps states, and Q is the kernel of the
/// hindsight-optimal cost J*(a) = a' Q a.
struct ClairvoyantData {
  Eigen::MatrixXd E;     // Nz x Nu
  Eigen::MatrixXd F;     // Nz x Nx
  Eigen::MatrixXd Q;     // Na x Na, symmetric PSD
  Eigen::MatrixXd F_Ba;  // F * Ba, cached for the non-causal policy
};

/// Frobenius residuals of the two achievability conditions
///   [I-ZA, -ZBu] [R N; M L] = [I 0]
///   [R N; M L] [I-ZA; -Cy]  = [I; 0].
std::pair<double, double> sls_residuals(const SlsResponse& omega,
                                        const LiftedSystem& sys);

/// Response realized by the causal stacked output-feedback gain K.
SlsResponse response_from_gain(const Eigen::MatrixXd& K,
                               const LiftedSystem& sys);

/// K = L - M R^{-1} N through a unit-lower-triangular solve. Refuses
/// (throws std::invalid_argument) when the achievability residuals exceed
/// tol_feas, since the response is then not realizable by any gain.
Eigen::MatrixXd extract_gain(const SlsResponse& omega, const LiftedSystem& sys,
                             double tol_feas = 1e-6);

ClosedLoopMaps closed_loop_maps(const SlsResponse& omega,
                                const LiftedSystem& sys);

ClairvoyantData clairvoyant(const LiftedSystem& sys);

/// Hindsight-optimal input for a full attack record:
/// u = -(I + E'E)^{-1} E' F Ba a.
Eigen::VectorXd noncausal_input(const ClairvoyantData& d,
                                const Eigen::VectorXd& a);

/// Closed-loop cost J(Omega, a) = |psi a|^2 + |phi_u a|^2.
double closed_loop_cost(const ClosedLoopMaps& maps, const Eigen::VectorXd& a);

/// True when the stacked entry (row, col) of a step-indexed map is on the
/// causal support: the row step must not precede the column step (strictly
/// follow it when `strict`).
bool causal_entry(int row, int col, int row_width, int col_width,
                  bool strict = false);

/// Entrywise allowed-support masks for the four response components.
/// Defaults to the plain causal pattern; an optional node adjacency
/// restricts couplings to pairs reachable within the elapsed number of
/// steps.
struct SlsMask {
  Eigen::Array<bool, Eigen::Dynamic, Eigen::Dynamic> R, N, M, L;

  static SlsMask causal(const LiftedSystem& sys);

  /// node_of_* assign each scalar signal coordinate to a node; adjacency
  /// is a symmetric boolean reachability-per-step matrix over nodes.
  static SlsMask causal_with_topology(
      const LiftedSystem& sys,
      const Eigen::Array<bool, Eigen::Dynamic, Eigen::Dynamic>& adjacency,
      const Eigen::VectorXi& node_of_state, const Eigen::VectorXi& node_of_input,
      const Eigen::VectorXi& node_of_output);
};

}  // namespace rosyn
