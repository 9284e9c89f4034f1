#pragma once

#include <Eigen/Dense>
#include <vector>

namespace rosyn {

/// Discrete-time, time-varying linear system over a finite horizon T:
///
///   x_{k+1} = A_k x_k + Bu_k u_k + Ba_k a_k      k = 0..T-1
///   y_k     = Cy_k x_k + Dya_k a_k               k = 0..T
///   z_k     = Cz_k x_k + Dzu_k u_k               k = 0..T
///
/// where a_k is the (actuator/sensor) attack channel. The attack sequence
/// has T entries a_0..a_{T-1}; there is no attack at the terminal step, so
/// y_T carries no direct feedthrough term.
struct LtvSystem {
  int horizon = 0;  // T
  int nx = 0;       // state dimension n
  int nu = 0;       // control input width
  int na = 0;       // attack channel width
  int ny = 0;       // measurement width
  int nz = 0;       // regulated output width

  std::vector<Eigen::MatrixXd> A;    // T entries, nx x nx
  std::vector<Eigen::MatrixXd> Bu;   // T entries, nx x nu
  std::vector<Eigen::MatrixXd> Ba;   // T entries, nx x na
  std::vector<Eigen::MatrixXd> Cy;   // T+1 entries, ny x nx
  std::vector<Eigen::MatrixXd> Cz;   // T+1 entries, nz x nx
  std::vector<Eigen::MatrixXd> Dya;  // T+1 entries, ny x na
  std::vector<Eigen::MatrixXd> Dzu;  // T+1 entries, nz x nu

  /// Throws std::invalid_argument naming the offending step when any
  /// per-step matrix has the wrong shape, contains non-finite entries,
  /// or the horizon is below 1.
  void validate() const;

  /// Replicates a single set of matrices across all steps.
  static LtvSystem time_invariant(int horizon, const Eigen::MatrixXd& A,
                                  const Eigen::MatrixXd& Bu,
                                  const Eigen::MatrixXd& Ba,
                                  const Eigen::MatrixXd& Cy,
                                  const Eigen::MatrixXd& Cz,
                                  const Eigen::MatrixXd& Dya,
                                  const Eigen::MatrixXd& Dzu);
};

/// Continuous-time pair (A_c, B_c) with a sampling period, the input to
/// zero-order-hold discretization.
struct ContinuousLti {
  Eigen::MatrixXd A;
  Eigen::MatrixXd B;
  double ts = 0.0;  // sampling period in seconds, > 0
};

}  // namespace rosyn
