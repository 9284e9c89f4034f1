#pragma once

#include <Eigen/Dense>

#include "rosyn/ltv_system.hpp"

namespace rosyn {

/// Trajectories with one sample per row, k = 0..T.
struct Trajectory {
  Eigen::MatrixXd x;          // (T+1) x nx
  Eigen::MatrixXd u;          // (T+1) x nu (echoed or closed-loop input)
  Eigen::MatrixXd y;          // (T+1) x ny
  Eigen::MatrixXd z;          // (T+1) x nz
  Eigen::MatrixXd y_nominal;  // attack-free output with the same x0 and u
};

/// Runs the recursion exactly. `u` may have up to T+1 rows and `a` up to
/// T rows; shorter inputs are zero-padded. Rejects non-finite inputs.
Trajectory simulate(const LtvSystem& sys, const Eigen::VectorXd& x0,
                    const Eigen::MatrixXd& u, const Eigen::MatrixXd& a);

/// Closed-loop run under a stacked causal output-feedback gain K
/// (Nu x Ny): u_k is formed from y_0..y_k. The nominal output is the
/// closed-loop response with the same x0 and a = 0.
Trajectory simulate_closed_loop(const LtvSystem& sys, const Eigen::MatrixXd& K,
                                const Eigen::VectorXd& x0,
                                const Eigen::MatrixXd& a);

/// Row-major sample matrix <-> stacked vector conversions.
Eigen::VectorXd stack_rows(const Eigen::MatrixXd& samples);
Eigen::MatrixXd unstack_rows(const Eigen::VectorXd& stacked, int width);

/// Splits a stacked disturbance [x0; a_0; ...; a_{T-1}] into the initial
/// state and the attack sample matrix (T x na).
std::pair<Eigen::VectorXd, Eigen::MatrixXd> split_attack(
    const Eigen::VectorXd& a_stacked, int nx, int na, int horizon);

}  // namespace rosyn
