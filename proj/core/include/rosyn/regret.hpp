#pragma once

#include <Eigen/Dense>

#include "rosyn/sdp.hpp"
#include "rosyn/sls.hpp"

namespace rosyn {

/// Stealth budget on the squared output deviation |y - y_n|^2. Zero is
/// rejected (the dual needs a strictly feasible attack); exploratory runs
/// may use the documented floor.
struct StealthSpec {
  static constexpr double kMinAlpha = 1e-12;
  double alpha;
  explicit StealthSpec(double a) : alpha(a) {
    if (!(alpha >= kMinAlpha)) {
      throw std::invalid_argument(
          "stealth budget must be at least 1e-12 (alpha = 0 rejected)");
    }
  }
};

enum class RegretStatus {
  Optimal,
  /// The stealth constraint leaves a direction with unbounded regret:
  /// undetectable attacks can grow the regret without bound.
  UnboundedRegret,
  SolverFailure,
};

/// Certificate for the worst-case regret of a fixed response under
/// alpha-stealthy attacks: mu = lambda * alpha together with the PSD slack
///   S(lambda) = lambda Phi'Phi - Psi'Psi - Phi_u'Phi_u + Q
/// and the extracted worst-case attack.
struct RegretCertificate {
  RegretStatus status = RegretStatus::SolverFailure;
  double lambda_star = 0.0;
  double mu_star = 0.0;
  Eigen::MatrixXd slack;
  double slack_min_eig = 0.0;
  Eigen::VectorXd attack;        // a_star, zero when the budget is inactive
  double achieved_regret = 0.0;  // a' (Psi'Psi + Phi_u'Phi_u - Q) a
  double stealth_level = 0.0;    // a' Phi'Phi a
  int sdp_iterations = 0;
};

/// Worst-case regret of a response via the single-variable dual SDP.
/// Requires achievability residuals below tol_feas and alpha > 0.
RegretCertificate regret_metric(const SlsResponse& omega,
                                const LiftedSystem& sys,
                                const StealthSpec& spec,
                                double tol_feas = 1e-6,
                                const SdpOptions& opts = {});

/// Same computation on precomputed closed-loop maps.
RegretCertificate regret_metric_from_maps(const ClosedLoopMaps& maps,
                                          const Eigen::MatrixXd& Q,
                                          const StealthSpec& spec,
                                          const SdpOptions& opts = {});

/// Extracts the worst-case attack from an optimal certificate: the scaled
/// bottom eigenvector of the slack, with a generalized-eigenvector fall
/// back when that direction is invisible in the output. Returns zero when
/// lambda_star is zero.
Eigen::VectorXd worst_case_attack(const RegretCertificate& cert,
                                  const ClosedLoopMaps& maps,
                                  const Eigen::MatrixXd& Q,
                                  const StealthSpec& spec);

/// Independent small-scale check of the metric: solves
///   max a' W a  s.t.  a' G a <= alpha,   W = Psi'Psi + Phi_u'Phi_u - Q,
/// G = Phi'Phi (+ 1e-10 I when singular) through the symmetric generalized
/// eigenproblem on the range of G. Guarded to Na <= 40.
double qcqp_oracle(const SlsResponse& omega, const LiftedSystem& sys,
                   const StealthSpec& spec);
double qcqp_oracle_from_maps(const ClosedLoopMaps& maps,
                             const Eigen::MatrixXd& Q,
                             const StealthSpec& spec);

/// Value and maximizer of the ellipsoid-constrained quadratic above.
std::pair<double, Eigen::VectorXd> qcqp_argmax(const Eigen::MatrixXd& W,
                                               const Eigen::MatrixXd& G,
                                               double alpha);

}  // namespace rosyn
