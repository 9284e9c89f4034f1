#include "rosyn/regret.hpp"

#include <cmath>
#include <stdexcept>

namespace rosyn {
namespace {

void fix_sign(Eigen::VectorXd& a) {
  const double scale = a.cwiseAbs().maxCoeff();
  for (int i = 0; i < a.size(); ++i) {
    if (std::abs(a(i)) > 1e-12 * scale) {
      if (a(i) < 0) a = -a;
      return;
    }
  }
}

double quad(const Eigen::MatrixXd& m, const Eigen::VectorXd& a) {
  return a.dot(m * a);
}

}  // namespace

RegretCertificate regret_metric_from_maps(const ClosedLoopMaps& maps,
                                          const Eigen::MatrixXd& Q,
                                          const StealthSpec& spec,
                                          const SdpOptions& opts) {
  const Eigen::MatrixXd G = maps.phi.transpose() * maps.phi;
  const Eigen::MatrixXd W0 = maps.psi.transpose() * maps.psi +
                             maps.phi_u.transpose() * maps.phi_u;
  const int na = static_cast<int>(G.rows());

  SdpProblem p(1);
  Eigen::VectorXd c(1);
  c << spec.alpha;
  p.set_objective(c);
  const int blk = p.add_block(na);
  p.add_constant(blk, Eigen::MatrixXd(Q - W0));
  p.add_matrix(blk, 0, G);
  p.set_lower_bound(0, 0.0);

  const SdpSolution sol = solve(p, opts);

  RegretCertificate cert;
  cert.sdp_iterations = sol.iterations;
  if (sol.status == SdpStatus::Infeasible) {
    cert.status = RegretStatus::UnboundedRegret;
    return cert;
  }
  if (sol.status != SdpStatus::Optimal) {
    cert.status = RegretStatus::SolverFailure;
    return cert;
  }

  cert.status = RegretStatus::Optimal;
  cert.lambda_star = std::max(0.0, sol.x(0));
  cert.mu_star = cert.lambda_star * spec.alpha;
  cert.slack = Q - W0 + cert.lambda_star * G;
  cert.slack_min_eig = sol.block_min_eig.at(0);
  cert.attack = worst_case_attack(cert, maps, Q, spec);
  cert.stealth_level = quad(G, cert.attack);
  cert.achieved_regret = quad(W0 - Q, cert.attack);
  return cert;
}

RegretCertificate regret_metric(const SlsResponse& omega,
                                const LiftedSystem& sys,
                                const StealthSpec& spec, double tol_feas,
                                const SdpOptions& opts) {
  auto [r1, r2] = sls_residuals(omega, sys);
  if (r1 > tol_feas || r2 > tol_feas) {
    throw std::invalid_argument(
        "regret_metric requires an achievable response; residuals (" +
        std::to_string(r1) + ", " + std::to_string(r2) + ") exceed " +
        std::to_string(tol_feas));
  }
  const ClosedLoopMaps maps = closed_loop_maps(omega, sys);
  const ClairvoyantData clair = clairvoyant(sys);
  return regret_metric_from_maps(maps, clair.Q, spec, opts);
}

Eigen::VectorXd worst_case_attack(const RegretCertificate& cert,
                                  const ClosedLoopMaps& maps,
                                  const Eigen::MatrixXd& Q,
                                  const StealthSpec& spec) {
  const int na = static_cast<int>(maps.phi.cols());
  // An interior-point lambda never lands exactly on zero; treat values at
  // solver noise as an inactive budget.
  constexpr double kLambdaInactive = 1e-7;
  if (cert.status != RegretStatus::Optimal ||
      cert.lambda_star <= kLambdaInactive) {
    return Eigen::VectorXd::Zero(na);
  }
  const Eigen::MatrixXd G = maps.phi.transpose() * maps.phi;
  const Eigen::MatrixXd W = maps.psi.transpose() * maps.psi +
                            maps.phi_u.transpose() * maps.phi_u - Q;

  auto scaled_candidate = [&](Eigen::VectorXd v) {
    const double budget = quad(G, v);
    if (budget <= 1e-10) return Eigen::VectorXd::Zero(na).eval();
    Eigen::VectorXd a = v * std::sqrt(spec.alpha / budget);
    fix_sign(a);
    return a;
  };

  // KKT stationarity puts the maximizer in the slack's bottom eigenspace.
  auto [eig, v] = min_eig_vec(cert.slack);
  Eigen::VectorXd a = scaled_candidate(v);
  const double tol =
      1e-4 * std::max(1.0, cert.mu_star);
  if (a.size() > 0 && a.norm() > 0 &&
      std::abs(quad(W, a) - cert.mu_star) <= tol) {
    return a;
  }
  // Degenerate slack direction: fall back to the generalized eigenvector.
  auto [value, arg] = qcqp_argmax(W, G, spec.alpha);
  (void)value;
  Eigen::VectorXd fb = arg;
  fix_sign(fb);
  return fb;
}

std::pair<double, Eigen::VectorXd> qcqp_argmax(const Eigen::MatrixXd& W,
                                               const Eigen::MatrixXd& G,
                                               double alpha) {
  const int n = static_cast<int>(G.rows());
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eg(G);
  const double lam_max = eg.eigenvalues().maxCoeff();
  Eigen::MatrixXd Geff = G;
  if (eg.eigenvalues().minCoeff() <= 1e-10 * std::max(1.0, lam_max)) {
    Geff += 1e-10 * Eigen::MatrixXd::Identity(n, n);
    eg.compute(Geff);
  }
  // B = Geff^{-1/2} W Geff^{-1/2}
  const Eigen::VectorXd isqrt = eg.eigenvalues().cwiseSqrt().cwiseInverse();
  const Eigen::MatrixXd Gihalf =
      eg.eigenvectors() * isqrt.asDiagonal() * eg.eigenvectors().transpose();
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eb(Gihalf * W * Gihalf);
  const int top = n - 1;
  const double theta = eb.eigenvalues()(top);
  if (theta <= 0.0) {
    return {0.0, Eigen::VectorXd::Zero(n)};
  }
  Eigen::VectorXd a = Gihalf * eb.eigenvectors().col(top);
  const double budget = a.dot(G * a);
  if (budget > 1e-300) a *= std::sqrt(alpha / budget);
  return {alpha * theta, a};
}

double qcqp_oracle_from_maps(const ClosedLoopMaps& maps,
                             const Eigen::MatrixXd& Q,
                             const StealthSpec& spec) {
  const int na = static_cast<int>(maps.phi.cols());
  if (na > 40) {
    throw std::invalid_argument(
        "qcqp_oracle is a desk-scale check (Na <= 40), got Na = " +
        std::to_string(na));
  }
  const Eigen::MatrixXd G = maps.phi.transpose() * maps.phi;
  const Eigen::MatrixXd W = maps.psi.transpose() * maps.psi +
                            maps.phi_u.transpose() * maps.phi_u - Q;
  return qcqp_argmax(W, G, spec.alpha).first;
}

double qcqp_oracle(const SlsResponse& omega, const LiftedSystem& sys,
                   const StealthSpec& spec) {
  const ClosedLoopMaps maps = closed_loop_maps(omega, sys);
  const ClairvoyantData clair = clairvoyant(sys);
  return qcqp_oracle_from_maps(maps, clair.Q, spec);
}

}  // namespace rosyn
