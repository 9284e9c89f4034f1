#include <doctest.h>

#include <Eigen/Dense>
#include <sstream>

#include "rosyn/sdp.hpp"
#include "support/oracles.hpp"

using Eigen::MatrixXd;
using Eigen::VectorXd;

TEST_SUITE("sdp_backend") {

TEST_CASE("one-variable nonnegativity") {
  rosyn::SdpProblem p(1);
  VectorXd c(1);
  c << 1.0;
  p.set_objective(c);
  const int b = p.add_block(1);
  p.add_entry(b, 0, 0, 0, 1.0);
  const auto sol = rosyn::solve(p);
  CHECK(sol.status == rosyn::SdpStatus::Optimal);
  CHECK(std::abs(sol.x(0)) < 1e-6);
}

TEST_CASE("2x2 determinant boundary: min x s.t. [[x,1],[1,x]] >= 0") {
  rosyn::SdpProblem p(1);
  VectorXd c(1);
  c << 1.0;
  p.set_objective(c);
  const int b = p.add_block(2);
  p.add_entry(b, 0, 0, 0, 1.0);
  p.add_entry(b, 1, 1, 0, 1.0);
  p.add_constant_entry(b, 0, 1, 1.0);
  const auto sol = rosyn::solve(p);
  CHECK(sol.status == rosyn::SdpStatus::Optimal);
  CHECK(sol.x(0) == doctest::Approx(1.0).epsilon(1e-6));
}

TEST_CASE("matches the grid-plus-bisection oracle on random instances") {
  oracles::Rng rng(101);
  for (int trial = 0; trial < 8; ++trial) {
    const int d = 1 + static_cast<int>(rng() % 2);
    const int blocks = 1 + static_cast<int>(rng() % 3);
    std::vector<MatrixXd> f0;
    std::vector<std::vector<MatrixXd>> fi(blocks);
    rosyn::SdpProblem p(d);
    VectorXd c = oracles::random_matrix(rng, d, 1);
    if (c.norm() < 0.3) c.setConstant(0.5);
    p.set_objective(c);
    for (int b = 0; b < blocks; ++b) {
      const int m = 1 + static_cast<int>(rng() % 3);
      MatrixXd base = oracles::random_matrix(rng, m, m);
      // strictly feasible at x = 0
      MatrixXd F0 = base * base.transpose() + MatrixXd::Identity(m, m);
      f0.push_back(F0);
      p.add_block(m);
      p.add_constant(b, F0);
      fi[b].resize(d);
      for (int i = 0; i < d; ++i) {
        MatrixXd Fi = oracles::random_matrix(rng, m, m);
        Fi = 0.5 * (Fi + Fi.transpose()).eval();
        fi[b][i] = Fi;
        p.add_matrix(b, i, Fi);
      }
    }
    // Bounded box keeps the oracle comparable: x in [-3, 3]^d as explicit
    // 1x1 blocks in both the problem and the oracle data.
    for (int i = 0; i < d; ++i) {
      const int ub = p.add_block(1);
      p.add_constant_entry(ub, 0, 0, 3.0);
      p.add_entry(ub, 0, 0, i, -1.0);
      f0.push_back(MatrixXd::Constant(1, 1, 3.0));
      std::vector<MatrixXd> row_ub(d, MatrixXd::Zero(1, 1));
      row_ub[i] = MatrixXd::Constant(1, 1, -1.0);
      fi.push_back(row_ub);

      const int lb = p.add_block(1);
      p.add_constant_entry(lb, 0, 0, 3.0);
      p.add_entry(lb, 0, 0, i, 1.0);
      f0.push_back(MatrixXd::Constant(1, 1, 3.0));
      std::vector<MatrixXd> row_lb(d, MatrixXd::Zero(1, 1));
      row_lb[i] = MatrixXd::Constant(1, 1, 1.0);
      fi.push_back(row_lb);
    }
    const auto sol = rosyn::solve(p);
    REQUIRE(sol.status == rosyn::SdpStatus::Optimal);
    const double oracle =
        oracles::grid_sdp_oracle(c, f0, fi, -3.0, 3.0, 240);
    CHECK(sol.objective <= oracle + 1e-4 * std::max(1.0, std::abs(oracle)));
    CHECK(sol.objective >= oracle - 1e-3 * std::max(1.0, std::abs(oracle)));
  }
}

TEST_CASE("weak duality holds on optimal instances") {
  oracles::Rng rng(103);
  for (int trial = 0; trial < 5; ++trial) {
    rosyn::SdpProblem p(2);
    VectorXd c = oracles::random_matrix(rng, 2, 1);
    p.set_objective(c);
    const int b = p.add_block(3);
    MatrixXd base = oracles::random_matrix(rng, 3, 3);
    p.add_constant(b, MatrixXd(base * base.transpose() +
                               MatrixXd::Identity(3, 3)));
    for (int i = 0; i < 2; ++i) {
      MatrixXd Fi = oracles::random_matrix(rng, 3, 3);
      p.add_matrix(b, i, MatrixXd(0.5 * (Fi + Fi.transpose())));
    }
    p.set_lower_bound(0, -4.0);
    p.set_lower_bound(1, -4.0);
    const int ub = p.add_block(2);
    p.add_constant_entry(ub, 0, 0, 4.0);
    p.add_entry(ub, 0, 0, 0, -1.0);
    p.add_constant_entry(ub, 1, 1, 4.0);
    p.add_entry(ub, 1, 1, 1, -1.0);
    const auto sol = rosyn::solve(p);
    REQUIRE(sol.status == rosyn::SdpStatus::Optimal);
    CHECK(sol.dual_objective <= sol.objective + 1e-6 * (1.0 + std::abs(sol.objective)));
    for (double eig : sol.block_min_eig) CHECK(eig >= -1e-7);
  }
}

TEST_CASE("objective scaling moves the value, not the optimizer") {
  auto build = [](double scale) {
    rosyn::SdpProblem p(1);
    VectorXd c(1);
    c << scale;
    p.set_objective(c);
    const int b = p.add_block(2);
    p.add_entry(b, 0, 0, 0, 1.0);
    p.add_entry(b, 1, 1, 0, 1.0);
    p.add_constant_entry(b, 0, 1, 1.0);
    return p;
  };
  const auto s1 = rosyn::solve(build(1.0));
  const auto s10 = rosyn::solve(build(10.0));
  REQUIRE(s1.status == rosyn::SdpStatus::Optimal);
  REQUIRE(s10.status == rosyn::SdpStatus::Optimal);
  CHECK(s10.objective == doctest::Approx(10.0 * s1.objective).epsilon(1e-5));
  CHECK(std::abs(s10.x(0) - s1.x(0)) < 1e-6);
}

TEST_CASE("deterministic reruns are bitwise identical") {
  oracles::Rng rng(107);
  rosyn::SdpProblem p(2);
  p.set_objective((VectorXd(2) << 1.0, -0.5).finished());
  const int b = p.add_block(3);
  MatrixXd base = oracles::random_matrix(rng, 3, 3);
  p.add_constant(b, MatrixXd(base * base.transpose() +
                             MatrixXd::Identity(3, 3)));
  MatrixXd F1 = oracles::random_matrix(rng, 3, 3);
  MatrixXd F2 = oracles::random_matrix(rng, 3, 3);
  p.add_matrix(b, 0, MatrixXd(0.5 * (F1 + F1.transpose())));
  p.add_matrix(b, 1, MatrixXd(0.5 * (F2 + F2.transpose())));
  p.set_lower_bound(0, -2.0);
  p.set_lower_bound(1, -2.0);
  const int ub = p.add_block(2);
  p.add_constant_entry(ub, 0, 0, 2.0);
  p.add_entry(ub, 0, 0, 0, -1.0);
  p.add_constant_entry(ub, 1, 1, 2.0);
  p.add_entry(ub, 1, 1, 1, -1.0);

  const auto a = rosyn::solve(p);
  const auto bb = rosyn::solve(p);
  CHECK(a.iterations == bb.iterations);
  CHECK(a.objective == bb.objective);  // bitwise
  CHECK((a.x - bb.x).norm() == 0.0);
}

TEST_CASE("infeasible semidefinite constraint is certified") {
  // x >= 1 and x <= -1 simultaneously.
  rosyn::SdpProblem p(1);
  p.set_objective((VectorXd(1) << 0.0).finished());
  const int b1 = p.add_block(1);
  p.add_constant_entry(b1, 0, 0, -1.0);
  p.add_entry(b1, 0, 0, 0, 1.0);
  const int b2 = p.add_block(1);
  p.add_constant_entry(b2, 0, 0, -1.0);
  p.add_entry(b2, 0, 0, 0, -1.0);
  const auto sol = rosyn::solve(p);
  CHECK(sol.status == rosyn::SdpStatus::Infeasible);
}

TEST_CASE("descent direction without a cone is unbounded") {
  rosyn::SdpProblem p(1);
  p.set_objective((VectorXd(1) << 1.0).finished());
  const int b = p.add_block(1);
  p.add_constant_entry(b, 0, 0, 1.0);
  p.add_entry(b, 0, 0, 0, -1.0);  // x <= 1, no lower bound
  const auto sol = rosyn::solve(p);
  CHECK(sol.status == rosyn::SdpStatus::Unbounded);
}

TEST_CASE("equality constraints restrict the feasible set") {
  // min x0 + x1 s.t. x0 + x1 = 1, x0 >= 0, x1 >= 0 -> objective 1.
  rosyn::SdpProblem p(2);
  p.set_objective((VectorXd(2) << 1.0, 1.0).finished());
  p.set_lower_bound(0, 0.0);
  p.set_lower_bound(1, 0.0);
  p.add_equality((VectorXd(2) << 1.0, 1.0).finished(), 1.0);
  const auto sol = rosyn::solve(p);
  REQUIRE(sol.status == rosyn::SdpStatus::Optimal);
  CHECK(sol.objective == doctest::Approx(1.0).epsilon(1e-7));
  CHECK(sol.eq_residual < 1e-8);

  // Contradictory equalities are infeasible outright.
  rosyn::SdpProblem q(1);
  q.add_equality((VectorXd(1) << 1.0).finished(), 1.0);
  q.add_equality((VectorXd(1) << 1.0).finished(), 2.0);
  CHECK(rosyn::solve(q).status == rosyn::SdpStatus::Infeasible);
}

TEST_CASE("minimum eigenpair") {
  CHECK(rosyn::min_eig_vec(MatrixXd::Identity(3, 3)).first ==
        doctest::Approx(1.0));
  MatrixXd D = MatrixXd::Zero(3, 3);
  D.diagonal() << 3.0, -2.0, 5.0;
  const auto [eig, v] = rosyn::min_eig_vec(D);
  CHECK(eig == doctest::Approx(-2.0));
  CHECK(std::abs(v(1)) == doctest::Approx(1.0));
  CHECK(v(1) > 0.0);  // deterministic sign

  oracles::Rng rng(113);
  MatrixXd S = oracles::random_matrix(rng, 30, 30);
  S = 0.5 * (S + S.transpose()).eval();
  const auto [lam, vec] = rosyn::min_eig_vec(S);
  Eigen::SelfAdjointEigenSolver<MatrixXd> es(S, Eigen::EigenvaluesOnly);
  CHECK(lam == doctest::Approx(es.eigenvalues()(0)).epsilon(1e-10));
  CHECK((S * vec - lam * vec).norm() <= 1e-9 * S.norm());
}

TEST_CASE("sparse text dump carries every coefficient") {
  rosyn::SdpProblem p(2);
  p.set_objective((VectorXd(2) << 1.0, 2.0).finished());
  const int b = p.add_block(2);
  p.add_constant_entry(b, 0, 1, 3.0);
  p.add_entry(b, 0, 0, 1, 4.0);
  p.set_lower_bound(0, -1.0);
  p.add_equality((VectorXd(2) << 1.0, 0.0).finished(), 0.5);
  std::ostringstream os;
  p.dump(os);
  const std::string text = os.str();
  CHECK(text.find("sdp vars 2 blocks 1") != std::string::npos);
  CHECK(text.find("0 0 1 -1 3") != std::string::npos);
  CHECK(text.find("0 0 0 1 4") != std::string::npos);
  CHECK(text.find("lb 0 -1") != std::string::npos);
  CHECK(text.find("eq 1 0 rhs 0.5") != std::string::npos);
}

}  // TEST_SUITE
