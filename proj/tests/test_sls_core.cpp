#include <doctest.h>

#include <Eigen/Dense>

#include "rosyn/lifted_system.hpp"
#include "rosyn/simulate.hpp"
#include "rosyn/sls.hpp"
#include "rosyn/discretization.hpp"
#include "support/oracles.hpp"

using Eigen::MatrixXd;
using Eigen::VectorXd;

TEST_SUITE("sls_core") {

TEST_CASE("responses from explicit gains satisfy the achievability "
          "conditions") {
  oracles::Rng rng(3);
  for (int trial = 0; trial < 10; ++trial) {
    const auto sys = oracles::random_system(rng, 2, 1, 1, 2, 1, 3);
    const auto L = rosyn::lift(sys);
    const MatrixXd K = oracles::random_causal_gain(rng, L);
    const auto omega = rosyn::response_from_gain(K, L);
    const auto [r1, r2] = rosyn::sls_residuals(omega, L);
    CHECK(r1 <= 1e-9);
    CHECK(r2 <= 1e-9);
  }
}

TEST_CASE("open loop response") {
  oracles::Rng rng(5);
  const auto sys = oracles::random_system(rng, 2, 1, 1, 1, 1, 3);
  const auto L = rosyn::lift(sys);
  const auto omega = rosyn::response_from_gain(MatrixXd::Zero(L.Nu, L.Ny), L);
  const MatrixXd resolvent = L.solve_causal(MatrixXd::Identity(L.Nx, L.Nx));
  CHECK((omega.R - resolvent).norm() <= 1e-12 * resolvent.norm());
  CHECK(omega.N.norm() == 0.0);
  CHECK(omega.M.norm() == 0.0);
  CHECK(omega.L.norm() == 0.0);
  const auto [r1, r2] = rosyn::sls_residuals(omega, L);
  CHECK(r1 <= 1e-10);
  CHECK(r2 <= 1e-10);
}

TEST_CASE("random non-achievable blocks are flagged") {
  oracles::Rng rng(9);
  const auto sys = oracles::random_system(rng, 2, 1, 1, 2, 1, 3);
  const auto L = rosyn::lift(sys);
  rosyn::SlsResponse omega;
  omega.R = oracles::random_matrix(rng, L.Nx, L.Nx);
  omega.N = oracles::random_matrix(rng, L.Nx, L.Ny);
  omega.M = oracles::random_matrix(rng, L.Nu, L.Nx);
  omega.L = oracles::random_matrix(rng, L.Nu, L.Ny);
  const auto [r1, r2] = rosyn::sls_residuals(omega, L);
  CHECK(std::max(r1, r2) > 0.1);
  CHECK_THROWS_AS(rosyn::extract_gain(omega, L), std::invalid_argument);
}

TEST_CASE("scalar response matches the hand inversion") {
  // n = m_u = p_y = 1, T = 1, A = 0.5, Bu = Cy = 1.
  MatrixXd A(1, 1), B(1, 1), C(1, 1), D(1, 1);
  A << 0.5;
  B << 1;
  C << 1;
  D << 0;
  const auto sys = rosyn::LtvSystem::time_invariant(1, A, B, B, C, C, D, D);
  const auto L = rosyn::lift(sys);
  oracles::Rng rng(1);
  const double k0 = 0.37, k1 = -0.81;
  MatrixXd K = MatrixXd::Zero(2, 2);
  K(0, 0) = k0;
  K(1, 1) = k1;
  const auto omega = rosyn::response_from_gain(K, L);
  MatrixXd R_expect(2, 2);
  R_expect << 1, 0, 0.5 + k0, 1;
  CHECK((omega.R - R_expect).norm() < 1e-12);
}

TEST_CASE("gain round trip") {
  oracles::Rng rng(17);
  for (int trial = 0; trial < 10; ++trial) {
    const auto sys = oracles::random_system(rng, 2, 2, 1, 1, 1, 3);
    const auto L = rosyn::lift(sys);
    const MatrixXd K = oracles::random_causal_gain(rng, L);
    const auto omega = rosyn::response_from_gain(K, L);
    const MatrixXd K_rec = rosyn::extract_gain(omega, L);
    CHECK((K_rec - K).norm() <= 1e-8 * std::max(1.0, K.norm()));

    // and the other direction: the extracted gain re-derives the response
    const auto omega_rec = rosyn::response_from_gain(K_rec, L);
    const double scale = std::max(1.0, omega.R.norm());
    CHECK((omega_rec.R - omega.R).norm() <= 1e-6 * scale);
    CHECK((omega_rec.N - omega.N).norm() <= 1e-6 * scale);
    CHECK((omega_rec.M - omega.M).norm() <= 1e-6 * scale);
    CHECK((omega_rec.L - omega.L).norm() <= 1e-6 * scale);
  }
}

TEST_CASE("closed-loop maps are affine in the response") {
  oracles::Rng rng(29);
  const auto sys = oracles::random_system(rng, 2, 1, 1, 2, 1, 2);
  const auto L = rosyn::lift(sys);
  const auto w1 = rosyn::response_from_gain(oracles::random_causal_gain(rng, L), L);
  const auto w2 = rosyn::response_from_gain(oracles::random_causal_gain(rng, L), L);
  rosyn::SlsResponse sum{w1.R + w2.R, w1.N + w2.N, w1.M + w2.M, w1.L + w2.L};
  rosyn::SlsResponse zero{MatrixXd::Zero(L.Nx, L.Nx), MatrixXd::Zero(L.Nx, L.Ny),
                          MatrixXd::Zero(L.Nu, L.Nx), MatrixXd::Zero(L.Nu, L.Ny)};
  const auto m1 = rosyn::closed_loop_maps(w1, L);
  const auto m2 = rosyn::closed_loop_maps(w2, L);
  const auto ms = rosyn::closed_loop_maps(sum, L);
  const auto m0 = rosyn::closed_loop_maps(zero, L);
  CHECK((ms.phi - (m1.phi + m2.phi - m0.phi)).norm() < 1e-12);
  CHECK((ms.psi - (m1.psi + m2.psi - m0.psi)).norm() < 1e-12);
  CHECK((ms.phi_u - (m1.phi_u + m2.phi_u - m0.phi_u)).norm() < 1e-12);
}

TEST_CASE("output deviation quadratic form agrees with simulation") {
  // Open loop on the demo plant: |y - y_n|^2 for an attack-only
  // disturbance equals the quadratic form in the closed-loop map.
  const auto sys = rosyn::spring_damper_demo_plant(3);
  const auto L = rosyn::lift(sys);
  const auto omega = rosyn::response_from_gain(MatrixXd::Zero(L.Nu, L.Ny), L);
  const auto maps = rosyn::closed_loop_maps(omega, L);
  oracles::Rng rng(31);
  for (int trial = 0; trial < 5; ++trial) {
    const MatrixXd a = oracles::random_matrix(rng, sys.horizon, sys.na);
    VectorXd a_stacked = VectorXd::Zero(L.Na);
    for (int k = 0; k < sys.horizon; ++k) {
      a_stacked.segment(sys.nx + k * sys.na, sys.na) = a.row(k).transpose();
    }
    const auto traj = rosyn::simulate(sys, VectorXd::Zero(sys.nx), MatrixXd(), a);
    const double sim = (rosyn::stack_rows(traj.y) -
                        rosyn::stack_rows(traj.y_nominal)).squaredNorm();
    const double quad = a_stacked.dot(maps.phi.transpose() * maps.phi * a_stacked);
    CHECK(sim == doctest::Approx(quad).epsilon(1e-10));
  }
}

TEST_CASE("clairvoyant data on the scalar plant") {
  // T = 1, A = 0, Bu = Cz = Ba = 1, Dzu = 0.
  MatrixXd A(1, 1), B(1, 1), C(1, 1), D(1, 1);
  A << 0;
  B << 1;
  C << 1;
  D << 0;
  const auto sys = rosyn::LtvSystem::time_invariant(1, A, B, B, C, C, D, D);
  const auto L = rosyn::lift(sys);
  const auto clair = rosyn::clairvoyant(L);
  MatrixXd Q_expect(2, 2);
  Q_expect << 1.0, 0.0, 0.0, 0.5;
  CHECK((clair.Q - Q_expect).norm() < 1e-12);

  VectorXd a(2);
  a << 1.0, 0.0;
  // Direct least squares over u.
  const MatrixXd E = clair.E;
  const VectorXd w = clair.F_Ba * a;
  const MatrixXd H = MatrixXd::Identity(2, 2) + E.transpose() * E;
  const VectorXd u_star = -H.llt().solve(E.transpose() * w);
  const double direct = (E * u_star + w).squaredNorm() + u_star.squaredNorm();
  CHECK(a.dot(clair.Q * a) == doctest::Approx(direct).epsilon(1e-10));
}

TEST_CASE("no control authority collapses E to the feedthrough") {
  oracles::Rng rng(37);
  auto sys = oracles::random_system(rng, 2, 1, 1, 1, 2, 2);
  for (auto& m : sys.Bu) m.setZero();
  const auto L = rosyn::lift(sys);
  const auto clair = rosyn::clairvoyant(L);
  CHECK((clair.E - L.Dzu).norm() == 0.0);
}

TEST_CASE("the non-causal policy attains a'Qa") {
  oracles::Rng rng(41);
  const auto sys = oracles::random_system(rng, 2, 2, 1, 1, 2, 3);
  const auto L = rosyn::lift(sys);
  const auto clair = rosyn::clairvoyant(L);
  for (int trial = 0; trial < 50; ++trial) {
    const VectorXd a = oracles::random_matrix(rng, L.Na, 1);
    const VectorXd u = rosyn::noncausal_input(clair, a);
    const double cost = (clair.E * u + clair.F_Ba * a).squaredNorm() +
                        u.squaredNorm();
    CHECK(cost == doctest::Approx(a.dot(clair.Q * a))
                      .epsilon(1e-9 * std::max(1.0, cost)));
  }
}

TEST_CASE("the non-causal policy is locally optimal") {
  oracles::Rng rng(43);
  const auto sys = oracles::random_system(rng, 2, 2, 1, 1, 1, 2);
  const auto L = rosyn::lift(sys);
  const auto clair = rosyn::clairvoyant(L);
  const VectorXd a = oracles::random_matrix(rng, L.Na, 1);
  const VectorXd u = rosyn::noncausal_input(clair, a);
  auto cost = [&](const VectorXd& uu) {
    return (clair.E * uu + clair.F_Ba * a).squaredNorm() + uu.squaredNorm();
  };
  const double base = cost(u);
  for (int trial = 0; trial < 100; ++trial) {
    VectorXd delta = oracles::random_matrix(rng, L.Nu, 1);
    delta *= 1e-3 / delta.norm();
    CHECK(cost(u + delta) >= base - 1e-12);
  }
  CHECK(rosyn::noncausal_input(clair, VectorXd::Zero(L.Na)).norm() == 0.0);
}

TEST_CASE("Q stays positive semidefinite over random systems") {
  oracles::Rng rng(47);
  for (int trial = 0; trial < 100; ++trial) {
    const int nx = 1 + static_cast<int>(rng() % 3);
    const int T = 1 + static_cast<int>(rng() % 3);
    const auto sys = oracles::random_system(rng, nx, 2, 1, 1, 2, T);
    const auto L = rosyn::lift(sys);
    const auto clair = rosyn::clairvoyant(L);
    Eigen::SelfAdjointEigenSolver<MatrixXd> es(clair.Q,
                                               Eigen::EigenvaluesOnly);
    CHECK(es.eigenvalues()(0) >= -1e-9);
  }
}

TEST_CASE("regret of any achievable response is nonnegative") {
  oracles::Rng rng(53);
  for (int trial = 0; trial < 20; ++trial) {
    const auto sys = oracles::random_system(rng, 2, 1, 1, 2, 1, 3);
    const auto L = rosyn::lift(sys);
    const MatrixXd K = oracles::random_causal_gain(rng, L);
    const auto omega = rosyn::response_from_gain(K, L);
    const auto maps = rosyn::closed_loop_maps(omega, L);
    const auto clair = rosyn::clairvoyant(L);
    for (int s = 0; s < 10; ++s) {
      const VectorXd a = oracles::random_matrix(rng, L.Na, 1);
      const double J = rosyn::closed_loop_cost(maps, a);
      CHECK(J - a.dot(clair.Q * a) >= -1e-8 * std::max(1.0, J));
    }
  }
}

TEST_CASE("extracted gains reproduce the closed-loop response in "
          "simulation") {
  const auto sys = rosyn::spring_damper_demo_plant(3);
  const auto L = rosyn::lift(sys);
  oracles::Rng rng(59);
  const MatrixXd K = oracles::random_causal_gain(rng, L, 0.3);
  const auto omega = rosyn::response_from_gain(K, L);
  const auto maps = rosyn::closed_loop_maps(omega, L);
  const MatrixXd K_rec = rosyn::extract_gain(omega, L);
  for (int trial = 0; trial < 20; ++trial) {
    const VectorXd a_stacked = oracles::random_matrix(rng, L.Na, 1);
    const auto [x0, a] = rosyn::split_attack(a_stacked, sys.nx, sys.na,
                                             sys.horizon);
    const auto traj = rosyn::simulate_closed_loop(sys, K_rec, x0, a);
    const VectorXd x_expect = maps.phi_x * a_stacked;
    const VectorXd u_expect = maps.phi_u * a_stacked;
    CHECK((rosyn::stack_rows(traj.x) - x_expect).norm() <=
          1e-6 * std::max(1.0, x_expect.norm()));
    CHECK((rosyn::stack_rows(traj.u) - u_expect).norm() <=
          1e-6 * std::max(1.0, u_expect.norm()));
  }
}

TEST_CASE("topology masks restrict the causal support") {
  const auto sys = rosyn::spring_damper_demo_plant(2);
  const auto L = rosyn::lift(sys);
  const auto causal = rosyn::SlsMask::causal(L);
  CHECK(causal.L(0, 0));
  // measurement step 1 cannot feed input step 0
  CHECK_FALSE(causal.L(0, sys.ny));
  CHECK(causal.R(sys.nx, 0));

  Eigen::Array<bool, Eigen::Dynamic, Eigen::Dynamic> adj(2, 2);
  adj << true, false, false, true;  // two disconnected nodes
  Eigen::VectorXi node_state(4), node_input(1), node_output(2);
  node_state << 0, 0, 1, 1;
  node_input << 0;
  node_output << 0, 1;
  const auto masked = rosyn::SlsMask::causal_with_topology(
      L, adj, node_state, node_input, node_output);
  // The input lives on node 0 and can never see node-1 measurements across
  // a disconnected topology, at any hop distance.
  for (int in_step = 0; in_step <= sys.horizon; ++in_step) {
    for (int out_step = 0; out_step <= in_step; ++out_step) {
      CHECK_FALSE(masked.L(in_step * sys.nu, out_step * sys.ny + 1));
      CHECK(masked.L(in_step * sys.nu, out_step * sys.ny) ==
            causal.L(in_step * sys.nu, out_step * sys.ny));
    }
  }
}

}  // TEST_SUITE
