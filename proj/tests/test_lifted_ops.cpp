#include <doctest.h>

#include <Eigen/Dense>

#include "rosyn/discretization.hpp"
#include "rosyn/lifted_system.hpp"
#include "rosyn/ltv_system.hpp"
#include "rosyn/simulate.hpp"
#include "support/oracles.hpp"

using Eigen::MatrixXd;
using Eigen::VectorXd;

namespace {

rosyn::LtvSystem scalar_system(double a, double bu, double ba, int horizon) {
  MatrixXd A(1, 1), Bu(1, 1), Ba(1, 1), C(1, 1), D(1, 1);
  A << a;
  Bu << bu;
  Ba << ba;
  C << 1;
  D << 0;
  return rosyn::LtvSystem::time_invariant(horizon, A, Bu, Ba, C, C, D, D);
}

}  // namespace

TEST_SUITE("lifted_ops") {

TEST_CASE("blkdiag layout of the scalar T=1 lift") {
  const auto sys = scalar_system(0.5, 1.0, 1.0, 1);
  const auto L = rosyn::lift(sys);
  MatrixXd A_expect(2, 2);
  A_expect << 0.5, 0, 0, 0;
  CHECK((L.A - A_expect).norm() == 0.0);
  CHECK((L.Ba - MatrixXd::Identity(2, 2)).norm() == 0.0);
  MatrixXd Z_expect(2, 2);
  Z_expect << 0, 0, 1, 0;
  CHECK((L.Z - Z_expect).norm() == 0.0);
}

TEST_CASE("downshift is nilpotent of index T+1") {
  oracles::Rng rng(7);
  const auto sys = oracles::random_system(rng, 3, 2, 1, 2, 1, 4);
  const auto L = rosyn::lift(sys);
  MatrixXd pow = MatrixXd::Identity(L.Nx, L.Nx);
  for (int j = 0; j <= L.horizon; ++j) pow = pow * L.Z;
  CHECK(pow.norm() == 0.0);
}

TEST_CASE("causal resolvent equals the finite Neumann series") {
  oracles::Rng rng(11);
  const auto sys = oracles::random_system(rng, 2, 1, 1, 1, 1, 3);
  const auto L = rosyn::lift(sys);
  const MatrixXd inv = L.solve_causal(MatrixXd::Identity(L.Nx, L.Nx));
  const MatrixXd series = oracles::neumann_series(L.ZA, L.horizon);
  CHECK((inv - series).norm() < 1e-12 * series.norm());
}

TEST_CASE("zero everything stays at zero") {
  const auto sys = scalar_system(0.5, 1.0, 1.0, 3);
  const auto traj = rosyn::simulate(sys, VectorXd::Zero(1), MatrixXd(), MatrixXd());
  CHECK(traj.x.norm() == 0.0);
  CHECK(traj.y.norm() == 0.0);
  CHECK(traj.z.norm() == 0.0);
}

TEST_CASE("hand recursion: x = (1, 1.5, 0.75)") {
  const auto sys = scalar_system(0.5, 1.0, 1.0, 2);
  VectorXd x0(1);
  x0 << 1.0;
  MatrixXd a(2, 1);
  a << 1.0, 0.0;
  const auto traj = rosyn::simulate(sys, x0, MatrixXd(), a);
  CHECK(traj.x(0, 0) == doctest::Approx(1.0).epsilon(1e-14));
  CHECK(traj.x(1, 0) == doctest::Approx(1.5).epsilon(1e-14));
  CHECK(traj.x(2, 0) == doctest::Approx(0.75).epsilon(1e-14));
}

TEST_CASE("stacked solve equals the recursion") {
  oracles::Rng rng(23);
  for (int trial = 0; trial < 20; ++trial) {
    const int nx = 1 + static_cast<int>(rng() % 3);
    const int T = 1 + static_cast<int>(rng() % 4);
    const auto sys = oracles::random_system(rng, nx, 2, 1, 2, 1, T);
    const auto L = rosyn::lift(sys);
    const VectorXd x0 = oracles::random_matrix(rng, nx, 1);
    const MatrixXd u = oracles::random_matrix(rng, T + 1, 2);
    const MatrixXd a = oracles::random_matrix(rng, T, 1);
    const auto traj = rosyn::simulate(sys, x0, u, a);

    VectorXd a_stacked(L.Na);
    a_stacked.head(nx) = x0;
    for (int k = 0; k < T; ++k) a_stacked.segment(nx + k, 1) = a.row(k);
    const VectorXd x_direct = L.solve_causal(
        L.ZBu * rosyn::stack_rows(u) + L.Ba * a_stacked);
    const VectorXd x_rec = rosyn::stack_rows(traj.x);
    CHECK((x_direct - x_rec).norm() <= 1e-10 * std::max(1.0, x_rec.norm()));

    const VectorXd y_direct = L.Cy * x_direct + L.Dya * a_stacked;
    CHECK((y_direct - rosyn::stack_rows(traj.y)).norm() <=
          1e-10 * std::max(1.0, y_direct.norm()));
    const VectorXd z_direct = L.Cz * x_direct + L.Dzu * rosyn::stack_rows(u);
    CHECK((z_direct - rosyn::stack_rows(traj.z)).norm() <=
          1e-10 * std::max(1.0, z_direct.norm()));
  }
}

TEST_CASE("simulate rejects non-finite input") {
  const auto sys = scalar_system(0.5, 1.0, 1.0, 2);
  MatrixXd a(2, 1);
  a << 1.0, std::numeric_limits<double>::quiet_NaN();
  CHECK_THROWS_AS(rosyn::simulate(sys, VectorXd::Zero(1), MatrixXd(), a),
                  std::invalid_argument);
}

TEST_CASE("integrator discretization") {
  rosyn::ContinuousLti c{MatrixXd::Zero(1, 1), MatrixXd::Ones(1, 1), 0.5};
  const auto [Ad, Bd] = rosyn::discretize_zoh(c);
  CHECK(Ad(0, 0) == doctest::Approx(1.0).epsilon(1e-14));
  CHECK(Bd(0, 0) == doctest::Approx(0.5).epsilon(1e-14));
}

TEST_CASE("scalar decay has the closed-form hold integral") {
  MatrixXd A(1, 1), B(1, 1);
  A << -1.0;
  B << 1.0;
  const auto [Ad, Bd] = rosyn::discretize_zoh({A, B, 0.5});
  CHECK(Ad(0, 0) == doctest::Approx(std::exp(-0.5)).epsilon(1e-13));
  CHECK(Bd(0, 0) == doctest::Approx(1.0 - std::exp(-0.5)).epsilon(1e-13));
}

TEST_CASE("two-mass plant matches the series oracle at Ts = 0.5") {
  const auto [Ac, Bc] = rosyn::spring_damper_continuous({});
  const auto [Ad, Bd] = rosyn::discretize_zoh({Ac, Bc, 0.5});
  MatrixXd aug = MatrixXd::Zero(6, 6);
  aug.topLeftCorner(4, 4) = Ac;
  aug.topRightCorner(4, 2) = Bc;
  const MatrixXd E = oracles::taylor_expm(aug * 0.5, 20);
  CHECK((Ad - E.topLeftCorner(4, 4)).norm() < 1e-10);
  CHECK((Bd - E.topRightCorner(4, 2)).norm() < 1e-10);
}

TEST_CASE("expm matches the series oracle under the desk-scale norm cap") {
  oracles::Rng rng(5);
  for (int trial = 0; trial < 20; ++trial) {
    const int n = 2 + static_cast<int>(rng() % 4);
    MatrixXd A = oracles::random_matrix(rng, n, n, 1.5);
    if (A.norm() > 5.0) A *= 5.0 / A.norm();
    const MatrixXd got = rosyn::expm(A);
    const MatrixXd want = oracles::taylor_expm(A, 24);
    CHECK((got - want).norm() <= 1e-10 * std::max(1.0, want.norm()));
  }
}

TEST_CASE("demo plant is stable, correctly sized, and volume-preserving "
          "without damping") {
  const auto sys = rosyn::spring_damper_demo_plant(5);
  CHECK(sys.nx == 4);
  CHECK(sys.nu == 1);
  CHECK(sys.na == 1);
  const auto L = rosyn::lift(sys);
  CHECK(L.Nx == 24);
  CHECK(L.Na == 4 + 5 * sys.na);

  const Eigen::VectorXcd eigs = sys.A[0].eigenvalues();
  for (int i = 0; i < eigs.size(); ++i) CHECK(std::abs(eigs(i)) < 1.0);

  rosyn::SpringDamperParams undamped;
  undamped.b1 = 0.0;
  undamped.b2 = 0.0;
  const auto lossless = rosyn::spring_damper_demo_plant(2, undamped);
  CHECK(std::abs(std::abs(lossless.A[0].determinant()) - 1.0) < 1e-8);
}

TEST_CASE("demo plant rejects non-positive physical parameters") {
  rosyn::SpringDamperParams bad;
  bad.m1 = -1.0;
  CHECK_THROWS_AS(rosyn::spring_damper_demo_plant(2, bad),
                  std::invalid_argument);
}

TEST_CASE("construction errors name the offending step") {
  auto sys = scalar_system(0.5, 1.0, 1.0, 3);
  sys.A[1] = MatrixXd::Zero(2, 2);
  try {
    sys.validate();
    CHECK(false);
  } catch (const std::invalid_argument& e) {
    CHECK(std::string(e.what()).find("A[1]") != std::string::npos);
  }
}

}  // TEST_SUITE
