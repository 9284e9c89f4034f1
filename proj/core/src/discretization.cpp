#include "rosyn/discretization.hpp"

#include <cmath>
#include <stdexcept>

namespace rosyn {
namespace {

// Degree-13 Pade numerator coefficients (Higham 2005).
constexpr double kPade13[] = {64764752532480000.0,
                              32382376266240000.0,
                              7771770303897600.0,
                              1187353796428800.0,
                              129060195264000.0,
                              10559470521600.0,
                              670442572800.0,
                              33522128640.0,
                              1323241920.0,
                              40840800.0,
                              960960.0,
                              16380.0,
                              182.0,
                              1.0};

}  // namespace

Eigen::MatrixXd expm(const Eigen::MatrixXd& A) {
  if (A.rows() != A.cols()) {
    throw std::invalid_argument("expm requires a square matrix");
  }
  const int n = static_cast<int>(A.rows());
  if (n == 0) return A;

  const double norm = A.cwiseAbs().rowwise().sum().maxCoeff();  // inf-norm
  // theta_13 from Higham; above it, scale by powers of two.
  const double theta13 = 5.371920351148152;
  int squarings = 0;
  Eigen::MatrixXd As = A;
  if (norm > theta13) {
    squarings = static_cast<int>(std::ceil(std::log2(norm / theta13)));
    As /= std::ldexp(1.0, squarings);
  }

  const Eigen::MatrixXd I = Eigen::MatrixXd::Identity(n, n);
  const Eigen::MatrixXd A2 = As * As;
  const Eigen::MatrixXd A4 = A2 * A2;
  const Eigen::MatrixXd A6 = A4 * A2;
  const double* b = kPade13;

  Eigen::MatrixXd U =
      As * (A6 * (b[13] * A6 + b[11] * A4 + b[9] * A2) + b[7] * A6 +
            b[5] * A4 + b[3] * A2 + b[1] * I);
  Eigen::MatrixXd V = A6 * (b[12] * A6 + b[10] * A4 + b[8] * A2) + b[6] * A6 +
                      b[4] * A4 + b[2] * A2 + b[0] * I;

  Eigen::MatrixXd F = (V - U).partialPivLu().solve(V + U);
  for (int i = 0; i < squarings; ++i) F = F * F;
  return F;
}

std::pair<Eigen::MatrixXd, Eigen::MatrixXd> discretize_zoh(
    const ContinuousLti& c) {
  if (c.ts <= 0.0) {
    throw std::invalid_argument("sampling period must be positive");
  }
  const int n = static_cast<int>(c.A.rows());
  const int m = static_cast<int>(c.B.cols());
  if (c.A.rows() != c.A.cols() || c.B.rows() != n) {
    throw std::invalid_argument("inconsistent continuous-time shapes");
  }
  Eigen::MatrixXd aug = Eigen::MatrixXd::Zero(n + m, n + m);
  aug.topLeftCorner(n, n) = c.A;
  aug.topRightCorner(n, m) = c.B;
  const Eigen::MatrixXd E = expm(aug * c.ts);
  return {E.topLeftCorner(n, n), E.topRightCorner(n, m)};
}

std::pair<Eigen::MatrixXd, Eigen::MatrixXd> spring_damper_continuous(
    const SpringDamperParams& p) {
  if (p.m1 <= 0 || p.m2 <= 0 || p.k1 <= 0 || p.k2 <= 0 || p.b1 < 0 ||
      p.b2 < 0 || p.ts <= 0) {
    throw std::invalid_argument(
        "spring-damper parameters must be positive (damping may be zero)");
  }
  Eigen::MatrixXd A(4, 4);
  // state: [p1 v1 p2 v2]
  A << 0, 1, 0, 0,                                                       //
      -(p.k1 + p.k2) / p.m1, -(p.b1 + p.b2) / p.m1, p.k2 / p.m1,         //
      p.b2 / p.m1,                                                       //
      0, 0, 0, 1,                                                        //
      p.k2 / p.m2, p.b2 / p.m2, -p.k2 / p.m2, -p.b2 / p.m2;
  Eigen::MatrixXd B(4, 2);
  B << 0, 0,            //
      1.0 / p.m1, 0,    //
      0, 0,             //
      0, 1.0 / p.m2;    // column 0: control on mass 1, column 1: attack on 2
  return {A, B};
}

LtvSystem spring_damper_demo_plant(int horizon,
                                   const SpringDamperParams& params) {
  if (horizon < 1) {
    throw std::invalid_argument("horizon must be at least 1");
  }
  auto [Ac, Bc] = spring_damper_continuous(params);
  auto [Ad, Bd] = discretize_zoh({Ac, Bc, params.ts});

  const Eigen::MatrixXd Bu = Bd.col(0);
  const Eigen::MatrixXd Ba = Bd.col(1);
  Eigen::MatrixXd Cy(2, 4);
  Cy << 1, 0, 0, 0,  //
      0, 0, 1, 0;
  Eigen::MatrixXd Cz(1, 4);
  Cz << 0, 0, 1, 0;
  Eigen::MatrixXd Dya(2, 1);
  Dya << params.dya, 0;
  Eigen::MatrixXd Dzu = Eigen::MatrixXd::Zero(1, 1);
  return LtvSystem::time_invariant(horizon, Ad, Bu, Ba, Cy, Cz, Dya, Dzu);
}

}  // namespace rosyn
