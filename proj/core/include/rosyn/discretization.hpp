#pragma once

#include <Eigen/Dense>
#include <utility>

#include "rosyn/ltv_system.hpp"

namespace rosyn {

/// Matrix exponential by scaling-and-squaring with a degree-13 Pade
/// approximant. Deterministic across platforms for identical inputs.
Eigen::MatrixXd expm(const Eigen::MatrixXd& A);

/// Zero-order-hold discretization of x' = A x + B u at period ts:
///   Ad = exp(A ts),  Bd = (integral_0^ts exp(A tau) dtau) B,
/// computed through the exponential of the augmented matrix
/// [[A, B], [0, 0]] * ts.
std::pair<Eigen::MatrixXd, Eigen::MatrixXd> discretize_zoh(
    const ContinuousLti& c);

/// Physical parameters of the two-mass spring-damper chain used by the
/// demo experiments: mass 1 is anchored to the wall through (k1, b1) and
/// coupled to mass 2 through (k2, b2). The control force acts on mass 1,
/// the attack force on mass 2 (with a sensor-corruption component dya on
/// the first measurement). Both positions are measured; the regulated
/// output is the position of mass 2.
struct SpringDamperParams {
  double m1 = 1.0;
  double m2 = 1.0;
  double k1 = 1.0;
  double k2 = 1.0;
  double b1 = 0.1;
  double b2 = 0.1;
  double ts = 0.5;
  double dya = 0.5;  // sensor-attack gain on measurement 1
};

/// Builds the 4-state demo plant, ZOH-discretized at params.ts and
/// replicated across the horizon. Throws on non-positive masses,
/// stiffnesses, periods or a horizon below 1. Damping may be zero.
LtvSystem spring_damper_demo_plant(int horizon,
                                   const SpringDamperParams& params = {});

/// Continuous-time matrices of the demo chain (state [p1 v1 p2 v2]).
std::pair<Eigen::MatrixXd, Eigen::MatrixXd> spring_damper_continuous(
    const SpringDamperParams& params);

}  // namespace rosyn
