#pragma once

#include <Eigen/Dense>
#include <random>

#include "rosyn/lifted_system.hpp"
#include "rosyn/ltv_system.hpp"

namespace oracles {

using Rng = std::mt19937_64;

Eigen::MatrixXd random_matrix(Rng& rng, int rows, int cols,
                              double scale = 1.0);

/// Truncated Neumann series sum_{j=0}^{terms} M^j.
Eigen::MatrixXd neumann_series(const Eigen::MatrixXd& M, int terms);

/// Scaling-and-squaring Taylor exponential, `terms` Taylor terms after
/// scaling the norm below 0.5. Independent of the library Pade route.
Eigen::MatrixXd taylor_expm(const Eigen::MatrixXd& A, int terms = 20);

/// Random time-varying system with the given shape. Entries are uniform
/// and mildly contractive so trajectories stay tame.
rosyn::LtvSystem random_system(Rng& rng, int nx, int nu, int na, int ny,
                               int nz, int horizon);

/// Random stacked causal output-feedback gain for a lifted plant.
Eigen::MatrixXd random_causal_gain(Rng& rng, const rosyn::LiftedSystem& sys,
                                   double scale = 0.5);

/// Brute-force minimizer of c'x over F0 + sum x_i F_i >= 0 for one or two
/// variables: coarse grid then local bisection refinement on the best
/// feasible axis direction. Feasibility through eigenvalues.
double grid_sdp_oracle(const Eigen::VectorXd& c,
                       const std::vector<Eigen::MatrixXd>& f0,
                       const std::vector<std::vector<Eigen::MatrixXd>>& fi,
                       double lo, double hi, int grid);

/// Uniform sample inside the ellipsoid a' G a <= alpha (G > 0).
Eigen::VectorXd sample_in_ellipsoid(Rng& rng, const Eigen::MatrixXd& G,
                                    double alpha);

}  // namespace oracles
