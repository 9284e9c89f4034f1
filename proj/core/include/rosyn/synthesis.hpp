#pragma once

#include <Eigen/Dense>
#include <optional>
#include <stdexcept>
#include <utility>
#include <vector>

#include "rosyn/regret.hpp"
#include "rosyn/sdp.hpp"
#include "rosyn/sls.hpp"

namespace rosyn {

/// Thrown when a mask admits no achievable response.
struct InfeasibleProblem : std::runtime_error {
  using std::runtime_error::runtime_error;
};

/// Lifted variables of the rank-constrained reformulation. X lifts
/// vec(Phi) vec(Phi)', indexed over the support of Phi after eliminating
/// structurally-zero coordinates (column-major order of the Ny x Na
/// shape); Lambda lifts [lambda, lambda_inv]' when the joint program runs.
/// Under the per-row lifting layout the off-block entries of X carry the
/// rank-one completion.
struct LiftedVars {
  Eigen::MatrixXd X;         // q x q over the retained support
  Eigen::VectorXd phi_vec;   // matching vec(Phi) restriction
  std::vector<int> support;  // retained full vec(Phi) indices
  int ny = 0, na = 0;        // Phi shape

  Eigen::MatrixXd Lambda;       // 2x2, joint program only
  Eigen::Vector2d lambda_pair;  // [lambda, lambda_inv], joint program only
  bool has_lambda_lift = false;

  /// Embeds X back into the full (Ny*Na) x (Ny*Na) matrix.
  Eigen::MatrixXd full_X() const;
  Eigen::VectorXd full_phi_vec() const;
  /// Augmented matrix [X, phi; phi', 1].
  Eigen::MatrixXd augmented() const;
};

/// True when the augmented matrix [S, a; a', 1] is PSD within tol_psd and
/// S is numerically rank one (sigma2/sigma1 <= tol_rank), which together
/// certify S = a a' at desk scale.
bool rank1_lift_check(const Eigen::MatrixXd& S, const Eigen::VectorXd& a,
                      double tol_psd = 1e-7, double tol_rank = 1e-6);

/// Entries of the lifted matrix forced to zero when vec(Phi) vanishes on
/// the index set `zero_idx`: every entry whose row or column is listed.
std::vector<std::pair<int, int>> propagate_sparsity(
    const std::vector<int>& zero_idx, int q);

enum class SynthesisStrategy { FixedLambdaIRM, ShorPlusEval, Hinf };
enum class LiftingMode {
  Auto,      // Full when the support is small, RowStrata otherwise
  Full,      // single lifting of vec(Phi)
  RowStrata  // one lifting per row of Phi; identical at rank one
};

const char* to_string(SynthesisStrategy s);

struct SynthesisOptions {
  int grid_points = 12;          // geometric lambda grid
  int bisect_steps = 10;         // refinement steps after bracketing
  double lambda_rel_tol = 1e-2;  // relative tolerance on lambda
  int max_irm_iters = 50;
  int trial_irm_iters = 12;  // rank-minimization budget during the search
  double tol_rank = 1e-6;    // sigma2/sigma1 convergence threshold
  double lambda_min = 1e-8;
  LiftingMode lifting = LiftingMode::Auto;
  int full_lifting_max_support = 48;
  double tol_feas = 1e-6;
  SdpOptions sdp;
  int threads = 0;  // 0: hardware concurrency
};

struct IrmIterate {
  int iteration = 0;
  double sigma_ratio = 0.0;  // worst sigma2/sigma1 across lifting blocks
  double objective = 0.0;
  double certified_mu = std::numeric_limits<double>::quiet_NaN();
};

struct SynthesisResult {
  SynthesisStrategy strategy = SynthesisStrategy::Hinf;
  SlsResponse omega;
  Eigen::MatrixXd gain;
  double lambda = 0.0;   // final lambda (fixed, searched, or optimized)
  double mu_bar = 0.0;   // lambda * alpha achieved by the program
  double shor_lower_bound = std::numeric_limits<double>::quiet_NaN();
  RegretCertificate certificate;  // ground truth, always re-evaluated
  std::vector<IrmIterate> irm_log;
  bool rank_converged = true;
  LiftedVars lifted;
};

/// Suboptimal fixed-lambda feasibility program with the rank-one lifting
/// driven by iterative rank minimization. Returns nullopt when the SDP is
/// infeasible (lambda too small for the mask); a non-converged run is
/// returned with rank_converged = false and the best iterate.
std::optional<SynthesisResult> fixed_lambda_synthesis(
    const LtvSystem& sys, const StealthSpec& spec, double lambda_bar,
    const std::optional<SlsMask>& mask = std::nullopt,
    const SynthesisOptions& opts = {});

/// Rank-relaxed joint program (free lambda with the 2x2 lambda lifting and
/// no rank constraints). The optimal value lower-bounds the exact one.
struct ShorRelaxation {
  double lower_bound = 0.0;
  SlsResponse omega;
  LiftedVars lifted;
  bool feasible = false;
};
ShorRelaxation shor_relax(const LtvSystem& sys, const StealthSpec& spec,
                          const std::optional<SlsMask>& mask = std::nullopt,
                          const SynthesisOptions& opts = {});

/// Worst-case-gain baseline: min lambda*alpha with the plain
/// [lambda I, Psi', Phi_u'; Psi, I, 0; Phi_u, 0, I] >= 0 program.
SynthesisResult hinf_synthesis(const LtvSystem& sys, const StealthSpec& spec,
                               const std::optional<SlsMask>& mask = std::nullopt,
                               const SynthesisOptions& opts = {});

/// Full synthesis entry point for the two search strategies.
SynthesisResult synthesize(const LtvSystem& sys, const StealthSpec& spec,
                           SynthesisStrategy strategy,
                           const std::optional<SlsMask>& mask = std::nullopt,
                           const SynthesisOptions& opts = {});

/// Joint program with free lambda and the 2x2 lambda lifting, rank
/// constraints driven by the same iterative rank minimization. The default
/// strategies above are preferred; this entry point exercises the full
/// formulation.
std::optional<SynthesisResult> joint_synthesis(
    const LtvSystem& sys, const StealthSpec& spec,
    const std::optional<SlsMask>& mask = std::nullopt,
    const SynthesisOptions& opts = {});

/// Squared worst-case gain max_{|a|<=1} (|Psi a|^2 + |Phi_u a|^2) of a
/// fixed response, for cross-checking the baseline program.
double hinf_norm_sq(const ClosedLoopMaps& maps);

}  // namespace rosyn
