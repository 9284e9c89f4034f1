#pragma once

#include <Eigen/Dense>
#include <iosfwd>
#include <limits>
#include <utility>
#include <vector>

namespace rosyn {

/// Linear-matrix-inequality program
///
///   minimize    c' x
///   subject to  F_0^b + sum_i x_i F_i^b  >= 0   for each block b
///               A_eq x = b_eq
///               x_i >= lower_bound_i           (where set)
///
/// All symmetric data is symmetrized on ingest; whole-matrix setters warn
/// on stderr when the asymmetry exceeds 1e-10. Coefficients are stored
/// sparsely per block.
class SdpProblem {
 public:
  struct Entry {
    int var;
    int row;
    int col;
    double value;
  };
  struct Block {
    int size = 0;
    Eigen::MatrixXd f0;
    std::vector<Entry> entries;  // mirrored: off-diagonal terms appear twice
  };

  explicit SdpProblem(int num_vars);

  int num_vars() const { return static_cast<int>(c_.size()); }
  int num_blocks() const { return static_cast<int>(blocks_.size()); }
  const Block& block(int b) const { return blocks_[b]; }

  int add_block(int size);
  void set_objective(const Eigen::VectorXd& c);
  const Eigen::VectorXd& objective() const { return c_; }

  /// Adds `value` to entry (r, c) of F_0 (and its mirror when r != c).
  void add_constant_entry(int block, int r, int c, double value);
  /// Adds `value` to entry (r, c) of F_var (and its mirror when r != c).
  void add_entry(int block, int r, int c, int var, double value);
  /// Whole-matrix forms; symmetrized on ingest.
  void add_constant(int block, const Eigen::MatrixXd& m);
  void add_matrix(int block, int var, const Eigen::MatrixXd& m);

  void add_equality(const Eigen::VectorXd& row, double rhs);
  int num_equalities() const { return static_cast<int>(eq_rhs_.size()); }
  const std::vector<Eigen::VectorXd>& equality_rows() const {
    return eq_rows_;
  }
  const std::vector<double>& equality_rhs() const { return eq_rhs_; }

  void set_lower_bound(int var, double bound);
  const std::vector<double>& lower_bounds() const { return lower_; }

  /// Sparse text dump, one coefficient per line:
  ///   <block> <i> <j> <var> <value>
  /// with var = -1 for constant terms; equalities and bounds follow as
  /// `eq` / `lb` lines.
  void dump(std::ostream& os) const;

 private:
  Eigen::VectorXd c_;
  std::vector<Block> blocks_;
  std::vector<Eigen::VectorXd> eq_rows_;
  std::vector<double> eq_rhs_;
  std::vector<double> lower_;  // NaN when unset
};

enum class SdpStatus { Optimal, Infeasible, Unbounded, MaxIter };

const char* to_string(SdpStatus s);

struct SdpOptions {
  int max_iter = 200;
  double tol_gap = 1e-7;   // relative duality gap
  double tol_feas = 1e-8;  // scaled primal/dual residuals
  double tol_psd = 1e-7;   // slack eigenvalue reporting tolerance
  double step_fraction = 0.98;
  bool verbose = false;
};

struct SdpSolution {
  SdpStatus status = SdpStatus::MaxIter;
  Eigen::VectorXd x;
  double objective = std::numeric_limits<double>::quiet_NaN();
  double dual_objective = std::numeric_limits<double>::quiet_NaN();
  std::vector<double> block_min_eig;   // slack spectra at x, one per block
  std::vector<Eigen::MatrixXd> duals;  // dual multiplier matrix per block
  int iterations = 0;
  double rel_gap = std::numeric_limits<double>::infinity();
  double eq_residual = 0.0;
};

/// Primal-dual interior-point solve (Nesterov-Todd scaling on a
/// homogeneous self-dual embedding). Deterministic for identical inputs.
SdpSolution solve(const SdpProblem& p, const SdpOptions& opts = {});

/// Smallest eigenvalue and a unit eigenvector of a symmetric matrix, with
/// the sign fixed so the first coordinate above noise is positive.
std::pair<double, Eigen::VectorXd> min_eig_vec(const Eigen::MatrixXd& S);

}  // namespace rosyn
