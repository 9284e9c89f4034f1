#pragma once

#include <Eigen/Dense>
#include <string>

namespace rosyn {

/// A recorded signal: one sample per row, all samples the same width.
struct SignalRecord {
  Eigen::MatrixXd samples;  // T_data x width

  int length() const { return static_cast<int>(samples.rows()); }
  int width() const { return static_cast<int>(samples.cols()); }

  /// Parses CSV text, one sample per row.
  static SignalRecord from_csv(const std::string& text);
};

/// Block Hankel matrix of depth D: block (i, j) = sample_{i+j}, shaped
/// (D * width) x (T_data - D + 1). Throws when D exceeds the record.
Eigen::MatrixXd hankel(const SignalRecord& rec, int depth);

/// Full row rank of the depth-D Hankel matrix, with the rank read from
/// singular values at threshold max_dim * sigma_max * 1e-12.
bool is_persistently_exciting(const SignalRecord& rec, int depth);

/// PBH test: rank [lambda I - A, B] = n at every eigenvalue of A.
bool is_controllable(const Eigen::MatrixXd& A, const Eigen::MatrixXd& B,
                     double tol = 1e-9);

struct WillemsResult {
  bool is_valid = false;
  double residual = 0.0;
  Eigen::VectorXd g;
};

/// Checks whether (u_test, y_test), each depth rows long, is an exact
/// input/output trajectory of the attack-free LTI plant behind the data:
/// solves [H(u); H(y)] g = [u_test; y_test] in least squares and accepts
/// when the relative residual is below tol. Requires the input data to be
/// persistently exciting of order state_dim + depth.
WillemsResult willems_validate(const SignalRecord& u_data,
                               const SignalRecord& y_data, int state_dim,
                               const Eigen::MatrixXd& u_test,
                               const Eigen::MatrixXd& y_test,
                               double tol = 1e-6);

}  // namespace rosyn
