#include "rosyn/data_driven.hpp"

#include <sstream>
#include <stdexcept>
#include <vector>

#include "rosyn/simulate.hpp"

namespace rosyn {

SignalRecord SignalRecord::from_csv(const std::string& text) {
  std::vector<std::vector<double>> rows;
  std::istringstream in(text);
  std::string line;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    std::vector<double> row;
    std::istringstream ls(line);
    std::string cell;
    while (std::getline(ls, cell, ',')) row.push_back(std::stod(cell));
    if (!rows.empty() && row.size() != rows.front().size()) {
      throw std::invalid_argument("ragged CSV signal record");
    }
    rows.push_back(std::move(row));
  }
  if (rows.empty()) throw std::invalid_argument("empty signal record");
  SignalRecord rec;
  rec.samples.resize(rows.size(), rows.front().size());
  for (size_t r = 0; r < rows.size(); ++r) {
    for (size_t c = 0; c < rows[r].size(); ++c) {
      rec.samples(r, c) = rows[r][c];
    }
  }
  return rec;
}

Eigen::MatrixXd hankel(const SignalRecord& rec, int depth) {
  const int T = rec.length(), w = rec.width();
  if (depth < 1 || depth > T) {
    throw std::invalid_argument("Hankel depth must lie in [1, T_data]");
  }
  const int cols = T - depth + 1;
  Eigen::MatrixXd H(depth * w, cols);
  for (int i = 0; i < depth; ++i) {
    for (int j = 0; j < cols; ++j) {
      H.block(i * w, j, w, 1) = rec.samples.row(i + j).transpose();
    }
  }
  return H;
}

bool is_persistently_exciting(const SignalRecord& rec, int depth) {
  const Eigen::MatrixXd H = hankel(rec, depth);
  Eigen::JacobiSVD<Eigen::MatrixXd> svd(H);
  const auto& sv = svd.singularValues();
  const double thresh =
      std::max(H.rows(), H.cols()) * sv(0) * 1e-12;
  int rank = 0;
  for (int i = 0; i < sv.size(); ++i) {
    if (sv(i) > thresh) ++rank;
  }
  return rank == H.rows();
}

bool is_controllable(const Eigen::MatrixXd& A, const Eigen::MatrixXd& B,
                     double tol) {
  const int n = static_cast<int>(A.rows());
  if (A.cols() != n || B.rows() != n) {
    throw std::invalid_argument("controllability shapes");
  }
  Eigen::EigenSolver<Eigen::MatrixXd> es(A);
  for (int k = 0; k < n; ++k) {
    const std::complex<double> lam = es.eigenvalues()(k);
    Eigen::MatrixXcd pencil(n, n + B.cols());
    pencil.leftCols(n) =
        lam * Eigen::MatrixXcd::Identity(n, n) - A.cast<std::complex<double>>();
    pencil.rightCols(B.cols()) = B.cast<std::complex<double>>();
    Eigen::JacobiSVD<Eigen::MatrixXcd> svd(pencil);
    const auto& sv = svd.singularValues();
    if (sv(n - 1) <= tol * std::max(1.0, sv(0))) return false;
  }
  return true;
}

WillemsResult willems_validate(const SignalRecord& u_data,
                               const SignalRecord& y_data, int state_dim,
                               const Eigen::MatrixXd& u_test,
                               const Eigen::MatrixXd& y_test, double tol) {
  if (u_data.length() != y_data.length()) {
    throw std::invalid_argument("input and output records differ in length");
  }
  if (u_test.rows() != y_test.rows() || u_test.cols() != u_data.width() ||
      y_test.cols() != y_data.width()) {
    throw std::invalid_argument("test trajectory shapes");
  }
  const int depth = static_cast<int>(u_test.rows());
  if (!is_persistently_exciting(u_data, state_dim + depth)) {
    throw std::invalid_argument(
        "input data is not persistently exciting of order n + depth");
  }

  const Eigen::MatrixXd Hu = hankel(u_data, depth);
  const Eigen::MatrixXd Hy = hankel(y_data, depth);
  Eigen::MatrixXd H(Hu.rows() + Hy.rows(), Hu.cols());
  H << Hu, Hy;
  Eigen::VectorXd rhs(H.rows());
  rhs << stack_rows(u_test), stack_rows(y_test);

  WillemsResult out;
  out.g = H.colPivHouseholderQr().solve(rhs);
  out.residual = (H * out.g - rhs).norm();
  out.is_valid = out.residual <= tol * std::max(1.0, rhs.norm());
  return out;
}

}  // namespace rosyn
