#include "rosyn/ltv_system.hpp"

#include <stdexcept>
#include <string>

namespace rosyn {
namespace {

void check_shape(const Eigen::MatrixXd& m, int rows, int cols,
                 const char* name, int step) {
  if (m.rows() != rows || m.cols() != cols) {
    throw std::invalid_argument(
        std::string(name) + "[" + std::to_string(step) + "] has shape " +
        std::to_string(m.rows()) + "x" + std::to_string(m.cols()) +
        ", expected " + std::to_string(rows) + "x" + std::to_string(cols));
  }
  if (!m.allFinite()) {
    throw std::invalid_argument(std::string(name) + "[" +
                                std::to_string(step) +
                                "] contains non-finite entries");
  }
}

void check_count(size_t actual, size_t expected, const char* name) {
  if (actual != expected) {
    throw std::invalid_argument(std::string(name) + " has " +
                                std::to_string(actual) + " entries, expected " +
                                std::to_string(expected));
  }
}

}  // namespace

void LtvSystem::validate() const {
  if (horizon < 1) {
    throw std::invalid_argument("horizon must be at least 1, got " +
                                std::to_string(horizon));
  }
  if (nx < 1 || nu < 0 || na < 0 || ny < 0 || nz < 0) {
    throw std::invalid_argument("signal dimensions must be nonnegative");
  }
  const size_t T = static_cast<size_t>(horizon);
  check_count(A.size(), T, "A");
  check_count(Bu.size(), T, "Bu");
  check_count(Ba.size(), T, "Ba");
  check_count(Cy.size(), T + 1, "Cy");
  check_count(Cz.size(), T + 1, "Cz");
  check_count(Dya.size(), T + 1, "Dya");
  check_count(Dzu.size(), T + 1, "Dzu");
  for (int k = 0; k < horizon; ++k) {
    check_shape(A[k], nx, nx, "A", k);
    check_shape(Bu[k], nx, nu, "Bu", k);
    check_shape(Ba[k], nx, na, "Ba", k);
  }
  for (int k = 0; k <= horizon; ++k) {
    check_shape(Cy[k], ny, nx, "Cy", k);
    check_shape(Cz[k], nz, nx, "Cz", k);
    check_shape(Dya[k], ny, na, "Dya", k);
    check_shape(Dzu[k], nz, nu, "Dzu", k);
  }
}

LtvSystem LtvSystem::time_invariant(int horizon, const Eigen::MatrixXd& A,
                                    const Eigen::MatrixXd& Bu,
                                    const Eigen::MatrixXd& Ba,
                                    const Eigen::MatrixXd& Cy,
                                    const Eigen::MatrixXd& Cz,
                                    const Eigen::MatrixXd& Dya,
                                    const Eigen::MatrixXd& Dzu) {
  LtvSystem sys;
  sys.horizon = horizon;
  sys.nx = static_cast<int>(A.rows());
  sys.nu = static_cast<int>(Bu.cols());
  sys.na = static_cast<int>(Ba.cols());
  sys.ny = static_cast<int>(Cy.rows());
  sys.nz = static_cast<int>(Cz.rows());
  sys.A.assign(horizon, A);
  sys.Bu.assign(horizon, Bu);
  sys.Ba.assign(horizon, Ba);
  sys.Cy.assign(horizon + 1, Cy);
  sys.Cz.assign(horizon + 1, Cz);
  sys.Dya.assign(horizon + 1, Dya);
  sys.Dzu.assign(horizon + 1, Dzu);
  sys.validate();
  return sys;
}

}  // namespace rosyn
