#include "rosyn/lifted_system.hpp"

namespace rosyn {

Eigen::MatrixXd LiftedSystem::causal_resolvent_factor() const {
  return Eigen::MatrixXd::Identity(Nx, Nx) - ZA;
}

Eigen::MatrixXd LiftedSystem::solve_causal(const Eigen::MatrixXd& rhs) const {
  // I - ZA has identity diagonal blocks and strictly lower block structure,
  // so it is unit lower-triangular entrywise as well.
  return causal_resolvent_factor().triangularView<Eigen::UnitLower>().solve(
      rhs);
}

LiftedSystem lift(const LtvSystem& sys) {
  sys.validate();
  LiftedSystem L;
  const int T = sys.horizon;
  L.horizon = T;
  L.nx = sys.nx;
  L.nu = sys.nu;
  L.na = sys.na;
  L.ny = sys.ny;
  L.nz = sys.nz;
  L.Nx = (T + 1) * sys.nx;
  L.Nu = (T + 1) * sys.nu;
  L.Na = sys.nx + T * sys.na;
  L.Ny = (T + 1) * sys.ny;
  L.Nz = (T + 1) * sys.nz;

  L.A = Eigen::MatrixXd::Zero(L.Nx, L.Nx);
  L.Bu = Eigen::MatrixXd::Zero(L.Nx, L.Nu);
  L.Ba = Eigen::MatrixXd::Zero(L.Nx, L.Na);
  L.Cy = Eigen::MatrixXd::Zero(L.Ny, L.Nx);
  L.Cz = Eigen::MatrixXd::Zero(L.Nz, L.Nx);
  L.Dya = Eigen::MatrixXd::Zero(L.Ny, L.Na);
  L.Dzu = Eigen::MatrixXd::Zero(L.Nz, L.Nu);
  L.Z = Eigen::MatrixXd::Zero(L.Nx, L.Nx);

  for (int k = 0; k < T; ++k) {
    L.A.block(k * sys.nx, k * sys.nx, sys.nx, sys.nx) = sys.A[k];
    L.Bu.block(k * sys.nx, k * sys.nu, sys.nx, sys.nu) = sys.Bu[k];
    L.Z.block((k + 1) * sys.nx, k * sys.nx, sys.nx, sys.nx) =
        Eigen::MatrixXd::Identity(sys.nx, sys.nx);
  }
  L.Ba.topLeftCorner(sys.nx, sys.nx) =
      Eigen::MatrixXd::Identity(sys.nx, sys.nx);
  for (int k = 0; k < T; ++k) {
    L.Ba.block((k + 1) * sys.nx, sys.nx + k * sys.na, sys.nx, sys.na) =
        sys.Ba[k];
  }
  for (int k = 0; k <= T; ++k) {
    L.Cy.block(k * sys.ny, k * sys.nx, sys.ny, sys.nx) = sys.Cy[k];
    L.Cz.block(k * sys.nz, k * sys.nx, sys.nz, sys.nx) = sys.Cz[k];
    L.Dzu.block(k * sys.nz, k * sys.nu, sys.nz, sys.nu) = sys.Dzu[k];
  }
  // a_k corrupts y_k; there is no a_T, so the last y row block is clear.
  for (int k = 0; k < T; ++k) {
    L.Dya.block(k * sys.ny, sys.nx + k * sys.na, sys.ny, sys.na) = sys.Dya[k];
  }

  L.ZA = L.Z * L.A;
  L.ZBu = L.Z * L.Bu;
  return L;
}

}  // namespace rosyn
