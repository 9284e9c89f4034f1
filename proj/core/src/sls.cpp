#include "rosyn/sls.hpp"

#include <stdexcept>
#include <vector>

namespace rosyn {

std::pair<double, double> sls_residuals(const SlsResponse& omega,
                                        const LiftedSystem& sys) {
  const int Nx = sys.Nx, Nu = sys.Nu, Ny = sys.Ny;
  const Eigen::MatrixXd ImZA = sys.causal_resolvent_factor();

  Eigen::MatrixXd r1(Nx, Nx + Ny);
  r1.leftCols(Nx) = ImZA * omega.R - sys.ZBu * omega.M;
  r1.leftCols(Nx) -= Eigen::MatrixXd::Identity(Nx, Nx);
  r1.rightCols(Ny) = ImZA * omega.N - sys.ZBu * omega.L;

  Eigen::MatrixXd r2(Nx + Nu, Nx);
  r2.topRows(Nx) = omega.R * ImZA - omega.N * sys.Cy;
  r2.topRows(Nx) -= Eigen::MatrixXd::Identity(Nx, Nx);
  r2.bottomRows(Nu) = omega.M * ImZA - omega.L * sys.Cy;

  return {r1.norm(), r2.norm()};
}

SlsResponse response_from_gain(const Eigen::MatrixXd& K,
                               const LiftedSystem& sys) {
  if (K.rows() != sys.Nu || K.cols() != sys.Ny) {
    throw std::invalid_argument("gain has wrong stacked shape");
  }
  const Eigen::MatrixXd G =
      sys.causal_resolvent_factor() - sys.ZBu * K * sys.Cy;
  // G is unit lower-triangular for any causal K: the ZBu factor shifts the
  // product strictly below the diagonal.
  SlsResponse w;
  w.R = G.triangularView<Eigen::UnitLower>().solve(
      Eigen::MatrixXd::Identity(sys.Nx, sys.Nx));
  w.N = w.R * sys.ZBu * K;
  w.M = K * sys.Cy * w.R;
  w.L = K + w.M * sys.ZBu * K;
  return w;
}

Eigen::MatrixXd extract_gain(const SlsResponse& omega, const LiftedSystem& sys,
                             double tol_feas) {
  auto [r1, r2] = sls_residuals(omega, sys);
  if (r1 > tol_feas || r2 > tol_feas) {
    throw std::invalid_argument(
        "response is not achievable: achievability residuals (" +
        std::to_string(r1) + ", " + std::to_string(r2) + ") exceed " +
        std::to_string(tol_feas));
  }
  const Eigen::MatrixXd Rinv_N =
      omega.R.triangularView<Eigen::UnitLower>().solve(omega.N);
  return omega.L - omega.M * Rinv_N;
}

ClosedLoopMaps closed_loop_maps(const SlsResponse& omega,
                                const LiftedSystem& sys) {
  ClosedLoopMaps m;
  m.phi_x = omega.R * sys.Ba + omega.N * sys.Dya;
  m.phi_u = omega.M * sys.Ba + omega.L * sys.Dya;
  m.phi = sys.Cy * m.phi_x + sys.Dya;
  m.psi = sys.Cz * m.phi_x + sys.Dzu * m.phi_u;
  return m;
}

ClairvoyantData clairvoyant(const LiftedSystem& sys) {
  ClairvoyantData d;
  const Eigen::MatrixXd resolvent =
      sys.solve_causal(Eigen::MatrixXd::Identity(sys.Nx, sys.Nx));
  d.F = sys.Cz * resolvent;
  d.E = d.F * sys.ZBu + sys.Dzu;
  d.F_Ba = d.F * sys.Ba;
  const Eigen::MatrixXd gram =
      Eigen::MatrixXd::Identity(sys.Nz, sys.Nz) + d.E * d.E.transpose();
  const Eigen::MatrixXd W = gram.llt().solve(d.F_Ba);
  d.Q = d.F_Ba.transpose() * W;
  d.Q = 0.5 * (d.Q + d.Q.transpose());
  return d;
}

Eigen::VectorXd noncausal_input(const ClairvoyantData& d,
                                const Eigen::VectorXd& a) {
  const int Nu = static_cast<int>(d.E.cols());
  const Eigen::MatrixXd gram =
      Eigen::MatrixXd::Identity(Nu, Nu) + d.E.transpose() * d.E;
  return -gram.llt().solve(d.E.transpose() * (d.F_Ba * a));
}

double closed_loop_cost(const ClosedLoopMaps& maps, const Eigen::VectorXd& a) {
  return (maps.psi * a).squaredNorm() + (maps.phi_u * a).squaredNorm();
}

bool causal_entry(int row, int col, int row_width, int col_width,
                  bool strict) {
  const int rstep = row / row_width;
  const int cstep = col / col_width;
  return strict ? cstep < rstep : cstep <= rstep;
}

SlsMask SlsMask::causal(const LiftedSystem& sys) {
  using BoolArray = Eigen::Array<bool, Eigen::Dynamic, Eigen::Dynamic>;
  SlsMask m;
  auto fill = [](BoolArray& dst, int rows, int cols, int rw, int cw,
                 bool strict) {
    dst = BoolArray::Constant(rows, cols, false);
    for (int r = 0; r < rows; ++r)
      for (int c = 0; c < cols; ++c)
        dst(r, c) = causal_entry(r, c, rw, cw, strict);
  };
  fill(m.R, sys.Nx, sys.Nx, sys.nx, sys.nx, false);
  fill(m.N, sys.Nx, sys.Ny, sys.nx, sys.ny, true);
  fill(m.M, sys.Nu, sys.Nx, sys.nu, sys.nx, false);
  fill(m.L, sys.Nu, sys.Ny, sys.nu, sys.ny, false);
  return m;
}

SlsMask SlsMask::causal_with_topology(
    const LiftedSystem& sys,
    const Eigen::Array<bool, Eigen::Dynamic, Eigen::Dynamic>& adjacency,
    const Eigen::VectorXi& node_of_state, const Eigen::VectorXi& node_of_input,
    const Eigen::VectorXi& node_of_output) {
  const int nodes = static_cast<int>(adjacency.rows());
  if (adjacency.cols() != nodes) {
    throw std::invalid_argument("adjacency must be square");
  }
  if (node_of_state.size() != sys.nx || node_of_input.size() != sys.nu ||
      node_of_output.size() != sys.ny) {
    throw std::invalid_argument("node assignment sizes do not match signals");
  }

  // reach[h](i, j): node j's information can arrive at node i within h hops.
  std::vector<Eigen::Array<bool, Eigen::Dynamic, Eigen::Dynamic>> reach;
  reach.emplace_back(Eigen::Array<bool, Eigen::Dynamic, Eigen::Dynamic>::
                         Constant(nodes, nodes, false));
  for (int i = 0; i < nodes; ++i) reach[0](i, i) = true;
  for (int h = 1; h <= sys.horizon; ++h) {
    auto next = reach[h - 1];
    for (int i = 0; i < nodes; ++i)
      for (int j = 0; j < nodes; ++j)
        if (reach[h - 1](i, j))
          for (int k = 0; k < nodes; ++k)
            if (adjacency(k, i) || k == i) next(k, j) = true;
    reach.push_back(next);
  }

  SlsMask m = causal(sys);
  auto restrict_mask = [&](Eigen::Array<bool, Eigen::Dynamic, Eigen::Dynamic>&
                               dst,
                           const Eigen::VectorXi& row_nodes,
                           const Eigen::VectorXi& col_nodes, int rw, int cw) {
    for (int r = 0; r < dst.rows(); ++r) {
      for (int c = 0; c < dst.cols(); ++c) {
        if (!dst(r, c)) continue;
        const int hops = r / rw - c / cw;
        dst(r, c) = reach[hops](row_nodes(r % rw), col_nodes(c % cw));
      }
    }
  };
  restrict_mask(m.R, node_of_state, node_of_state, sys.nx, sys.nx);
  restrict_mask(m.N, node_of_state, node_of_output, sys.nx, sys.ny);
  restrict_mask(m.M, node_of_input, node_of_state, sys.nu, sys.nx);
  restrict_mask(m.L, node_of_input, node_of_output, sys.nu, sys.ny);
  return m;
}

}  // namespace rosyn
