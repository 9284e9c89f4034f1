#include "rosyn/simulate.hpp"

#include <stdexcept>

namespace rosyn {
namespace {

Eigen::MatrixXd padded(const Eigen::MatrixXd& m, int rows, int cols,
                       const char* name) {
  if (m.size() > 0 && !m.allFinite()) {
    throw std::invalid_argument(std::string(name) +
                                " contains non-finite values");
  }
  if (m.rows() > rows || (m.size() > 0 && m.cols() != cols)) {
    throw std::invalid_argument(std::string(name) + " has shape " +
                                std::to_string(m.rows()) + "x" +
                                std::to_string(m.cols()) + ", expected up to " +
                                std::to_string(rows) + "x" +
                                std::to_string(cols));
  }
  Eigen::MatrixXd out = Eigen::MatrixXd::Zero(rows, cols);
  if (m.size() > 0) out.topRows(m.rows()) = m;
  return out;
}

}  // namespace

Trajectory simulate(const LtvSystem& sys, const Eigen::VectorXd& x0,
                    const Eigen::MatrixXd& u, const Eigen::MatrixXd& a) {
  sys.validate();
  if (x0.size() != sys.nx || !x0.allFinite()) {
    throw std::invalid_argument("x0 has wrong size or non-finite values");
  }
  const int T = sys.horizon;
  const Eigen::MatrixXd uf = padded(u, T + 1, sys.nu, "u");
  const Eigen::MatrixXd af = padded(a, T, sys.na, "a");

  Trajectory out;
  out.x.resize(T + 1, sys.nx);
  out.u = uf;
  out.y.resize(T + 1, sys.ny);
  out.z.resize(T + 1, sys.nz);
  out.y_nominal.resize(T + 1, sys.ny);

  Eigen::VectorXd x = x0;
  Eigen::VectorXd xn = x0;  // attack-free twin
  for (int k = 0; k <= T; ++k) {
    out.x.row(k) = x.transpose();
    Eigen::VectorXd yk = sys.Cy[k] * x;
    if (k < T) yk += sys.Dya[k] * af.row(k).transpose();
    out.y.row(k) = yk.transpose();
    out.y_nominal.row(k) = (sys.Cy[k] * xn).transpose();
    out.z.row(k) =
        (sys.Cz[k] * x + sys.Dzu[k] * uf.row(k).transpose()).transpose();
    if (k < T) {
      const Eigen::VectorXd uk = uf.row(k).transpose();
      x = sys.A[k] * x + sys.Bu[k] * uk + sys.Ba[k] * af.row(k).transpose();
      xn = sys.A[k] * xn + sys.Bu[k] * uk;
    }
  }
  return out;
}

Trajectory simulate_closed_loop(const LtvSystem& sys, const Eigen::MatrixXd& K,
                                const Eigen::VectorXd& x0,
                                const Eigen::MatrixXd& a) {
  sys.validate();
  const int T = sys.horizon;
  const int Nu = (T + 1) * sys.nu;
  const int Ny = (T + 1) * sys.ny;
  if (K.rows() != Nu || K.cols() != Ny) {
    throw std::invalid_argument("gain has wrong stacked shape");
  }
  if (x0.size() != sys.nx || !x0.allFinite() ||
      (a.size() > 0 && !a.allFinite())) {
    throw std::invalid_argument("non-finite or mis-sized closed-loop inputs");
  }
  const Eigen::MatrixXd af = padded(a, T, sys.na, "a");

  auto run = [&](bool with_attack) {
    Eigen::MatrixXd xs(T + 1, sys.nx), us(T + 1, sys.nu), ys(T + 1, sys.ny),
        zs(T + 1, sys.nz);
    Eigen::VectorXd ystack = Eigen::VectorXd::Zero(Ny);
    Eigen::VectorXd x = x0;
    for (int k = 0; k <= T; ++k) {
      xs.row(k) = x.transpose();
      Eigen::VectorXd yk = sys.Cy[k] * x;
      if (with_attack && k < T) yk += sys.Dya[k] * af.row(k).transpose();
      ystack.segment(k * sys.ny, sys.ny) = yk;
      ys.row(k) = yk.transpose();
      // u_k from measurements up to and including step k
      Eigen::VectorXd uk =
          K.block(k * sys.nu, 0, sys.nu, (k + 1) * sys.ny) *
          ystack.head((k + 1) * sys.ny);
      us.row(k) = uk.transpose();
      zs.row(k) = (sys.Cz[k] * x + sys.Dzu[k] * uk).transpose();
      if (k < T) {
        x = sys.A[k] * x + sys.Bu[k] * uk;
        if (with_attack) x += sys.Ba[k] * af.row(k).transpose();
      }
    }
    return std::tuple{xs, us, ys, zs};
  };

  Trajectory out;
  auto [xs, us, ys, zs] = run(true);
  out.x = xs;
  out.u = us;
  out.y = ys;
  out.z = zs;
  auto [xn, un, yn, zn] = run(false);
  out.y_nominal = yn;
  return out;
}

Eigen::VectorXd stack_rows(const Eigen::MatrixXd& samples) {
  Eigen::VectorXd v(samples.size());
  for (int k = 0; k < samples.rows(); ++k) {
    v.segment(k * samples.cols(), samples.cols()) = samples.row(k).transpose();
  }
  return v;
}

Eigen::MatrixXd unstack_rows(const Eigen::VectorXd& stacked, int width) {
  if (width <= 0 || stacked.size() % width != 0) {
    throw std::invalid_argument("stacked size is not a multiple of width");
  }
  const int rows = static_cast<int>(stacked.size()) / width;
  Eigen::MatrixXd m(rows, width);
  for (int k = 0; k < rows; ++k) {
    m.row(k) = stacked.segment(k * width, width).transpose();
  }
  return m;
}

std::pair<Eigen::VectorXd, Eigen::MatrixXd> split_attack(
    const Eigen::VectorXd& a_stacked, int nx, int na, int horizon) {
  if (a_stacked.size() != nx + horizon * na) {
    throw std::invalid_argument("stacked disturbance has wrong length");
  }
  Eigen::VectorXd x0 = a_stacked.head(nx);
  Eigen::MatrixXd a(horizon, na);
  for (int k = 0; k < horizon; ++k) {
    a.row(k) = a_stacked.segment(nx + k * na, na).transpose();
  }
  return {x0, a};
}

}  // namespace rosyn
