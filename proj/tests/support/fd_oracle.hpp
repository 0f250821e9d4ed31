#ifndef SWP_TESTS_FD_ORACLE_HPP
#define SWP_TESTS_FD_ORACLE_HPP

// Brute-force finite-difference geometry used as an independent test oracle.
// Works only from a metric callback (coordinates -> matrix); shares no code
// with the symbolic path.

#include <Eigen/Dense>

#include <functional>
#include <vector>

namespace swp::testing {

using MetricFn = std::function<Eigen::MatrixXd(const Eigen::VectorXd&)>;
using ScalarFn = std::function<double(const Eigen::VectorXd&)>;
using VectorFn = std::function<Eigen::VectorXd(const Eigen::VectorXd&)>;

/// Gamma^k_ij flattened as [(k*n + i)*n + j], metric derivatives by central
/// differences with step h.
inline std::vector<double> fd_christoffel(const MetricFn& g, const Eigen::VectorXd& x, double h) {
  const auto n = x.size();
  std::vector<Eigen::MatrixXd> dg(static_cast<std::size_t>(n));
  for (Eigen::Index k = 0; k < n; ++k) {
    Eigen::VectorXd xp = x, xm = x;
    xp(k) += h;
    xm(k) -= h;
    dg[static_cast<std::size_t>(k)] = (g(xp) - g(xm)) / (2 * h);
  }
  const Eigen::MatrixXd ginv = g(x).inverse();
  std::vector<double> G(static_cast<std::size_t>(n * n * n), 0.0);
  for (Eigen::Index k = 0; k < n; ++k) {
    for (Eigen::Index i = 0; i < n; ++i) {
      for (Eigen::Index j = 0; j < n; ++j) {
        double s = 0;
        for (Eigen::Index l = 0; l < n; ++l) {
          s += 0.5 * ginv(k, l) *
               (dg[static_cast<std::size_t>(i)](j, l) + dg[static_cast<std::size_t>(j)](i, l) -
                dg[static_cast<std::size_t>(l)](i, j));
        }
        G[static_cast<std::size_t>((k * n + i) * n + j)] = s;
      }
    }
  }
  return G;
}

/// Ricci tensor from nested central differences: Christoffel symbols from the
/// metric, then their derivatives from Christoffel symbols at shifted points.
inline Eigen::MatrixXd fd_ricci(const MetricFn& g, const Eigen::VectorXd& x, double h) {
  const auto n = x.size();
  const auto N = static_cast<std::size_t>(n);
  auto at = [N](const std::vector<double>& G, Eigen::Index k, Eigen::Index i, Eigen::Index j) {
    return G[(static_cast<std::size_t>(k) * N + static_cast<std::size_t>(i)) * N + static_cast<std::size_t>(j)];
  };
  const std::vector<double> G = fd_christoffel(g, x, h);
  std::vector<std::vector<double>> dG(N);
  for (Eigen::Index m = 0; m < n; ++m) {
    Eigen::VectorXd xp = x, xm = x;
    xp(m) += h;
    xm(m) -= h;
    const auto Gp = fd_christoffel(g, xp, h);
    const auto Gm = fd_christoffel(g, xm, h);
    dG[static_cast<std::size_t>(m)].resize(Gp.size());
    for (std::size_t q = 0; q < Gp.size(); ++q) dG[static_cast<std::size_t>(m)][q] = (Gp[q] - Gm[q]) / (2 * h);
  }
  Eigen::MatrixXd ric = Eigen::MatrixXd::Zero(n, n);
  for (Eigen::Index i = 0; i < n; ++i) {
    for (Eigen::Index k = 0; k < n; ++k) {
      double s = 0;
      for (Eigen::Index l = 0; l < n; ++l) {
        // R^l_ilk = d_l G^l_ik - d_k G^l_il + G^l_lm G^m_ik - G^l_km G^m_il
        s += at(dG[static_cast<std::size_t>(l)], l, i, k) - at(dG[static_cast<std::size_t>(k)], l, i, l);
        for (Eigen::Index m = 0; m < n; ++m) s += at(G, l, l, m) * at(G, m, i, k) - at(G, l, k, m) * at(G, m, i, l);
      }
      ric(i, k) = s;
    }
  }
  return ric;
}

inline Eigen::MatrixXd fd_hessian(const MetricFn& g, const ScalarFn& u, const Eigen::VectorXd& x, double h) {
  const auto n = x.size();
  const auto G = fd_christoffel(g, x, h);
  Eigen::VectorXd du(n);
  Eigen::MatrixXd ddu(n, n);
  for (Eigen::Index a = 0; a < n; ++a) {
    Eigen::VectorXd xp = x, xm = x;
    xp(a) += h;
    xm(a) -= h;
    du(a) = (u(xp) - u(xm)) / (2 * h);
    for (Eigen::Index b = 0; b < n; ++b) {
      Eigen::VectorXd pp = x, pm = x, mp = x, mm = x;
      pp(a) += h; pp(b) += h;
      pm(a) += h; pm(b) -= h;
      mp(a) -= h; mp(b) += h;
      mm(a) -= h; mm(b) -= h;
      ddu(a, b) = (u(pp) - u(pm) - u(mp) + u(mm)) / (4 * h * h);
    }
  }
  Eigen::MatrixXd H = ddu;
  for (Eigen::Index a = 0; a < n; ++a) {
    for (Eigen::Index b = 0; b < n; ++b) {
      for (Eigen::Index c = 0; c < n; ++c) H(a, b) -= G[static_cast<std::size_t>((c * n + a) * n + b)] * du(c);
    }
  }
  return H;
}

/// (L_X g)_ij = X^k d_k g_ij + g_kj d_i X^k + g_ik d_j X^k, all by differences.
inline Eigen::MatrixXd fd_lie(const MetricFn& g, const VectorFn& X, const Eigen::VectorXd& x, double h) {
  const auto n = x.size();
  const Eigen::MatrixXd g0 = g(x);
  const Eigen::VectorXd X0 = X(x);
  Eigen::MatrixXd L = Eigen::MatrixXd::Zero(n, n);
  Eigen::MatrixXd dX(n, n);  // dX(k, i) = d_i X^k
  for (Eigen::Index i = 0; i < n; ++i) {
    Eigen::VectorXd xp = x, xm = x;
    xp(i) += h;
    xm(i) -= h;
    L += X0(i) * (g(xp) - g(xm)) / (2 * h);
    dX.col(i) = (X(xp) - X(xm)) / (2 * h);
  }
  L += dX.transpose() * g0 + g0 * dX;
  return L;
}

} // namespace swp::testing

#endif // SWP_TESTS_FD_ORACLE_HPP
