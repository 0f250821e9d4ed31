#include "swp/oracle.hpp"

#include <cmath>
#include <string>

namespace swp::oracle {

namespace {
using Idx = Eigen::Index;
Idx ix(std::size_t i) { return static_cast<Idx>(i); }
} // namespace

Geometry::Geometry(const Chart& chart, const Point& p)
    : chart_(&chart), point_(&p), n_(chart.dim()), gamma_(n_), dgamma_(n_) {
  const std::size_t n = n_;
  g_ = chart.metric_at(p);
  Eigen::PartialPivLU<Eigen::MatrixXd> lu(g_);
  const double det = lu.determinant();
  if (!(std::abs(det) > kSingularDet)) {
    throw SingularMetric("chart '" + chart.name() + "': singular metric (|det| = " +
                         std::to_string(std::abs(det)) + ")");
  }
  ginv_ = lu.inverse();
  const double rc = lu.rcond();
  condition_ = rc > 0.0 ? 1.0 / rc : INFINITY;

  // First and second metric derivatives.
  dg_.assign(n * n * n, 0.0);
  std::vector<double> ddg(n * n * n * n, 0.0);
  for (std::size_t k = 0; k < n; ++k) {
    for (std::size_t a = 0; a < n; ++a) {
      for (std::size_t b = a; b < n; ++b) {
        const double v = chart.d_metric(k, a, b).eval(p.values);
        dg_[(k * n + a) * n + b] = v;
        dg_[(k * n + b) * n + a] = v;
      }
    }
  }
  for (std::size_t k = 0; k < n; ++k) {
    for (std::size_t l = k; l < n; ++l) {
      for (std::size_t a = 0; a < n; ++a) {
        for (std::size_t b = a; b < n; ++b) {
          const double v = chart.dd_metric(k, l, a, b).eval(p.values);
          for (auto [r, s] : {std::pair{k, l}, std::pair{l, k}}) {
            ddg[((r * n + s) * n + a) * n + b] = v;
            ddg[((r * n + s) * n + b) * n + a] = v;
          }
        }
      }
    }
  }
  auto dg = [&](std::size_t k, std::size_t a, std::size_t b) { return dg_[(k * n + a) * n + b]; };
  auto dd = [&](std::size_t k, std::size_t l, std::size_t a, std::size_t b) {
    return ddg[((k * n + l) * n + a) * n + b];
  };

  // Gamma_{lij} = 1/2 (d_i g_jl + d_j g_il - d_l g_ij), raised with g^kl and
  // filled for i <= j only, then mirrored.
  std::vector<double> lowered(n * n * n);
  for (std::size_t l = 0; l < n; ++l) {
    for (std::size_t i = 0; i < n; ++i) {
      for (std::size_t j = i; j < n; ++j) {
        const double v = 0.5 * (dg(i, j, l) + dg(j, i, l) - dg(l, i, j));
        lowered[(l * n + i) * n + j] = v;
        lowered[(l * n + j) * n + i] = v;
      }
    }
  }
  for (std::size_t k = 0; k < n; ++k) {
    for (std::size_t i = 0; i < n; ++i) {
      for (std::size_t j = i; j < n; ++j) {
        double s = 0.0;
        for (std::size_t l = 0; l < n; ++l) s += ginv_(ix(k), ix(l)) * lowered[(l * n + i) * n + j];
        gamma_(k, i, j) = s;
        gamma_(k, j, i) = s;
      }
    }
  }

  // d_m g^kl = -g^ka d_m g_ab g^bl
  std::vector<Eigen::MatrixXd> dginv(n);
  for (std::size_t m = 0; m < n; ++m) {
    Eigen::MatrixXd dgm(ix(n), ix(n));
    for (std::size_t a = 0; a < n; ++a) {
      for (std::size_t b = 0; b < n; ++b) dgm(ix(a), ix(b)) = dg(m, a, b);
    }
    dginv[m] = -ginv_ * dgm * ginv_;
  }

  // d_m Gamma^k_ij = d_m g^kl Gamma_lij + g^kl d_m Gamma_lij
  for (std::size_t m = 0; m < n; ++m) {
    for (std::size_t i = 0; i < n; ++i) {
      for (std::size_t j = i; j < n; ++j) {
        std::vector<double> dlow(n);
        for (std::size_t l = 0; l < n; ++l) {
          dlow[l] = 0.5 * (dd(m, i, j, l) + dd(m, j, i, l) - dd(m, l, i, j));
        }
        for (std::size_t k = 0; k < n; ++k) {
          double s = 0.0;
          for (std::size_t l = 0; l < n; ++l) {
            s += dginv[m](ix(k), ix(l)) * lowered[(l * n + i) * n + j] + ginv_(ix(k), ix(l)) * dlow[l];
          }
          dgamma_(m, k, i, j) = s;
          dgamma_(m, k, j, i) = s;
        }
      }
    }
  }
}

Tensor4 Geometry::riemann() const {
  const std::size_t n = n_;
  Tensor4 R(n);
  for (std::size_t l = 0; l < n; ++l) {
    for (std::size_t i = 0; i < n; ++i) {
      for (std::size_t j = 0; j < n; ++j) {
        for (std::size_t k = 0; k < n; ++k) {
          double s = dgamma_(j, l, i, k) - dgamma_(k, l, i, j);
          for (std::size_t m = 0; m < n; ++m) {
            s += gamma_(l, j, m) * gamma_(m, i, k) - gamma_(l, k, m) * gamma_(m, i, j);
          }
          R(l, i, j, k) = s;
        }
      }
    }
  }
  return R;
}

Eigen::MatrixXd Geometry::ricci() const {
  const std::size_t n = n_;
  const Tensor4 R = riemann();
  Eigen::MatrixXd ric = Eigen::MatrixXd::Zero(ix(n), ix(n));
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t k = 0; k < n; ++k) {
      double s = 0.0;
      for (std::size_t l = 0; l < n; ++l) s += R(l, i, l, k);
      ric(ix(i), ix(k)) = s;
    }
  }
  return ric;
}

double Geometry::scalar_curvature() const { return (ginv_.cwiseProduct(ricci())).sum(); }

Eigen::MatrixXd Geometry::hessian(const PreparedScalar& u) const {
  const std::size_t n = n_;
  Eigen::VectorXd du(ix(n));
  for (std::size_t c = 0; c < n; ++c) du(ix(c)) = u.d(chart_->coord(c), *point_);
  Eigen::MatrixXd H(ix(n), ix(n));
  for (std::size_t a = 0; a < n; ++a) {
    for (std::size_t b = 0; b < n; ++b) {
      double s = u.dd(chart_->coord(a), chart_->coord(b), *point_);
      for (std::size_t c = 0; c < n; ++c) s -= gamma_(c, a, b) * du(ix(c));
      H(ix(a), ix(b)) = s;
    }
  }
  return H;
}

Eigen::VectorXd Geometry::gradient(const PreparedScalar& u) const {
  Eigen::VectorXd du(ix(n_));
  for (std::size_t c = 0; c < n_; ++c) du(ix(c)) = u.d(chart_->coord(c), *point_);
  return ginv_ * du;
}

double Geometry::laplacian(const PreparedScalar& u) const { return ginv_.cwiseProduct(hessian(u)).sum(); }

Eigen::MatrixXd Geometry::lie_derivative(const PreparedVector& X) const {
  const std::size_t n = n_;
  if (X.size() != n) {
    throw std::invalid_argument("lie_derivative: field has " + std::to_string(X.size()) +
                                " components, chart '" + chart_->name() + "' has dimension " +
                                std::to_string(n));
  }
  const Eigen::VectorXd x = X.values(*point_);
  const Eigen::VectorXd xflat = g_ * x;
  // nabla_i X_j = d_i(g_jk X^k) - Gamma^m_ij X_m
  Eigen::MatrixXd cov(ix(n), ix(n));
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = 0; j < n; ++j) {
      double s = 0.0;
      for (std::size_t k = 0; k < n; ++k) {
        s += d_metric(i, j, k) * x(ix(k)) + g_(ix(j), ix(k)) * X.d(k, chart_->coord(i), *point_);
      }
      for (std::size_t m = 0; m < n; ++m) s -= gamma_(m, i, j) * xflat(ix(m));
      cov(ix(i), ix(j)) = s;
    }
  }
  return cov + cov.transpose();
}

ChristoffelSample christoffel(const Chart& chart, const Point& p) { return Geometry(chart, p).christoffel(); }
Tensor4 riemann(const Chart& chart, const Point& p) { return Geometry(chart, p).riemann(); }
Eigen::MatrixXd ricci(const Chart& chart, const Point& p) { return Geometry(chart, p).ricci(); }
double scalar_curvature(const Chart& chart, const Point& p) { return Geometry(chart, p).scalar_curvature(); }

Eigen::MatrixXd hessian(const Chart& chart, const PreparedScalar& u, const Point& p) {
  return Geometry(chart, p).hessian(u);
}

Eigen::VectorXd gradient(const Chart& chart, const PreparedScalar& u, const Point& p) {
  return Geometry(chart, p).gradient(u);
}

double laplacian(const Chart& chart, const PreparedScalar& u, const Point& p) {
  return Geometry(chart, p).laplacian(u);
}

Eigen::MatrixXd lie_derivative(const Chart& chart, const PreparedVector& X, const Point& p) {
  return Geometry(chart, p).lie_derivative(X);
}

} // namespace swp::oracle
