#ifndef SWP_ORACLE_HPP
#define SWP_ORACLE_HPP

// Coordinate computation of curvature and derivative tensors from a chart's
// metric alone. Every derivative is symbolic; the only numerics are the
// pointwise linear algebra.
//
// Conventions:
//   Gamma^k_ij = 1/2 g^kl (d_i g_jl + d_j g_il - d_l g_ij)
//   R^l_ijk    = d_j Gamma^l_ik - d_k Gamma^l_ij + Gamma^l_jm Gamma^m_ik - Gamma^l_km Gamma^m_ij
//   Ric_ik     = R^l_ilk,   R = g^ik Ric_ik
//   Hess u_ij  = d_i d_j u - Gamma^k_ij d_k u
//   (L_X g)_ij = nabla_i X_j + nabla_j X_i,   X_j = g_jk X^k

#include "swp/chart.hpp"

#include <Eigen/Dense>

#include <cstddef>
#include <stdexcept>
#include <vector>

namespace swp::oracle {

inline constexpr double kSingularDet = 1e-12;
inline constexpr double kIllConditioned = 1e8;

class SingularMetric : public std::runtime_error {
public:
  using std::runtime_error::runtime_error;
};

/// Rank-3 array indexed (k, i, j); used for Christoffel symbols Gamma^k_ij.
class Tensor3 {
public:
  explicit Tensor3(std::size_t n = 0) : n_(n), data_(n * n * n, 0.0) {}
  std::size_t dim() const noexcept { return n_; }
  double& operator()(std::size_t k, std::size_t i, std::size_t j) { return data_[(k * n_ + i) * n_ + j]; }
  double operator()(std::size_t k, std::size_t i, std::size_t j) const { return data_[(k * n_ + i) * n_ + j]; }

private:
  std::size_t n_;
  std::vector<double> data_;
};

/// Rank-4 array indexed (l, i, j, k); used for R^l_ijk and d_m Gamma^k_ij.
class Tensor4 {
public:
  explicit Tensor4(std::size_t n = 0) : n_(n), data_(n * n * n * n, 0.0) {}
  std::size_t dim() const noexcept { return n_; }
  double& operator()(std::size_t a, std::size_t b, std::size_t c, std::size_t d) {
    return data_[((a * n_ + b) * n_ + c) * n_ + d];
  }
  double operator()(std::size_t a, std::size_t b, std::size_t c, std::size_t d) const {
    return data_[((a * n_ + b) * n_ + c) * n_ + d];
  }

private:
  std::size_t n_;
  std::vector<double> data_;
};

using ChristoffelSample = Tensor3;

enum class FieldKind { Scalar, Vector, Covector, Tensor2 };
enum class Provenance { Oracle, ClosedForm };

/// Value of a tensorial object at one point, in chart coordinate components.
/// Vectors and covectors are stored as a single column.
struct FieldSample {
  FieldKind kind = FieldKind::Scalar;
  Provenance provenance = Provenance::Oracle;
  Eigen::MatrixXd values;
};

/// Pointwise geometry of a chart: metric, inverse, Christoffel symbols and
/// their derivatives, evaluated once and shared by every query.
class Geometry {
public:
  /// Throws SingularMetric when |det g| <= 1e-12 at p.
  Geometry(const Chart& chart, const Point& p);

  const Chart& chart() const noexcept { return *chart_; }
  const Point& point() const noexcept { return *point_; }
  std::size_t dim() const noexcept { return n_; }
  const Eigen::MatrixXd& metric() const noexcept { return g_; }
  const Eigen::MatrixXd& inverse() const noexcept { return ginv_; }
  /// Reciprocal-condition estimate inverted; only meaningful as a magnitude.
  double condition() const noexcept { return condition_; }
  bool ill_conditioned() const noexcept { return condition_ > kIllConditioned; }

  const ChristoffelSample& christoffel() const noexcept { return gamma_; }
  /// d_m Gamma^k_ij stored as (m, k, i, j).
  const Tensor4& christoffel_derivative() const noexcept { return dgamma_; }
  double d_metric(std::size_t k, std::size_t a, std::size_t b) const { return dg_[(k * n_ + a) * n_ + b]; }

  Tensor4 riemann() const;
  Eigen::MatrixXd ricci() const;
  double scalar_curvature() const;
  Eigen::MatrixXd hessian(const PreparedScalar& u) const;
  Eigen::VectorXd gradient(const PreparedScalar& u) const;
  double laplacian(const PreparedScalar& u) const;
  Eigen::MatrixXd lie_derivative(const PreparedVector& X) const;

private:
  const Chart* chart_;
  const Point* point_;
  std::size_t n_;
  Eigen::MatrixXd g_;
  Eigen::MatrixXd ginv_;
  double condition_ = 1.0;
  std::vector<double> dg_;
  ChristoffelSample gamma_;
  Tensor4 dgamma_;
};

ChristoffelSample christoffel(const Chart& chart, const Point& p);
Tensor4 riemann(const Chart& chart, const Point& p);
Eigen::MatrixXd ricci(const Chart& chart, const Point& p);
double scalar_curvature(const Chart& chart, const Point& p);
Eigen::MatrixXd hessian(const Chart& chart, const PreparedScalar& u, const Point& p);
Eigen::VectorXd gradient(const Chart& chart, const PreparedScalar& u, const Point& p);
double laplacian(const Chart& chart, const PreparedScalar& u, const Point& p);
/// X must have one component per chart coordinate.
Eigen::MatrixXd lie_derivative(const Chart& chart, const PreparedVector& X, const Point& p);

} // namespace swp::oracle

#endif // SWP_ORACLE_HPP
