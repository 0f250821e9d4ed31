#ifndef SWP_CHART_HPP
#define SWP_CHART_HPP

#include "swp/expr.hpp"

#include <Eigen/Dense>

#include <cstddef>
#include <string>
#include <vector>

namespace swp {

/// Dense row-major matrix of expressions.
class ExprMatrix {
public:
  ExprMatrix() = default;
  ExprMatrix(std::size_t rows, std::size_t cols, const Expression& fill)
      : rows_(rows), cols_(cols), data_(rows * cols, fill) {}

  std::size_t rows() const noexcept { return rows_; }
  std::size_t cols() const noexcept { return cols_; }
  Expression& operator()(std::size_t i, std::size_t j) { return data_[i * cols_ + j]; }
  const Expression& operator()(std::size_t i, std::size_t j) const { return data_[i * cols_ + j]; }

private:
  std::size_t rows_ = 0;
  std::size_t cols_ = 0;
  std::vector<Expression> data_;
};

/// A point of the product manifold, coordinates in product order.
struct Point {
  std::vector<double> values;

  friend bool operator==(const Point&, const Point&) = default;
};

/// A metric on a subset of the product coordinates, with its first and second
/// coordinate derivatives precomputed symbolically.
///
/// Chart-local index `a` refers to product coordinate `coord(a)`. Every
/// expression is declared over the full product variable table, so a chart is
/// evaluated directly at product points.
class Chart {
public:
  Chart() = default;
  Chart(std::string name, std::vector<std::size_t> coords, std::vector<int> blocks, ExprMatrix metric);

  const std::string& name() const noexcept { return name_; }
  std::size_t dim() const noexcept { return coords_.size(); }
  std::size_t coord(std::size_t a) const { return coords_[a]; }
  const std::vector<std::size_t>& coords() const noexcept { return coords_; }
  /// Factor (0, 1, 2) that chart coordinate `a` belongs to.
  int block(std::size_t a) const { return blocks_[a]; }

  const Expression& metric(std::size_t a, std::size_t b) const { return metric_(a, b); }
  /// d g_ab / d x^k with k a chart-local index.
  const Expression& d_metric(std::size_t k, std::size_t a, std::size_t b) const;
  /// d^2 g_ab / d x^k d x^l.
  const Expression& dd_metric(std::size_t k, std::size_t l, std::size_t a, std::size_t b) const;

  Eigen::MatrixXd metric_at(const Point& p) const;

private:
  std::string name_;
  std::vector<std::size_t> coords_;
  std::vector<int> blocks_;
  ExprMatrix metric_;
  std::vector<Expression> d_;   // [k][a][b]
  std::vector<Expression> dd_;  // [k][l][a][b], filled for k <= l and mirrored
};

/// Scalar field with all first and second derivatives with respect to every
/// product coordinate, precomputed symbolically.
class PreparedScalar {
public:
  PreparedScalar() = default;
  explicit PreparedScalar(Expression e);

  const Expression& expr() const noexcept { return expr_; }
  double value(const Point& p) const { return expr_.eval(p.values); }
  /// d/dx^i in product indexing.
  double d(std::size_t i, const Point& p) const { return d_[i].eval(p.values); }
  double dd(std::size_t i, std::size_t j, const Point& p) const;
  const Expression& d_expr(std::size_t i) const { return d_[i]; }

private:
  Expression expr_;
  std::size_t n_ = 0;
  std::vector<Expression> d_;
  std::vector<Expression> dd_;
};

/// Vector field given by chart-local components, with first derivatives with
/// respect to every product coordinate.
class PreparedVector {
public:
  PreparedVector() = default;
  explicit PreparedVector(std::vector<Expression> components);

  std::size_t size() const noexcept { return comps_.size(); }
  const Expression& component(std::size_t a) const { return comps_[a]; }
  Eigen::VectorXd values(const Point& p) const;
  double d(std::size_t a, std::size_t i, const Point& p) const;

private:
  std::vector<Expression> comps_;
  std::size_t n_ = 0;
  std::vector<Expression> d_;  // [a][i]
};

} // namespace swp

#endif // SWP_CHART_HPP
