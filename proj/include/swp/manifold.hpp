#ifndef SWP_MANIFOLD_HPP
#define SWP_MANIFOLD_HPP

#include "swp/chart.hpp"
#include "swp/expr.hpp"

#include <Eigen/Dense>

#include <array>
#include <cstddef>
#include <map>
#include <memory>
#include <optional>
#include <stdexcept>
#include <string>
#include <variant>
#include <vector>

namespace swp {

enum class ProductKind { Generic, StandardStatic, Grw };

std::string to_string(ProductKind kind);
std::optional<ProductKind> product_kind_from_string(const std::string& s);

struct Interval {
  double lo = 0.0;
  double hi = 0.0;
};

/// Textual description of one factor, as read from a configuration.
struct FactorSpec {
  std::string name;
  std::vector<std::string> coords;
  std::vector<std::vector<std::string>> metric;
  std::vector<Interval> box;
};

/// Textual description of a sequential warped product (M1 x_f M2) x_h M3.
struct ProductSpec {
  std::string name;
  ProductKind kind = ProductKind::Generic;
  std::array<FactorSpec, 3> factors;
  std::string f = "1";
  std::string h = "1";
};

/// Construction or evaluation failure tied to a field of the product
/// description, e.g. `factors[0].metric[0][0]`.
class ModelError : public std::runtime_error {
public:
  ModelError(std::string field, const std::string& message)
      : std::runtime_error(field.empty() ? message : field + ": " + message), field_(std::move(field)) {}

  const std::string& field() const noexcept { return field_; }

private:
  std::string field_;
};

struct Factor {
  std::string name;
  std::size_t offset = 0;  // first product coordinate index
  std::vector<std::string> coords;
  ExprMatrix metric;       // over the product variable table
  std::vector<Interval> box;

  std::size_t dim() const noexcept { return coords.size(); }
};

/// Per-factor components of a structured vector field.
struct BlockFields {
  std::array<std::vector<Expression>, 3> blocks;
};

/// Why a vector field could not be split into factor blocks.
struct Rejection {
  std::size_t component = 0;  // product index of the offending component
  std::string coordinate;     // name of that component's coordinate
  std::string variable;       // foreign coordinate it references
  std::string message;
};

/// Vector field given by one expression per product coordinate.
struct VectorFieldSpec {
  std::vector<Expression> components;
};

using ScalarFieldSpec = Expression;

/// The sequential warped product manifold with metric (g1 + f^2 g2) + h^2 g3.
///
/// Immutable after build(); all charts and derivative tables are precomputed.
class SequentialWarpedProduct {
public:
  static SequentialWarpedProduct build(const ProductSpec& spec);

  const std::string& name() const noexcept { return name_; }
  ProductKind kind() const noexcept { return kind_; }
  std::size_t dim() const noexcept { return coords_->size(); }
  const Factor& factor(std::size_t i) const { return factors_[i]; }
  const Expression& f() const noexcept { return f_; }
  const Expression& h() const noexcept { return h_; }
  const std::vector<std::string>& coordinates() const noexcept { return *coords_; }
  const std::shared_ptr<const VariableTable>& variable_table() const noexcept { return coords_; }
  int block_of(std::size_t coord) const;
  std::size_t coordinate_index(const std::string& name) const;

  /// Full metric, the factor metrics, and the partial product g1 + f^2 g2.
  const Chart& chart() const noexcept { return *full_; }
  const Chart& factor_chart(std::size_t i) const { return *factor_charts_[i]; }
  const Chart& base_chart() const noexcept { return *base_; }

  bool contains(const Point& p) const;
  /// Block-diagonal metric at p. Throws ModelError outside the box or when a
  /// factor metric is degenerate there.
  Eigen::MatrixXd assemble_metric(const Point& p) const;

  /// Tensor grid with `per_dim` points per coordinate, inset 5% from each end.
  std::vector<Point> sample_grid(int per_dim) const;

  /// Check symmetry, nondegeneracy, constant signature, and f, h > 0 on the
  /// given points. Throws ModelError naming the first violation.
  void validate_on(const std::vector<Point>& points) const;

  std::variant<BlockFields, Rejection> decompose_vector_field(const VectorFieldSpec& X) const;

  Expression parse_expression(const std::string& source) const;
  VectorFieldSpec zero_field() const;
  Point midpoint() const;
  std::map<std::string, double> bindings(const Point& p) const;

private:
  std::string name_;
  ProductKind kind_ = ProductKind::Generic;
  std::shared_ptr<const VariableTable> coords_;
  std::array<Factor, 3> factors_;
  Expression f_;
  Expression h_;
  std::shared_ptr<const Chart> full_;
  std::shared_ptr<const Chart> base_;
  std::array<std::shared_ptr<const Chart>, 3> factor_charts_;
};

/// Number of negative eigenvalues of a symmetric matrix.
int negative_index(const Eigen::MatrixXd& g);

} // namespace swp

#endif // SWP_MANIFOLD_HPP
