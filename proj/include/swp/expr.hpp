#ifndef SWP_EXPR_HPP
#define SWP_EXPR_HPP

#include <cstddef>
#include <map>
#include <memory>
#include <span>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

namespace swp {

/// Raised by parse() for malformed input. `position` is a byte offset into
/// the source string.
class SyntaxError : public std::runtime_error {
public:
  enum class Kind { Syntax, UnknownIdentifier, EmptyInput };

  SyntaxError(Kind kind, std::size_t position, const std::string& message);

  Kind kind() const noexcept { return kind_; }
  std::size_t position() const noexcept { return position_; }

private:
  Kind kind_;
  std::size_t position_;
};

/// Raised by evaluation. `subexpression` is the serialized offending node.
class EvalError : public std::runtime_error {
public:
  enum class Kind { DivisionByZero, Domain, MissingBinding };

  EvalError(Kind kind, std::string subexpression, const std::string& message);

  Kind kind() const noexcept { return kind_; }
  const std::string& subexpression() const noexcept { return subexpression_; }

private:
  Kind kind_;
  std::string subexpression_;
};

enum class UnaryOp { Neg, Exp, Ln, Sin, Cos, Sinh, Cosh, Sqrt };
enum class BinaryOp { Add, Sub, Mul, Div, Pow };

struct Node;
using NodePtr = std::shared_ptr<const Node>;

struct Node {
  enum class Kind { Constant, Variable, Unary, Binary };

  Kind kind;
  double value = 0.0;      // Constant
  std::size_t index = 0;   // Variable: slot in the declared variable table
  UnaryOp unary = UnaryOp::Neg;
  BinaryOp binary = BinaryOp::Add;
  NodePtr lhs;             // Unary operand, or Binary left operand
  NodePtr rhs;
};

using VariableTable = std::vector<std::string>;

/// Immutable scalar expression over a declared, ordered set of variables.
///
/// Two expressions can be combined only when their variable tables are equal;
/// the arithmetic builders below fold literal zeros and ones and nothing else.
class Expression {
public:
  Expression() = default;

  static Expression constant(double value, std::shared_ptr<const VariableTable> vars);
  static Expression variable(std::string_view name, std::shared_ptr<const VariableTable> vars);

  const NodePtr& root() const noexcept { return root_; }
  const VariableTable& variables() const noexcept { return *vars_; }
  const std::shared_ptr<const VariableTable>& variable_table() const noexcept { return vars_; }
  bool empty() const noexcept { return root_ == nullptr; }

  /// Evaluate with values given in declared-variable order.
  double eval(std::span<const double> values) const;
  /// Evaluate with named bindings; every declared variable that occurs in the
  /// tree must be bound.
  double eval(const std::map<std::string, double>& bindings) const;

  /// Exact symbolic derivative with respect to a declared variable.
  Expression differentiate(std::string_view var) const;
  Expression differentiate(std::size_t var_index) const;

  /// Replace a variable by a constant (partial evaluation).
  Expression substitute(std::string_view var, double value) const;

  /// Indices of the declared variables that actually occur in the tree.
  std::vector<std::size_t> free_variables() const;
  bool depends_on(std::size_t var_index) const;
  bool is_constant() const;
  /// True when the root is the literal constant `value`.
  bool is_literal(double value) const;

  /// Fully parenthesized, re-parseable text; constants use 17 significant digits.
  std::string to_string() const;

  friend Expression operator+(const Expression& a, const Expression& b);
  friend Expression operator-(const Expression& a, const Expression& b);
  friend Expression operator*(const Expression& a, const Expression& b);
  friend Expression operator/(const Expression& a, const Expression& b);
  friend Expression operator-(const Expression& a);
  friend Expression pow(const Expression& base, const Expression& exponent);
  friend Expression apply(UnaryOp op, const Expression& a);

  Expression operator*(double c) const;
  Expression operator+(double c) const;

private:
  Expression(NodePtr root, std::shared_ptr<const VariableTable> vars)
      : root_(std::move(root)), vars_(std::move(vars)) {}

  friend Expression parse(std::string_view, std::shared_ptr<const VariableTable>);

  NodePtr root_;
  std::shared_ptr<const VariableTable> vars_;
};

Expression operator*(double c, const Expression& e);
Expression ln(const Expression& e);
Expression exp(const Expression& e);
Expression sqrt(const Expression& e);

/// Parse `source` against the given variable names.
///
/// Grammar, loosest to tightest: `+ -` (left), `* /` (left), unary `-`/`+`,
/// `^` (right; exponent may carry a unary sign), then primaries: numbers,
/// variables, `fn(expr)` for fn in {exp, ln, sin, cos, sinh, cosh, sqrt}, and
/// parenthesized groups.
Expression parse(std::string_view source, const std::vector<std::string>& variables);
Expression parse(std::string_view source, std::shared_ptr<const VariableTable> variables);

std::string_view to_string(UnaryOp op);

} // namespace swp

#endif // SWP_EXPR_HPP
