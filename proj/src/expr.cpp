#include "swp/expr.hpp"

#include <algorithm>
#include <array>
#include <cctype>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <set>
#include <utility>

namespace swp {

SyntaxError::SyntaxError(Kind kind, std::size_t position, const std::string& message)
    : std::runtime_error(message + " (at position " + std::to_string(position) + ")"),
      kind_(kind), position_(position) {}

EvalError::EvalError(Kind kind, std::string subexpression, const std::string& message)
    : std::runtime_error(message + " in " + subexpression), kind_(kind),
      subexpression_(std::move(subexpression)) {}

namespace {

constexpr std::array<std::pair<std::string_view, UnaryOp>, 7> kFunctions{{
    {"exp", UnaryOp::Exp},
    {"ln", UnaryOp::Ln},
    {"sin", UnaryOp::Sin},
    {"cos", UnaryOp::Cos},
    {"sinh", UnaryOp::Sinh},
    {"cosh", UnaryOp::Cosh},
    {"sqrt", UnaryOp::Sqrt},
}};

NodePtr make_constant(double v) {
  auto n = std::make_shared<Node>();
  n->kind = Node::Kind::Constant;
  n->value = v;
  return n;
}

NodePtr make_variable(std::size_t index) {
  auto n = std::make_shared<Node>();
  n->kind = Node::Kind::Variable;
  n->index = index;
  return n;
}

NodePtr make_unary(UnaryOp op, NodePtr a) {
  auto n = std::make_shared<Node>();
  n->kind = Node::Kind::Unary;
  n->unary = op;
  n->lhs = std::move(a);
  return n;
}

NodePtr make_binary(BinaryOp op, NodePtr a, NodePtr b) {
  auto n = std::make_shared<Node>();
  n->kind = Node::Kind::Binary;
  n->binary = op;
  n->lhs = std::move(a);
  n->rhs = std::move(b);
  return n;
}

bool is_lit(const NodePtr& n, double v) {
  return n->kind == Node::Kind::Constant && n->value == v;
}

// Folding constructors: only literal zeros and ones are simplified, which
// keeps every fold value-preserving in IEEE arithmetic.
NodePtr fold_neg(NodePtr a) {
  if (is_lit(a, 0.0)) return a;
  if (a->kind == Node::Kind::Unary && a->unary == UnaryOp::Neg) return a->lhs;
  return make_unary(UnaryOp::Neg, std::move(a));
}

NodePtr fold_add(NodePtr a, NodePtr b) {
  if (is_lit(a, 0.0)) return b;
  if (is_lit(b, 0.0)) return a;
  return make_binary(BinaryOp::Add, std::move(a), std::move(b));
}

NodePtr fold_sub(NodePtr a, NodePtr b) {
  if (is_lit(b, 0.0)) return a;
  if (is_lit(a, 0.0)) return fold_neg(std::move(b));
  return make_binary(BinaryOp::Sub, std::move(a), std::move(b));
}

NodePtr fold_mul(NodePtr a, NodePtr b) {
  if (is_lit(a, 0.0) || is_lit(b, 0.0)) return make_constant(0.0);
  if (is_lit(a, 1.0)) return b;
  if (is_lit(b, 1.0)) return a;
  return make_binary(BinaryOp::Mul, std::move(a), std::move(b));
}

NodePtr fold_div(NodePtr a, NodePtr b) {
  if (is_lit(b, 1.0)) return a;
  if (is_lit(a, 0.0) && !is_lit(b, 0.0)) return make_constant(0.0);
  return make_binary(BinaryOp::Div, std::move(a), std::move(b));
}

NodePtr fold_pow(NodePtr a, NodePtr b) {
  if (is_lit(b, 1.0)) return a;
  if (is_lit(b, 0.0)) return make_constant(1.0);
  return make_binary(BinaryOp::Pow, std::move(a), std::move(b));
}

NodePtr fold_unary(UnaryOp op, NodePtr a) {
  if (op == UnaryOp::Neg) return fold_neg(std::move(a));
  return make_unary(op, std::move(a));
}

std::string format_double(double v) {
  std::array<char, 40> buf{};
  std::snprintf(buf.data(), buf.size(), "%.17g", v);
  return std::string(buf.data());
}

void serialize(const NodePtr& n, const VariableTable& vars, std::string& out) {
  switch (n->kind) {
  case Node::Kind::Constant:
    if (std::signbit(n->value)) {
      out += "(-";
      out += format_double(-n->value);
      out += ')';
    } else {
      out += format_double(n->value);
    }
    return;
  case Node::Kind::Variable:
    out += vars[n->index];
    return;
  case Node::Kind::Unary:
    if (n->unary == UnaryOp::Neg) {
      out += "(-";
      serialize(n->lhs, vars, out);
      out += ')';
    } else {
      out += to_string(n->unary);
      out += '(';
      serialize(n->lhs, vars, out);
      out += ')';
    }
    return;
  case Node::Kind::Binary: {
    static constexpr std::array<char, 5> ops{'+', '-', '*', '/', '^'};
    out += '(';
    serialize(n->lhs, vars, out);
    out += ' ';
    out += ops[static_cast<std::size_t>(n->binary)];
    out += ' ';
    serialize(n->rhs, vars, out);
    out += ')';
    return;
  }
  }
}

std::string describe(const NodePtr& n, const VariableTable& vars) {
  std::string s;
  serialize(n, vars, s);
  return s;
}

struct Evaluator {
  std::span<const double> values;
  const VariableTable& vars;

  double operator()(const NodePtr& n) const {
    switch (n->kind) {
    case Node::Kind::Constant:
      return n->value;
    case Node::Kind::Variable:
      return values[n->index];
    case Node::Kind::Unary: {
      const double a = (*this)(n->lhs);
      switch (n->unary) {
      case UnaryOp::Neg: return -a;
      case UnaryOp::Exp: return std::exp(a);
      case UnaryOp::Ln:
        if (!(a > 0.0)) {
          throw EvalError(EvalError::Kind::Domain, describe(n, vars),
                          "ln of non-positive argument " + format_double(a));
        }
        return std::log(a);
      case UnaryOp::Sin: return std::sin(a);
      case UnaryOp::Cos: return std::cos(a);
      case UnaryOp::Sinh: return std::sinh(a);
      case UnaryOp::Cosh: return std::cosh(a);
      case UnaryOp::Sqrt:
        if (a < 0.0) {
          throw EvalError(EvalError::Kind::Domain, describe(n, vars),
                          "sqrt of negative argument " + format_double(a));
        }
        return std::sqrt(a);
      }
      break;
    }
    case Node::Kind::Binary: {
      const double a = (*this)(n->lhs);
      const double b = (*this)(n->rhs);
      switch (n->binary) {
      case BinaryOp::Add: return a + b;
      case BinaryOp::Sub: return a - b;
      case BinaryOp::Mul: return a * b;
      case BinaryOp::Div:
        if (b == 0.0) {
          throw EvalError(EvalError::Kind::DivisionByZero, describe(n, vars), "division by zero");
        }
        return a / b;
      case BinaryOp::Pow: {
        const double r = std::pow(a, b);
        if (!std::isfinite(r) && std::isfinite(a) && std::isfinite(b)) {
          if (a == 0.0) {
            throw EvalError(EvalError::Kind::DivisionByZero, describe(n, vars),
                            "zero raised to a negative power");
          }
          if (std::isnan(r)) {
            throw EvalError(EvalError::Kind::Domain, describe(n, vars),
                            "negative base with non-integer exponent");
          }
        }
        return r;
      }
      }
      break;
    }
    }
    return 0.0;
  }
};

bool node_depends_on(const NodePtr& n, std::size_t var) {
  switch (n->kind) {
  case Node::Kind::Constant: return false;
  case Node::Kind::Variable: return n->index == var;
  case Node::Kind::Unary: return node_depends_on(n->lhs, var);
  case Node::Kind::Binary: return node_depends_on(n->lhs, var) || node_depends_on(n->rhs, var);
  }
  return false;
}

void collect_vars(const NodePtr& n, std::set<std::size_t>& out) {
  switch (n->kind) {
  case Node::Kind::Constant: return;
  case Node::Kind::Variable: out.insert(n->index); return;
  case Node::Kind::Unary: collect_vars(n->lhs, out); return;
  case Node::Kind::Binary:
    collect_vars(n->lhs, out);
    collect_vars(n->rhs, out);
    return;
  }
}

NodePtr derive(const NodePtr& n, std::size_t var) {
  if (!node_depends_on(n, var)) return make_constant(0.0);
  switch (n->kind) {
  case Node::Kind::Constant:
    return make_constant(0.0);
  case Node::Kind::Variable:
    return make_constant(n->index == var ? 1.0 : 0.0);
  case Node::Kind::Unary: {
    const NodePtr& a = n->lhs;
    NodePtr da = derive(a, var);
    switch (n->unary) {
    case UnaryOp::Neg: return fold_neg(da);
    case UnaryOp::Exp: return fold_mul(n, da);
    case UnaryOp::Ln: return fold_div(da, a);
    case UnaryOp::Sin: return fold_mul(make_unary(UnaryOp::Cos, a), da);
    case UnaryOp::Cos: return fold_neg(fold_mul(make_unary(UnaryOp::Sin, a), da));
    case UnaryOp::Sinh: return fold_mul(make_unary(UnaryOp::Cosh, a), da);
    case UnaryOp::Cosh: return fold_mul(make_unary(UnaryOp::Sinh, a), da);
    case UnaryOp::Sqrt: return fold_div(da, fold_mul(make_constant(2.0), n));
    }
    break;
  }
  case Node::Kind::Binary: {
    const NodePtr& a = n->lhs;
    const NodePtr& b = n->rhs;
    switch (n->binary) {
    case BinaryOp::Add: return fold_add(derive(a, var), derive(b, var));
    case BinaryOp::Sub: return fold_sub(derive(a, var), derive(b, var));
    case BinaryOp::Mul:
      return fold_add(fold_mul(derive(a, var), b), fold_mul(a, derive(b, var)));
    case BinaryOp::Div: {
      NodePtr num = fold_sub(fold_mul(derive(a, var), b), fold_mul(a, derive(b, var)));
      return fold_div(num, fold_mul(b, b));
    }
    case BinaryOp::Pow: {
      if (!node_depends_on(b, var)) {
        // d(a^c) = c a^(c-1) a'
        NodePtr exponent = b->kind == Node::Kind::Constant
                               ? make_constant(b->value - 1.0)
                               : fold_sub(b, make_constant(1.0));
        return fold_mul(fold_mul(b, fold_pow(a, exponent)), derive(a, var));
      }
      if (!node_depends_on(a, var)) {
        // d(c^b) = c^b ln(c) b'
        return fold_mul(fold_mul(n, make_unary(UnaryOp::Ln, a)), derive(b, var));
      }
      // d(a^b) = a^b (b' ln a + b a'/a)
      NodePtr inner = fold_add(fold_mul(derive(b, var), make_unary(UnaryOp::Ln, a)),
                               fold_div(fold_mul(b, derive(a, var)), a));
      return fold_mul(n, inner);
    }
    }
    break;
  }
  }
  return make_constant(0.0);
}

NodePtr substitute_node(const NodePtr& n, std::size_t var, double value) {
  switch (n->kind) {
  case Node::Kind::Constant: return n;
  case Node::Kind::Variable: return n->index == var ? make_constant(value) : n;
  case Node::Kind::Unary: {
    NodePtr a = substitute_node(n->lhs, var, value);
    return a == n->lhs ? n : make_unary(n->unary, std::move(a));
  }
  case Node::Kind::Binary: {
    NodePtr a = substitute_node(n->lhs, var, value);
    NodePtr b = substitute_node(n->rhs, var, value);
    if (a == n->lhs && b == n->rhs) return n;
    return make_binary(n->binary, std::move(a), std::move(b));
  }
  }
  return n;
}

std::size_t lookup(const VariableTable& vars, std::string_view name) {
  auto it = std::find(vars.begin(), vars.end(), name);
  if (it == vars.end()) {
    throw std::invalid_argument("'" + std::string(name) + "' is not a declared variable");
  }
  return static_cast<std::size_t>(it - vars.begin());
}

const std::shared_ptr<const VariableTable>& common_table(const Expression& a, const Expression& b) {
  if (a.variable_table() != b.variable_table() && a.variables() != b.variables()) {
    throw std::invalid_argument("expressions are declared over different variable tables");
  }
  return a.variable_table();
}

// Recursive-descent parser; see the grammar in expr.hpp.
class Parser {
public:
  Parser(std::string_view src, const VariableTable& vars) : src_(src), vars_(vars) {}

  NodePtr parse_all() {
    skip_ws();
    if (pos_ == src_.size()) {
      throw SyntaxError(SyntaxError::Kind::EmptyInput, 0, "empty expression");
    }
    NodePtr e = expression();
    skip_ws();
    if (pos_ != src_.size()) {
      fail("expected operator or end of input, found '" + std::string(1, src_[pos_]) + "'");
    }
    return e;
  }

private:
  [[noreturn]] void fail(const std::string& msg) const {
    throw SyntaxError(SyntaxError::Kind::Syntax, pos_, msg);
  }

  void skip_ws() {
    while (pos_ < src_.size() && std::isspace(static_cast<unsigned char>(src_[pos_]))) ++pos_;
  }

  bool accept(char c) {
    skip_ws();
    if (pos_ < src_.size() && src_[pos_] == c) {
      ++pos_;
      return true;
    }
    return false;
  }

  NodePtr expression() {
    NodePtr lhs = term();
    for (;;) {
      if (accept('+')) {
        lhs = make_binary(BinaryOp::Add, lhs, term());
      } else if (accept('-')) {
        lhs = make_binary(BinaryOp::Sub, lhs, term());
      } else {
        return lhs;
      }
    }
  }

  NodePtr term() {
    NodePtr lhs = unary();
    for (;;) {
      if (accept('*')) {
        lhs = make_binary(BinaryOp::Mul, lhs, unary());
      } else if (accept('/')) {
        lhs = make_binary(BinaryOp::Div, lhs, unary());
      } else {
        return lhs;
      }
    }
  }

  NodePtr unary() {
    if (accept('-')) return make_unary(UnaryOp::Neg, unary());
    if (accept('+')) return unary();
    return power();
  }

  NodePtr power() {
    NodePtr base = primary();
    if (accept('^')) return make_binary(BinaryOp::Pow, base, unary());
    return base;
  }

  NodePtr primary() {
    skip_ws();
    if (pos_ == src_.size()) fail("expected expression, found end of input");
    const char c = src_[pos_];
    if (c == '(') {
      ++pos_;
      NodePtr inner = expression();
      if (!accept(')')) fail("expected ')'");
      return inner;
    }
    if (std::isdigit(static_cast<unsigned char>(c)) || c == '.') return number();
    if (std::isalpha(static_cast<unsigned char>(c)) || c == '_') return identifier();
    fail("expected expression, found '" + std::string(1, c) + "'");
  }

  NodePtr number() {
    const std::size_t start = pos_;
    auto digits = [&] {
      while (pos_ < src_.size() && std::isdigit(static_cast<unsigned char>(src_[pos_]))) ++pos_;
    };
    digits();
    if (pos_ < src_.size() && src_[pos_] == '.') {
      ++pos_;
      digits();
    }
    if (pos_ < src_.size() && (src_[pos_] == 'e' || src_[pos_] == 'E')) {
      std::size_t save = pos_;
      ++pos_;
      if (pos_ < src_.size() && (src_[pos_] == '+' || src_[pos_] == '-')) ++pos_;
      if (pos_ < src_.size() && std::isdigit(static_cast<unsigned char>(src_[pos_]))) {
        digits();
      } else {
        pos_ = save;
      }
    }
    double v = 0.0;
    auto [ptr, ec] = std::from_chars(src_.data() + start, src_.data() + pos_, v);
    if (ec != std::errc() || ptr != src_.data() + pos_) {
      pos_ = start;
      fail("malformed number");
    }
    return make_constant(v);
  }

  NodePtr identifier() {
    const std::size_t start = pos_;
    while (pos_ < src_.size() &&
           (std::isalnum(static_cast<unsigned char>(src_[pos_])) || src_[pos_] == '_')) {
      ++pos_;
    }
    const std::string_view name = src_.substr(start, pos_ - start);
    const std::size_t after_name = pos_;
    skip_ws();
    const bool call = pos_ < src_.size() && src_[pos_] == '(';
    if (call) {
      for (const auto& [fname, op] : kFunctions) {
        if (fname == name) {
          ++pos_;
          NodePtr arg = expression();
          if (!accept(')')) fail("expected ')' to close " + std::string(name) + "(");
          return make_unary(op, arg);
        }
      }
      throw SyntaxError(SyntaxError::Kind::UnknownIdentifier, start,
                        "unknown function '" + std::string(name) + "'");
    }
    pos_ = after_name;
    auto it = std::find(vars_.begin(), vars_.end(), name);
    if (it != vars_.end()) return make_variable(static_cast<std::size_t>(it - vars_.begin()));
    for (const auto& [fname, op] : kFunctions) {
      if (fname == name) fail("expected '(' after function name '" + std::string(name) + "'");
    }
    throw SyntaxError(SyntaxError::Kind::UnknownIdentifier, start,
                      "unknown identifier '" + std::string(name) + "'");
  }

  std::string_view src_;
  const VariableTable& vars_;
  std::size_t pos_ = 0;
};

} // namespace

std::string_view to_string(UnaryOp op) {
  switch (op) {
  case UnaryOp::Neg: return "-";
  case UnaryOp::Exp: return "exp";
  case UnaryOp::Ln: return "ln";
  case UnaryOp::Sin: return "sin";
  case UnaryOp::Cos: return "cos";
  case UnaryOp::Sinh: return "sinh";
  case UnaryOp::Cosh: return "cosh";
  case UnaryOp::Sqrt: return "sqrt";
  }
  return "?";
}

Expression Expression::constant(double value, std::shared_ptr<const VariableTable> vars) {
  return Expression(make_constant(value), std::move(vars));
}

Expression Expression::variable(std::string_view name, std::shared_ptr<const VariableTable> vars) {
  const std::size_t idx = lookup(*vars, name);
  return Expression(make_variable(idx), std::move(vars));
}

double Expression::eval(std::span<const double> values) const {
  if (values.size() < vars_->size()) {
    throw std::invalid_argument("eval: expected " + std::to_string(vars_->size()) + " values, got " +
                                std::to_string(values.size()));
  }
  return Evaluator{values, *vars_}(root_);
}

double Expression::eval(const std::map<std::string, double>& bindings) const {
  std::vector<double> values(vars_->size(), 0.0);
  for (std::size_t idx : free_variables()) {
    auto it = bindings.find((*vars_)[idx]);
    if (it == bindings.end()) {
      throw EvalError(EvalError::Kind::MissingBinding, to_string(),
                      "no binding for variable '" + (*vars_)[idx] + "'");
    }
    values[idx] = it->second;
  }
  return eval(std::span<const double>(values));
}

Expression Expression::differentiate(std::string_view var) const {
  return differentiate(lookup(*vars_, var));
}

Expression Expression::differentiate(std::size_t var_index) const {
  if (var_index >= vars_->size()) throw std::out_of_range("differentiate: variable index");
  return Expression(derive(root_, var_index), vars_);
}

Expression Expression::substitute(std::string_view var, double value) const {
  return Expression(substitute_node(root_, lookup(*vars_, var), value), vars_);
}

std::vector<std::size_t> Expression::free_variables() const {
  std::set<std::size_t> s;
  collect_vars(root_, s);
  return {s.begin(), s.end()};
}

bool Expression::depends_on(std::size_t var_index) const { return node_depends_on(root_, var_index); }

bool Expression::is_constant() const { return free_variables().empty(); }

bool Expression::is_literal(double value) const { return root_ && is_lit(root_, value); }

std::string Expression::to_string() const { return describe(root_, *vars_); }

Expression operator+(const Expression& a, const Expression& b) {
  return Expression(fold_add(a.root_, b.root_), common_table(a, b));
}
Expression operator-(const Expression& a, const Expression& b) {
  return Expression(fold_sub(a.root_, b.root_), common_table(a, b));
}
Expression operator*(const Expression& a, const Expression& b) {
  return Expression(fold_mul(a.root_, b.root_), common_table(a, b));
}
Expression operator/(const Expression& a, const Expression& b) {
  return Expression(fold_div(a.root_, b.root_), common_table(a, b));
}
Expression operator-(const Expression& a) { return Expression(fold_neg(a.root_), a.vars_); }
Expression pow(const Expression& base, const Expression& exponent) {
  return Expression(fold_pow(base.root_, exponent.root_), common_table(base, exponent));
}
Expression apply(UnaryOp op, const Expression& a) { return Expression(fold_unary(op, a.root_), a.vars_); }

Expression Expression::operator*(double c) const { return *this * constant(c, vars_); }
Expression Expression::operator+(double c) const { return *this + constant(c, vars_); }
Expression operator*(double c, const Expression& e) { return e * c; }
Expression ln(const Expression& e) { return apply(UnaryOp::Ln, e); }
Expression exp(const Expression& e) { return apply(UnaryOp::Exp, e); }
Expression sqrt(const Expression& e) { return apply(UnaryOp::Sqrt, e); }

Expression parse(std::string_view source, std::shared_ptr<const VariableTable> variables) {
  std::set<std::string> seen(variables->begin(), variables->end());
  if (seen.size() != variables->size()) throw std::invalid_argument("parse: duplicate variable names");
  Parser p(source, *variables);
  NodePtr root = p.parse_all();
  return Expression(std::move(root), std::move(variables));
}

Expression parse(std::string_view source, const std::vector<std::string>& variables) {
  return parse(source, std::make_shared<const VariableTable>(variables));
}

} // namespace swp
