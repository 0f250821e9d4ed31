#include "swp/manifold.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <set>
#include <sstream>

namespace swp {

namespace {

constexpr double kDegenerateDet = 1e-12;

std::string factor_field(std::size_t i) { return "factors[" + std::to_string(i) + "]"; }

Expression parse_field(const std::string& source, const std::shared_ptr<const VariableTable>& vars,
                       const std::string& field) {
  try {
    return parse(source, vars);
  } catch (const SyntaxError& e) {
    throw ModelError(field, e.what());
  }
}

bool is_negative_unit(const Expression& e) {
  if (!e.is_constant()) return false;
  return e.eval(std::vector<double>(e.variables().size(), 0.0)) == -1.0;
}

Eigen::MatrixXd eval_matrix(const ExprMatrix& m, const Point& p) {
  Eigen::MatrixXd out(static_cast<Eigen::Index>(m.rows()), static_cast<Eigen::Index>(m.cols()));
  for (std::size_t i = 0; i < m.rows(); ++i) {
    for (std::size_t j = 0; j < m.cols(); ++j) {
      out(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) = m(i, j).eval(p.values);
    }
  }
  return out;
}

} // namespace

std::string to_string(ProductKind kind) {
  switch (kind) {
  case ProductKind::Generic: return "generic";
  case ProductKind::StandardStatic: return "standard-static";
  case ProductKind::Grw: return "grw";
  }
  return "?";
}

std::optional<ProductKind> product_kind_from_string(const std::string& s) {
  if (s == "generic") return ProductKind::Generic;
  if (s == "standard-static") return ProductKind::StandardStatic;
  if (s == "grw") return ProductKind::Grw;
  return std::nullopt;
}

int negative_index(const Eigen::MatrixXd& g) {
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(g, Eigen::EigenvaluesOnly);
  return static_cast<int>((es.eigenvalues().array() < 0.0).count());
}

SequentialWarpedProduct SequentialWarpedProduct::build(const ProductSpec& spec) {
  SequentialWarpedProduct M;
  M.name_ = spec.name;
  M.kind_ = spec.kind;

  VariableTable names;
  for (std::size_t i = 0; i < 3; ++i) {
    const FactorSpec& fs = spec.factors[i];
    const std::string field = factor_field(i);
    if (fs.coords.empty()) throw ModelError(field + ".coords", "a factor needs at least one coordinate");
    if (fs.metric.size() != fs.coords.size()) {
      throw ModelError(field + ".metric", "expected " + std::to_string(fs.coords.size()) + " rows");
    }
    for (std::size_t a = 0; a < fs.metric.size(); ++a) {
      if (fs.metric[a].size() != fs.coords.size()) {
        throw ModelError(field + ".metric[" + std::to_string(a) + "]",
                         "expected " + std::to_string(fs.coords.size()) + " entries");
      }
    }
    if (fs.box.size() != fs.coords.size()) {
      throw ModelError(field + ".box", "expected one interval per coordinate");
    }
    for (std::size_t a = 0; a < fs.box.size(); ++a) {
      if (!(fs.box[a].lo < fs.box[a].hi)) {
        throw ModelError(field + ".box[" + std::to_string(a) + "]", "interval must satisfy lo < hi");
      }
    }
    for (const auto& c : fs.coords) {
      if (std::find(names.begin(), names.end(), c) != names.end()) {
        throw ModelError(field + ".coords", "duplicate coordinate '" + c + "'");
      }
      names.push_back(c);
    }
  }
  M.coords_ = std::make_shared<const VariableTable>(names);

  std::size_t offset = 0;
  for (std::size_t i = 0; i < 3; ++i) {
    const FactorSpec& fs = spec.factors[i];
    Factor& F = M.factors_[i];
    F.name = fs.name.empty() ? "M" + std::to_string(i + 1) : fs.name;
    F.offset = offset;
    F.coords = fs.coords;
    F.box = fs.box;
    const std::size_t d = fs.coords.size();
    F.metric = ExprMatrix(d, d, Expression::constant(0.0, M.coords_));
    for (std::size_t a = 0; a < d; ++a) {
      for (std::size_t b = 0; b < d; ++b) {
        const std::string field =
            factor_field(i) + ".metric[" + std::to_string(a) + "][" + std::to_string(b) + "]";
        Expression e = parse_field(fs.metric[a][b], M.coords_, field);
        for (std::size_t v : e.free_variables()) {
          if (v < offset || v >= offset + d) {
            throw ModelError(field, "references coordinate '" + names[v] + "' of another factor");
          }
        }
        F.metric(a, b) = std::move(e);
      }
    }
    offset += d;
  }

  M.f_ = parse_field(spec.f, M.coords_, "f");
  for (std::size_t v : M.f_.free_variables()) {
    if (M.block_of(v) != 0) throw ModelError("f", "may depend only on factor-1 coordinates, found '" + names[v] + "'");
  }
  M.h_ = parse_field(spec.h, M.coords_, "h");
  for (std::size_t v : M.h_.free_variables()) {
    if (M.block_of(v) == 2) {
      throw ModelError("h", "may depend only on factor-1 and factor-2 coordinates, found '" + names[v] + "'");
    }
  }

  if (spec.kind == ProductKind::StandardStatic) {
    const Factor& T = M.factors_[2];
    if (T.dim() != 1 || !is_negative_unit(T.metric(0, 0))) {
      throw ModelError(factor_field(2), "standard-static needs a 1-dimensional time factor with metric -1");
    }
  }
  if (spec.kind == ProductKind::Grw) {
    const Factor& T = M.factors_[0];
    if (T.dim() != 1 || !is_negative_unit(T.metric(0, 0))) {
      throw ModelError(factor_field(0), "grw needs a 1-dimensional time factor with metric -1");
    }
  }

  // Charts: full metric, partial product g1 + f^2 g2, and the bare factors.
  const Expression zero = Expression::constant(0.0, M.coords_);
  const Expression f2 = M.f_ * M.f_;
  const Expression h2 = M.h_ * M.h_;
  auto build_chart = [&](const std::string& chart_name, std::initializer_list<std::size_t> which,
                         bool warped) {
    std::vector<std::size_t> coords;
    std::vector<int> blocks;
    for (std::size_t i : which) {
      for (std::size_t a = 0; a < M.factors_[i].dim(); ++a) {
        coords.push_back(M.factors_[i].offset + a);
        blocks.push_back(static_cast<int>(i));
      }
    }
    ExprMatrix g(coords.size(), coords.size(), zero);
    std::size_t base = 0;
    for (std::size_t i : which) {
      const Factor& F = M.factors_[i];
      for (std::size_t a = 0; a < F.dim(); ++a) {
        for (std::size_t b = 0; b < F.dim(); ++b) {
          Expression e = F.metric(a, b);
          if (warped && i == 1) e = f2 * e;
          if (warped && i == 2) e = h2 * e;
          g(base + a, base + b) = e;
        }
      }
      base += F.dim();
    }
    return std::make_shared<const Chart>(chart_name, std::move(coords), std::move(blocks), std::move(g));
  };
  M.full_ = build_chart("M", {0, 1, 2}, true);
  M.base_ = build_chart("Mbar", {0, 1}, true);
  for (std::size_t i = 0; i < 3; ++i) M.factor_charts_[i] = build_chart(M.factors_[i].name, {i}, false);
  return M;
}

int SequentialWarpedProduct::block_of(std::size_t coord) const {
  for (int i = 2; i >= 0; --i) {
    if (coord >= factors_[static_cast<std::size_t>(i)].offset) return i;
  }
  return 0;
}

std::size_t SequentialWarpedProduct::coordinate_index(const std::string& name) const {
  auto it = std::find(coords_->begin(), coords_->end(), name);
  if (it == coords_->end()) throw ModelError("", "unknown coordinate '" + name + "'");
  return static_cast<std::size_t>(it - coords_->begin());
}

bool SequentialWarpedProduct::contains(const Point& p) const {
  if (p.values.size() != dim()) return false;
  for (const Factor& F : factors_) {
    for (std::size_t a = 0; a < F.dim(); ++a) {
      const double v = p.values[F.offset + a];
      if (!(v >= F.box[a].lo && v <= F.box[a].hi)) return false;
    }
  }
  return true;
}

Eigen::MatrixXd SequentialWarpedProduct::assemble_metric(const Point& p) const {
  if (!contains(p)) {
    std::ostringstream msg;
    msg << "point outside the sample box";
    if (p.values.size() == dim()) {
      for (const Factor& F : factors_) {
        for (std::size_t a = 0; a < F.dim(); ++a) {
          const double v = p.values[F.offset + a];
          if (!(v >= F.box[a].lo && v <= F.box[a].hi)) {
            msg << ": " << F.coords[a] << " = " << v << " not in [" << F.box[a].lo << ", " << F.box[a].hi << "]";
            break;
          }
        }
      }
    }
    throw ModelError("point", msg.str());
  }
  const double fv = f_.eval(p.values);
  const double hv = h_.eval(p.values);
  const std::array<double, 3> scale{1.0, fv * fv, hv * hv};
  const auto n = static_cast<Eigen::Index>(dim());
  Eigen::MatrixXd g = Eigen::MatrixXd::Zero(n, n);
  for (std::size_t i = 0; i < 3; ++i) {
    const Factor& F = factors_[i];
    Eigen::MatrixXd gi = eval_matrix(F.metric, p);
    if (std::abs(gi.determinant()) <= kDegenerateDet) {
      throw ModelError(factor_field(i) + ".metric", "degenerate factor metric at point");
    }
    const auto off = static_cast<Eigen::Index>(F.offset);
    const auto d = static_cast<Eigen::Index>(F.dim());
    g.block(off, off, d, d) = scale[i] * gi;
  }
  return g;
}

std::vector<Point> SequentialWarpedProduct::sample_grid(int per_dim) const {
  if (per_dim < 2) throw std::invalid_argument("sample_grid: per_dim must be at least 2");
  const std::size_t n = dim();
  std::vector<std::vector<double>> axis(n);
  for (const Factor& F : factors_) {
    for (std::size_t a = 0; a < F.dim(); ++a) {
      const double lo = F.box[a].lo;
      const double len = F.box[a].hi - lo;
      const double start = lo + 0.05 * len;
      const double step = 0.9 * len / (per_dim - 1);
      auto& ax = axis[F.offset + a];
      for (int k = 0; k < per_dim; ++k) ax.push_back(start + step * k);
    }
  }
  // Coordinates sorted by name; the first name varies slowest.
  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), 0);
  std::sort(order.begin(), order.end(),
            [&](std::size_t a, std::size_t b) { return (*coords_)[a] < (*coords_)[b]; });

  std::size_t total = 1;
  for (std::size_t i = 0; i < n; ++i) total *= static_cast<std::size_t>(per_dim);
  std::vector<Point> grid;
  grid.reserve(total);
  std::vector<std::size_t> idx(n, 0);
  for (std::size_t count = 0; count < total; ++count) {
    Point p{std::vector<double>(n)};
    for (std::size_t c = 0; c < n; ++c) p.values[c] = axis[c][idx[c]];
    grid.push_back(std::move(p));
    for (std::size_t pos = n; pos-- > 0;) {
      const std::size_t c = order[pos];
      if (++idx[c] < static_cast<std::size_t>(per_dim)) break;
      idx[c] = 0;
    }
  }
  return grid;
}

void SequentialWarpedProduct::validate_on(const std::vector<Point>& points) const {
  std::array<std::optional<int>, 3> signature;
  for (const Point& p : points) {
    if (!contains(p)) throw ModelError("point", "grid point outside the sample box");
    for (std::size_t i = 0; i < 3; ++i) {
      const Factor& F = factors_[i];
      Eigen::MatrixXd gi;
      try {
        gi = eval_matrix(F.metric, p);
      } catch (const EvalError& e) {
        throw ModelError(factor_field(i) + ".metric", e.what());
      }
      if (gi != gi.transpose()) throw ModelError(factor_field(i) + ".metric", "metric is not symmetric");
      if (std::abs(gi.determinant()) <= kDegenerateDet) {
        throw ModelError(factor_field(i) + ".metric", "degenerate factor metric on the grid");
      }
      const int neg = negative_index(gi);
      if (!signature[i]) {
        signature[i] = neg;
      } else if (*signature[i] != neg) {
        throw ModelError(factor_field(i) + ".metric", "signature changes across the sample box");
      }
    }
    for (const auto& [label, e] : {std::pair{"f", &f_}, std::pair{"h", &h_}}) {
      double v = 0.0;
      try {
        v = e->eval(p.values);
      } catch (const EvalError& err) {
        throw ModelError(label, err.what());
      }
      if (!(v > 0.0)) throw ModelError(label, "warping function must be positive on the sample box");
    }
  }
}

std::variant<BlockFields, Rejection>
SequentialWarpedProduct::decompose_vector_field(const VectorFieldSpec& X) const {
  if (X.components.size() != dim()) {
    return Rejection{0, "", "", "expected " + std::to_string(dim()) + " components"};
  }
  BlockFields out;
  for (std::size_t c = 0; c < dim(); ++c) {
    const int b = block_of(c);
    for (std::size_t v : X.components[c].free_variables()) {
      if (block_of(v) != b) {
        return Rejection{c, (*coords_)[c], (*coords_)[v],
                         "component along '" + (*coords_)[c] + "' references '" + (*coords_)[v] +
                             "' from factor " + std::to_string(block_of(v) + 1)};
      }
    }
    out.blocks[static_cast<std::size_t>(b)].push_back(X.components[c]);
  }
  return out;
}

Expression SequentialWarpedProduct::parse_expression(const std::string& source) const {
  return parse(source, coords_);
}

VectorFieldSpec SequentialWarpedProduct::zero_field() const {
  return VectorFieldSpec{std::vector<Expression>(dim(), Expression::constant(0.0, coords_))};
}

Point SequentialWarpedProduct::midpoint() const {
  Point p{std::vector<double>(dim())};
  for (const Factor& F : factors_) {
    for (std::size_t a = 0; a < F.dim(); ++a) p.values[F.offset + a] = 0.5 * (F.box[a].lo + F.box[a].hi);
  }
  return p;
}

std::map<std::string, double> SequentialWarpedProduct::bindings(const Point& p) const {
  std::map<std::string, double> out;
  for (std::size_t i = 0; i < dim(); ++i) out[(*coords_)[i]] = p.values[i];
  return out;
}

} // namespace swp
