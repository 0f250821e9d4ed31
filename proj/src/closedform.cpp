#include "swp/closedform.hpp"

#include "swp/oracle.hpp"

#include <utility>
#include <variant>

namespace swp::closedform {

namespace {

using Idx = Eigen::Index;
Idx ix(std::size_t i) { return static_cast<Idx>(i); }

std::size_t n_of(const SequentialWarpedProduct& M, int block) {
  return M.factor(static_cast<std::size_t>(block)).dim();
}

std::size_t off_of(const SequentialWarpedProduct& M, int block) {
  return M.factor(static_cast<std::size_t>(block)).offset;
}

/// Gradient of a scalar on the partial product, embedded into product order.
Eigen::VectorXd base_gradient(const SequentialWarpedProduct& M, const PreparedScalar& s, const Point& p) {
  const Eigen::VectorXd gb = oracle::gradient(M.base_chart(), s, p);
  Eigen::VectorXd out = Eigen::VectorXd::Zero(ix(M.dim()));
  const Chart& base = M.base_chart();
  for (std::size_t a = 0; a < base.dim(); ++a) out(ix(base.coord(a))) = gb(ix(a));
  return out;
}

/// Factor-chart gradient embedded into product order.
Eigen::VectorXd factor_gradient(const SequentialWarpedProduct& M, int block, const PreparedScalar& s,
                                const Point& p) {
  const Chart& c = M.factor_chart(static_cast<std::size_t>(block));
  const Eigen::VectorXd gi = oracle::gradient(c, s, p);
  Eigen::VectorXd out = Eigen::VectorXd::Zero(ix(M.dim()));
  for (std::size_t a = 0; a < c.dim(); ++a) out(ix(c.coord(a))) = gi(ix(a));
  return out;
}

/// nabla^i_{d_a} d_b on the bare factor, embedded into product order.
Eigen::VectorXd factor_connection(const SequentialWarpedProduct& M, int block, std::size_t a, std::size_t b,
                                  const Point& p) {
  const Chart& c = M.factor_chart(static_cast<std::size_t>(block));
  const std::size_t off = off_of(M, block);
  const auto G = oracle::christoffel(c, p);
  Eigen::VectorXd out = Eigen::VectorXd::Zero(ix(M.dim()));
  for (std::size_t k = 0; k < c.dim(); ++k) out(ix(off + k)) = G(k, a - off, b - off);
  return out;
}

Eigen::VectorXd unit(std::size_t n, std::size_t i) {
  Eigen::VectorXd e = Eigen::VectorXd::Zero(ix(n));
  e(ix(i)) = 1.0;
  return e;
}

Eigen::MatrixXd sub_block(const Eigen::MatrixXd& m, std::size_t r0, std::size_t c0, std::size_t r, std::size_t c) {
  return m.block(ix(r0), ix(c0), ix(r), ix(c));
}

} // namespace

std::string to_string(Identity id) {
  switch (id) {
  case Identity::Connection: return "connection";
  case Identity::Ricci: return "ricci";
  case Identity::Lie: return "lie";
  }
  return "?";
}

StructuredField::StructuredField(const SequentialWarpedProduct& M, const VectorFieldSpec& X) : M_(&M) {
  auto split = M.decompose_vector_field(X);
  if (auto* r = std::get_if<Rejection>(&split)) throw FieldRejected(*r);
  blocks_ = std::get<BlockFields>(std::move(split));
  for (std::size_t i = 0; i < 3; ++i) factor_[i] = PreparedVector(blocks_.blocks[i]);
  full_ = PreparedVector(X.components);
}

double StructuredField::apply(const std::array<bool, 3>& which, const PreparedScalar& s, const Point& p) const {
  double sum = 0.0;
  for (std::size_t i = 0; i < 3; ++i) {
    if (!which[i]) continue;
    const Factor& F = M_->factor(i);
    for (std::size_t a = 0; a < F.dim(); ++a) {
      sum += blocks_.blocks[i][a].eval(p.values) * s.d(F.offset + a, p);
    }
  }
  return sum;
}

Evaluator::Evaluator(const SequentialWarpedProduct& M) : M_(&M), f_(M.f()), h_(M.h()) {}

WarpInvariants Evaluator::invariants(const Point& p) const {
  const SequentialWarpedProduct& M = *M_;
  const double n2 = static_cast<double>(n_of(M, 1));
  const double n3 = static_cast<double>(n_of(M, 2));
  WarpInvariants w;
  w.f = f_.value(p);
  w.h = h_.value(p);

  oracle::Geometry g1(M.factor_chart(0), p);
  w.lap1_f = g1.laplacian(f_);
  const Eigen::VectorXd grad_f = g1.gradient(f_);
  Eigen::VectorXd df(ix(g1.dim()));
  for (std::size_t a = 0; a < g1.dim(); ++a) df(ix(a)) = f_.d(M.factor_chart(0).coord(a), p);
  w.grad1_f_sq = grad_f.dot(df);

  oracle::Geometry gb(M.base_chart(), p);
  w.lapbar_h = gb.laplacian(h_);
  const Eigen::VectorXd grad_h = gb.gradient(h_);
  Eigen::VectorXd dh(ix(gb.dim()));
  for (std::size_t a = 0; a < gb.dim(); ++a) dh(ix(a)) = h_.d(M.base_chart().coord(a), p);
  w.gradbar_h_sq = grad_h.dot(dh);

  w.f_sharp = w.f * w.lap1_f + (n2 - 1.0) * w.grad1_f_sq;
  w.h_sharp = w.h * w.lapbar_h + (n3 - 1.0) * w.gradbar_h_sq;

  if (M.kind() == ProductKind::Grw) {
    const std::size_t t = M.factor(0).offset;
    w.f_dot = f_.d(t, p);
    w.f_ddot = f_.dd(t, t, p);
    w.h_t = h_.d(t, p);
    w.h_tt = h_.dd(t, t, p);
    w.f_diamond = -w.f * w.f_ddot + (n2 - 1.0) * w.f_dot * w.f_dot;
  }
  return w;
}

Eigen::VectorXd Evaluator::connection(std::size_t a, std::size_t b, const Point& p) const {
  const SequentialWarpedProduct& M = *M_;
  int i = M.block_of(a);
  int j = M.block_of(b);
  if (i > j) {
    std::swap(i, j);
    std::swap(a, b);
  }
  const std::size_t n = M.dim();
  const double f = f_.value(p);
  const double h = h_.value(p);

  if (M.kind() == ProductKind::Grw) {
    const std::size_t t = M.factor(0).offset;
    const double fdot = f_.d(t, p);
    if (i == 0 && j == 0) return Eigen::VectorXd::Zero(ix(n));
    if (i == 0) return (fdot / f) * unit(n, b);  // printed for both X2 and X3
    if (i == 1 && j == 1) {
      const double g2ab = M.factor_chart(1).metric_at(p)(ix(a - off_of(M, 1)), ix(b - off_of(M, 1)));
      return factor_connection(M, 1, a, b, p) - f * fdot * g2ab * unit(n, t);
    }
    if (i == 1 && j == 2) return (h_.d(a, p) / h) * unit(n, b);
    const double g3ab = M.factor_chart(2).metric_at(p)(ix(a - off_of(M, 2)), ix(b - off_of(M, 2)));
    return factor_connection(M, 2, a, b, p) - h * g3ab * base_gradient(M, h_, p);
  }

  if (i == 0 && j == 0) return factor_connection(M, 0, a, b, p);
  if (i == 0 && j == 1) return (f_.d(a, p) / f) * unit(n, b);
  if (i == 1 && j == 1) {
    const double g2ab = M.factor_chart(1).metric_at(p)(ix(a - off_of(M, 1)), ix(b - off_of(M, 1)));
    return factor_connection(M, 1, a, b, p) - f * g2ab * factor_gradient(M, 0, f_, p);
  }
  if (j == 2 && i < 2) return (h_.d(a, p) / h) * unit(n, b);
  if (M.kind() == ProductKind::StandardStatic) return h * base_gradient(M, h_, p);
  const double g3ab = M.factor_chart(2).metric_at(p)(ix(a - off_of(M, 2)), ix(b - off_of(M, 2)));
  return factor_connection(M, 2, a, b, p) - h * g3ab * base_gradient(M, h_, p);
}

Eigen::MatrixXd Evaluator::ricci_block(int i, int j, const Point& p) const {
  const SequentialWarpedProduct& M = *M_;
  if (i < 0 || j < 0 || i > 2 || j > 2) throw std::invalid_argument("ricci_block: invalid block pair");
  const std::size_t ni = n_of(M, i);
  const std::size_t nj = n_of(M, j);
  if (i != j) return Eigen::MatrixXd::Zero(ix(ni), ix(nj));

  const double n2 = static_cast<double>(n_of(M, 1));
  const double n3 = static_cast<double>(n_of(M, 2));
  const WarpInvariants w = invariants(p);
  const Eigen::MatrixXd gi = M.factor_chart(static_cast<std::size_t>(i)).metric_at(p);

  auto factor_ricci = [&] { return oracle::ricci(M.factor_chart(static_cast<std::size_t>(i)), p); };
  auto hessbar_block = [&] {
    const Eigen::MatrixXd Hb = oracle::hessian(M.base_chart(), h_, p);
    const std::size_t off = off_of(M, i);  // base chart order equals product order for blocks 0, 1
    return sub_block(Hb, off, off, ni, ni);
  };

  switch (M.kind()) {
  case ProductKind::Generic:
  case ProductKind::StandardStatic: {
    const double c3 = M.kind() == ProductKind::StandardStatic ? 1.0 : n3;
    if (i == 0) {
      const Eigen::MatrixXd H1 = oracle::hessian(M.factor_chart(0), f_, p);
      return factor_ricci() - (n2 / w.f) * H1 - (c3 / w.h) * hessbar_block();
    }
    if (i == 1) return factor_ricci() - w.f_sharp * gi - (c3 / w.h) * hessbar_block();
    if (M.kind() == ProductKind::StandardStatic) {
      return Eigen::MatrixXd::Constant(1, 1, w.h * w.lapbar_h);
    }
    return factor_ricci() - w.h_sharp * gi;
  }
  case ProductKind::Grw: {
    if (i == 0) return Eigen::MatrixXd::Constant(1, 1, (n2 / w.f) * w.f_ddot + (n3 / w.h) * w.h_tt);
    if (i == 1) return factor_ricci() - w.f_diamond * gi - (n3 / w.h) * hessbar_block();
    return factor_ricci() - w.h_sharp * gi;
  }
  }
  return {};
}

Eigen::MatrixXd Evaluator::lie_block(const StructuredField& X, int i, int j, const Point& p) const {
  const SequentialWarpedProduct& M = *M_;
  if (i < 0 || j < 0 || i > 2 || j > 2) throw std::invalid_argument("lie_block: invalid block pair");
  const std::size_t ni = n_of(M, i);
  const std::size_t nj = n_of(M, j);
  if (i != j) return Eigen::MatrixXd::Zero(ix(ni), ix(nj));

  const auto bi = static_cast<std::size_t>(i);
  const Eigen::MatrixXd gi = M.factor_chart(bi).metric_at(p);
  auto factor_lie = [&] { return oracle::lie_derivative(M.factor_chart(bi), X.factor(bi), p); };
  const double f = f_.value(p);
  const double h = h_.value(p);

  switch (M.kind()) {
  case ProductKind::Generic:
  case ProductKind::StandardStatic: {
    if (i == 0) return factor_lie();
    if (i == 1) return f * f * factor_lie() + 2.0 * f * X.apply({true, false, false}, f_, p) * gi;
    const double transport = h * X.apply({true, true, false}, h_, p);
    if (M.kind() == ProductKind::StandardStatic) {
      const std::size_t t = M.factor(2).offset;
      const double dw = X.blocks().blocks[2][0].differentiate(t).eval(p.values);
      return Eigen::MatrixXd::Constant(1, 1, -2.0 * h * h * dw - 2.0 * transport);
    }
    return h * h * factor_lie() + 2.0 * transport * gi;
  }
  case ProductKind::Grw: {
    const std::size_t t = M.factor(0).offset;
    const double w = X.blocks().blocks[0][0].eval(p.values);
    if (i == 0) {
      const double dw = X.blocks().blocks[0][0].differentiate(t).eval(p.values);
      return Eigen::MatrixXd::Constant(1, 1, -2.0 * dw);
    }
    if (i == 1) return f * f * factor_lie() + 2.0 * w * f * f_.d(t, p) * gi;
    const double x2h = X.apply({false, true, false}, h_, p);
    return h * h * factor_lie() + 2.0 * w * h * (h_.d(t, p) + x2h) * gi;
  }
  }
  return {};
}

Eigen::MatrixXd Evaluator::ricci(const Point& p) const {
  const SequentialWarpedProduct& M = *M_;
  Eigen::MatrixXd out = Eigen::MatrixXd::Zero(ix(M.dim()), ix(M.dim()));
  for (int i = 0; i < 3; ++i) {
    out.block(ix(off_of(M, i)), ix(off_of(M, i)), ix(n_of(M, i)), ix(n_of(M, i))) = ricci_block(i, i, p);
  }
  return out;
}

Eigen::MatrixXd Evaluator::lie(const StructuredField& X, const Point& p) const {
  const SequentialWarpedProduct& M = *M_;
  Eigen::MatrixXd out = Eigen::MatrixXd::Zero(ix(M.dim()), ix(M.dim()));
  for (int i = 0; i < 3; ++i) {
    out.block(ix(off_of(M, i)), ix(off_of(M, i)), ix(n_of(M, i)), ix(n_of(M, i))) = lie_block(X, i, i, p);
  }
  return out;
}

std::string block_label(ProductKind kind, int block) {
  if (kind == ProductKind::StandardStatic && block == 2) return "t";
  if (kind == ProductKind::Grw && block == 0) return "t";
  return std::to_string(block + 1);
}

std::string formula_text(ProductKind kind, Identity id, int i, int j) {
  if (i > j) std::swap(i, j);
  const bool grw = kind == ProductKind::Grw;
  const bool stat = kind == ProductKind::StandardStatic;
  switch (id) {
  case Identity::Connection:
    if (grw) {
      if (i == 0 && j == 0) return "nabla_dt dt = 0";
      if (i == 0 && j == 1) return "nabla_dt X2 = (f'/f) X2";
      if (i == 0 && j == 2) return "nabla_dt X3 = (f'/f) X3";
      if (i == 1 && j == 1) return "nabla_X2 Y2 = nabla2_X2 Y2 - f f' g2(X2,Y2) dt";
      if (i == 1 && j == 2) return "nabla_X2 X3 = X2(ln h) X3";
      return "nabla_X3 Y3 = nabla3_X3 Y3 - h g3(X3,Y3) grad h";
    }
    if (i == 0 && j == 0) return "nabla_X1 Y1 = nabla1_X1 Y1";
    if (i == 0 && j == 1) return "nabla_X1 X2 = X1(ln f) X2";
    if (i == 1 && j == 1) return "nabla_X2 Y2 = nabla2_X2 Y2 - f g2(X2,Y2) grad1 f";
    if (stat) {
      if (i == 0 && j == 2) return "nabla_X1 dt = X1(ln h) dt";
      if (i == 1 && j == 2) return "nabla_X2 dt = X2(ln h) dt";
      return "nabla_dt dt = h grad h";
    }
    if (i == 0 && j == 2) return "nabla_X1 X3 = X1(ln h) X3";
    if (i == 1 && j == 2) return "nabla_X2 X3 = X2(ln h) X3";
    return "nabla_X3 Y3 = nabla3_X3 Y3 - h g3(X3,Y3) grad h";
  case Identity::Ricci:
    if (i != j) return "Ric(Xi,Xj) = 0 for i != j";
    if (grw) {
      if (i == 0) return "Ric(dt,dt) = (n2/f) f'' + (n3/h) d2h/dt2";
      if (i == 1) return "Ric(X2,Y2) = Ric2 - f<> g2 - (n3/h) Hessbar h, f<> = -f f'' + (n2-1) f'^2";
      return "Ric(X3,Y3) = Ric3 - h# g3, h# = h Lap h + (n3-1) |grad h|^2";
    }
    if (stat) {
      if (i == 0) return "Ric(X1,Y1) = Ric1 - (n2/f) Hess1 f - (1/h) Hessbar h";
      if (i == 1) return "Ric(X2,Y2) = Ric2 - f# g2 - (1/h) Hessbar h, f# = f Lap1 f + (n2-1) |grad1 f|^2";
      return "Ric(dt,dt) = h Lap h";
    }
    if (i == 0) return "Ric(X1,Y1) = Ric1 - (n2/f) Hess1 f - (n3/h) Hessbar h";
    if (i == 1) return "Ric(X2,Y2) = Ric2 - f# g2 - (n3/h) Hessbar h, f# = f Lap1 f + (n2-1) |grad1 f|^2";
    return "Ric(X3,Y3) = Ric3 - h# g3, h# = h Lapbar h + (n3-1) |gradbar h|^2";
  case Identity::Lie:
    if (i != j) return "L_X g(Yi,Zj) = 0 for i != j";
    if (grw) {
      if (i == 0) return "L_X g(dt,dt) = -2 dw/dt";
      if (i == 1) return "f^2 L2_X2 g2 + 2 w f df/dt g2";
      return "h^2 L3_X3 g3 + 2 w h (dh/dt + X2(h)) g3";
    }
    if (i == 0) return "L1_X1 g1";
    if (i == 1) return "f^2 L2_X2 g2 + 2 f X1(f) g2";
    if (stat) return "L_X g(dt,dt) = -2 h^2 dw/dt - 2 h (X1+X2)(h)";
    return "h^2 L3_X3 g3 + 2 h (X1+X2)(h) g3";
  }
  return "";
}

WarpInvariants warp_invariants(const SequentialWarpedProduct& M, const Point& p) {
  return Evaluator(M).invariants(p);
}

Eigen::VectorXd connection_closed(const SequentialWarpedProduct& M, std::size_t a, std::size_t b, const Point& p) {
  return Evaluator(M).connection(a, b, p);
}

Eigen::MatrixXd ricci_closed(const SequentialWarpedProduct& M, int i, int j, const Point& p) {
  return Evaluator(M).ricci_block(i, j, p);
}

Eigen::MatrixXd lie_closed(const SequentialWarpedProduct& M, const VectorFieldSpec& X, int i, int j, const Point& p) {
  return Evaluator(M).lie_block(StructuredField(M, X), i, j, p);
}

} // namespace swp::closedform
