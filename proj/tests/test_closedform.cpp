#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "swp/catalog.hpp"
#include "swp/closedform.hpp"
#include "swp/oracle.hpp"

#include <cmath>
#include <string>

using namespace swp;
using closedform::Evaluator;
using closedform::StructuredField;

namespace {

Point at(const SequentialWarpedProduct& M, std::initializer_list<std::pair<const char*, double>> values) {
  Point p = M.midpoint();
  for (const auto& [name, v] : values) p.values[M.coordinate_index(name)] = v;
  return p;
}

VectorFieldSpec field(const SequentialWarpedProduct& M, std::vector<std::string> src) {
  VectorFieldSpec X;
  for (const auto& s : src) X.components.push_back(M.parse_expression(s));
  return X;
}

double max_abs(const Eigen::MatrixXd& m) { return m.size() == 0 ? 0.0 : m.cwiseAbs().maxCoeff(); }

Eigen::MatrixXd block(const SequentialWarpedProduct& M, const Eigen::MatrixXd& full, int i, int j) {
  const auto& Fi = M.factor(static_cast<std::size_t>(i));
  const auto& Fj = M.factor(static_cast<std::size_t>(j));
  return full.block(static_cast<Eigen::Index>(Fi.offset), static_cast<Eigen::Index>(Fj.offset),
                    static_cast<Eigen::Index>(Fi.dim()), static_cast<Eigen::Index>(Fj.dim()));
}

struct Worst {
  double connection = 0, ricci = 0, lie = 0;
};

/// Largest |oracle - closed form| over the grid for the three identities,
/// restricted to block pairs (i, j) not listed in `skip_ricci`.
Worst compare(const SequentialWarpedProduct& M, const VectorFieldSpec& Xspec, int per_dim,
              std::vector<std::pair<int, int>> skip_ricci = {}) {
  Evaluator ev(M);
  StructuredField X(M, Xspec);
  Worst w;
  for (const auto& p : M.sample_grid(per_dim)) {
    oracle::Geometry geo(M.chart(), p);
    const auto& G = geo.christoffel();
    for (std::size_t a = 0; a < M.dim(); ++a) {
      for (std::size_t b = 0; b < M.dim(); ++b) {
        const Eigen::VectorXd c = ev.connection(a, b, p);
        for (std::size_t k = 0; k < M.dim(); ++k)
          w.connection = std::max(w.connection, std::abs(G(k, a, b) - c(static_cast<Eigen::Index>(k))));
      }
    }
    const Eigen::MatrixXd ric = geo.ricci();
    const Eigen::MatrixXd lie = geo.lie_derivative(X.full());
    for (int i = 0; i < 3; ++i) {
      for (int j = 0; j < 3; ++j) {
        bool skip = false;
        for (auto [si, sj] : skip_ricci) skip = skip || (si == i && sj == j) || (si == j && sj == i);
        if (!skip) w.ricci = std::max(w.ricci, max_abs(block(M, ric, i, j) - ev.ricci_block(i, j, p)));
        w.lie = std::max(w.lie, max_abs(block(M, lie, i, j) - ev.lie_block(X, i, j, p)));
      }
    }
  }
  return w;
}

} // namespace

TEST_CASE("warp invariants") {
  const auto flat = catalog::build("flat3");
  const auto wf = closedform::warp_invariants(flat, flat.midpoint());
  CHECK(wf.f_sharp == 0.0);
  CHECK(wf.h_sharp == 0.0);

  const auto hyp = catalog::build("hyp3");
  const auto w = closedform::warp_invariants(hyp, at(hyp, {{"x", 0.0}}));
  CHECK(w.f_sharp == doctest::Approx(1.0));
  CHECK(w.h_sharp == doctest::Approx(2.0));
  CHECK(w.lapbar_h == doctest::Approx(2.0));

  const auto des = catalog::build("desitter-grw");
  for (double t : {-0.5, 0.0, 0.7}) {
    const auto wd = closedform::warp_invariants(des, at(des, {{"t", t}}));
    CHECK(wd.f_diamond == doctest::Approx(-std::exp(2 * t)));
    CHECK(wd.f_dot == doctest::Approx(std::exp(t)));
  }
}

TEST_CASE("warp invariant reconstruction identities") {
  for (const auto& name : catalog::names()) {
    CAPTURE(name);
    const auto M = catalog::build(name);
    const double n2 = static_cast<double>(M.factor(1).dim());
    const double n3 = static_cast<double>(M.factor(2).dim());
    for (const auto& p : M.sample_grid(3)) {
      const auto w = closedform::warp_invariants(M, p);
      CHECK(std::abs(w.f_sharp - (w.f * w.lap1_f + (n2 - 1) * w.grad1_f_sq)) <= 1e-12);
      CHECK(std::abs(w.h_sharp - (w.h * w.lapbar_h + (n3 - 1) * w.gradbar_h_sq)) <= 1e-12);
      CHECK(std::abs(w.f_diamond - (M.kind() == ProductKind::Grw ? -w.f * w.f_ddot + (n2 - 1) * w.f_dot * w.f_dot
                                                                  : 0.0)) <= 1e-12);
    }
  }
}

TEST_CASE("connection examples") {
  const auto hyp = catalog::build("hyp3");
  const Point p0 = at(hyp, {{"x", 0.0}});
  const Eigen::VectorXd c12 = closedform::connection_closed(hyp, 0, 1, p0);
  CHECK(c12(1) == doctest::Approx(1.0));
  CHECK(c12(0) == 0.0);
  const Eigen::VectorXd c22 = closedform::connection_closed(hyp, 1, 1, p0);
  CHECK(c22(0) == doctest::Approx(-1.0));

  const auto flat = catalog::build("flat3");
  for (std::size_t a = 0; a < 3; ++a)
    for (std::size_t b = 0; b < 3; ++b) CHECK(max_abs(closedform::connection_closed(flat, a, b, flat.midpoint())) == 0.0);
}

TEST_CASE("ricci examples") {
  const auto flat = catalog::build("flat3");
  for (int i = 0; i < 3; ++i)
    for (int j = 0; j < 3; ++j) CHECK(max_abs(closedform::ricci_closed(flat, i, j, flat.midpoint())) == 0.0);

  const auto hyp = catalog::build("hyp3");
  CHECK(closedform::ricci_closed(hyp, 1, 1, at(hyp, {{"x", 0.0}}))(0, 0) == doctest::Approx(-2.0));

  const auto des = catalog::build("desitter-grw");
  const Point p = at(des, {{"t", 0.0}});
  CHECK(closedform::ricci_closed(des, 0, 0, p)(0, 0) == doctest::Approx(2.0));
  CHECK(oracle::ricci(des.chart(), p)(0, 0) == doctest::Approx(-2.0));
  for (double t : {-0.3, 0.4}) {
    const Point q = at(des, {{"t", t}});
    CHECK(closedform::ricci_closed(des, 1, 1, q)(0, 0) == doctest::Approx(2 * std::exp(2 * t)));
    CHECK(closedform::ricci_closed(des, 2, 2, q)(0, 0) == doctest::Approx(2 * std::exp(2 * t)));
  }
  CHECK_THROWS_AS(closedform::ricci_closed(des, 0, 3, p), std::invalid_argument);
}

TEST_CASE("lie examples") {
  const auto hyp = catalog::build("hyp3");
  const Point p0 = at(hyp, {{"x", 0.0}});
  for (int i = 0; i < 3; ++i)
    CHECK(max_abs(closedform::lie_closed(hyp, field(hyp, {"0", "0", "0"}), i, i, p0)) == 0.0);
  CHECK(closedform::lie_closed(hyp, field(hyp, {"1", "0", "0"}), 1, 1, p0)(0, 0) == doctest::Approx(2.0));

  const auto mink = catalog::build("mink-static");
  CHECK(closedform::lie_closed(mink, field(mink, {"0", "0", "t"}), 2, 2, mink.midpoint())(0, 0) ==
        doctest::Approx(-2.0));

  CHECK_THROWS_AS(closedform::lie_closed(hyp, field(hyp, {"0", "x*y", "0"}), 1, 1, p0), closedform::FieldRejected);
}

TEST_CASE("generic-kind agreement with the oracle") {
  const auto flat = catalog::build("flat3");
  const auto wf = compare(flat, field(flat, {"x", "y", "z"}), 4);
  CHECK(wf.connection == 0.0);
  CHECK(wf.ricci == 0.0);
  CHECK(wf.lie == 0.0);

  const auto hyp = catalog::build("hyp3");
  const auto wh = compare(hyp, field(hyp, {"x", "y", "z"}), 5);
  CHECK(wh.connection < 1e-8);
  CHECK(wh.ricci < 1e-8);
  CHECK(wh.lie < 1e-8);
  const auto wh2 = compare(hyp, field(hyp, {"sin(x)", "y^2 + 1", "exp(z)"}), 3);
  CHECK(wh2.lie < 1e-8);
}

TEST_CASE("rand-riemann: agreement everywhere except the mixed (1,2) Ricci block") {
  const auto M = catalog::build("rand-riemann");
  const auto w = compare(M, field(M, {"x", "y", "z"}), 5, {{0, 1}});
  CHECK(w.connection < 1e-8);
  CHECK(w.ricci < 1e-8);
  CHECK(w.lie < 1e-8);
  // The printed mixed block is 0 while the metric carries -(n3/h) Hessbar h(X1, X2).
  const auto full = compare(M, field(M, {"x", "y", "z"}), 5);
  CHECK(full.ricci > 1e-2);
}

TEST_CASE("non-flat factor metrics") {
  // Two-dimensional curved factors exercise the factor-oracle callbacks.
  ProductSpec s;
  s.name = "curved";
  s.kind = ProductKind::Generic;
  s.factors[0] = FactorSpec{"M1", {"a", "b"}, {{"1", "0"}, {"0", "exp(2*a)"}}, {{0.1, 0.6}, {-0.5, 0.5}}};
  s.factors[1] = FactorSpec{"M2", {"c", "d"}, {{"1 + c^2", "0"}, {"0", "1"}}, {{0.2, 0.8}, {-0.5, 0.5}}};
  s.factors[2] = FactorSpec{"M3", {"e"}, {{"2 + sin(e)"}}, {{-0.5, 0.5}}};
  s.f = "1 + a^2";
  s.h = "2 + a*b";
  const auto M = SequentialWarpedProduct::build(s);
  const auto w = compare(M, field(M, {"a", "b^2", "c*d", "1 + d", "e"}), 2, {{0, 1}});
  CHECK(w.connection < 1e-8);
  CHECK(w.ricci < 1e-8);
  CHECK(w.lie < 1e-8);
}

TEST_CASE("space-time kinds") {
  const auto mink = catalog::build("mink-static");
  const auto wm = compare(mink, field(mink, {"x", "y", "t^2"}), 4);
  CHECK(wm.connection == 0.0);
  CHECK(wm.ricci == 0.0);
  CHECK(wm.lie < 1e-12);

  // Static with genuine warping: connection and Lie splits agree.
  ProductSpec s = catalog::spec("mink-static");
  s.f = "exp(x)";
  s.h = "1 + x^2 + y^2";
  const auto st = SequentialWarpedProduct::build(s);
  const auto ws = compare(st, field(st, {"x", "y", "t^2"}), 3, {{0, 1}});
  CHECK(ws.connection < 1e-8);
  CHECK(ws.ricci < 1e-8);
  CHECK(ws.lie < 1e-8);

  // de Sitter: the printed (t,t) Ricci and (2,2) connection blocks flip sign.
  const auto des = catalog::build("desitter-grw");
  Evaluator ev(des);
  for (const auto& p : des.sample_grid(3)) {
    const auto G = oracle::christoffel(des.chart(), p);
    const Eigen::VectorXd c = ev.connection(1, 1, p);
    CHECK(c(0) == doctest::Approx(-G(0, 1, 1)));
    CHECK(ev.ricci_block(0, 0, p)(0, 0) == doctest::Approx(-oracle::ricci(des.chart(), p)(0, 0)));
  }
}

TEST_CASE("labels and formula text") {
  CHECK(closedform::block_label(ProductKind::Generic, 2) == "3");
  CHECK(closedform::block_label(ProductKind::StandardStatic, 2) == "t");
  CHECK(closedform::block_label(ProductKind::Grw, 0) == "t");
  CHECK(closedform::formula_text(ProductKind::Generic, closedform::Identity::Ricci, 0, 1).find("0") !=
        std::string::npos);
  CHECK(closedform::formula_text(ProductKind::Grw, closedform::Identity::Ricci, 0, 0).find("f''") !=
        std::string::npos);
}
