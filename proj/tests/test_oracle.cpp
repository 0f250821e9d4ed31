#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "support/fd_oracle.hpp"
#include "swp/catalog.hpp"
#include "swp/oracle.hpp"

#include <cmath>
#include <random>
#include <string>

using namespace swp;

namespace {

Point at(const SequentialWarpedProduct& M, std::initializer_list<std::pair<const char*, double>> values) {
  Point p = M.midpoint();
  for (const auto& [name, v] : values) p.values[M.coordinate_index(name)] = v;
  return p;
}

PreparedScalar scalar(const SequentialWarpedProduct& M, const std::string& src) {
  return PreparedScalar(M.parse_expression(src));
}

PreparedVector vec(const SequentialWarpedProduct& M, std::vector<std::string> src) {
  std::vector<Expression> comps;
  for (const auto& s : src) comps.push_back(M.parse_expression(s));
  return PreparedVector(std::move(comps));
}

double max_abs(const Eigen::MatrixXd& m) { return m.cwiseAbs().maxCoeff(); }

testing::MetricFn metric_of(const SequentialWarpedProduct& M) {
  return [&M](const Eigen::VectorXd& x) {
    return M.assemble_metric(Point{std::vector<double>(x.data(), x.data() + x.size())});
  };
}

Eigen::VectorXd as_vector(const Point& p) {
  return Eigen::Map<const Eigen::VectorXd>(p.values.data(), static_cast<Eigen::Index>(p.values.size()));
}

} // namespace

TEST_CASE("christoffel examples") {
  const auto flat = catalog::build("flat3");
  const auto G0 = oracle::christoffel(flat.chart(), flat.midpoint());
  for (std::size_t k = 0; k < 3; ++k)
    for (std::size_t i = 0; i < 3; ++i)
      for (std::size_t j = 0; j < 3; ++j) CHECK(G0(k, i, j) == 0.0);

  const auto hyp = catalog::build("hyp3");
  const auto G = oracle::christoffel(hyp.chart(), at(hyp, {{"x", 0.0}}));
  CHECK(G(0, 1, 1) == doctest::Approx(-1.0));
  CHECK(G(1, 0, 1) == doctest::Approx(1.0));
  CHECK(G(1, 1, 0) == doctest::Approx(1.0));

  const auto mink = catalog::build("mink-static");
  const auto Gm = oracle::christoffel(mink.chart(), mink.midpoint());
  for (std::size_t k = 0; k < 3; ++k)
    for (std::size_t i = 0; i < 3; ++i)
      for (std::size_t j = 0; j < 3; ++j) CHECK(Gm(k, i, j) == 0.0);
}

TEST_CASE("christoffel symbols agree with finite differences of the metric") {
  for (const auto& name : catalog::names()) {
    CAPTURE(name);
    const auto M = catalog::build(name);
    for (const auto& p : M.sample_grid(3)) {
      const auto G = oracle::christoffel(M.chart(), p);
      const auto fd = testing::fd_christoffel(metric_of(M), as_vector(p), 1e-5);
      for (std::size_t k = 0; k < 3; ++k)
        for (std::size_t i = 0; i < 3; ++i)
          for (std::size_t j = 0; j < 3; ++j) CHECK(std::abs(G(k, i, j) - fd[(k * 3 + i) * 3 + j]) < 1e-8);
    }
  }
}

TEST_CASE("ricci and scalar curvature examples") {
  const auto flat = catalog::build("flat3");
  CHECK(max_abs(oracle::ricci(flat.chart(), flat.midpoint())) == 0.0);
  CHECK(oracle::scalar_curvature(flat.chart(), flat.midpoint()) == 0.0);

  const auto hyp = catalog::build("hyp3");
  for (const auto& p : hyp.sample_grid(5)) {
    const Eigen::MatrixXd ric = oracle::ricci(hyp.chart(), p);
    CHECK(max_abs(ric + 2.0 * hyp.assemble_metric(p)) < 1e-8);
    CHECK(oracle::scalar_curvature(hyp.chart(), p) == doctest::Approx(-6.0).epsilon(1e-10));
  }

  const auto des = catalog::build("desitter-grw");
  const Point p0 = at(des, {{"t", 0.0}});
  const Eigen::MatrixXd ric = oracle::ricci(des.chart(), p0);
  CHECK(ric(0, 0) == doctest::Approx(-2.0));
  CHECK(ric(1, 1) == doctest::Approx(2.0));
  CHECK(ric(2, 2) == doctest::Approx(2.0));
  for (const auto& p : des.sample_grid(5)) {
    CHECK(max_abs(oracle::ricci(des.chart(), p) - 2.0 * des.assemble_metric(p)) < 1e-8);
    CHECK(oracle::scalar_curvature(des.chart(), p) == doctest::Approx(6.0).epsilon(1e-10));
  }
}

TEST_CASE("ricci agrees with nested finite differences of the metric") {
  for (const char* name : {"hyp3", "desitter-grw", "rand-riemann"}) {
    CAPTURE(name);
    const auto M = catalog::build(name);
    for (const auto& p : M.sample_grid(2)) {
      const Eigen::MatrixXd exact = oracle::ricci(M.chart(), p);
      const Eigen::MatrixXd fd = testing::fd_ricci(metric_of(M), as_vector(p), 1e-4);
      CHECK(max_abs(exact - fd) < 1e-5);
    }
  }
}

TEST_CASE("rand-riemann mixed (1,2) Ricci block matches the hand formula") {
  // Ric(dx, dy) = 4xy / ((1+x^2)(1+x^2+y^2)), independently derived.
  const auto M = catalog::build("rand-riemann");
  for (const auto& p : M.sample_grid(3)) {
    const double x = p.values[0];
    const double y = p.values[1];
    const double expected = 4 * x * y / ((1 + x * x) * (1 + x * x + y * y));
    CHECK(oracle::ricci(M.chart(), p)(0, 1) == doctest::Approx(expected).epsilon(1e-10));
  }
}

TEST_CASE("mixed-block vanishing of oracle Ricci") {
  for (const auto& name : catalog::names()) {
    CAPTURE(name);
    const auto M = catalog::build(name);
    double worst = 0.0;
    for (const auto& p : M.sample_grid(5)) {
      const Eigen::MatrixXd ric = oracle::ricci(M.chart(), p);
      for (Eigen::Index a = 0; a < 3; ++a)
        for (Eigen::Index b = 0; b < 3; ++b)
          if (M.block_of(static_cast<std::size_t>(a)) != M.block_of(static_cast<std::size_t>(b)))
            worst = std::max(worst, std::abs(ric(a, b)));
    }
    // rand-riemann carries a genuine mixed (1,2) term; see the hand formula test.
    if (name == "rand-riemann") {
      CHECK(worst > 1e-3);
    } else {
      CHECK(worst < 1e-9);
    }
  }
}

TEST_CASE("symmetry and first Bianchi identity") {
  std::mt19937 rng(1234);
  const auto hyp = catalog::build("hyp3");
  const auto u = scalar(hyp, "x*y + exp(z) * sin(x)");
  const auto X = vec(hyp, {"y*z", "x^2", "cos(x*y)"});
  for (const auto& name : catalog::names()) {
    CAPTURE(name);
    const auto M = catalog::build(name);
    const auto grid = M.sample_grid(5);
    const auto us = scalar(M, "0.3*" + M.coordinates()[0] + " + " + M.coordinates()[1] + "^2");
    for (const auto& p : grid) {
      oracle::Geometry geo(M.chart(), p);
      const Eigen::MatrixXd ric = geo.ricci();
      CHECK(max_abs(ric - ric.transpose()) < 1e-12);
      const Eigen::MatrixXd H = geo.hessian(us);
      CHECK(max_abs(H - H.transpose()) < 1e-12);
    }
    std::uniform_int_distribution<std::size_t> pick(0, grid.size() - 1);
    for (int n = 0; n < 10; ++n) {
      const Point& p = grid[pick(rng)];
      const auto R = oracle::riemann(M.chart(), p);
      double worst = 0.0;
      for (std::size_t l = 0; l < 3; ++l)
        for (std::size_t i = 0; i < 3; ++i)
          for (std::size_t j = 0; j < 3; ++j)
            for (std::size_t k = 0; k < 3; ++k)
              worst = std::max(worst, std::abs(R(l, i, j, k) + R(l, j, k, i) + R(l, k, i, j)));
      CHECK(worst < 1e-9);
    }
  }
  for (const auto& p : hyp.sample_grid(3)) {
    const Eigen::MatrixXd L = oracle::lie_derivative(hyp.chart(), X, p);
    CHECK(max_abs(L - L.transpose()) < 1e-12);
    const Eigen::MatrixXd H = oracle::hessian(hyp.chart(), u, p);
    CHECK(max_abs(H - H.transpose()) < 1e-12);
  }
}

TEST_CASE("hessian examples") {
  const auto hyp = catalog::build("hyp3");
  CHECK(max_abs(oracle::hessian(hyp.chart(), scalar(hyp, "3.5"), hyp.midpoint())) == 0.0);
  const Point p0 = at(hyp, {{"x", 0.0}});
  CHECK(oracle::hessian(hyp.chart(), scalar(hyp, "x"), p0)(1, 1) == doctest::Approx(1.0));

  const auto des = catalog::build("desitter-grw");
  const Eigen::MatrixXd H = oracle::hessian(des.chart(), scalar(des, "exp(t) - 1"), at(des, {{"t", 0.0}}));
  CHECK(H(1, 1) == doctest::Approx(-1.0));
  CHECK(H(0, 0) == doctest::Approx(1.0));
}

TEST_CASE("hessian and lie derivative agree with finite differences") {
  for (const auto& name : catalog::names()) {
    CAPTURE(name);
    const auto M = catalog::build(name);
    const auto& names = M.coordinates();
    const std::string a = names[0], b = names[1], c = names[2];
    const auto u = scalar(M, a + "*" + b + " + sin(" + c + ") + " + b + "^3");
    const auto X = vec(M, {b + "*" + c, "exp(" + a + ")", a + " - " + c + "^2"});
    const testing::ScalarFn ufn = [&](const Eigen::VectorXd& x) {
      return u.expr().eval(std::span<const double>(x.data(), static_cast<std::size_t>(x.size())));
    };
    const testing::VectorFn Xfn = [&](const Eigen::VectorXd& x) {
      return X.values(Point{std::vector<double>(x.data(), x.data() + x.size())});
    };
    for (const auto& p : M.sample_grid(2)) {
      CHECK(max_abs(oracle::hessian(M.chart(), u, p) - testing::fd_hessian(metric_of(M), ufn, as_vector(p), 1e-4)) <
            1e-6);
      CHECK(max_abs(oracle::lie_derivative(M.chart(), X, p) - testing::fd_lie(metric_of(M), Xfn, as_vector(p), 1e-5)) <
            1e-7);
    }
  }
}

TEST_CASE("gradient examples") {
  const auto flat = catalog::build("flat3");
  const Eigen::VectorXd g1 = oracle::gradient(flat.chart(), scalar(flat, "x"), flat.midpoint());
  CHECK(g1(0) == 1.0);
  CHECK(g1(1) == 0.0);

  const auto mink = catalog::build("mink-static");
  const Eigen::VectorXd g2 = oracle::gradient(mink.chart(), scalar(mink, "t"), mink.midpoint());
  CHECK(g2(2) == -1.0);

  const auto hyp = catalog::build("hyp3");
  const Eigen::VectorXd g3 = oracle::gradient(hyp.chart(), scalar(hyp, "y"), at(hyp, {{"x", 0.3}}));
  CHECK(g3(1) == doctest::Approx(0.5488116).epsilon(1e-7));
}

TEST_CASE("laplacian examples on sub-metrics") {
  const auto hyp = catalog::build("hyp3");
  CHECK(oracle::laplacian(hyp.chart(), scalar(hyp, "2"), hyp.midpoint()) == 0.0);
  const Point p0 = at(hyp, {{"x", 0.0}});
  CHECK(oracle::laplacian(hyp.base_chart(), PreparedScalar(hyp.h()), p0) == doctest::Approx(2.0));
  const Point p1 = at(hyp, {{"x", 0.4}});
  CHECK(oracle::laplacian(hyp.factor_chart(0), PreparedScalar(hyp.f()), p1) == doctest::Approx(std::exp(0.4)));
  const Eigen::MatrixXd Hbar = oracle::hessian(hyp.base_chart(), PreparedScalar(hyp.h()), p1);
  CHECK(Hbar.rows() == 2);
  CHECK(Hbar(0, 0) == doctest::Approx(std::exp(0.4)));
  CHECK(Hbar(1, 1) == doctest::Approx(std::exp(1.2)));
}

TEST_CASE("lie derivative examples") {
  const auto hyp = catalog::build("hyp3");
  CHECK(max_abs(oracle::lie_derivative(hyp.chart(), vec(hyp, {"0", "0", "0"}), hyp.midpoint())) == 0.0);
  const Eigen::MatrixXd L = oracle::lie_derivative(hyp.chart(), vec(hyp, {"1", "0", "0"}), at(hyp, {{"x", 0.0}}));
  CHECK(L(1, 1) == doctest::Approx(2.0));
  CHECK(L(2, 2) == doctest::Approx(2.0));
  CHECK(L(0, 0) == 0.0);

  const auto flat = catalog::build("flat3");
  const Eigen::MatrixXd Lf = oracle::lie_derivative(flat.chart(), vec(flat, {"x", "0", "0"}), flat.midpoint());
  Eigen::MatrixXd expected = Eigen::MatrixXd::Zero(3, 3);
  expected(0, 0) = 2.0;
  CHECK(Lf == expected);

  CHECK_THROWS_AS(oracle::lie_derivative(flat.chart(), vec(flat, {"x", "0"}), flat.midpoint()),
                  std::invalid_argument);
}

TEST_CASE("singular metric is reported") {
  ProductSpec s = catalog::spec("flat3");
  s.factors[0].metric = {{"x"}};
  s.factors[0].box = {Interval{-1.0, 1.0}};
  const auto M = SequentialWarpedProduct::build(s);
  CHECK_THROWS_AS(oracle::ricci(M.chart(), at(M, {{"x", 0.0}})), oracle::SingularMetric);
}

TEST_CASE("condition estimate") {
  const auto hyp = catalog::build("hyp3");
  oracle::Geometry geo(hyp.chart(), hyp.midpoint());
  CHECK(geo.condition() >= 1.0);
  CHECK_FALSE(geo.ill_conditioned());
}
