#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "swp/catalog.hpp"
#include "swp/manifold.hpp"

#include <cmath>
#include <set>
#include <string>
#include <variant>

using namespace swp;

namespace {

Point at(const SequentialWarpedProduct& M, std::initializer_list<std::pair<const char*, double>> values) {
  Point p = M.midpoint();
  for (const auto& [name, v] : values) p.values[M.coordinate_index(name)] = v;
  return p;
}

ProductSpec one_dim_spec() {
  ProductSpec s = catalog::spec("flat3");
  s.name = "custom";
  return s;
}

} // namespace

TEST_CASE("assemble_metric on catalog instances") {
  const auto flat = catalog::build("flat3");
  CHECK(flat.assemble_metric(at(flat, {{"x", 0.2}, {"y", -0.4}, {"z", 0.9}})) == Eigen::MatrixXd::Identity(3, 3));

  const auto hyp = catalog::build("hyp3");
  const Eigen::MatrixXd g = hyp.assemble_metric(at(hyp, {{"x", 0.3}}));
  CHECK(g(0, 0) == 1.0);
  CHECK(g(1, 1) == doctest::Approx(1.8221188).epsilon(1e-7));
  CHECK(g(2, 2) == doctest::Approx(1.8221188).epsilon(1e-7));
  CHECK(g(0, 1) == 0.0);
  CHECK(g(1, 2) == 0.0);

  const auto mink = catalog::build("mink-static");
  Eigen::MatrixXd expected = Eigen::MatrixXd::Identity(3, 3);
  expected(2, 2) = -1.0;
  CHECK(mink.assemble_metric(mink.midpoint()) == expected);
}

TEST_CASE("assemble_metric errors") {
  const auto hyp = catalog::build("hyp3");
  CHECK_THROWS_AS(hyp.assemble_metric(at(hyp, {{"x", 1.5}})), ModelError);

  ProductSpec s = one_dim_spec();
  s.factors[1].metric = {{"y"}};
  const auto M = SequentialWarpedProduct::build(s);
  CHECK_THROWS_AS(M.assemble_metric(at(M, {{"y", 0.0}})), ModelError);
  CHECK_NOTHROW(M.assemble_metric(at(M, {{"y", 0.5}})));
}

TEST_CASE("sample_grid") {
  ProductSpec s = one_dim_spec();
  s.factors[0].box = {Interval{0.0, 1.0}};
  const auto M = SequentialWarpedProduct::build(s);
  const auto grid = M.sample_grid(2);
  REQUIRE(grid.size() == 8);
  std::set<double> xs;
  for (const auto& p : grid) xs.insert(p.values[0]);
  CHECK(xs.size() == 2);
  CHECK(*xs.begin() == doctest::Approx(0.05));
  CHECK(*xs.rbegin() == doctest::Approx(0.95));

  const auto hyp = catalog::build("hyp3");
  CHECK(hyp.sample_grid(5).size() == 125);
  CHECK(hyp.sample_grid(5) == hyp.sample_grid(5));
  CHECK_THROWS(hyp.sample_grid(1));

  // Lexicographic by coordinate name: x slowest, z fastest.
  const auto g = hyp.sample_grid(3);
  CHECK(g[0].values[0] == g[1].values[0]);
  CHECK(g[0].values[2] != g[1].values[2]);
  CHECK(g[0].values[0] != g[9].values[0]);
}

TEST_CASE("sample_grid orders by coordinate name, not by factor") {
  ProductSpec s = catalog::spec("mink-static");  // coordinates x, y, t
  const auto M = SequentialWarpedProduct::build(s);
  const auto g = M.sample_grid(2);
  // t sorts first, so it varies slowest.
  CHECK(g[0].values[2] == g[3].values[2]);
  CHECK(g[0].values[2] != g[4].values[2]);
  CHECK(g[0].values[1] != g[1].values[1]);
}

TEST_CASE("metric invariants on catalog grids") {
  for (const auto& name : catalog::names()) {
    CAPTURE(name);
    const auto M = catalog::build(name);
    const auto grid = M.sample_grid(4);
    CHECK_NOTHROW(M.validate_on(grid));
    int expected_neg = 0;
    for (std::size_t i = 0; i < 3; ++i) expected_neg += negative_index(M.factor_chart(i).metric_at(grid[0]));
    for (const auto& p : grid) {
      const Eigen::MatrixXd g = M.assemble_metric(p);
      CHECK(g == g.transpose());
      for (Eigen::Index a = 0; a < 3; ++a) {
        for (Eigen::Index b = 0; b < 3; ++b) {
          if (M.block_of(static_cast<std::size_t>(a)) != M.block_of(static_cast<std::size_t>(b))) CHECK(g(a, b) == 0.0);
        }
      }
      CHECK(negative_index(g) == expected_neg);
      if (M.kind() == ProductKind::StandardStatic) {
        const double h = M.h().eval(p.values);
        CHECK(g(2, 2) == -(h * h));
      }
      if (M.kind() == ProductKind::Grw) CHECK(g(0, 0) == -1.0);
      // The full chart's symbolic metric agrees with the assembled one.
      CHECK((M.chart().metric_at(p) - g).cwiseAbs().maxCoeff() == 0.0);
    }
  }
}

TEST_CASE("construction validation") {
  SUBCASE("empty factor") {
    ProductSpec s = one_dim_spec();
    s.factors[1].coords.clear();
    s.factors[1].metric.clear();
    s.factors[1].box.clear();
    CHECK_THROWS_AS(SequentialWarpedProduct::build(s), ModelError);
  }
  SUBCASE("metric parse error names the field") {
    ProductSpec s = one_dim_spec();
    s.factors[0].metric = {{"exp("}};
    try {
      SequentialWarpedProduct::build(s);
      FAIL("expected error");
    } catch (const ModelError& e) {
      CHECK(e.field() == "factors[0].metric[0][0]");
    }
  }
  SUBCASE("metric entry referencing another factor") {
    ProductSpec s = one_dim_spec();
    s.factors[2].metric = {{"1 + x^2"}};
    CHECK_THROWS_AS(SequentialWarpedProduct::build(s), ModelError);
  }
  SUBCASE("f must live on factor 1") {
    ProductSpec s = one_dim_spec();
    s.f = "1 + y^2";
    CHECK_THROWS_AS(SequentialWarpedProduct::build(s), ModelError);
  }
  SUBCASE("h must not see factor 3") {
    ProductSpec s = one_dim_spec();
    s.h = "1 + z^2";
    CHECK_THROWS_AS(SequentialWarpedProduct::build(s), ModelError);
  }
  SUBCASE("duplicate coordinates") {
    ProductSpec s = one_dim_spec();
    s.factors[1].coords = {"x"};
    CHECK_THROWS_AS(SequentialWarpedProduct::build(s), ModelError);
  }
  SUBCASE("static kind needs a -1 time factor in slot 3") {
    ProductSpec s = one_dim_spec();
    s.kind = ProductKind::StandardStatic;
    CHECK_THROWS_AS(SequentialWarpedProduct::build(s), ModelError);
  }
  SUBCASE("grw kind needs a -1 time factor in slot 1") {
    ProductSpec s = one_dim_spec();
    s.kind = ProductKind::Grw;
    CHECK_THROWS_AS(SequentialWarpedProduct::build(s), ModelError);
  }
  SUBCASE("non-positive warping function") {
    ProductSpec s = one_dim_spec();
    s.f = "x";
    const auto M = SequentialWarpedProduct::build(s);
    CHECK_THROWS_AS(M.validate_on(M.sample_grid(3)), ModelError);
  }
  SUBCASE("signature change") {
    ProductSpec s = one_dim_spec();
    s.factors[0].metric = {{"x"}};
    s.factors[0].box = {Interval{-1.0, 1.0}};
    const auto M = SequentialWarpedProduct::build(s);
    CHECK_THROWS_AS(M.validate_on(M.sample_grid(4)), ModelError);
  }
}

TEST_CASE("decompose_vector_field") {
  const auto hyp = catalog::build("hyp3");
  auto field = [&](const SequentialWarpedProduct& M, std::vector<std::string> src) {
    VectorFieldSpec X;
    for (const auto& s : src) X.components.push_back(M.parse_expression(s));
    return X;
  };
  const auto ok = hyp.decompose_vector_field(field(hyp, {"x", "y", "z"}));
  REQUIRE(std::holds_alternative<BlockFields>(ok));
  const auto& blocks = std::get<BlockFields>(ok).blocks;
  CHECK(blocks[0][0].to_string() == "x");
  CHECK(blocks[1][0].to_string() == "y");
  CHECK(blocks[2][0].to_string() == "z");

  const auto bad = hyp.decompose_vector_field(field(hyp, {"0", "x*y", "0"}));
  REQUIRE(std::holds_alternative<Rejection>(bad));
  CHECK(std::get<Rejection>(bad).coordinate == "y");
  CHECK(std::get<Rejection>(bad).variable == "x");

  const auto mink = catalog::build("mink-static");
  const auto w = mink.decompose_vector_field(field(mink, {"0", "0", "t^2"}));
  REQUIRE(std::holds_alternative<BlockFields>(w));
  CHECK(std::get<BlockFields>(w).blocks[2][0].eval(std::vector<double>{0, 0, 3.0}) == 9.0);
}

TEST_CASE("catalog") {
  CHECK(catalog::names().size() == 5);
  for (const auto& n : catalog::names()) {
    CHECK(catalog::contains(n));
    CHECK_FALSE(catalog::describe(n).empty());
  }
  CHECK_FALSE(catalog::contains("nope"));
  CHECK_THROWS(catalog::spec("nope"));
  CHECK(to_string(ProductKind::Grw) == "grw");
  CHECK(product_kind_from_string("standard-static") == ProductKind::StandardStatic);
  CHECK_FALSE(product_kind_from_string("lorentz").has_value());
}
