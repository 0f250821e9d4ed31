#include "swp/catalog.hpp"

#include <algorithm>
#include <stdexcept>

namespace swp::catalog {

namespace {

FactorSpec line(const std::string& name, const std::string& coord, double lo, double hi,
                const std::string& metric = "1") {
  return FactorSpec{name, {coord}, {{metric}}, {Interval{lo, hi}}};
}

} // namespace

const std::vector<std::string>& names() {
  static const std::vector<std::string> kNames{"flat3", "hyp3", "mink-static", "desitter-grw", "rand-riemann"};
  return kNames;
}

std::string describe(const std::string& name) {
  if (name == "flat3") return "generic: R(x) x R(y) x R(z), f = h = 1 on [-1,1]^3";
  if (name == "hyp3") return "generic: R(x) x_f R(y) x_h R(z), f = h = exp(x) on [-1,1]^3";
  if (name == "mink-static") return "standard-static: R(x) x R(y) x I(t), -dt^2, f = h = 1 on [-1,1]^3";
  if (name == "desitter-grw") return "grw: I(t) x_f R(y) x_h R(z), -dt^2, f = h = exp(t) on [-1,1]^3";
  if (name == "rand-riemann") return "generic: flat factors, f = 1+x^2, h = 1+x^2+y^2 on [0.2,1]^3";
  throw std::invalid_argument("unknown catalog instance '" + name + "'");
}

bool contains(const std::string& name) {
  const auto& n = names();
  return std::find(n.begin(), n.end(), name) != n.end();
}

ProductSpec spec(const std::string& name) {
  ProductSpec s;
  s.name = name;
  if (name == "flat3") {
    s.kind = ProductKind::Generic;
    s.factors = {line("M1", "x", -1, 1), line("M2", "y", -1, 1), line("M3", "z", -1, 1)};
    s.f = "1";
    s.h = "1";
  } else if (name == "hyp3") {
    s.kind = ProductKind::Generic;
    s.factors = {line("M1", "x", -1, 1), line("M2", "y", -1, 1), line("M3", "z", -1, 1)};
    s.f = "exp(x)";
    s.h = "exp(x)";
  } else if (name == "mink-static") {
    s.kind = ProductKind::StandardStatic;
    s.factors = {line("M1", "x", -1, 1), line("M2", "y", -1, 1), line("I", "t", -1, 1, "-1")};
    s.f = "1";
    s.h = "1";
  } else if (name == "desitter-grw") {
    s.kind = ProductKind::Grw;
    s.factors = {line("I", "t", -1, 1, "-1"), line("M2", "y", -1, 1), line("M3", "z", -1, 1)};
    s.f = "exp(t)";
    s.h = "exp(t)";
  } else if (name == "rand-riemann") {
    s.kind = ProductKind::Generic;
    s.factors = {line("M1", "x", 0.2, 1), line("M2", "y", 0.2, 1), line("M3", "z", 0.2, 1)};
    s.f = "1 + x^2";
    s.h = "1 + x^2 + y^2";
  } else {
    throw std::invalid_argument("unknown catalog instance '" + name + "'");
  }
  return s;
}

SequentialWarpedProduct build(const std::string& name) { return SequentialWarpedProduct::build(spec(name)); }

} // namespace swp::catalog
