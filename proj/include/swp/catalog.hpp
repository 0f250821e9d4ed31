#ifndef SWP_CATALOG_HPP
#define SWP_CATALOG_HPP

#include "swp/manifold.hpp"

#include <string>
#include <vector>

namespace swp::catalog {

// Built-in instances. The names are a stable external interface.
//   flat3         R(x) x R(y) x R(z), f = h = 1
//   hyp3          R(x) x_{e^x} R(y) x_{e^x} R(z)            (hyperbolic 3-space)
//   mink-static   R(x) x R(y) x I(t), metric -dt^2, f = h = 1
//   desitter-grw  I(t) x_{e^t} R(y) x_{e^t} R(z), metric -dt^2   (de Sitter, flat slicing)
//   rand-riemann  flat factors on [0.2, 1]^3, f = 1 + x^2, h = 1 + x^2 + y^2

const std::vector<std::string>& names();
std::string describe(const std::string& name);
bool contains(const std::string& name);
ProductSpec spec(const std::string& name);
SequentialWarpedProduct build(const std::string& name);

} // namespace swp::catalog

#endif // SWP_CATALOG_HPP
