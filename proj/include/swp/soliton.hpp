#ifndef SWP_SOLITON_HPP
#define SWP_SOLITON_HPP

// Residuals of the Ricci-Bourguignon soliton equation
//   Ric + 1/2 L_X g = (lambda + rho R) g      (or Ric + Hess u for gradient form)
// and trace fits that classify tensors as proportional to the metric.

#include "swp/chart.hpp"
#include "swp/manifold.hpp"
#include "swp/oracle.hpp"

#include <Eigen/Dense>

#include <array>
#include <cstddef>
#include <optional>
#include <utility>
#include <variant>
#include <vector>

namespace swp::soliton {

inline constexpr double kDefaultTolerance = 1e-6;

struct ResidualStats {
  double max_abs = 0.0;
  double mean_abs = 0.0;
  Point worst_point;
  std::pair<std::size_t, std::size_t> worst_component{0, 0};
  std::array<std::array<double, 3>, 3> per_block{};
  std::size_t samples = 0;

  bool below(double tol) const noexcept { return max_abs < tol; }
};

/// Accumulates per-point residual tensors into ResidualStats. Row and column
/// indices are tagged with the factor block they belong to.
class StatsBuilder {
public:
  StatsBuilder(std::vector<int> row_blocks, std::vector<int> col_blocks);
  static StatsBuilder for_chart(const Chart& chart);
  static StatsBuilder scalar(int block);

  void add(const Point& p, const Eigen::MatrixXd& residual);
  ResidualStats result() const;

private:
  std::vector<int> rows_;
  std::vector<int> cols_;
  ResidualStats stats_;
  double sum_ = 0.0;
  std::size_t entries_ = 0;
};

struct FitResult {
  std::vector<double> samples;  // fitted factor, one per grid point
  double min = 0.0;
  double max = 0.0;
  double spread = 0.0;
  ResidualStats residual;       // after subtracting the fitted multiple of g

  double mean() const;
  bool proportional(double tol) const noexcept { return residual.max_abs < tol; }
  bool constant(double tol) const noexcept { return spread < tol; }
};

enum class LieSource { Oracle, ClosedForm };

struct KillingResult {
  bool killing = false;
  ResidualStats stats;
};

/// Soliton data: a potential (vector field X or scalar u) with constants.
struct SolitonInstance {
  std::variant<VectorFieldSpec, ScalarFieldSpec> potential;
  double lambda = 0.0;
  double rho = 0.0;

  bool gradient() const noexcept { return std::holds_alternative<ScalarFieldSpec>(potential); }
};

// Pointwise tensors.
Eigen::MatrixXd rbs_tensor(const oracle::Geometry& geo, const PreparedVector& X, double lambda, double rho);
Eigen::MatrixXd gradient_rbs_tensor(const oracle::Geometry& geo, const PreparedScalar& u, double lambda, double rho);
/// tr(g^-1 T) / n.
double trace_fit(const Eigen::MatrixXd& g_inverse, const Eigen::MatrixXd& T);

ResidualStats rbs_residual(const SequentialWarpedProduct& M, const VectorFieldSpec& X, double lambda, double rho,
                           const std::vector<Point>& grid);
ResidualStats gradient_rbs_residual(const SequentialWarpedProduct& M, const ScalarFieldSpec& u, double lambda,
                                    double rho, const std::vector<Point>& grid);
ResidualStats residual(const SequentialWarpedProduct& M, const SolitonInstance& S, const std::vector<Point>& grid);

/// L_X g on the given points; X has one component per chart coordinate.
KillingResult killing_check(const Chart& chart, const PreparedVector& X, const std::vector<Point>& grid, double tol);
KillingResult killing_check(const SequentialWarpedProduct& M, const VectorFieldSpec& X,
                            const std::vector<Point>& grid, double tol, LieSource source = LieSource::Oracle);

/// phi = tr(g^-1 L_X g) / (2n); residual L_X g - 2 phi g.
FitResult conformal_extract(const Chart& chart, const PreparedVector& X, const std::vector<Point>& grid);
FitResult conformal_extract(const SequentialWarpedProduct& M, const VectorFieldSpec& X,
                            const std::vector<Point>& grid, LieSource source = LieSource::Oracle);

/// mu = tr(g^-1 Ric) / n; residual Ric - mu g.
FitResult einstein_extract(const Chart& chart, const std::vector<Point>& grid);

enum class HessianTarget {
  FirstFactor,  // Hess f on (M1, g1)
  Base,         // Hess h on (M1 x M2, g1 + f^2 g2)
};

/// sigma (or psi) = tr(g^-1 Hess) / n; residual Hess - sigma g.
FitResult proportional_hessian_extract(const SequentialWarpedProduct& M, HessianTarget target,
                                       const std::vector<Point>& grid);

/// grad u = g^-1 du as symbolic components, one per product coordinate.
VectorFieldSpec gradient_field(const SequentialWarpedProduct& M, const ScalarFieldSpec& u);

} // namespace swp::soliton

#endif // SWP_SOLITON_HPP
