#ifndef SWP_CLOSEDFORM_HPP
#define SWP_CLOSEDFORM_HPP

// Block formulas for the connection, Ricci tensor and Lie derivative of a
// sequential warped product, evaluated exactly as printed for each product
// kind. Factor objects (Ric^i, L^i, nabla^i) and Hessians or Laplacians on
// the partial product g1 + f^2 g2 come from the oracle run on the bare
// sub-metric; the block formulas themselves never call back into the full
// metric.
//
// Block indices are 0, 1, 2 in code. For standard-static products block 2 is
// the time line; for grw products block 0 is.

#include "swp/chart.hpp"
#include "swp/manifold.hpp"

#include <Eigen/Dense>

#include <array>
#include <cstddef>
#include <stdexcept>
#include <string>

namespace swp::closedform {

/// Scalar warp invariants at one point.
struct WarpInvariants {
  double f = 0.0;
  double h = 0.0;
  double lap1_f = 0.0;        // Laplacian of f on (M1, g1)
  double grad1_f_sq = 0.0;    // |grad f|^2 in g1
  double lapbar_h = 0.0;      // Laplacian of h on (M1 x M2, g1 + f^2 g2)
  double gradbar_h_sq = 0.0;  // |grad h|^2 in g1 + f^2 g2
  double f_sharp = 0.0;       // f lap1_f + (n2 - 1) grad1_f_sq
  double h_sharp = 0.0;       // h lapbar_h + (n3 - 1) gradbar_h_sq
  // grw only; zero for the other kinds.
  double f_dot = 0.0;
  double f_ddot = 0.0;
  double h_t = 0.0;
  double h_tt = 0.0;
  double f_diamond = 0.0;     // -f f_ddot + (n2 - 1) f_dot^2
};

enum class Identity { Connection, Ricci, Lie };

std::string to_string(Identity id);

/// Raised when a vector field does not split into factor blocks.
class FieldRejected : public std::invalid_argument {
public:
  explicit FieldRejected(Rejection r)
      : std::invalid_argument(r.message), rejection_(std::move(r)) {}
  const Rejection& rejection() const noexcept { return rejection_; }

private:
  Rejection rejection_;
};

/// A vector field X = X1 + X2 + X3 with each block depending only on its
/// own factor's coordinates.
class StructuredField {
public:
  /// Throws FieldRejected when some block references a foreign coordinate.
  StructuredField(const SequentialWarpedProduct& M, const VectorFieldSpec& X);

  const BlockFields& blocks() const noexcept { return blocks_; }
  /// Block i as a field on the bare factor chart i.
  const PreparedVector& factor(std::size_t i) const { return factor_[i]; }
  /// All components, in product order.
  const PreparedVector& full() const noexcept { return full_; }

  /// (sum of the selected blocks)(s) = sum over their coordinates of X^c d_c s.
  double apply(const std::array<bool, 3>& which, const PreparedScalar& s, const Point& p) const;

private:
  const SequentialWarpedProduct* M_;
  BlockFields blocks_;
  std::array<PreparedVector, 3> factor_;
  PreparedVector full_;
};

/// Evaluates the printed block formulas on one manifold. Holds a pointer to
/// the manifold, which must outlive it.
class Evaluator {
public:
  explicit Evaluator(const SequentialWarpedProduct& M);

  const SequentialWarpedProduct& manifold() const noexcept { return *M_; }
  const PreparedScalar& f() const noexcept { return f_; }
  const PreparedScalar& h() const noexcept { return h_; }

  WarpInvariants invariants(const Point& p) const;

  /// nabla_{d_a} d_b for product coordinates a, b, as a product-order vector.
  Eigen::VectorXd connection(std::size_t a, std::size_t b, const Point& p) const;
  /// Ricci block (i, j): a dim_i x dim_j matrix.
  Eigen::MatrixXd ricci_block(int i, int j, const Point& p) const;
  /// Lie-derivative block (i, j) of the metric along a structured field.
  Eigen::MatrixXd lie_block(const StructuredField& X, int i, int j, const Point& p) const;

  /// Blocks assembled into full n x n matrices.
  Eigen::MatrixXd ricci(const Point& p) const;
  Eigen::MatrixXd lie(const StructuredField& X, const Point& p) const;

private:
  const SequentialWarpedProduct* M_;
  PreparedScalar f_;
  PreparedScalar h_;
};

/// Factor label used in row ids: "1", "2", "3", or "t" for a time line.
std::string block_label(ProductKind kind, int block);
/// Text of the block formula evaluated for (identity, i, j), i <= j.
std::string formula_text(ProductKind kind, Identity id, int i, int j);

WarpInvariants warp_invariants(const SequentialWarpedProduct& M, const Point& p);
Eigen::VectorXd connection_closed(const SequentialWarpedProduct& M, std::size_t a, std::size_t b, const Point& p);
Eigen::MatrixXd ricci_closed(const SequentialWarpedProduct& M, int i, int j, const Point& p);
Eigen::MatrixXd lie_closed(const SequentialWarpedProduct& M, const VectorFieldSpec& X, int i, int j, const Point& p);

} // namespace swp::closedform

#endif // SWP_CLOSEDFORM_HPP
