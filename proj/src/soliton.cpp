#include "swp/soliton.hpp"

#include "swp/closedform.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

namespace swp::soliton {

namespace {

using Idx = Eigen::Index;

Idx ix(std::size_t i) { return static_cast<Idx>(i); }

std::vector<int> chart_blocks(const Chart& chart) {
  std::vector<int> b(chart.dim());
  for (std::size_t a = 0; a < chart.dim(); ++a) b[a] = chart.block(a);
  return b;
}

FitResult finish(std::vector<double> samples, const StatsBuilder& stats) {
  FitResult r;
  r.samples = std::move(samples);
  if (!r.samples.empty()) {
    const auto [lo, hi] = std::minmax_element(r.samples.begin(), r.samples.end());
    r.min = *lo;
    r.max = *hi;
    r.spread = r.max - r.min;
  }
  r.residual = stats.result();
  return r;
}

// Determinant by cofactor expansion along the first row.
Expression determinant(const std::vector<std::vector<Expression>>& m) {
  const std::size_t n = m.size();
  if (n == 1) return m[0][0];
  if (n == 2) return m[0][0] * m[1][1] - m[0][1] * m[1][0];
  Expression det;
  for (std::size_t c = 0; c < n; ++c) {
    if (m[0][c].is_literal(0.0)) continue;
    std::vector<std::vector<Expression>> minor;
    for (std::size_t r = 1; r < n; ++r) {
      std::vector<Expression> row;
      for (std::size_t k = 0; k < n; ++k)
        if (k != c) row.push_back(m[r][k]);
      minor.push_back(std::move(row));
    }
    Expression term = m[0][c] * determinant(minor);
    if (c % 2 == 1) term = -term;
    det = det.empty() ? term : det + term;
  }
  return det.empty() ? m[0][0] * 0.0 : det;
}

std::vector<std::vector<Expression>> inverse(const std::vector<std::vector<Expression>>& m) {
  const std::size_t n = m.size();
  std::vector<std::vector<Expression>> inv(n, std::vector<Expression>(n));
  if (n == 1) {
    inv[0][0] = Expression::constant(1.0, m[0][0].variable_table()) / m[0][0];
    return inv;
  }
  const Expression det = determinant(m);
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = 0; j < n; ++j) {
      std::vector<std::vector<Expression>> minor;
      for (std::size_t r = 0; r < n; ++r) {
        if (r == j) continue;
        std::vector<Expression> row;
        for (std::size_t k = 0; k < n; ++k)
          if (k != i) row.push_back(m[r][k]);
        minor.push_back(std::move(row));
      }
      Expression cof = determinant(minor);
      if ((i + j) % 2 == 1) cof = -cof;
      inv[i][j] = cof / det;
    }
  }
  return inv;
}

} // namespace

StatsBuilder::StatsBuilder(std::vector<int> row_blocks, std::vector<int> col_blocks)
    : rows_(std::move(row_blocks)), cols_(std::move(col_blocks)) {}

StatsBuilder StatsBuilder::for_chart(const Chart& chart) {
  auto b = chart_blocks(chart);
  return StatsBuilder(b, b);
}

StatsBuilder StatsBuilder::scalar(int block) { return StatsBuilder({block}, {block}); }

void StatsBuilder::add(const Point& p, const Eigen::MatrixXd& residual) {
  if (static_cast<std::size_t>(residual.rows()) != rows_.size() ||
      static_cast<std::size_t>(residual.cols()) != cols_.size())
    throw std::invalid_argument("residual shape does not match the block labels");
  if (stats_.samples == 0) stats_.worst_point = p;
  ++stats_.samples;
  for (std::size_t i = 0; i < rows_.size(); ++i) {
    for (std::size_t j = 0; j < cols_.size(); ++j) {
      const double v = std::abs(residual(ix(i), ix(j)));
      sum_ += v;
      ++entries_;
      double& blk = stats_.per_block[static_cast<std::size_t>(rows_[i])][static_cast<std::size_t>(cols_[j])];
      blk = std::max(blk, v);
      if (v > stats_.max_abs || std::isnan(v)) {
        stats_.max_abs = std::isnan(v) ? std::numeric_limits<double>::infinity() : v;
        stats_.worst_point = p;
        stats_.worst_component = {i, j};
      }
    }
  }
}

ResidualStats StatsBuilder::result() const {
  ResidualStats s = stats_;
  s.mean_abs = entries_ == 0 ? 0.0 : std::min(sum_ / static_cast<double>(entries_), s.max_abs);
  return s;
}

double FitResult::mean() const {
  if (samples.empty()) return 0.0;
  double s = 0.0;
  for (double v : samples) s += v;
  return s / static_cast<double>(samples.size());
}

Eigen::MatrixXd rbs_tensor(const oracle::Geometry& geo, const PreparedVector& X, double lambda, double rho) {
  const Eigen::MatrixXd ric = geo.ricci();
  const double R = (geo.inverse().cwiseProduct(ric)).sum();
  return ric + 0.5 * geo.lie_derivative(X) - (lambda + rho * R) * geo.metric();
}

Eigen::MatrixXd gradient_rbs_tensor(const oracle::Geometry& geo, const PreparedScalar& u, double lambda, double rho) {
  const Eigen::MatrixXd ric = geo.ricci();
  const double R = (geo.inverse().cwiseProduct(ric)).sum();
  return ric + geo.hessian(u) - (lambda + rho * R) * geo.metric();
}

double trace_fit(const Eigen::MatrixXd& g_inverse, const Eigen::MatrixXd& T) {
  return g_inverse.cwiseProduct(T.transpose()).sum() / static_cast<double>(T.rows());
}

ResidualStats rbs_residual(const SequentialWarpedProduct& M, const VectorFieldSpec& X, double lambda, double rho,
                           const std::vector<Point>& grid) {
  const PreparedVector V(X.components);
  auto stats = StatsBuilder::for_chart(M.chart());
  for (const auto& p : grid) {
    oracle::Geometry geo(M.chart(), p);
    stats.add(p, rbs_tensor(geo, V, lambda, rho));
  }
  return stats.result();
}

ResidualStats gradient_rbs_residual(const SequentialWarpedProduct& M, const ScalarFieldSpec& u, double lambda,
                                    double rho, const std::vector<Point>& grid) {
  const PreparedScalar U(u);
  auto stats = StatsBuilder::for_chart(M.chart());
  for (const auto& p : grid) {
    oracle::Geometry geo(M.chart(), p);
    stats.add(p, gradient_rbs_tensor(geo, U, lambda, rho));
  }
  return stats.result();
}

ResidualStats residual(const SequentialWarpedProduct& M, const SolitonInstance& S, const std::vector<Point>& grid) {
  if (const auto* u = std::get_if<ScalarFieldSpec>(&S.potential))
    return gradient_rbs_residual(M, *u, S.lambda, S.rho, grid);
  return rbs_residual(M, std::get<VectorFieldSpec>(S.potential), S.lambda, S.rho, grid);
}

KillingResult killing_check(const Chart& chart, const PreparedVector& X, const std::vector<Point>& grid, double tol) {
  auto stats = StatsBuilder::for_chart(chart);
  for (const auto& p : grid) stats.add(p, oracle::lie_derivative(chart, X, p));
  KillingResult r;
  r.stats = stats.result();
  r.killing = r.stats.below(tol);
  return r;
}

namespace {

template <class Fn>
void for_each_lie(const SequentialWarpedProduct& M, const VectorFieldSpec& X, const std::vector<Point>& grid,
                  LieSource source, Fn&& fn) {
  if (source == LieSource::Oracle) {
    const PreparedVector V(X.components);
    for (const auto& p : grid) {
      oracle::Geometry geo(M.chart(), p);
      fn(p, geo.metric(), geo.inverse(), geo.lie_derivative(V));
    }
    return;
  }
  const closedform::StructuredField S(M, X);
  const closedform::Evaluator ev(M);
  for (const auto& p : grid) {
    const Eigen::MatrixXd g = M.assemble_metric(p);
    fn(p, g, Eigen::MatrixXd(g.inverse()), ev.lie(S, p));
  }
}

} // namespace

KillingResult killing_check(const SequentialWarpedProduct& M, const VectorFieldSpec& X,
                            const std::vector<Point>& grid, double tol, LieSource source) {
  auto stats = StatsBuilder::for_chart(M.chart());
  for_each_lie(M, X, grid, source,
               [&](const Point& p, const Eigen::MatrixXd&, const Eigen::MatrixXd&, const Eigen::MatrixXd& L) {
                 stats.add(p, L);
               });
  KillingResult r;
  r.stats = stats.result();
  r.killing = r.stats.below(tol);
  return r;
}

FitResult conformal_extract(const Chart& chart, const PreparedVector& X, const std::vector<Point>& grid) {
  auto stats = StatsBuilder::for_chart(chart);
  std::vector<double> phi;
  for (const auto& p : grid) {
    oracle::Geometry geo(chart, p);
    const Eigen::MatrixXd L = geo.lie_derivative(X);
    const double v = trace_fit(geo.inverse(), L) / 2.0;
    phi.push_back(v);
    stats.add(p, L - 2.0 * v * geo.metric());
  }
  return finish(std::move(phi), stats);
}

FitResult conformal_extract(const SequentialWarpedProduct& M, const VectorFieldSpec& X,
                            const std::vector<Point>& grid, LieSource source) {
  auto stats = StatsBuilder::for_chart(M.chart());
  std::vector<double> phi;
  for_each_lie(M, X, grid, source,
               [&](const Point& p, const Eigen::MatrixXd& g, const Eigen::MatrixXd& ginv, const Eigen::MatrixXd& L) {
                 const double v = trace_fit(ginv, L) / 2.0;
                 phi.push_back(v);
                 stats.add(p, L - 2.0 * v * g);
               });
  return finish(std::move(phi), stats);
}

FitResult einstein_extract(const Chart& chart, const std::vector<Point>& grid) {
  auto stats = StatsBuilder::for_chart(chart);
  std::vector<double> mu;
  for (const auto& p : grid) {
    oracle::Geometry geo(chart, p);
    const Eigen::MatrixXd ric = geo.ricci();
    const double v = trace_fit(geo.inverse(), ric);
    mu.push_back(v);
    stats.add(p, ric - v * geo.metric());
  }
  return finish(std::move(mu), stats);
}

FitResult proportional_hessian_extract(const SequentialWarpedProduct& M, HessianTarget target,
                                       const std::vector<Point>& grid) {
  const Chart& chart = target == HessianTarget::FirstFactor ? M.factor_chart(0) : M.base_chart();
  const PreparedScalar s(target == HessianTarget::FirstFactor ? M.f() : M.h());
  auto stats = StatsBuilder::for_chart(chart);
  std::vector<double> coeff;
  for (const auto& p : grid) {
    oracle::Geometry geo(chart, p);
    const Eigen::MatrixXd H = geo.hessian(s);
    const double v = trace_fit(geo.inverse(), H);
    coeff.push_back(v);
    stats.add(p, H - v * geo.metric());
  }
  return finish(std::move(coeff), stats);
}

VectorFieldSpec gradient_field(const SequentialWarpedProduct& M, const ScalarFieldSpec& u) {
  const Chart& chart = M.chart();
  VectorFieldSpec X;
  X.components.assign(M.dim(), Expression());
  for (std::size_t b = 0; b < 3; ++b) {
    const Factor& F = M.factor(b);
    const std::size_t n = F.dim();
    std::vector<std::vector<Expression>> block(n, std::vector<Expression>(n));
    for (std::size_t r = 0; r < n; ++r)
      for (std::size_t c = 0; c < n; ++c) block[r][c] = chart.metric(F.offset + r, F.offset + c);
    const auto inv = inverse(block);
    for (std::size_t r = 0; r < n; ++r) {
      Expression comp;
      for (std::size_t c = 0; c < n; ++c) {
        const Expression du = u.differentiate(F.offset + c);
        if (du.is_literal(0.0)) continue;
        Expression term = inv[r][c] * du;
        comp = comp.empty() ? term : comp + term;
      }
      X.components[F.offset + r] = comp.empty() ? Expression::constant(0.0, M.variable_table()) : comp;
    }
  }
  return X;
}

} // namespace swp::soliton
