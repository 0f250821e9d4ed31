#include "swp/chart.hpp"

#include <stdexcept>
#include <utility>

namespace swp {

Chart::Chart(std::string name, std::vector<std::size_t> coords, std::vector<int> blocks, ExprMatrix metric)
    : name_(std::move(name)), coords_(std::move(coords)), blocks_(std::move(blocks)),
      metric_(std::move(metric)) {
  const std::size_t m = coords_.size();
  if (metric_.rows() != m || metric_.cols() != m || blocks_.size() != m) {
    throw std::invalid_argument("chart '" + name_ + "': metric shape does not match coordinates");
  }
  d_.resize(m * m * m);
  dd_.resize(m * m * m * m);
  for (std::size_t a = 0; a < m; ++a) {
    for (std::size_t b = a; b < m; ++b) {
      for (std::size_t k = 0; k < m; ++k) {
        Expression dk = metric_(a, b).differentiate(coords_[k]);
        for (std::size_t l = k; l < m; ++l) {
          Expression dkl = dk.differentiate(coords_[l]);
          for (auto [i, j] : {std::pair{a, b}, std::pair{b, a}}) {
            dd_[((k * m + l) * m + i) * m + j] = dkl;
            dd_[((l * m + k) * m + i) * m + j] = dkl;
          }
        }
        d_[(k * m + a) * m + b] = dk;
        d_[(k * m + b) * m + a] = dk;
      }
    }
  }
}

const Expression& Chart::d_metric(std::size_t k, std::size_t a, std::size_t b) const {
  const std::size_t m = dim();
  return d_[(k * m + a) * m + b];
}

const Expression& Chart::dd_metric(std::size_t k, std::size_t l, std::size_t a, std::size_t b) const {
  const std::size_t m = dim();
  return dd_[((k * m + l) * m + a) * m + b];
}

Eigen::MatrixXd Chart::metric_at(const Point& p) const {
  const auto m = static_cast<Eigen::Index>(dim());
  Eigen::MatrixXd g(m, m);
  for (Eigen::Index a = 0; a < m; ++a) {
    for (Eigen::Index b = 0; b < m; ++b) {
      g(a, b) = metric_(static_cast<std::size_t>(a), static_cast<std::size_t>(b)).eval(p.values);
    }
  }
  return g;
}

PreparedScalar::PreparedScalar(Expression e) : expr_(std::move(e)), n_(expr_.variables().size()) {
  d_.reserve(n_);
  dd_.resize(n_ * n_);
  for (std::size_t i = 0; i < n_; ++i) d_.push_back(expr_.differentiate(i));
  for (std::size_t i = 0; i < n_; ++i) {
    for (std::size_t j = i; j < n_; ++j) {
      Expression e2 = d_[i].differentiate(j);
      dd_[i * n_ + j] = e2;
      dd_[j * n_ + i] = e2;
    }
  }
}

double PreparedScalar::dd(std::size_t i, std::size_t j, const Point& p) const {
  return dd_[i * n_ + j].eval(p.values);
}

PreparedVector::PreparedVector(std::vector<Expression> components) : comps_(std::move(components)) {
  if (comps_.empty()) return;
  n_ = comps_.front().variables().size();
  d_.reserve(comps_.size() * n_);
  for (const auto& c : comps_) {
    for (std::size_t i = 0; i < n_; ++i) d_.push_back(c.differentiate(i));
  }
}

Eigen::VectorXd PreparedVector::values(const Point& p) const {
  Eigen::VectorXd v(static_cast<Eigen::Index>(comps_.size()));
  for (std::size_t a = 0; a < comps_.size(); ++a) v(static_cast<Eigen::Index>(a)) = comps_[a].eval(p.values);
  return v;
}

double PreparedVector::d(std::size_t a, std::size_t i, const Point& p) const {
  return d_[a * n_ + i].eval(p.values);
}

} // namespace swp
