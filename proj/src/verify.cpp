#include "swp/verify.hpp"

#include "swp/oracle.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <limits>
#include <memory>

namespace swp::verify {

using closedform::Identity;
using soliton::FitResult;
using soliton::ResidualStats;
using soliton::StatsBuilder;

namespace {

using Idx = Eigen::Index;

Idx ix(std::size_t i) { return static_cast<Idx>(i); }

std::string kind_tag(ProductKind k) {
  switch (k) {
  case ProductKind::Generic: return "generic";
  case ProductKind::StandardStatic: return "static";
  case ProductKind::Grw: return "grw";
  }
  return "?";
}

std::vector<int> blocks_of(const Chart& c) {
  std::vector<int> b(c.dim());
  for (std::size_t a = 0; a < c.dim(); ++a) b[a] = c.block(a);
  return b;
}

Eigen::MatrixXd sub(const Eigen::MatrixXd& m, const SequentialWarpedProduct& M, int i, int j) {
  const auto& Fi = M.factor(static_cast<std::size_t>(i));
  const auto& Fj = M.factor(static_cast<std::size_t>(j));
  return m.block(ix(Fi.offset), ix(Fj.offset), ix(Fi.dim()), ix(Fj.dim()));
}

/// Oracle-versus-formula accumulator that also remembers both sides at the
/// worst entry.
class Comparison {
public:
  Comparison(std::vector<int> rows, std::vector<int> cols) : stats_(std::move(rows), std::move(cols)) {}

  void add(const Point& p, const Eigen::MatrixXd& oracle, const Eigen::MatrixXd& closed) {
    const Eigen::MatrixXd d = oracle - closed;
    stats_.add(p, d);
    for (Idx r = 0; r < d.rows(); ++r) {
      for (Idx c = 0; c < d.cols(); ++c) {
        const double v = std::abs(d(r, c));
        if (!seen_ || v > worst_) {
          seen_ = true;
          worst_ = v;
          oracle_ = oracle(r, c);
          closed_ = closed(r, c);
          row_ = static_cast<std::size_t>(r);
          col_ = static_cast<std::size_t>(c);
          point_ = p;
        }
      }
    }
  }

  ResidualStats stats() const { return stats_.result(); }
  double oracle() const { return oracle_; }
  double closed() const { return closed_; }
  std::size_t row() const { return row_; }
  std::size_t col() const { return col_; }
  const Point& point() const { return point_; }

private:
  StatsBuilder stats_;
  bool seen_ = false;
  double worst_ = 0.0;
  double oracle_ = 0.0;
  double closed_ = 0.0;
  std::size_t row_ = 0;
  std::size_t col_ = 0;
  Point point_;
};

void finish_identity(CheckRow& row, const Comparison& cmp, std::string component, std::vector<LedgerEntry>& ledger) {
  row.stats = cmp.stats();
  row.verdict = row.stats->max_abs < row.tolerance ? Verdict::Pass : Verdict::Flag;
  row.oracle_value = cmp.oracle();
  row.closed_value = cmp.closed();
  row.component = std::move(component);
  if (row.verdict == Verdict::Flag) {
    LedgerEntry e;
    e.identity = row.id;
    e.component = row.component;
    e.point = cmp.point();
    e.oracle = cmp.oracle();
    e.closed = cmp.closed();
    if (cmp.oracle() != 0.0) e.ratio = cmp.closed() / cmp.oracle();
    ledger.push_back(std::move(e));
  }
}

void sort_ledger(std::vector<LedgerEntry>& ledger) {
  std::stable_sort(ledger.begin(), ledger.end(), [](const LedgerEntry& a, const LedgerEntry& b) {
    return std::abs(a.oracle - a.closed) > std::abs(b.oracle - b.closed);
  });
}

// ---------------------------------------------------------------------------
// Theorem runner

struct Outcome {
  bool holds = false;
  std::optional<ResidualStats> stats;
  std::vector<ConstantSummary> constants;
  std::string note;
};

using PointFn = std::function<double(std::size_t)>;

struct CaseInfo {
  std::string id;
  ProductKind kind;
  std::vector<std::string> items;
  bool gradient;  // needs a scalar potential
  std::string statement;
};

const std::vector<CaseInfo>& registry() {
  static const std::vector<CaseInfo> cases{
      {"T3.1", ProductKind::Generic, {"i", "ii", "iii"}, false,
       "RBS with X = X1 + X2 + X3 induces factor solitons: (i) on M1 with lambda1 + rho1 R1 = lambda + rho R + "
       "(n2/f) sigma + (n3/h) psi; (ii) M2 Einstein when X2 Killing and Hessbar h = psi g; (iii) on M3 with h^2 X3 "
       "and lambda3 + rho3 R3 = lambda h^2 + rho R h^2 + h# - h (X1+X2)(h)"},
      {"T3.2", ProductKind::Generic, {"i", "ii", "iii"}, false,
       "RBS with X Killing: (i) M1 Einstein when Hess f = sigma g and Hessbar h = psi g; (ii) M2 Einstein when "
       "Hessbar h = psi g; (iii) M3 Einstein"},
      {"T3.3", ProductKind::Generic, {"i", "ii", "iii"}, false,
       "RBS with Hess f = sigma g and Hessbar h = psi g: every factor is Einstein when X = Xi is Killing on Mi"},
      {"T3.4", ProductKind::Generic, {"i", "ii", "iii"}, false,
       "RBS with X conformal (L_X g = 2 alpha g, alpha constant): factors Einstein under the same Hessian "
       "conditions as T3.2"},
      {"T3.5", ProductKind::Generic, {"i", "ii", "iii"}, false,
       "M Einstein when (i) X = X3 Killing on M3; (ii) X1 Killing, X2 and X3 conformal with factors "
       "-2 X1(ln f) and -2 (X1+X2)(ln h); (iii) X = X2 + X3 both Killing and X2(h) = 0"},
      {"T3.6", ProductKind::Generic, {"i", "ii", "iii"}, false,
       "RBS: Xi conformal on Mi when Mi is Einstein, with (i) Hess f = sigma g and Hessbar h = psi g, "
       "(ii) Hessbar h = psi g, (iii) no extra condition"},
      {"T3.7", ProductKind::Generic, {"i", "ii"}, true,
       "gradient RBS X = grad u: (i) M1 gradient soliton with phi1 = u - n2 ln f - n3 ln h1, lambda1 + rho1 R1 = "
       "lambda + rho R; (ii) M3 gradient soliton with phi3 = u, lambda3 + rho3 R3 = lambda h^2 + rho R h^2 + h#"},
      {"S4.1", ProductKind::StandardStatic, {"i", "ii", "iii"}, false,
       "static RBS with X = X1 + X2 + w dt: (i) M1 soliton with lambda1 + rho1 R1 = lambda + rho R + (n2/f) sigma "
       "+ (1/h) psi; (ii) M2 Einstein when X2 Killing and Hessbar h = psi g; (iii) -Lap h/h + dw/dt + "
       "(X1+X2)(h)/h = lambda + rho R"},
      {"S4.2", ProductKind::StandardStatic, {}, false,
       "static RBS with X conformal, Hess f = sigma g, Hessbar h = psi g: M1, M2 Einstein with mu1 = -Lap h/h + "
       "(n2/f) sigma + psi/h and mu2 = -(Lap h/h) f^2 + f# + psi f^2/h"},
      {"S4.3", ProductKind::StandardStatic, {"i", "ii", "iii"}, false,
       "static M Einstein when (i) X = w dt Killing on I; (ii) X1 Killing, X2 and w dt conformal with factors "
       "-2 X1(ln f) and -2 (X1+X2)(ln h); (iii) X = X2 + w dt both Killing and X2(h) = 0"},
      {"S4.4", ProductKind::StandardStatic, {}, false,
       "static RBS with Hess f = sigma g, Hessbar h = psi g, M1 and M2 Einstein: X1, X2 conformal"},
      {"G4.1", ProductKind::Grw, {"i", "ii", "iii"}, false,
       "grw RBS with X = w dt + X2 + X3: (i) -(n2/f) f'' - (n3/h) h_tt + dw/dt = lambda + rho R; (ii) M2 soliton "
       "with f^2 X2 and lambda2 + rho2 R2 = lambda f^2 + rho R f^2 + f<> - w f f' + (n3/h) psi when Hessbar h = "
       "psi g; (iii) M3 soliton with h^2 X3 and lambda3 + rho3 R3 = lambda h^2 + rho R h^2 + h# - w h h_t - w h "
       "X2(h)"},
      {"G4.2", ProductKind::Grw, {}, false,
       "grw RBS with X conformal and Hessbar h = psi g: M2, M3 Einstein with mu = (-(n2/f) f'' - (n3/h) h_tt) f^2 "
       "+ f<> + (n3/h) psi and (-(n2/f) f'' - (n3/h) h_tt) h^2 + h#"},
      {"G4.3", ProductKind::Grw, {}, true,
       "grw gradient RBS with u = integral of f dt: Hess u = f' g and M Einstein with factor lambda + rho R - f'"},
  };
  return cases;
}

std::pair<const CaseInfo*, std::string> lookup(const std::string& case_id) {
  std::string base = case_id;
  std::string item;
  if (const auto open = case_id.find('('); open != std::string::npos) {
    if (case_id.back() != ')') throw VerifyError("malformed theorem id '" + case_id + "'");
    base = case_id.substr(0, open);
    item = case_id.substr(open + 1, case_id.size() - open - 2);
  }
  for (const auto& c : registry()) {
    if (c.id != base) continue;
    if (!item.empty() && std::find(c.items.begin(), c.items.end(), item) == c.items.end())
      throw VerifyError("theorem " + base + " has no item '" + item + "'");
    return {&c, item};
  }
  throw VerifyError("unknown theorem id '" + case_id + "'");
}

class Runner {
public:
  Runner(const CaseInfo& info, std::string item, const SequentialWarpedProduct& M, const soliton::SolitonInstance& S,
         const std::vector<Point>& grid, double tol, VerdictReport& report)
      : info_(info), item_(std::move(item)), M_(M), S_(S), grid_(grid), tol_(tol), rep_(report), ev_(M) {
    n1_ = static_cast<double>(M.factor(0).dim());
    n2_ = static_cast<double>(M.factor(1).dim());
    n3_ = static_cast<double>(M.factor(2).dim());
    t_ = M.kind() == ProductKind::Grw ? 0 : (M.kind() == ProductKind::StandardStatic ? M.factor(2).offset : 0);
    for (const auto& p : grid) {
      oracle::Geometry geo(M.chart(), p);
      R_.push_back(geo.scalar_curvature());
      inv_.push_back(ev_.invariants(p));
    }
  }

  bool wants(const std::string& item) const { return item_.empty() || item_ == item; }
  std::size_t size() const { return grid_.size(); }
  const Point& point(std::size_t k) const { return grid_[k]; }
  double tol() const { return tol_; }
  double n2() const { return n2_; }
  double n3() const { return n3_; }
  double R(std::size_t k) const { return R_[k]; }
  double lam() const { return S_.lambda; }
  double rho() const { return S_.rho; }
  double base(std::size_t k) const { return S_.lambda + S_.rho * R_[k]; }
  const closedform::WarpInvariants& inv(std::size_t k) const { return inv_[k]; }
  const SequentialWarpedProduct& M() const { return M_; }

  // --- row plumbing -------------------------------------------------------

  bool hypothesis(const std::string& key, const std::string& name, const std::string& anchor,
                  const std::string& operation, std::vector<bool> gates, const std::function<Outcome()>& fn) {
    if (const auto it = memo_.find(key); it != memo_.end()) return it->second;
    CheckRow row = make_row(info_.id + ".hyp." + key, name, anchor, operation, CheckRole::Hypothesis);
    bool holds = false;
    if (std::all_of(gates.begin(), gates.end(), [](bool b) { return b; })) {
      Outcome o = fn();
      holds = o.holds;
      fill(row, std::move(o));
    } else {
      row.evaluated = false;
      row.note = "not evaluated: a prerequisite hypothesis failed";
    }
    row.verdict = holds ? Verdict::Pass : Verdict::Skip;
    rep_.rows.push_back(std::move(row));
    memo_[key] = holds;
    return holds;
  }

  void conclusion(const std::string& item, const std::string& key, const std::string& name,
                  const std::string& anchor, const std::string& operation, std::vector<bool> gates,
                  const std::function<Outcome()>& fn) {
    CheckRow row = make_row(prefix(item) + ".concl." + key, name, anchor, operation, CheckRole::Conclusion);
    if (std::all_of(gates.begin(), gates.end(), [](bool b) { return b; })) {
      Outcome o = fn();
      row.verdict = o.holds ? Verdict::Pass : Verdict::Flag;
      fill(row, std::move(o));
    } else {
      row.verdict = Verdict::Skip;
      row.evaluated = false;
      row.note = "hypothesis failed";
    }
    rep_.rows.push_back(std::move(row));
  }

  CheckRow make_row(std::string id, std::string name, std::string anchor, std::string operation,
                    CheckRole role) const {
    CheckRow row;
    row.id = std::move(id);
    row.name = std::move(name);
    row.anchor = std::move(anchor);
    row.operation = std::move(operation);
    row.role = role;
    row.tolerance = tol_;
    return row;
  }

  std::string prefix(const std::string& item) const { return item.empty() ? info_.id : info_.id + "(" + item + ")"; }

  VerdictReport& report() { return rep_; }

  // --- shared data --------------------------------------------------------

  /// Structured vector potential; for gradient potentials, grad u.
  const closedform::StructuredField* field() {
    if (!field_tried_) {
      field_tried_ = true;
      VectorFieldSpec X;
      if (const auto* u = std::get_if<ScalarFieldSpec>(&S_.potential))
        X = soliton::gradient_field(M_, *u);
      else
        X = std::get<VectorFieldSpec>(S_.potential);
      try {
        field_.emplace(M_, X);
      } catch (const closedform::FieldRejected& e) {
        field_error_ = e.what();
      }
    }
    return field_ ? &*field_ : nullptr;
  }
  const std::string& field_error() const { return field_error_; }

  /// Vector field applied to f or h, restricted to the selected blocks.
  double applied(std::array<bool, 3> which, bool to_h, std::size_t k) {
    return field()->apply(which, to_h ? ev_.h() : ev_.f(), grid_[k]);
  }

  /// Time component w of X and dw/dt (space-time kinds).
  double w(std::size_t k) { return field()->full().values(grid_[k])(ix(t_)); }
  double w_t(std::size_t k) { return field()->full().d(t_, t_, grid_[k]); }

  const FitResult& sigma() {
    if (!sigma_) sigma_ = soliton::proportional_hessian_extract(M_, soliton::HessianTarget::FirstFactor, grid_);
    return *sigma_;
  }
  const FitResult& psi() {
    if (!psi_) psi_ = soliton::proportional_hessian_extract(M_, soliton::HessianTarget::Base, grid_);
    return *psi_;
  }
  const FitResult& factor_einstein(int i) {
    auto& slot = einstein_[static_cast<std::size_t>(i)];
    if (!slot) slot = soliton::einstein_extract(M_.factor_chart(static_cast<std::size_t>(i)), grid_);
    return *slot;
  }
  const FitResult& conformal_full() {
    if (!conformal_) {
      VectorFieldSpec X;
      for (std::size_t a = 0; a < M_.dim(); ++a) X.components.push_back(field()->full().component(a));
      conformal_ = soliton::conformal_extract(M_, X, grid_);
    }
    return *conformal_;
  }

  std::vector<double> sample(const PointFn& fn) const {
    std::vector<double> v;
    for (std::size_t k = 0; k < grid_.size(); ++k) v.push_back(fn(k));
    return v;
  }

private:
  void fill(CheckRow& row, Outcome o) const {
    row.stats = std::move(o.stats);
    row.constants = std::move(o.constants);
    if (!o.note.empty()) row.note = std::move(o.note);
  }

  const CaseInfo& info_;
  std::string item_;
  const SequentialWarpedProduct& M_;
  const soliton::SolitonInstance& S_;
  const std::vector<Point>& grid_;
  double tol_;
  VerdictReport& rep_;
  closedform::Evaluator ev_;
  double n1_ = 0, n2_ = 0, n3_ = 0;
  std::size_t t_ = 0;
  std::vector<double> R_;
  std::vector<closedform::WarpInvariants> inv_;
  std::map<std::string, bool> memo_;
  bool field_tried_ = false;
  std::optional<closedform::StructuredField> field_;
  std::string field_error_;
  std::optional<FitResult> sigma_, psi_, conformal_;
  std::array<std::optional<FitResult>, 3> einstein_;
};

std::vector<Point> grid_of(const Runner& r) {
  std::vector<Point> g;
  for (std::size_t k = 0; k < r.size(); ++k) g.push_back(r.point(k));
  return g;
}

// --- outcome builders ------------------------------------------------------

Outcome tensor_outcome(const ResidualStats& s, double tol) {
  Outcome o;
  o.stats = s;
  o.holds = s.below(tol);
  return o;
}

Outcome fit_outcome(const FitResult& fit, const std::string& name, double tol, bool need_constant) {
  Outcome o;
  o.stats = fit.residual;
  o.constants.push_back(summarize(name, fit.samples));
  o.holds = fit.proportional(tol) && (!need_constant || fit.constant(tol));
  if (fit.proportional(tol) && need_constant && !fit.constant(tol)) o.note = "proportional but the factor varies";
  return o;
}

/// Pointwise |stated - fitted| for a derived constant.
Outcome stated_outcome(Runner& r, const std::string& name, int block, const std::vector<double>& stated,
                       const std::vector<double>& fitted) {
  auto sb = StatsBuilder::scalar(block);
  for (std::size_t k = 0; k < r.size(); ++k) {
    Eigen::MatrixXd d(1, 1);
    d(0, 0) = stated[k] - fitted[k];
    sb.add(r.point(k), d);
  }
  Outcome o = tensor_outcome(sb.result(), r.tol());
  o.constants.push_back(summarize(name + " (stated)", stated));
  o.constants.push_back(summarize(name + " (fitted)", fitted));
  return o;
}

Outcome scalar_identity(Runner& r, int block, const std::string& lhs_name, const PointFn& lhs,
                        const std::string& rhs_name, const PointFn& rhs) {
  const auto L = r.sample(lhs);
  const auto Rv = r.sample(rhs);
  auto sb = StatsBuilder::scalar(block);
  for (std::size_t k = 0; k < r.size(); ++k) {
    Eigen::MatrixXd d(1, 1);
    d(0, 0) = L[k] - Rv[k];
    sb.add(r.point(k), d);
  }
  Outcome o = tensor_outcome(sb.result(), r.tol());
  o.constants.push_back(summarize(lhs_name, L));
  o.constants.push_back(summarize(rhs_name, Rv));
  return o;
}

/// Ric^i + 1/2 scale L^i_{Xi} g_i - c g_i on factor i.
Outcome factor_rbs(Runner& r, int i, const PointFn& scale, const PointFn& combo) {
  const Chart& chart = r.M().factor_chart(static_cast<std::size_t>(i));
  const PreparedVector& Xi = r.field()->factor(static_cast<std::size_t>(i));
  auto sb = StatsBuilder::for_chart(chart);
  std::vector<double> stated, fitted;
  for (std::size_t k = 0; k < r.size(); ++k) {
    oracle::Geometry geo(chart, r.point(k));
    const Eigen::MatrixXd T = geo.ricci() + 0.5 * scale(k) * geo.lie_derivative(Xi);
    const double c = combo(k);
    stated.push_back(c);
    fitted.push_back(soliton::trace_fit(geo.inverse(), T));
    sb.add(r.point(k), T - c * geo.metric());
  }
  Outcome o = tensor_outcome(sb.result(), r.tol());
  o.constants.push_back(summarize("combination (stated)", stated));
  o.constants.push_back(summarize("combination (fitted)", fitted));
  return o;
}

/// Ric^i + Hess^i phi - c g_i on factor i.
Outcome factor_gradient_rbs(Runner& r, int i, const Expression& phi, const PointFn& combo) {
  const Chart& chart = r.M().factor_chart(static_cast<std::size_t>(i));
  const PreparedScalar P(phi);
  auto sb = StatsBuilder::for_chart(chart);
  std::vector<double> stated, fitted;
  for (std::size_t k = 0; k < r.size(); ++k) {
    oracle::Geometry geo(chart, r.point(k));
    const Eigen::MatrixXd T = geo.ricci() + geo.hessian(P);
    const double c = combo(k);
    stated.push_back(c);
    fitted.push_back(soliton::trace_fit(geo.inverse(), T));
    sb.add(r.point(k), T - c * geo.metric());
  }
  Outcome o = tensor_outcome(sb.result(), r.tol());
  o.constants.push_back(summarize("combination (stated)", stated));
  o.constants.push_back(summarize("combination (fitted)", fitted));
  return o;
}

/// L^i_{Xi} g_i - c g_i on factor i.
Outcome factor_conformal_with(Runner& r, int i, const PointFn& c) {
  const Chart& chart = r.M().factor_chart(static_cast<std::size_t>(i));
  const PreparedVector& Xi = r.field()->factor(static_cast<std::size_t>(i));
  auto sb = StatsBuilder::for_chart(chart);
  for (std::size_t k = 0; k < r.size(); ++k) {
    oracle::Geometry geo(chart, r.point(k));
    sb.add(r.point(k), geo.lie_derivative(Xi) - c(k) * geo.metric());
  }
  Outcome o = tensor_outcome(sb.result(), r.tol());
  o.constants.push_back(summarize("factor (stated)", r.sample(c)));
  return o;
}

/// Components of X outside the allowed blocks.
Outcome only_blocks(Runner& r, std::array<bool, 3> allowed) {
  const Chart& chart = r.M().chart();
  const auto& X = r.field()->full();
  StatsBuilder sb(blocks_of(chart), {0});
  for (std::size_t k = 0; k < r.size(); ++k) {
    Eigen::VectorXd v = X.values(r.point(k));
    for (std::size_t a = 0; a < chart.dim(); ++a)
      if (allowed[static_cast<std::size_t>(chart.block(a))]) v(ix(a)) = 0.0;
    sb.add(r.point(k), v);
  }
  return tensor_outcome(sb.result(), r.tol());
}

const std::array<const char*, 3> kRoman{"i", "ii", "iii"};

std::string factor_name(const SequentialWarpedProduct& M, int i) {
  if (M.kind() == ProductKind::StandardStatic && i == 2) return "I";
  if (M.kind() == ProductKind::Grw && i == 0) return "I";
  return "M" + std::to_string(i + 1);
}

// --- registry cases --------------------------------------------------------

struct Common {
  bool structured = false;
  bool rbs = false;
};

Common common_vector(Runner& r) {
  Common c;
  c.structured = r.hypothesis("structured", "X splits into factor blocks", "X = X1 + X2 + X3, Xi on Mi",
                              "closedform::StructuredField", {}, [&] {
                                Outcome o;
                                o.holds = r.field() != nullptr;
                                if (!o.holds) o.note = r.field_error();
                                return o;
                              });
  c.rbs = r.hypothesis("rbs", "(M, g, X, lambda, rho) is a soliton", "Ric + 1/2 L_X g = (lambda + rho R) g",
                       "soliton::rbs_residual", {c.structured}, [&] {
                         VectorFieldSpec X;
                         for (std::size_t a = 0; a < r.M().dim(); ++a) X.components.push_back(r.field()->full().component(a));
                         return tensor_outcome(soliton::rbs_residual(r.M(), X, r.lam(), r.rho(), grid_of(r)), r.tol());
                       });
  return c;
}

bool hess_f(Runner& r, std::vector<bool> gates) {
  return r.hypothesis("hess_f", "Hess f = sigma g1 on M1", "Hess1 f = sigma g1",
                      "soliton::proportional_hessian_extract(M1, f)", std::move(gates),
                      [&] { return fit_outcome(r.sigma(), "sigma", r.tol(), false); });
}

bool hess_h(Runner& r, std::vector<bool> gates) {
  return r.hypothesis("hess_h", "Hessbar h = psi gbar on M1 x M2", "Hessbar h = psi gbar",
                      "soliton::proportional_hessian_extract(Mbar, h)", std::move(gates),
                      [&] { return fit_outcome(r.psi(), "psi", r.tol(), false); });
}

bool factor_killing(Runner& r, int i, std::vector<bool> gates) {
  const std::string fn = factor_name(r.M(), i);
  return r.hypothesis("killing_" + fn, "X" + std::to_string(i + 1) + " Killing on " + fn,
                      "L_Xi gi = 0 on " + fn, "soliton::killing_check(" + fn + ")", std::move(gates), [&, i] {
                        const auto k = soliton::killing_check(r.M().factor_chart(static_cast<std::size_t>(i)),
                                                              r.field()->factor(static_cast<std::size_t>(i)),
                                                              grid_of(r), r.tol());
                        return tensor_outcome(k.stats, r.tol());
                      });
}

bool factor_einstein_hyp(Runner& r, int i, std::vector<bool> gates) {
  const std::string fn = factor_name(r.M(), i);
  return r.hypothesis("einstein_" + fn, fn + " Einstein", "Ric_" + fn + " = mu g, mu constant",
                      "soliton::einstein_extract(" + fn + ")", std::move(gates),
                      [&, i] { return fit_outcome(r.factor_einstein(i), "mu", r.tol(), true); });
}

void factor_einstein_concl(Runner& r, const std::string& item, int i, std::vector<bool> gates) {
  const std::string fn = factor_name(r.M(), i);
  r.conclusion(item, "einstein_" + fn, fn + " is Einstein", "Ric_" + fn + " = mu g, mu constant",
               "soliton::einstein_extract(" + fn + ")", std::move(gates),
               [&, i] { return fit_outcome(r.factor_einstein(i), "mu", r.tol(), true); });
}

void stated_mu(Runner& r, const std::string& item, int i, const std::string& formula, std::vector<bool> gates,
               const PointFn& stated) {
  const std::string fn = factor_name(r.M(), i);
  r.conclusion(item, "mu_" + fn, "Einstein factor of " + fn + " matches the stated value", formula,
               "soliton::einstein_extract(" + fn + ") vs stated", std::move(gates), [&, i] {
                 return stated_outcome(r, "mu", i, r.sample(stated), r.factor_einstein(i).samples);
               });
}

void full_einstein(Runner& r, const std::string& item, std::vector<bool> gates) {
  r.conclusion(item, "einstein_M", "M is Einstein", "Ric = mu g, mu constant", "soliton::einstein_extract(M)",
               std::move(gates), [&] {
                 return fit_outcome(soliton::einstein_extract(r.M().chart(), grid_of(r)), "mu", r.tol(), true);
               });
}

void factor_conformal_concl(Runner& r, const std::string& item, int i, const std::string& formula,
                            std::vector<bool> gates, const PointFn& stated) {
  const std::string fn = factor_name(r.M(), i);
  const std::string Xi = "X" + std::to_string(i + 1);
  auto fit = std::make_shared<std::optional<FitResult>>();
  auto get = [&r, i, fit]() -> const FitResult& {
    if (!*fit)
      *fit = soliton::conformal_extract(r.M().factor_chart(static_cast<std::size_t>(i)),
                                        r.field()->factor(static_cast<std::size_t>(i)), grid_of(r));
    return **fit;
  };
  r.conclusion(item, "conformal_" + Xi, Xi + " is conformal on " + fn, "L_" + Xi + " g = c g",
               "soliton::conformal_extract(" + fn + ")", gates, [&] {
                 Outcome o = fit_outcome(get(), "phi", r.tol(), false);
                 return o;
               });
  if (stated)
    r.conclusion(item, "factor_" + Xi, "conformal factor of " + Xi + " matches the stated value", formula,
                 "soliton::conformal_extract(" + fn + ") vs stated", std::move(gates), [&] {
                   std::vector<double> fitted;
                   for (double v : get().samples) fitted.push_back(2.0 * v);
                   return stated_outcome(r, "c", i, r.sample(stated), fitted);
                 });
}

std::array<bool, 3> mask(bool a, bool b, bool c) { return {a, b, c}; }

void run_T31(Runner& r, double h_weight) {
  const auto c = common_vector(r);
  const bool stat = r.M().kind() == ProductKind::StandardStatic;
  if (r.wants("i")) {
    const bool hf = hess_f(r, {c.structured});
    const bool hh = hess_h(r, {c.structured});
    r.conclusion("i", "soliton_M1", "(M1, g1, X1) is a soliton with the stated combination",
                 stat ? "Ric1 + 1/2 L1 = (lambda + rho R + (n2/f) sigma + (1/h) psi) g1"
                      : "Ric1 + 1/2 L1 = (lambda + rho R + (n2/f) sigma + (n3/h) psi) g1",
                 "oracle on M1", {c.rbs, hf, hh}, [&r, h_weight] {
                   return factor_rbs(
                       r, 0, [](std::size_t) { return 1.0; },
                       [&r, h_weight](std::size_t k) {
                         return r.base(k) + r.n2() / r.inv(k).f * r.sigma().samples[k] +
                                h_weight / r.inv(k).h * r.psi().samples[k];
                       });
                 });
  }
  if (r.wants("ii")) {
    const bool kill = factor_killing(r, 1, {c.structured});
    const bool hh = hess_h(r, {c.structured});
    factor_einstein_concl(r, "ii", 1, {c.rbs, kill, hh});
    if (!stat)
      stated_mu(r, "ii", 1, "mu2 = lambda f^2 + rho R f^2 + f# + (n3/h) psi f^2 - f X1(f)", {c.rbs, kill, hh},
                [&r](std::size_t k) {
                  const auto& w = r.inv(k);
                  return r.base(k) * w.f * w.f + w.f_sharp + r.n3() / w.h * r.psi().samples[k] * w.f * w.f -
                         w.f * r.applied(mask(true, false, false), false, k);
                });
  }
  if (r.wants("iii")) {
    if (stat) {
      r.conclusion("iii", "time_identity", "time-block scalar identity",
                   "-Lap h/h + dw/dt + (X1+X2)(h)/h = lambda + rho R", "closedform invariants + oracle R",
                   {c.rbs}, [&r] {
                     return scalar_identity(
                         r, 2, "lhs",
                         [&r](std::size_t k) {
                           const auto& w = r.inv(k);
                           return -w.lapbar_h / w.h + r.w_t(k) + r.applied(mask(true, true, false), true, k) / w.h;
                         },
                         "lambda + rho R", [&r](std::size_t k) { return r.base(k); });
                   });
    } else {
      r.conclusion("iii", "soliton_M3", "(M3, g3, h^2 X3) is a soliton with the stated combination",
                   "Ric3 + 1/2 h^2 L3 = (lambda h^2 + rho R h^2 + h# - h (X1+X2)(h)) g3", "oracle on M3", {c.rbs},
                   [&r] {
                     return factor_rbs(
                         r, 2, [&r](std::size_t k) { return r.inv(k).h * r.inv(k).h; },
                         [&r](std::size_t k) {
                           const auto& w = r.inv(k);
                           return r.base(k) * w.h * w.h + w.h_sharp -
                                  w.h * r.applied(mask(true, true, false), true, k);
                         });
                   });
    }
  }
}

// T3.2 (alpha = 0, Killing) and T3.4 (alpha = conformal factor).
void run_T32_T34(Runner& r, bool conformal) {
  const auto c = common_vector(r);
  bool field_hyp;
  if (conformal)
    field_hyp = r.hypothesis("conformal", "X conformal with constant factor", "L_X g = 2 alpha g, alpha constant",
                             "soliton::conformal_extract(M)", {c.structured},
                             [&] { return fit_outcome(r.conformal_full(), "alpha", r.tol(), true); });
  else
    field_hyp = r.hypothesis("killing", "X Killing", "L_X g = 0", "soliton::killing_check(M)", {c.structured}, [&] {
      VectorFieldSpec X;
      for (std::size_t a = 0; a < r.M().dim(); ++a) X.components.push_back(r.field()->full().component(a));
      return tensor_outcome(soliton::killing_check(r.M(), X, grid_of(r), r.tol()).stats, r.tol());
    });
  auto alpha = [&r, conformal](std::size_t k) { return conformal ? r.conformal_full().samples[k] : 0.0; };
  if (r.wants("i")) {
    const bool hf = hess_f(r, {c.structured});
    const bool hh = hess_h(r, {c.structured});
    factor_einstein_concl(r, "i", 0, {c.rbs, field_hyp, hf, hh});
    stated_mu(r, "i", 0,
              conformal ? "mu1 = lambda + rho R - alpha + (n2/f) sigma + (n3/h) psi"
                        : "mu1 = lambda + rho R + (n2/f) sigma + (n3/h) psi",
              {c.rbs, field_hyp, hf, hh}, [&r, alpha](std::size_t k) {
                const auto& w = r.inv(k);
                return r.base(k) - alpha(k) + r.n2() / w.f * r.sigma().samples[k] + r.n3() / w.h * r.psi().samples[k];
              });
  }
  if (r.wants("ii")) {
    const bool hh = hess_h(r, {c.structured});
    factor_einstein_concl(r, "ii", 1, {c.rbs, field_hyp, hh});
    stated_mu(r, "ii", 1,
              conformal ? "mu2 = lambda f^2 + rho R f^2 - alpha f^2 + (n3/h) psi f^2 + f#"
                        : "mu2 = lambda f^2 + rho R f^2 + f# + (n3/h) psi f^2",
              {c.rbs, field_hyp, hh}, [&r, alpha](std::size_t k) {
                const auto& w = r.inv(k);
                const double f2 = w.f * w.f;
                return (r.base(k) - alpha(k)) * f2 + w.f_sharp + r.n3() / w.h * r.psi().samples[k] * f2;
              });
  }
  if (r.wants("iii")) {
    factor_einstein_concl(r, "iii", 2, {c.rbs, field_hyp});
    stated_mu(r, "iii", 2,
              conformal ? "mu3 = lambda h^2 + rho R h^2 - alpha h^2 + h#" : "mu3 = lambda h^2 + rho R h^2 + h#",
              {c.rbs, field_hyp}, [&r, alpha](std::size_t k) {
                const auto& w = r.inv(k);
                return (r.base(k) - alpha(k)) * w.h * w.h + w.h_sharp;
              });
  }
}

void run_T33(Runner& r) {
  const auto c = common_vector(r);
  const bool hf = hess_f(r, {c.structured});
  const bool hh = hess_h(r, {c.structured});
  for (int item = 0; item < 3; ++item) {
    const std::string it = kRoman[static_cast<std::size_t>(item)];
    if (!r.wants(it)) continue;
    const std::string Xi = "X" + std::to_string(item + 1);
    const bool only = r.hypothesis("only_" + Xi, "X = " + Xi, "X has no components outside " + factor_name(r.M(), item),
                                   "component inspection", {c.structured}, [&r, item] {
                                     return only_blocks(r, mask(item == 0, item == 1, item == 2));
                                   });
    const bool kill = factor_killing(r, item, {c.structured});
    const std::vector<bool> gates{c.rbs, hf, hh, only, kill};
    for (int j = 0; j < 3; ++j) factor_einstein_concl(r, it, j, gates);
    if (item == 0) {
      stated_mu(r, it, 0, "mu1 = lambda + rho R + (n2/f) sigma + (n3/h) psi", gates, [&r](std::size_t k) {
        const auto& w = r.inv(k);
        return r.base(k) + r.n2() / w.f * r.sigma().samples[k] + r.n3() / w.h * r.psi().samples[k];
      });
      stated_mu(r, it, 1, "mu2 = lambda f^2 + rho R f^2 + f# + (n3/h) psi f^2 - f X1(f)", gates, [&r](std::size_t k) {
        const auto& w = r.inv(k);
        const double f2 = w.f * w.f;
        return r.base(k) * f2 + w.f_sharp + r.n3() / w.h * r.psi().samples[k] * f2 -
               w.f * r.applied(mask(true, false, false), false, k);
      });
      stated_mu(r, it, 2, "mu3 = lambda h^2 + rho R h^2 + h#", gates, [&r](std::size_t k) {
        const auto& w = r.inv(k);
        return r.base(k) * w.h * w.h + w.h_sharp;
      });
    }
  }
}

// T3.5 and its static analogue S4.3; the third block is M3 or the time line.
void run_T35(Runner& r) {
  const auto c = common_vector(r);
  const std::string f3 = factor_name(r.M(), 2);
  const std::string X3 = r.M().kind() == ProductKind::StandardStatic ? "w dt" : "X3";
  if (r.wants("i")) {
    const bool only = r.hypothesis("only_X3", "X = " + X3, "X has no components outside " + f3,
                                   "component inspection", {c.structured},
                                   [&r] { return only_blocks(r, mask(false, false, true)); });
    const bool kill = factor_killing(r, 2, {c.structured});
    full_einstein(r, "i", {c.rbs, only, kill});
  }
  if (r.wants("ii")) {
    const bool k1 = factor_killing(r, 0, {c.structured});
    const bool c2 = r.hypothesis("conformal_X2", "X2 conformal on M2 with factor -2 X1(ln f)",
                                 "L2_X2 g2 = -2 X1(ln f) g2", "oracle Lie derivative on M2", {c.structured}, [&r] {
                                   return factor_conformal_with(r, 1, [&r](std::size_t k) {
                                     return -2.0 * r.applied(mask(true, false, false), false, k) / r.inv(k).f;
                                   });
                                 });
    const bool c3 = r.hypothesis("conformal_X3", X3 + " conformal on " + f3 + " with factor -2 (X1+X2)(ln h)",
                                 "L_X3 g3 = -2 (X1+X2)(ln h) g3", "oracle Lie derivative on " + f3, {c.structured},
                                 [&r] {
                                   return factor_conformal_with(r, 2, [&r](std::size_t k) {
                                     return -2.0 * r.applied(mask(true, true, false), true, k) / r.inv(k).h;
                                   });
                                 });
    full_einstein(r, "ii", {c.rbs, k1, c2, c3});
  }
  if (r.wants("iii")) {
    const bool only = r.hypothesis("only_X2_X3", "X = X2 + " + X3, "X has no components in M1",
                                   "component inspection", {c.structured},
                                   [&r] { return only_blocks(r, mask(false, true, true)); });
    const bool k2 = factor_killing(r, 1, {c.structured});
    const bool k3 = factor_killing(r, 2, {c.structured});
    const bool x2h = r.hypothesis("X2h_zero", "X2(h) = 0", "X2(h) = 0", "closedform::StructuredField::apply",
                                  {c.structured}, [&r] {
                                    return scalar_identity(
                                        r, 1, "X2(h)",
                                        [&r](std::size_t k) { return r.applied(mask(false, true, false), true, k); },
                                        "0", [](std::size_t) { return 0.0; });
                                  });
    full_einstein(r, "iii", {c.rbs, only, k2, k3, x2h});
  }
}

// T3.6 (three items) and S4.4 (items i and ii under joint hypotheses).
void run_T36(Runner& r, bool joint) {
  const auto c = common_vector(r);
  const double hw = joint ? 1.0 : r.n3();
  auto c1 = [&r, hw](std::size_t k) {
    const auto& w = r.inv(k);
    return 2.0 * (r.base(k) - r.factor_einstein(0).samples[k] + r.n2() / w.f * r.sigma().samples[k] +
                  hw / w.h * r.psi().samples[k]);
  };
  auto c2 = [&r, hw](std::size_t k) {
    const auto& w = r.inv(k);
    const double f2 = w.f * w.f;
    return 2.0 / f2 *
           (r.base(k) * f2 - r.factor_einstein(1).samples[k] + w.f_sharp + hw / w.h * r.psi().samples[k] * f2 -
            w.f * r.applied(mask(true, false, false), false, k));
  };
  const std::string f1 = joint ? "c1 = 2 (lambda + rho R - mu1 + (n2/f) sigma + (1/h) psi)"
                               : "c1 = 2 (lambda + rho R - mu1 + (n2/f) sigma + (n3/h) psi)";
  const std::string f2 = joint ? "c2 = (2/f^2) ((lambda + rho R) f^2 - mu2 + f# + (1/h) psi f^2 - f X1(f))"
                               : "c2 = (2/f^2) (lambda f^2 + rho R f^2 - mu2 + f# + (n3/h) psi f^2 - f X1(f))";
  if (joint) {
    const bool hf = hess_f(r, {c.structured});
    const bool hh = hess_h(r, {c.structured});
    const bool e1 = factor_einstein_hyp(r, 0, {});
    const bool e2 = factor_einstein_hyp(r, 1, {});
    const std::vector<bool> gates{c.rbs, hf, hh, e1, e2};
    factor_conformal_concl(r, "", 0, f1, gates, c1);
    factor_conformal_concl(r, "", 1, f2, gates, c2);
    return;
  }
  if (r.wants("i")) {
    const bool e1 = factor_einstein_hyp(r, 0, {});
    const bool hf = hess_f(r, {c.structured});
    const bool hh = hess_h(r, {c.structured});
    factor_conformal_concl(r, "i", 0, f1, {c.rbs, e1, hf, hh}, c1);
  }
  if (r.wants("ii")) {
    const bool e2 = factor_einstein_hyp(r, 1, {});
    const bool hh = hess_h(r, {c.structured});
    factor_conformal_concl(r, "ii", 1, f2, {c.rbs, e2, hh}, c2);
  }
  if (r.wants("iii")) {
    const bool e3 = factor_einstein_hyp(r, 2, {});
    factor_conformal_concl(r, "iii", 2, "c3 = (2/h^2) (lambda h^2 + rho R h^2 - mu3 + h# - h (X1+X2)(h))",
                           {c.rbs, e3}, [&r](std::size_t k) {
                             const auto& w = r.inv(k);
                             const double h2 = w.h * w.h;
                             return 2.0 / h2 *
                                    (r.base(k) * h2 - r.factor_einstein(2).samples[k] + w.h_sharp -
                                     w.h * r.applied(mask(true, true, false), true, k));
                           });
  }
}

bool gradient_hyp(Runner& r, const Expression& u) {
  return r.hypothesis("gradient_rbs", "(M, g, grad u, lambda, rho) is a gradient soliton",
                      "Ric + Hess u = (lambda + rho R) g", "soliton::gradient_rbs_residual", {}, [&r, &u] {
                        return tensor_outcome(soliton::gradient_rbs_residual(r.M(), u, r.lam(), r.rho(), grid_of(r)),
                                              r.tol());
                      });
}

void run_T37(Runner& r, const Expression& u) {
  const bool g = gradient_hyp(r, u);
  const auto& M = r.M();
  if (r.wants("i")) {
    // h1: h with the factor-2 coordinates frozen at the box midpoint.
    Expression h1 = M.h();
    const Point mid = M.midpoint();
    const auto& F2 = M.factor(1);
    for (std::size_t a = 0; a < F2.dim(); ++a) h1 = h1.substitute(F2.coords[a], mid.values[F2.offset + a]);
    const Expression phi = u - r.n2() * ln(M.f()) - r.n3() * ln(h1);
    r.conclusion("i", "gradient_soliton_M1", "(M1, g1, grad phi1) is a gradient soliton",
                 "Ric1 + Hess1 phi1 = (lambda + rho R) g1, phi1 = u - n2 ln f - n3 ln h1", "oracle on M1", {g},
                 [&r, phi] { return factor_gradient_rbs(r, 0, phi, [&r](std::size_t k) { return r.base(k); }); });
  }
  if (r.wants("ii")) {
    r.conclusion("ii", "gradient_soliton_M3", "(M3, g3, grad u) is a gradient soliton",
                 "Ric3 + Hess3 u = (lambda h^2 + rho R h^2 + h#) g3", "oracle on M3", {g}, [&r, &u] {
                   return factor_gradient_rbs(r, 2, u, [&r](std::size_t k) {
                     const auto& w = r.inv(k);
                     return r.base(k) * w.h * w.h + w.h_sharp;
                   });
                 });
  }
}

void run_S42(Runner& r) {
  const auto c = common_vector(r);
  const bool conf = r.hypothesis("conformal", "X conformal with constant factor", "L_X g = 2 alpha g, alpha constant",
                                 "soliton::conformal_extract(M)", {c.structured},
                                 [&] { return fit_outcome(r.conformal_full(), "alpha", r.tol(), true); });
  const bool hf = hess_f(r, {c.structured});
  const bool hh = hess_h(r, {c.structured});
  const std::vector<bool> gates{c.rbs, conf, hf, hh};
  factor_einstein_concl(r, "", 0, gates);
  stated_mu(r, "", 0, "mu1 = -Lap h/h + (n2/f) sigma + (1/h) psi", gates, [&r](std::size_t k) {
    const auto& w = r.inv(k);
    return -w.lapbar_h / w.h + r.n2() / w.f * r.sigma().samples[k] + r.psi().samples[k] / w.h;
  });
  factor_einstein_concl(r, "", 1, gates);
  stated_mu(r, "", 1, "mu2 = -(Lap h/h) f^2 + f# + (1/h) psi f^2", gates, [&r](std::size_t k) {
    const auto& w = r.inv(k);
    return -w.lapbar_h / w.h * w.f * w.f + w.f_sharp + r.psi().samples[k] * w.f * w.f / w.h;
  });
}

void run_G41(Runner& r) {
  const auto c = common_vector(r);
  if (r.wants("i")) {
    r.conclusion("i", "time_identity", "time-block scalar identity",
                 "-(n2/f) f'' - (n3/h) h_tt + dw/dt = lambda + rho R", "closedform invariants + oracle R", {c.rbs},
                 [&r] {
                   return scalar_identity(
                       r, 0, "lhs",
                       [&r](std::size_t k) {
                         const auto& w = r.inv(k);
                         return -r.n2() / w.f * w.f_ddot - r.n3() / w.h * w.h_tt + r.w_t(k);
                       },
                       "lambda + rho R", [&r](std::size_t k) { return r.base(k); });
                 });
  }
  if (r.wants("ii")) {
    const bool hh = hess_h(r, {c.structured});
    r.conclusion("ii", "soliton_M2", "(M2, g2, f^2 X2) is a soliton with the stated combination",
                 "Ric2 + 1/2 f^2 L2 = (lambda f^2 + rho R f^2 + f<> - w f f' + (n3/h) psi) g2", "oracle on M2",
                 {c.rbs, hh}, [&r] {
                   return factor_rbs(
                       r, 1, [&r](std::size_t k) { return r.inv(k).f * r.inv(k).f; },
                       [&r](std::size_t k) {
                         const auto& w = r.inv(k);
                         return r.base(k) * w.f * w.f + w.f_diamond - r.w(k) * w.f * w.f_dot +
                                r.n3() / w.h * r.psi().samples[k];
                       });
                 });
  }
  if (r.wants("iii")) {
    r.conclusion("iii", "soliton_M3", "(M3, g3, h^2 X3) is a soliton with the stated combination",
                 "Ric3 + 1/2 h^2 L3 = (lambda h^2 + rho R h^2 + h# - w h h_t - w h X2(h)) g3", "oracle on M3",
                 {c.rbs}, [&r] {
                   return factor_rbs(
                       r, 2, [&r](std::size_t k) { return r.inv(k).h * r.inv(k).h; },
                       [&r](std::size_t k) {
                         const auto& w = r.inv(k);
                         return r.base(k) * w.h * w.h + w.h_sharp - r.w(k) * w.h * w.h_t -
                                r.w(k) * w.h * r.applied(mask(false, true, false), true, k);
                       });
                 });
  }
}

void run_G42(Runner& r) {
  const auto c = common_vector(r);
  const bool conf = r.hypothesis("conformal", "X conformal with constant factor", "L_X g = 2 alpha g, alpha constant",
                                 "soliton::conformal_extract(M)", {c.structured},
                                 [&] { return fit_outcome(r.conformal_full(), "alpha", r.tol(), true); });
  const bool hh = hess_h(r, {c.structured});
  const std::vector<bool> gates{c.rbs, conf, hh};
  auto lead = [&r](std::size_t k) {
    const auto& w = r.inv(k);
    return -r.n2() / w.f * w.f_ddot - r.n3() / w.h * w.h_tt;
  };
  factor_einstein_concl(r, "", 1, gates);
  stated_mu(r, "", 1, "mu = (-(n2/f) f'' - (n3/h) h_tt) f^2 + f<> + (n3/h) psi", gates, [&r, lead](std::size_t k) {
    const auto& w = r.inv(k);
    return lead(k) * w.f * w.f + w.f_diamond + r.n3() / w.h * r.psi().samples[k];
  });
  factor_einstein_concl(r, "", 2, gates);
  stated_mu(r, "", 2, "mu = (-(n2/f) f'' - (n3/h) h_tt) h^2 + h#", gates, [&r, lead](std::size_t k) {
    const auto& w = r.inv(k);
    return lead(k) * w.h * w.h + w.h_sharp;
  });
}

void run_G43(Runner& r, const Expression& u) {
  const auto& M = r.M();
  const bool g = gradient_hyp(r, u);
  const PreparedScalar U(u);
  const PreparedScalar F(M.f());
  const std::size_t t = M.factor(0).offset;
  const bool integral = r.hypothesis(
      "u_integral_f", "u is an antiderivative of f in t", "du/dt = f and u depends on t only", "symbolic derivative",
      {}, [&] {
        StatsBuilder sb(blocks_of(M.chart()), {0});
        for (std::size_t k = 0; k < r.size(); ++k) {
          Eigen::VectorXd v(ix(M.dim()));
          for (std::size_t a = 0; a < M.dim(); ++a) v(ix(a)) = U.d(a, r.point(k));
          v(ix(t)) -= F.value(r.point(k));
          sb.add(r.point(k), v);
        }
        return tensor_outcome(sb.result(), r.tol());
      });

  // Hess u = f' g, compared block by block.
  std::vector<Comparison> cmp;
  std::vector<std::pair<int, int>> pairs;
  for (int i = 0; i < 3; ++i)
    for (int j = i; j < 3; ++j) {
      pairs.emplace_back(i, j);
      const auto& Fi = M.factor(static_cast<std::size_t>(i));
      const auto& Fj = M.factor(static_cast<std::size_t>(j));
      cmp.emplace_back(std::vector<int>(Fi.dim(), i), std::vector<int>(Fj.dim(), j));
    }
  if (integral) {
    for (std::size_t k = 0; k < r.size(); ++k) {
      oracle::Geometry geo(M.chart(), r.point(k));
      const Eigen::MatrixXd H = geo.hessian(U);
      const Eigen::MatrixXd C = r.inv(k).f_dot * geo.metric();
      for (std::size_t q = 0; q < pairs.size(); ++q)
        cmp[q].add(r.point(k), sub(H, M, pairs[q].first, pairs[q].second), sub(C, M, pairs[q].first, pairs[q].second));
    }
  }
  for (std::size_t q = 0; q < pairs.size(); ++q) {
    const auto [i, j] = pairs[q];
    const std::string lbl = closedform::block_label(M.kind(), i) + closedform::block_label(M.kind(), j);
    CheckRow row = r.make_row("G4.3.identity.hess_u." + lbl, "Hess u = f' g on block " + lbl, "Hess u = f' g",
                              "oracle::hessian vs f' g", CheckRole::Identity);
    if (!integral) {
      row.verdict = Verdict::Skip;
      row.evaluated = false;
      row.note = "hypothesis failed";
    } else {
      const auto& Fi = M.factor(static_cast<std::size_t>(i));
      const auto& Fj = M.factor(static_cast<std::size_t>(j));
      const auto& names = M.coordinates();
      finish_identity(row, cmp[q],
                      "Hess u(" + names[Fi.offset + cmp[q].row()] + "," + names[Fj.offset + cmp[q].col()] + ")",
                      r.report().ledger);
    }
    r.report().rows.push_back(std::move(row));
  }

  r.conclusion("", "einstein_M", "M is Einstein with factor lambda + rho R - f'", "Ric = (lambda + rho R - f') g",
               "oracle::ricci", {g, integral}, [&] {
                 auto sb = StatsBuilder::for_chart(M.chart());
                 std::vector<double> factor;
                 for (std::size_t k = 0; k < r.size(); ++k) {
                   oracle::Geometry geo(M.chart(), r.point(k));
                   const double c = r.base(k) - r.inv(k).f_dot;
                   factor.push_back(c);
                   sb.add(r.point(k), geo.ricci() - c * geo.metric());
                 }
                 Outcome o = tensor_outcome(sb.result(), r.tol());
                 o.constants.push_back(summarize("lambda + rho R - f'", factor));
                 return o;
               });
}

} // namespace

// ---------------------------------------------------------------------------

std::string to_string(Verdict v) {
  switch (v) {
  case Verdict::Pass: return "PASS";
  case Verdict::Flag: return "FLAG";
  case Verdict::Skip: return "SKIP";
  }
  return "?";
}

std::string to_string(CheckRole r) {
  switch (r) {
  case CheckRole::Hypothesis: return "hypothesis";
  case CheckRole::Identity: return "identity";
  case CheckRole::Conclusion: return "conclusion";
  }
  return "?";
}

ConstantSummary summarize(std::string name, const std::vector<double>& samples) {
  ConstantSummary s;
  s.name = std::move(name);
  if (!samples.empty()) {
    const auto [lo, hi] = std::minmax_element(samples.begin(), samples.end());
    s.min = *lo + 0.0;
    s.max = *hi + 0.0;
    s.spread = s.max - s.min;
  }
  return s;
}

std::map<Verdict, std::size_t> VerdictReport::tally() const {
  std::map<Verdict, std::size_t> t{{Verdict::Pass, 0}, {Verdict::Flag, 0}, {Verdict::Skip, 0}};
  for (const auto& r : rows) ++t[r.verdict];
  return t;
}

const std::vector<std::string>& theorem_ids() {
  static const std::vector<std::string> ids = [] {
    std::vector<std::string> v;
    for (const auto& c : registry()) v.push_back(c.id);
    return v;
  }();
  return ids;
}

ProductKind theorem_kind(const std::string& case_id) { return lookup(case_id).first->kind; }

std::string theorem_statement(const std::string& case_id) { return lookup(case_id).first->statement; }

VerdictReport verify_theorem(const std::string& case_id, const SequentialWarpedProduct& M,
                             const soliton::SolitonInstance& S, const std::vector<Point>& grid, double tol) {
  const auto [info, item] = lookup(case_id);
  if (info->kind != M.kind())
    throw VerifyError("theorem " + info->id + " needs a " + to_string(info->kind) + " product, got " +
                      to_string(M.kind()));
  const Expression* u = std::get_if<ScalarFieldSpec>(&S.potential);
  if (info->gradient && u == nullptr)
    throw VerifyError("theorem " + info->id + " needs a scalar potential u");

  VerdictReport rep;
  rep.task = "verify-theorem";
  rep.subject = case_id;
  rep.instance = M.name();
  Runner r(*info, item, M, S, grid, tol, rep);
  const std::string& id = info->id;
  if (id == "T3.1" || id == "S4.1") run_T31(r, id == "S4.1" ? 1.0 : r.n3());
  else if (id == "T3.2") run_T32_T34(r, false);
  else if (id == "T3.3") run_T33(r);
  else if (id == "T3.4") run_T32_T34(r, true);
  else if (id == "T3.5" || id == "S4.3") run_T35(r);
  else if (id == "T3.6") run_T36(r, false);
  else if (id == "S4.4") run_T36(r, true);
  else if (id == "T3.7") run_T37(r, *u);
  else if (id == "S4.2") run_S42(r);
  else if (id == "G4.1") run_G41(r);
  else if (id == "G4.2") run_G42(r);
  else if (id == "G4.3") run_G43(r, *u);
  sort_ledger(rep.ledger);
  return rep;
}

VerdictReport compare_closedform(const SequentialWarpedProduct& M, const std::set<Identity>& identities,
                                 const std::optional<VectorFieldSpec>& X, const std::vector<Point>& grid,
                                 double tol) {
  VerdictReport rep;
  rep.task = "compare-closedform";
  rep.instance = M.name();
  for (Identity id : identities) rep.subject += (rep.subject.empty() ? "" : ",") + closedform::to_string(id);

  std::optional<closedform::StructuredField> SX;
  if (identities.count(Identity::Lie)) {
    if (!X) throw VerifyError("lie comparison needs a structured vector field X");
    try {
      SX.emplace(M, *X);
    } catch (const closedform::FieldRejected& e) {
      throw VerifyError(std::string("lie comparison: ") + e.what());
    }
  }

  const closedform::Evaluator ev(M);
  const std::size_t n = M.dim();
  const auto& names = M.coordinates();

  struct Slot {
    Identity id;
    int i, j;
    Comparison cmp;
  };
  std::vector<Slot> slots;
  for (Identity id : identities)
    for (int i = 0; i < 3; ++i)
      for (int j = i; j < 3; ++j) {
        const auto& Fi = M.factor(static_cast<std::size_t>(i));
        const auto& Fj = M.factor(static_cast<std::size_t>(j));
        std::vector<int> cols(Fj.dim() * (id == Identity::Connection ? n : 1), j);
        slots.push_back({id, i, j, Comparison(std::vector<int>(Fi.dim(), i), cols)});
      }

  for (const auto& p : grid) {
    oracle::Geometry geo(M.chart(), p);
    Eigen::MatrixXd ric, lie;
    if (identities.count(Identity::Ricci)) ric = geo.ricci();
    if (SX) lie = geo.lie_derivative(SX->full());
    for (auto& s : slots) {
      const auto& Fi = M.factor(static_cast<std::size_t>(s.i));
      const auto& Fj = M.factor(static_cast<std::size_t>(s.j));
      switch (s.id) {
      case Identity::Connection: {
        Eigen::MatrixXd O(ix(Fi.dim()), ix(Fj.dim() * n)), C(ix(Fi.dim()), ix(Fj.dim() * n));
        for (std::size_t a = 0; a < Fi.dim(); ++a)
          for (std::size_t b = 0; b < Fj.dim(); ++b) {
            const Eigen::VectorXd c = ev.connection(Fi.offset + a, Fj.offset + b, p);
            for (std::size_t k = 0; k < n; ++k) {
              O(ix(a), ix(b * n + k)) = geo.christoffel()(k, Fi.offset + a, Fj.offset + b);
              C(ix(a), ix(b * n + k)) = c(ix(k));
            }
          }
        s.cmp.add(p, O, C);
        break;
      }
      case Identity::Ricci: s.cmp.add(p, sub(ric, M, s.i, s.j), ev.ricci_block(s.i, s.j, p)); break;
      case Identity::Lie: s.cmp.add(p, sub(lie, M, s.i, s.j), ev.lie_block(*SX, s.i, s.j, p)); break;
      }
    }
  }

  for (auto& s : slots) {
    const std::string lbl = closedform::block_label(M.kind(), s.i) + closedform::block_label(M.kind(), s.j);
    CheckRow row;
    row.id = closedform::to_string(s.id) + "." + kind_tag(M.kind()) + "." + lbl;
    row.name = closedform::to_string(s.id) + " block " + lbl;
    row.anchor = closedform::formula_text(M.kind(), s.id, s.i, s.j);
    row.operation = "oracle vs closedform";
    row.role = CheckRole::Identity;
    row.tolerance = tol;
    const auto& Fi = M.factor(static_cast<std::size_t>(s.i));
    const auto& Fj = M.factor(static_cast<std::size_t>(s.j));
    std::string comp;
    const std::string a = names[Fi.offset + s.cmp.row()];
    if (s.id == Identity::Connection) {
      const std::size_t b = s.cmp.col() / n, k = s.cmp.col() % n;
      comp = "Gamma^" + names[k] + "(" + a + "," + names[Fj.offset + b] + ")";
    } else {
      comp = std::string(s.id == Identity::Ricci ? "Ric(" : "L(") + a + "," + names[Fj.offset + s.cmp.col()] + ")";
    }
    finish_identity(row, s.cmp, comp, rep.ledger);
    rep.rows.push_back(std::move(row));
  }
  sort_ledger(rep.ledger);
  return rep;
}

VerdictReport soliton_check(const SequentialWarpedProduct& M, const soliton::SolitonInstance& S,
                            const std::vector<Point>& grid, double tol) {
  VerdictReport rep;
  rep.task = "soliton-check";
  rep.instance = M.name();
  const bool grad = S.gradient();
  rep.subject = grad ? "gradient" : "vector";

  CheckRow row;
  row.id = grad ? "soliton.gradient_rbs" : "soliton.rbs";
  row.name = grad ? "gradient soliton residual" : "soliton residual";
  row.anchor = grad ? "Ric + Hess u = (lambda + rho R) g" : "Ric + 1/2 L_X g = (lambda + rho R) g";
  row.operation = grad ? "soliton::gradient_rbs_residual" : "soliton::rbs_residual";
  row.role = CheckRole::Conclusion;
  row.tolerance = tol;
  row.stats = soliton::residual(M, S, grid);
  row.verdict = row.stats->below(tol) ? Verdict::Pass : Verdict::Flag;

  std::vector<double> R;
  for (const auto& p : grid) R.push_back(oracle::scalar_curvature(M.chart(), p));
  row.constants.push_back(summarize("scalar curvature", R));
  row.constants.push_back(summarize("einstein factor", soliton::einstein_extract(M.chart(), grid).samples));
  if (!grad) {
    const auto& X = std::get<VectorFieldSpec>(S.potential);
    const auto conf = soliton::conformal_extract(M, X, grid);
    row.constants.push_back(summarize("conformal factor", conf.samples));
    const bool killing = soliton::killing_check(M, X, grid, tol).killing;
    row.note = killing ? "X is Killing" : (conf.proportional(tol) ? "X is conformal" : "X is not conformal");
  }
  rep.rows.push_back(std::move(row));
  return rep;
}

VerdictReport curvature_dump(const SequentialWarpedProduct& M, const std::vector<Point>& grid, double tol) {
  VerdictReport rep;
  rep.task = "curvature-dump";
  rep.subject = "oracle";
  rep.instance = M.name();
  const std::size_t n = M.dim();
  const auto blocks = blocks_of(M.chart());
  StatsBuilder sym(blocks, blocks);
  StatsBuilder bianchi(blocks, blocks);
  std::vector<std::pair<int, int>> mixed{{0, 1}, {0, 2}, {1, 2}};
  std::vector<Comparison> cmp;
  for (auto [i, j] : mixed)
    cmp.emplace_back(std::vector<int>(M.factor(static_cast<std::size_t>(i)).dim(), i),
                     std::vector<int>(M.factor(static_cast<std::size_t>(j)).dim(), j));
  std::vector<double> Rs;
  for (const auto& p : grid) {
    oracle::Geometry geo(M.chart(), p);
    const Eigen::MatrixXd ric = geo.ricci();
    const double R = geo.inverse().cwiseProduct(ric).sum();
    Rs.push_back(R);
    rep.samples.push_back({p, R, ric});
    sym.add(p, ric - ric.transpose());
    const auto Rm = geo.riemann();
    // Largest cyclic sum over the last index l for each (i, j).
    Eigen::MatrixXd b = Eigen::MatrixXd::Zero(ix(n), ix(n));
    for (std::size_t l = 0; l < n; ++l)
      for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = 0; j < n; ++j)
          for (std::size_t k = 0; k < n; ++k) {
            const double v = std::abs(Rm(l, i, j, k) + Rm(l, j, k, i) + Rm(l, k, i, j));
            b(ix(i), ix(j)) = std::max(b(ix(i), ix(j)), v);
          }
    bianchi.add(p, b);
    for (std::size_t q = 0; q < mixed.size(); ++q) {
      const Eigen::MatrixXd blk = sub(ric, M, mixed[q].first, mixed[q].second);
      cmp[q].add(p, blk, Eigen::MatrixXd::Zero(blk.rows(), blk.cols()));
    }
  }

  auto simple = [&](std::string id, std::string name, std::string anchor, std::string op, const StatsBuilder& sb) {
    CheckRow row;
    row.id = std::move(id);
    row.name = std::move(name);
    row.anchor = std::move(anchor);
    row.operation = std::move(op);
    row.role = CheckRole::Identity;
    row.tolerance = tol;
    row.stats = sb.result();
    row.verdict = row.stats->below(tol) ? Verdict::Pass : Verdict::Flag;
    return row;
  };
  CheckRow s = simple("curvature.ricci_symmetry", "Ricci tensor is symmetric", "Ric_ij = Ric_ji", "oracle::ricci", sym);
  s.constants.push_back(summarize("scalar curvature", Rs));
  s.constants.push_back(summarize("einstein factor", soliton::einstein_extract(M.chart(), grid).samples));
  rep.rows.push_back(std::move(s));
  rep.rows.push_back(simple("curvature.first_bianchi", "first Bianchi identity", "R^l_ijk + R^l_jki + R^l_kij = 0",
                            "oracle::riemann", bianchi));
  const auto& names = M.coordinates();
  for (std::size_t q = 0; q < mixed.size(); ++q) {
    const auto [i, j] = mixed[q];
    const std::string lbl = closedform::block_label(M.kind(), i) + closedform::block_label(M.kind(), j);
    CheckRow row;
    row.id = "curvature.mixed." + lbl;
    row.name = "mixed Ricci block " + lbl + " vanishes";
    row.anchor = "Ric(Xi,Xj) = 0 for i != j";
    row.operation = "oracle::ricci";
    row.role = CheckRole::Identity;
    row.tolerance = tol;
    const auto& Fi = M.factor(static_cast<std::size_t>(i));
    const auto& Fj = M.factor(static_cast<std::size_t>(j));
    finish_identity(row, cmp[q],
                    "Ric(" + names[Fi.offset + cmp[q].row()] + "," + names[Fj.offset + cmp[q].col()] + ")",
                    rep.ledger);
    rep.rows.push_back(std::move(row));
  }
  sort_ledger(rep.ledger);
  return rep;
}

int exit_code(const std::vector<VerdictReport>& reports) {
  bool flag = false, skip = false;
  for (const auto& r : reports)
    for (const auto& row : r.rows) {
      flag = flag || row.verdict == Verdict::Flag;
      skip = skip || row.verdict == Verdict::Skip;
    }
  if (flag) return 2;
  if (skip) return 3;
  return 0;
}

} // namespace swp::verify
