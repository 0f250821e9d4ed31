#ifndef SWP_VERIFY_HPP
#define SWP_VERIFY_HPP

// Theorem registry and closed-form comparator. Every task produces a
// VerdictReport: an ordered list of check rows plus a ledger of printed
// formulas that disagree with the coordinate oracle.

#include "swp/closedform.hpp"
#include "swp/manifold.hpp"
#include "swp/soliton.hpp"

#include <Eigen/Dense>

#include <map>
#include <optional>
#include <set>
#include <stdexcept>
#include <string>
#include <vector>

namespace swp::verify {

enum class Verdict { Pass, Flag, Skip };
enum class CheckRole { Hypothesis, Identity, Conclusion };

std::string to_string(Verdict v);
std::string to_string(CheckRole r);

/// Range of a pointwise quantity over the grid.
struct ConstantSummary {
  std::string name;
  double min = 0.0;
  double max = 0.0;
  double spread = 0.0;
};

ConstantSummary summarize(std::string name, const std::vector<double>& samples);

struct CheckRow {
  std::string id;
  std::string name;
  std::string anchor;     // formula or statement being checked
  std::string operation;  // engine operation that produced the residual
  CheckRole role = CheckRole::Conclusion;
  double tolerance = soliton::kDefaultTolerance;
  Verdict verdict = Verdict::Pass;
  bool evaluated = true;  // false when skipped before computing anything
  std::optional<soliton::ResidualStats> stats;
  std::vector<ConstantSummary> constants;
  // Value of each side at the worst component (identity comparisons only).
  std::optional<double> oracle_value;
  std::optional<double> closed_value;
  std::string component;
  std::string note;
};

struct LedgerEntry {
  std::string identity;   // row id
  std::string component;  // e.g. "Ric(t,t)"
  Point point;
  double oracle = 0.0;
  double closed = 0.0;
  std::optional<double> ratio;  // closed / oracle; empty when oracle is 0
};

struct CurvatureSample {
  Point point;
  double scalar = 0.0;
  Eigen::MatrixXd ricci;
};

struct VerdictReport {
  std::string task;
  std::string subject;
  std::string instance;
  std::vector<CheckRow> rows;
  std::vector<LedgerEntry> ledger;  // sorted by |oracle - closed| descending
  std::vector<CurvatureSample> samples;

  std::map<Verdict, std::size_t> tally() const;
};

/// Invalid task input: kind mismatch, missing auxiliary data, unknown id.
class VerifyError : public std::runtime_error {
public:
  using std::runtime_error::runtime_error;
};

/// Registry ids in order: T3.1 .. T3.7, S4.1 .. S4.4, G4.1 .. G4.3.
const std::vector<std::string>& theorem_ids();
/// Required product kind of a registry id (item suffix allowed).
ProductKind theorem_kind(const std::string& case_id);
std::string theorem_statement(const std::string& case_id);

/// Evaluate the hypotheses, then the conclusions, of one registry case.
/// `case_id` is a registry id, optionally narrowed to one item: "T3.5(ii)".
VerdictReport verify_theorem(const std::string& case_id, const SequentialWarpedProduct& M,
                             const soliton::SolitonInstance& S, const std::vector<Point>& grid,
                             double tol = soliton::kDefaultTolerance);

/// Oracle versus printed block formula, one row per identity and unordered
/// block pair. Lie rows need a structured vector field.
VerdictReport compare_closedform(const SequentialWarpedProduct& M, const std::set<closedform::Identity>& identities,
                                 const std::optional<VectorFieldSpec>& X, const std::vector<Point>& grid,
                                 double tol = soliton::kDefaultTolerance);

VerdictReport soliton_check(const SequentialWarpedProduct& M, const soliton::SolitonInstance& S,
                            const std::vector<Point>& grid, double tol = soliton::kDefaultTolerance);

/// Oracle curvature at every grid point plus symmetry, Bianchi and
/// mixed-block checks.
VerdictReport curvature_dump(const SequentialWarpedProduct& M, const std::vector<Point>& grid,
                             double tol = soliton::kDefaultTolerance);

/// 0 when every row passes, 2 when any row is flagged, 3 when rows were
/// skipped and none flagged.
int exit_code(const std::vector<VerdictReport>& reports);

} // namespace swp::verify

#endif // SWP_VERIFY_HPP
