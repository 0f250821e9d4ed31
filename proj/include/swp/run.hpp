#ifndef SWP_RUN_HPP
#define SWP_RUN_HPP

// Batch driver: validates a JSON configuration, runs its tasks in order and
// writes report.json / report.txt.
//
// Config keys:
//   instance  {"catalog": name} or {name?, kind?, factors: [3 x {name?, dim?,
//             coords, metric, box}], f?, h?}
//   fields    {name: [component exprs] | scalar expr}
//   soliton   {X | u, lambda, rho?}; X is 0, a component list or a field name
//   tasks     list of "curvature-dump", "compare-closedform", "soliton-check",
//             "verify-theorem(ID)" or {"task": ..., "id"?, "identities"?, "X"?}
//   grid      points per coordinate (default 5)
//   tol       tolerance (default 1e-6)
//   seed      integer, recorded in the report

#include "swp/report.hpp"
#include "swp/verify.hpp"

#include <iosfwd>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

namespace swp::run {

inline constexpr int kExitError = 4;

/// Configuration or evaluation failure; `path` names the offending JSON
/// location, e.g. `instance.factors[0].metric[0][0]`.
class ConfigError : public std::runtime_error {
public:
  ConfigError(std::string path, const std::string& message)
      : std::runtime_error(path.empty() ? message : path + ": " + message), path_(std::move(path)) {}
  const std::string& path() const noexcept { return path_; }

private:
  std::string path_;
};

struct Overrides {
  std::optional<int> grid;
  std::optional<double> tol;
};

struct Outcome {
  report::RunInfo info;
  std::vector<verify::VerdictReport> reports;
  int exit_code = 0;
};

/// Validate and execute a parsed configuration. Throws ConfigError.
Outcome evaluate(const report::Json& config, const Overrides& overrides = {});

enum class Format { Text, Json, Both };

struct Request {
  std::string config_path;
  Overrides overrides;
  Format format = Format::Both;
  std::string out_dir = ".";
  bool quiet = false;
};

/// Read, evaluate, write reports. Returns the process exit code; errors are
/// written to `err` and yield 4.
int run(const Request& request, std::ostream& out, std::ostream& err);

/// Built-in instance names with descriptions, one per line.
std::string catalog_listing();

} // namespace swp::run

#endif // SWP_RUN_HPP
