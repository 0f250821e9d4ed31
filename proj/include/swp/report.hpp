#ifndef SWP_REPORT_HPP
#define SWP_REPORT_HPP

// Serialization of verdict reports: JSON with 17 significant digits and
// aligned text tables.

#include "swp/verify.hpp"

#include <json.hpp>

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

namespace swp::report {

using Json = nlohmann::ordered_json;

/// Run-level header shared by the JSON and text reports.
struct RunInfo {
  std::string instance;
  std::string kind;
  std::vector<std::string> coordinates;
  int grid = 5;
  std::size_t points = 0;
  double tol = 0.0;
  std::optional<std::int64_t> seed;
  int exit_code = 0;
  std::string generated_at;  // excluded from determinism comparisons
};

Json to_json(const verify::VerdictReport& r, const std::vector<std::string>& coordinates);
Json to_json(const RunInfo& info, const std::vector<verify::VerdictReport>& reports);

/// Two-space indented JSON; doubles printed with %.17g, non-finite as null,
/// negative zero as 0. Ends with a newline.
std::string dump(const Json& j);

std::string render_text(const RunInfo& info, const std::vector<verify::VerdictReport>& reports);

/// Current UTC time as YYYY-MM-DDTHH:MM:SSZ.
std::string timestamp_utc();

} // namespace swp::report

#endif // SWP_REPORT_HPP
