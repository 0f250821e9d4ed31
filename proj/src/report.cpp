#include "swp/report.hpp"

#include <fmt/format.h>

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <ctime>

namespace swp::report {

using verify::CheckRow;
using verify::Verdict;
using verify::VerdictReport;

namespace {

Json number(double v) {
  if (!std::isfinite(v)) return nullptr;
  return v;
}

Json optional_number(const std::optional<double>& v) { return v ? number(*v) : Json(nullptr); }

Json point_json(const Point& p, const std::vector<std::string>& coords) {
  Json j = Json::object();
  for (std::size_t a = 0; a < p.values.size(); ++a)
    j[a < coords.size() ? coords[a] : std::to_string(a)] = number(p.values[a]);
  return j;
}

Json tally_json(const std::map<Verdict, std::size_t>& t) {
  Json j = Json::object();
  for (Verdict v : {Verdict::Pass, Verdict::Flag, Verdict::Skip}) {
    const auto it = t.find(v);
    j[verify::to_string(v)] = it == t.end() ? 0 : it->second;
  }
  return j;
}

std::map<Verdict, std::size_t> total(const std::vector<VerdictReport>& reports) {
  std::map<Verdict, std::size_t> t;
  for (const auto& r : reports)
    for (const auto& [v, n] : r.tally()) t[v] += n;
  return t;
}

Json stats_json(const soliton::ResidualStats& s, const std::vector<std::string>& coords) {
  Json j = Json::object();
  j["max_abs"] = number(s.max_abs);
  j["mean_abs"] = number(s.mean_abs);
  j["worst_point"] = point_json(s.worst_point, coords);
  j["worst_component"] = Json::array({s.worst_component.first, s.worst_component.second});
  Json blocks = Json::array();
  for (const auto& r : s.per_block) {
    Json row = Json::array();
    for (double v : r) row.push_back(number(v));
    blocks.push_back(std::move(row));
  }
  j["per_block"] = std::move(blocks);
  j["samples"] = s.samples;
  return j;
}

Json row_json(const CheckRow& r, const std::vector<std::string>& coords) {
  Json j = Json::object();
  j["id"] = r.id;
  j["name"] = r.name;
  j["anchor"] = r.anchor;
  j["operation"] = r.operation;
  j["role"] = verify::to_string(r.role);
  j["tolerance"] = number(r.tolerance);
  j["verdict"] = verify::to_string(r.verdict);
  j["evaluated"] = r.evaluated;
  j["stats"] = r.stats ? stats_json(*r.stats, coords) : Json(nullptr);
  Json cs = Json::array();
  for (const auto& c : r.constants)
    cs.push_back(Json{{"name", c.name}, {"min", number(c.min)}, {"max", number(c.max)}, {"spread", number(c.spread)}});
  j["constants"] = std::move(cs);
  j["component"] = r.component;
  j["oracle_value"] = optional_number(r.oracle_value);
  j["closed_value"] = optional_number(r.closed_value);
  j["note"] = r.note;
  return j;
}

void write_double(std::string& out, double v) {
  if (!std::isfinite(v)) {
    out += "null";
    return;
  }
  if (v == 0.0) v = 0.0;  // drop the sign of zero
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  out += buf;
}

void write(std::string& out, const Json& j, int indent) {
  const std::string pad(static_cast<std::size_t>(indent + 2), ' ');
  const std::string close(static_cast<std::size_t>(indent), ' ');
  switch (j.type()) {
  case Json::value_t::object: {
    if (j.empty()) {
      out += "{}";
      return;
    }
    out += "{\n";
    bool first = true;
    for (const auto& [k, v] : j.items()) {
      if (!first) out += ",\n";
      first = false;
      out += pad;
      out += Json(k).dump();
      out += ": ";
      write(out, v, indent + 2);
    }
    out += "\n" + close + "}";
    return;
  }
  case Json::value_t::array: {
    if (j.empty()) {
      out += "[]";
      return;
    }
    out += "[\n";
    bool first = true;
    for (const auto& v : j) {
      if (!first) out += ",\n";
      first = false;
      out += pad;
      write(out, v, indent + 2);
    }
    out += "\n" + close + "]";
    return;
  }
  case Json::value_t::number_float: write_double(out, j.get<double>()); return;
  default: out += j.dump(); return;
  }
}

std::string fmt_num(double v) {
  if (!std::isfinite(v)) return "n/a";
  return fmt::format("{:.3e}", v);
}

std::string fmt_point(const Point& p) {
  std::string s = "(";
  for (std::size_t a = 0; a < p.values.size(); ++a) s += (a ? ", " : "") + fmt::format("{:.4g}", p.values[a]);
  return s + ")";
}

/// Left-aligned columns separated by two spaces.
std::string table(const std::vector<std::string>& header, const std::vector<std::vector<std::string>>& rows) {
  std::vector<std::size_t> w(header.size());
  for (std::size_t c = 0; c < header.size(); ++c) w[c] = header[c].size();
  for (const auto& r : rows)
    for (std::size_t c = 0; c < r.size(); ++c) w[c] = std::max(w[c], r[c].size());
  auto line = [&](const std::vector<std::string>& r) {
    std::string s;
    for (std::size_t c = 0; c < r.size(); ++c) {
      if (c + 1 == r.size()) s += r[c];
      else s += fmt::format("{:<{}}  ", r[c], w[c]);
    }
    while (!s.empty() && s.back() == ' ') s.pop_back();
    return s + "\n";
  };
  std::string out = line(header);
  std::vector<std::string> rule;
  for (std::size_t c = 0; c < header.size(); ++c) rule.emplace_back(w[c], '-');
  out += line(rule);
  for (const auto& r : rows) out += line(r);
  return out;
}

} // namespace

Json to_json(const VerdictReport& r, const std::vector<std::string>& coordinates) {
  Json j = Json::object();
  j["task"] = r.task;
  j["subject"] = r.subject;
  j["instance"] = r.instance;
  j["summary"] = tally_json(r.tally());
  Json rows = Json::array();
  for (const auto& row : r.rows) rows.push_back(row_json(row, coordinates));
  j["rows"] = std::move(rows);
  Json ledger = Json::array();
  for (const auto& e : r.ledger) {
    Json le = Json::object();
    le["identity"] = e.identity;
    le["component"] = e.component;
    le["point"] = point_json(e.point, coordinates);
    le["oracle"] = number(e.oracle);
    le["closed"] = number(e.closed);
    le["ratio"] = optional_number(e.ratio);
    ledger.push_back(std::move(le));
  }
  j["ledger"] = std::move(ledger);
  if (!r.samples.empty()) {
    Json samples = Json::array();
    for (const auto& s : r.samples) {
      Json ric = Json::array();
      for (Eigen::Index a = 0; a < s.ricci.rows(); ++a) {
        Json row = Json::array();
        for (Eigen::Index b = 0; b < s.ricci.cols(); ++b) row.push_back(number(s.ricci(a, b)));
        ric.push_back(std::move(row));
      }
      samples.push_back(Json{{"point", point_json(s.point, coordinates)}, {"scalar", number(s.scalar)}, {"ricci", ric}});
    }
    j["samples"] = std::move(samples);
  }
  return j;
}

Json to_json(const RunInfo& info, const std::vector<VerdictReport>& reports) {
  Json j = Json::object();
  j["generated_at"] = info.generated_at;
  Json run = Json::object();
  run["instance"] = info.instance;
  run["kind"] = info.kind;
  run["coordinates"] = info.coordinates;
  run["grid"] = info.grid;
  run["points"] = info.points;
  run["tol"] = number(info.tol);
  run["seed"] = info.seed ? Json(*info.seed) : Json(nullptr);
  j["run"] = std::move(run);
  j["exit_code"] = info.exit_code;
  j["summary"] = tally_json(total(reports));
  Json rs = Json::array();
  for (const auto& r : reports) rs.push_back(to_json(r, info.coordinates));
  j["reports"] = std::move(rs);
  return j;
}

std::string dump(const Json& j) {
  std::string out;
  write(out, j, 0);
  out += "\n";
  return out;
}

std::string render_text(const RunInfo& info, const std::vector<VerdictReport>& reports) {
  std::string out;
  out += fmt::format("instance {} ({}), {} points, grid {}, tol {:g}\n", info.instance, info.kind, info.points,
                     info.grid, info.tol);
  for (const auto& r : reports) {
    out += fmt::format("\n== {}{}{}\n", r.task, r.subject.empty() ? "" : " ", r.subject);
    std::vector<std::vector<std::string>> rows;
    std::vector<std::vector<std::string>> consts;
    for (const auto& row : r.rows) {
      std::string detail = row.anchor;
      if (!row.component.empty()) detail = row.component + "  " + detail;
      if (!row.note.empty()) detail += "  [" + row.note + "]";
      rows.push_back({verify::to_string(row.verdict), row.id, verify::to_string(row.role),
                      row.stats ? fmt_num(row.stats->max_abs) : "-", fmt::format("{:g}", row.tolerance), detail});
      for (const auto& c : row.constants)
        consts.push_back({row.id, c.name, fmt_num(c.min), fmt_num(c.max), fmt_num(c.spread)});
    }
    out += table({"verdict", "id", "role", "max|res|", "tol", "detail"}, rows);
    if (!consts.empty()) {
      out += "\nconstants\n";
      out += table({"row", "name", "min", "max", "spread"}, consts);
    }
    if (!r.ledger.empty()) {
      out += "\nledger\n";
      std::vector<std::vector<std::string>> led;
      for (const auto& e : r.ledger)
        led.push_back({e.identity, e.component, fmt_num(e.oracle), fmt_num(e.closed),
                       e.ratio ? fmt::format("{:.6g}", *e.ratio) : "n/a", fmt_point(e.point)});
      out += table({"identity", "component", "oracle", "closed", "ratio", "point"}, led);
    }
    const auto t = r.tally();
    out += fmt::format("PASS {}  FLAG {}  SKIP {}\n", t.at(Verdict::Pass), t.at(Verdict::Flag), t.at(Verdict::Skip));
  }
  auto t = total(reports);
  out += fmt::format("\ntotal: PASS {}  FLAG {}  SKIP {}  exit {}\n", t[Verdict::Pass], t[Verdict::Flag],
                     t[Verdict::Skip], info.exit_code);
  return out;
}

std::string timestamp_utc() {
  const std::time_t now = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
  std::tm tm{};
  gmtime_r(&now, &tm);
  char buf[32];
  std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", &tm);
  return buf;
}

} // namespace swp::report
