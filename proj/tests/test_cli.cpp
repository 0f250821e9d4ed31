#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "swp/report.hpp"
#include "swp/run.hpp"

#include <cmath>
#include <filesystem>
#include <fstream>
#include <limits>
#include <sstream>

using namespace swp;
using report::Json;

namespace fs = std::filesystem;

namespace {

std::string error_path(const Json& config) {
  try {
    run::evaluate(config);
  } catch (const run::ConfigError& e) {
    return e.path();
  }
  return "<no error>";
}

Json inline_instance(const std::string& m00) {
  Json f = Json::array();
  const char* coords[] = {"x", "y", "z"};
  for (int i = 0; i < 3; ++i)
    f.push_back(Json{{"dim", 1},
                     {"coords", {coords[i]}},
                     {"metric", Json::array({Json::array({i == 0 ? m00 : std::string("1")})})},
                     {"box", Json::array({Json::array({-1, 1})})}});
  return Json{{"name", "inline"}, {"kind", "generic"}, {"factors", f}, {"f", "exp(x)"}, {"h", "exp(x)"}};
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream s;
  s << in.rdbuf();
  return s.str();
}

fs::path scratch(const std::string& name) {
  const fs::path p = fs::temp_directory_path() / ("swp_test_cli_" + name);
  fs::remove_all(p);
  fs::create_directories(p);
  return p;
}

int run_file(const Json& config, const fs::path& dir, run::Format format = run::Format::Both) {
  const fs::path cfg = dir / "config.json";
  std::ofstream(cfg) << config.dump(2);
  run::Request req;
  req.config_path = cfg.string();
  req.out_dir = (dir / "out").string();
  req.format = format;
  req.quiet = true;
  std::ostringstream out, err;
  return run::run(req, out, err);
}

} // namespace

TEST_CASE("flat compare-closedform config passes") {
  const auto o = run::evaluate(Json::parse(R"J({"instance": {"catalog": "flat3"}, "tasks": ["compare-closedform"]})J"));
  CHECK(o.exit_code == 0);
  REQUIRE(o.reports.size() == 1);
  CHECK(o.reports[0].rows.size() == 12);
  CHECK(o.info.points == 125);
  CHECK(o.info.tol == 1e-6);
}

TEST_CASE("hyperbolic soliton-check config records a tiny residual") {
  const auto o = run::evaluate(Json::parse(
      R"J({"instance": {"catalog": "hyp3"}, "soliton": {"X": 0, "lambda": -1.4, "rho": 0.1}, "tasks": ["soliton-check"]})J"));
  CHECK(o.exit_code == 0);
  CHECK(o.reports.at(0).rows.at(0).stats->max_abs < 1e-8);
}

TEST_CASE("syntax error in a metric names the field") {
  const Json cfg{{"instance", inline_instance("exp(")}, {"tasks", {"curvature-dump"}}};
  CHECK(error_path(cfg) == "instance.factors[0].metric[0][0]");
  const auto dir = scratch("syntax");
  CHECK(run_file(cfg, dir) == 4);
  CHECK_FALSE(fs::exists(dir / "out" / "report.json"));
}

TEST_CASE("schema violations name the JSON path") {
  const Json base = Json::parse(R"J({"instance": {"catalog": "hyp3"}, "tasks": ["curvature-dump"]})J");
  auto with = [&](const char* patch) {
    Json j = base;
    j.merge_patch(Json::parse(patch));
    return j;
  };
  CHECK(error_path(with(R"J({"extra": 1})J")) == "extra");
  CHECK(error_path(with(R"J({"instance": {"catalog": "nope"}})J")) == "instance.catalog");
  CHECK(error_path(with(R"J({"soliton": {"X": 0, "lambda": 1, "mu": 2}})J")) == "soliton.mu");
  CHECK(error_path(with(R"J({"soliton": {"X": 0}})J")) == "soliton.lambda");
  CHECK(error_path(with(R"J({"soliton": {"lambda": 0}})J")) == "soliton");
  CHECK(error_path(with(R"J({"soliton": {"X": ["1", "y +", "0"], "lambda": 0}})J")) == "soliton.X[1]");
  CHECK(error_path(with(R"J({"soliton": {"X": ["1", "0"], "lambda": 0}})J")) == "soliton.X");
  CHECK(error_path(with(R"J({"soliton": {"X": "missing", "lambda": 0}})J")) == "soliton.X");
  CHECK(error_path(with(R"J({"tasks": ["fly"]})J")) == "tasks[0]");
  CHECK(error_path(with(R"J({"tasks": ["verify-theorem(T9.1)"]})J")) == "tasks[0]");
  CHECK(error_path(with(R"J({"tasks": [{"task": "verify-theorem"}]})J")) == "tasks[0].id");
  CHECK(error_path(with(R"J({"tasks": [{"task": "compare-closedform", "identities": ["torsion"]}]})J")) ==
        "tasks[0].identities[0]");
  CHECK(error_path(with(R"J({"tasks": [{"task": "soliton-check", "id": "T3.1"}]})J")) == "tasks[0].id");
  CHECK(error_path(with(R"J({"tasks": []})J")) == "tasks");
  CHECK(error_path(with(R"J({"grid": 1})J")) == "grid");
  CHECK(error_path(with(R"J({"grid": 2.5})J")) == "grid");
  CHECK(error_path(with(R"J({"tol": -1})J")) == "tol");
  CHECK(error_path(with(R"J({"seed": "x"})J")) == "seed");
  Json no_tasks = base;
  no_tasks.erase("tasks");
  CHECK(error_path(no_tasks) == "tasks");
}

TEST_CASE("evaluation errors carry the task path") {
  CHECK(error_path(Json::parse(R"J({"instance": {"catalog": "hyp3"}, "tasks": ["soliton-check"]})J")) == "tasks[0]");
  CHECK(error_path(Json::parse(
            R"J({"instance": {"catalog": "hyp3"}, "soliton": {"X": 0, "lambda": 0}, "tasks": ["verify-theorem(G4.1)"]})J")) ==
        "tasks[0]");
  CHECK(error_path(Json::parse(
            R"J({"instance": {"catalog": "hyp3"}, "tasks": [{"task": "compare-closedform", "identities": ["lie"]}]})J")) ==
        "tasks[0]");
  Json warped{{"instance", inline_instance("1")}, {"tasks", {"curvature-dump"}}};
  warped["instance"]["f"] = "x";
  CHECK(error_path(warped) == "instance");
}

TEST_CASE("named fields, overrides and seed") {
  const Json cfg = Json::parse(R"J({
    "instance": {"catalog": "hyp3"},
    "fields": {"dilation": ["1", "-y", "-z"], "pot": "x"},
    "soliton": {"X": "dilation", "lambda": -2},
    "tasks": ["verify-theorem(T3.5(ii))", {"task": "compare-closedform", "X": "dilation"}],
    "grid": 3, "tol": 1e-7, "seed": 11
  })J");
  auto o = run::evaluate(cfg);
  CHECK(o.exit_code == 0);
  CHECK(o.info.points == 27);
  CHECK(o.info.tol == 1e-7);
  CHECK(*o.info.seed == 11);
  CHECK(o.reports.at(1).rows.size() == 18);
  o = run::evaluate(cfg, {4, 1e-5});
  CHECK(o.info.points == 64);
  CHECK(o.info.tol == 1e-5);
}

TEST_CASE("exit code 3 when hypotheses fail and nothing is flagged") {
  const auto o = run::evaluate(Json::parse(
      R"J({"instance": {"catalog": "hyp3"}, "soliton": {"X": 0, "lambda": 1}, "tasks": ["verify-theorem(T3.2)"]})J"));
  CHECK(o.exit_code == 3);
}

TEST_CASE("report.json round-trips byte for byte") {
  const auto dir = scratch("roundtrip");
  const Json cfg = Json::parse(R"J({
    "instance": {"catalog": "desitter-grw"},
    "soliton": {"X": ["1", "0", "0"], "lambda": 2},
    "tasks": ["compare-closedform", "curvature-dump", "verify-theorem(G4.1)"],
    "grid": 3
  })J");
  CHECK(run_file(cfg, dir) == 2);
  const std::string bytes = slurp(dir / "out" / "report.json");
  CHECK(report::dump(Json::parse(bytes)) == bytes);
  CHECK(fs::exists(dir / "out" / "report.txt"));
  const Json j = Json::parse(bytes);
  CHECK(j["exit_code"] == 2);
  CHECK(j["reports"][0]["ledger"][0]["ratio"] == -1);
}

TEST_CASE("format selection") {
  const Json cfg = Json::parse(R"J({"instance": {"catalog": "flat3"}, "tasks": ["curvature-dump"], "grid": 2})J");
  auto dir = scratch("text");
  CHECK(run_file(cfg, dir, run::Format::Text) == 0);
  CHECK(fs::exists(dir / "out" / "report.txt"));
  CHECK_FALSE(fs::exists(dir / "out" / "report.json"));
  dir = scratch("json");
  CHECK(run_file(cfg, dir, run::Format::Json) == 0);
  CHECK_FALSE(fs::exists(dir / "out" / "report.txt"));
  CHECK(fs::exists(dir / "out" / "report.json"));
}

TEST_CASE("unreadable or malformed config exits 4") {
  run::Request req;
  req.config_path = "/nonexistent/config.json";
  std::ostringstream out, err;
  CHECK(run::run(req, out, err) == 4);
  const auto dir = scratch("malformed");
  std::ofstream(dir / "c.json") << "{ not json";
  req.config_path = (dir / "c.json").string();
  CHECK(run::run(req, out, err) == 4);
  CHECK(err.str().find("not valid JSON") != std::string::npos);
}

TEST_CASE("json writer") {
  Json j = Json::object();
  j["a"] = 0.1;
  j["b"] = -0.0;
  j["c"] = std::numeric_limits<double>::quiet_NaN();
  j["d"] = Json::array();
  j["e"] = "q\"uote";
  j["f"] = 3;
  CHECK(report::dump(j) ==
        "{\n  \"a\": 0.10000000000000001,\n  \"b\": 0,\n  \"c\": null,\n  \"d\": [],\n  \"e\": \"q\\\"uote\",\n"
        "  \"f\": 3\n}\n");
  for (double v : {1e-300, 6.02214076e23, -2.5, 1.0 / 3.0, 1e17}) {
    Json x = Json::array({v});
    const std::string s = report::dump(x);
    CHECK(Json::parse(s)[0].get<double>() == v);
    CHECK(report::dump(Json::parse(s)) == s);
  }
}

TEST_CASE("text report is aligned") {
  const auto o = run::evaluate(Json::parse(
      R"J({"instance": {"catalog": "desitter-grw"}, "soliton": {"X": ["1","0","0"], "lambda": 2}, "tasks": ["compare-closedform"], "grid": 2})J"));
  const std::string text = report::render_text(o.info, o.reports);
  CHECK(text.find("ledger") != std::string::npos);
  CHECK(text.find("FLAG     ricci.grw.tt") != std::string::npos);
  CHECK(text.find("total: PASS 16  FLAG 2  SKIP 0  exit 2") != std::string::npos);
}

TEST_CASE("catalog listing") {
  const std::string s = run::catalog_listing();
  for (const char* n : {"flat3", "hyp3", "mink-static", "desitter-grw", "rand-riemann"})
    CHECK(s.find(n) != std::string::npos);
}
