#include "swp/run.hpp"

#include "swp/catalog.hpp"
#include "swp/oracle.hpp"

#include <filesystem>
#include <fstream>
#include <map>
#include <ostream>
#include <set>
#include <sstream>

namespace swp::run {

using closedform::Identity;
using report::Json;

namespace {

std::string at(const std::string& path, const std::string& key) { return path.empty() ? key : path + "." + key; }
std::string at(const std::string& path, std::size_t i) { return path + "[" + std::to_string(i) + "]"; }

void allow_keys(const Json& j, const std::string& path, std::initializer_list<const char*> keys) {
  if (!j.is_object()) throw ConfigError(path, "expected an object");
  for (const auto& [k, v] : j.items()) {
    bool ok = false;
    for (const char* a : keys) ok = ok || k == a;
    if (!ok) throw ConfigError(at(path, k), "unknown key");
  }
}

const Json& require(const Json& j, const std::string& path, const char* key) {
  if (!j.contains(key)) throw ConfigError(at(path, key), "missing required key");
  return j.at(key);
}

std::string get_string(const Json& j, const std::string& path) {
  if (!j.is_string()) throw ConfigError(path, "expected a string");
  return j.get<std::string>();
}

double get_number(const Json& j, const std::string& path) {
  if (!j.is_number()) throw ConfigError(path, "expected a number");
  return j.get<double>();
}

/// Expression source: a string, or a number printed exactly.
std::string expr_source(const Json& j, const std::string& path) {
  if (j.is_string()) return j.get<std::string>();
  if (j.is_number_integer()) return std::to_string(j.get<std::int64_t>());
  if (j.is_number()) {
    std::ostringstream s;
    s.precision(17);
    s << j.get<double>();
    return s.str();
  }
  throw ConfigError(path, "expected an expression string or a number");
}

// --- instance --------------------------------------------------------------

ProductSpec inline_spec(const Json& j, const std::string& path) {
  allow_keys(j, path, {"name", "kind", "factors", "f", "h"});
  ProductSpec spec;
  spec.name = j.contains("name") ? get_string(j["name"], at(path, "name")) : "inline";
  if (j.contains("kind")) {
    const auto k = product_kind_from_string(get_string(j["kind"], at(path, "kind")));
    if (!k) throw ConfigError(at(path, "kind"), "expected generic, standard-static or grw");
    spec.kind = *k;
  }
  const Json& fs = require(j, path, "factors");
  const std::string fpath = at(path, "factors");
  if (!fs.is_array() || fs.size() != 3) throw ConfigError(fpath, "expected an array of 3 factors");
  for (std::size_t i = 0; i < 3; ++i) {
    const Json& F = fs[i];
    const std::string p = at(fpath, i);
    allow_keys(F, p, {"name", "dim", "coords", "metric", "box"});
    FactorSpec& out = spec.factors[i];
    if (F.contains("name")) out.name = get_string(F["name"], at(p, "name"));
    const Json& coords = require(F, p, "coords");
    if (!coords.is_array()) throw ConfigError(at(p, "coords"), "expected an array of names");
    for (std::size_t a = 0; a < coords.size(); ++a) out.coords.push_back(get_string(coords[a], at(at(p, "coords"), a)));
    if (F.contains("dim")) {
      const Json& d = F["dim"];
      if (!d.is_number_integer() || d.get<std::int64_t>() != static_cast<std::int64_t>(out.coords.size()))
        throw ConfigError(at(p, "dim"), "must equal the number of coordinates");
    }
    const Json& metric = require(F, p, "metric");
    const std::string mp = at(p, "metric");
    if (!metric.is_array()) throw ConfigError(mp, "expected a matrix of expressions");
    for (std::size_t a = 0; a < metric.size(); ++a) {
      if (!metric[a].is_array()) throw ConfigError(at(mp, a), "expected a row of expressions");
      std::vector<std::string> row;
      for (std::size_t b = 0; b < metric[a].size(); ++b) row.push_back(expr_source(metric[a][b], at(at(mp, a), b)));
      out.metric.push_back(std::move(row));
    }
    const Json& box = require(F, p, "box");
    const std::string bp = at(p, "box");
    if (!box.is_array()) throw ConfigError(bp, "expected one [lo, hi] pair per coordinate");
    for (std::size_t a = 0; a < box.size(); ++a) {
      if (!box[a].is_array() || box[a].size() != 2) throw ConfigError(at(bp, a), "expected [lo, hi]");
      out.box.push_back({get_number(box[a][0], at(at(bp, a), 0)), get_number(box[a][1], at(at(bp, a), 1))});
    }
  }
  if (j.contains("f")) spec.f = expr_source(j["f"], at(path, "f"));
  if (j.contains("h")) spec.h = expr_source(j["h"], at(path, "h"));
  return spec;
}

SequentialWarpedProduct build_instance(const Json& j) {
  const std::string path = "instance";
  if (!j.is_object()) throw ConfigError(path, "expected an object");
  if (j.contains("catalog")) {
    allow_keys(j, path, {"catalog"});
    const std::string name = get_string(j["catalog"], "instance.catalog");
    if (!catalog::contains(name)) throw ConfigError("instance.catalog", "unknown catalog instance '" + name + "'");
    return catalog::build(name);
  }
  const ProductSpec spec = inline_spec(j, path);
  try {
    return SequentialWarpedProduct::build(spec);
  } catch (const ModelError& e) {
    const std::string what = e.what();
    const std::string msg = e.field().empty() ? what : what.substr(e.field().size() + 2);
    throw ConfigError(e.field().empty() ? path : at(path, e.field()), msg);
  }
}

// --- fields ------------------------------------------------------------------

Expression parse_expr(const SequentialWarpedProduct& M, const Json& j, const std::string& path) {
  const std::string src = expr_source(j, path);
  try {
    return M.parse_expression(src);
  } catch (const SyntaxError& e) {
    throw ConfigError(path, e.what());
  } catch (const ModelError& e) {
    throw ConfigError(path, e.what());
  }
}

VectorFieldSpec parse_vector(const SequentialWarpedProduct& M, const Json& j, const std::string& path) {
  if (!j.is_array()) throw ConfigError(path, "expected one component per coordinate");
  if (j.size() != M.dim())
    throw ConfigError(path, "expected " + std::to_string(M.dim()) + " components, got " + std::to_string(j.size()));
  VectorFieldSpec X;
  for (std::size_t a = 0; a < j.size(); ++a) X.components.push_back(parse_expr(M, j[a], at(path, a)));
  return X;
}

struct Fields {
  std::map<std::string, VectorFieldSpec> vectors;
  std::map<std::string, ScalarFieldSpec> scalars;
};

Fields parse_fields(const SequentialWarpedProduct& M, const Json& j) {
  Fields out;
  if (!j.is_object()) throw ConfigError("fields", "expected an object of named fields");
  for (const auto& [name, v] : j.items()) {
    const std::string p = at(std::string("fields"), name);
    if (v.is_array()) out.vectors.emplace(name, parse_vector(M, v, p));
    else out.scalars.emplace(name, parse_expr(M, v, p));
  }
  return out;
}

VectorFieldSpec vector_ref(const SequentialWarpedProduct& M, const Fields& F, const Json& j, const std::string& path) {
  if (j.is_number() && j.get<double>() == 0.0) return M.zero_field();
  if (j.is_string()) {
    const auto name = j.get<std::string>();
    if (const auto it = F.vectors.find(name); it != F.vectors.end()) return it->second;
    throw ConfigError(path, "no vector field named '" + name + "' in fields");
  }
  if (j.is_array()) return parse_vector(M, j, path);
  throw ConfigError(path, "expected 0, a component list or a field name");
}

soliton::SolitonInstance parse_soliton(const SequentialWarpedProduct& M, const Fields& F, const Json& j) {
  const std::string path = "soliton";
  allow_keys(j, path, {"X", "u", "lambda", "rho"});
  soliton::SolitonInstance S;
  const bool hasX = j.contains("X"), hasU = j.contains("u");
  if (hasX == hasU) throw ConfigError(path, "exactly one of X and u is required");
  if (hasX) {
    S.potential = vector_ref(M, F, j["X"], "soliton.X");
  } else {
    const Json& u = j["u"];
    if (u.is_string() && F.scalars.count(u.get<std::string>())) S.potential = F.scalars.at(u.get<std::string>());
    else S.potential = parse_expr(M, u, "soliton.u");
  }
  S.lambda = get_number(require(j, path, "lambda"), "soliton.lambda");
  if (j.contains("rho")) S.rho = get_number(j["rho"], "soliton.rho");
  return S;
}

// --- tasks -------------------------------------------------------------------

enum class TaskKind { CurvatureDump, CompareClosedform, SolitonCheck, VerifyTheorem };

struct Task {
  TaskKind kind = TaskKind::CurvatureDump;
  std::string path;
  std::string theorem;
  std::optional<std::set<Identity>> identities;
  std::optional<VectorFieldSpec> X;
};

std::optional<TaskKind> task_kind(const std::string& s) {
  if (s == "curvature-dump") return TaskKind::CurvatureDump;
  if (s == "compare-closedform") return TaskKind::CompareClosedform;
  if (s == "soliton-check") return TaskKind::SolitonCheck;
  if (s == "verify-theorem") return TaskKind::VerifyTheorem;
  return std::nullopt;
}

void check_theorem(const std::string& id, const std::string& path) {
  try {
    (void)verify::theorem_kind(id);
  } catch (const verify::VerifyError& e) {
    throw ConfigError(path, e.what());
  }
}

Task parse_task(const SequentialWarpedProduct& M, const Fields& F, const Json& j, const std::string& path) {
  Task t;
  t.path = path;
  if (j.is_string()) {
    std::string s = j.get<std::string>();
    const std::string prefix = "verify-theorem(";
    if (s.rfind(prefix, 0) == 0 && s.back() == ')') {
      t.kind = TaskKind::VerifyTheorem;
      t.theorem = s.substr(prefix.size(), s.size() - prefix.size() - 1);
      check_theorem(t.theorem, path);
      return t;
    }
    const auto k = task_kind(s);
    if (!k) throw ConfigError(path, "unknown task '" + s + "'");
    if (*k == TaskKind::VerifyTheorem) throw ConfigError(path, "verify-theorem needs an id: verify-theorem(T3.2)");
    t.kind = *k;
    return t;
  }
  if (!j.is_object()) throw ConfigError(path, "expected a task name or object");
  const auto k = task_kind(get_string(require(j, path, "task"), at(path, "task")));
  if (!k) throw ConfigError(at(path, "task"), "unknown task '" + j["task"].get<std::string>() + "'");
  t.kind = *k;
  switch (t.kind) {
  case TaskKind::VerifyTheorem:
    allow_keys(j, path, {"task", "id"});
    t.theorem = get_string(require(j, path, "id"), at(path, "id"));
    check_theorem(t.theorem, at(path, "id"));
    break;
  case TaskKind::CompareClosedform: {
    allow_keys(j, path, {"task", "identities", "X"});
    if (j.contains("identities")) {
      const Json& ids = j["identities"];
      const std::string ip = at(path, "identities");
      if (!ids.is_array() || ids.empty()) throw ConfigError(ip, "expected a non-empty list");
      std::set<Identity> set;
      for (std::size_t q = 0; q < ids.size(); ++q) {
        const std::string s = get_string(ids[q], at(ip, q));
        bool found = false;
        for (Identity id : {Identity::Connection, Identity::Ricci, Identity::Lie})
          if (closedform::to_string(id) == s) {
            set.insert(id);
            found = true;
          }
        if (!found) throw ConfigError(at(ip, q), "expected connection, ricci or lie");
      }
      t.identities = set;
    }
    if (j.contains("X")) t.X = vector_ref(M, F, j["X"], at(path, "X"));
    break;
  }
  default: allow_keys(j, path, {"task"}); break;
  }
  return t;
}

template <class Fn>
auto guarded(const std::string& path, Fn&& fn) -> decltype(fn()) {
  try {
    return fn();
  } catch (const ConfigError&) {
    throw;
  } catch (const verify::VerifyError& e) {
    throw ConfigError(path, e.what());
  } catch (const ModelError& e) {
    throw ConfigError(path, e.what());
  } catch (const EvalError& e) {
    throw ConfigError(path, std::string("evaluation error: ") + e.what());
  } catch (const oracle::SingularMetric& e) {
    throw ConfigError(path, e.what());
  } catch (const std::invalid_argument& e) {
    throw ConfigError(path, e.what());
  }
}

verify::VerdictReport execute(const Task& t, const SequentialWarpedProduct& M,
                              const std::optional<soliton::SolitonInstance>& S, const std::vector<Point>& grid,
                              double tol) {
  auto need_soliton = [&]() -> const soliton::SolitonInstance& {
    if (!S) throw ConfigError(t.path, "this task needs a soliton section");
    return *S;
  };
  return guarded(t.path, [&] {
    switch (t.kind) {
    case TaskKind::CurvatureDump: return verify::curvature_dump(M, grid, tol);
    case TaskKind::SolitonCheck: return verify::soliton_check(M, need_soliton(), grid, tol);
    case TaskKind::VerifyTheorem: return verify::verify_theorem(t.theorem, M, need_soliton(), grid, tol);
    case TaskKind::CompareClosedform: {
      std::optional<VectorFieldSpec> X = t.X;
      if (!X && S && !S->gradient()) X = std::get<VectorFieldSpec>(S->potential);
      std::set<Identity> ids;
      if (t.identities) {
        ids = *t.identities;
      } else {
        ids = {Identity::Connection, Identity::Ricci};
        if (X && std::holds_alternative<BlockFields>(M.decompose_vector_field(*X))) ids.insert(Identity::Lie);
      }
      return verify::compare_closedform(M, ids, X, grid, tol);
    }
    }
    throw ConfigError(t.path, "unhandled task");
  });
}

} // namespace

Outcome evaluate(const Json& config, const Overrides& overrides) {
  allow_keys(config, "", {"instance", "fields", "soliton", "tasks", "grid", "tol", "seed"});
  const Json& tasks_json = require(config, "", "tasks");
  if (!tasks_json.is_array() || tasks_json.empty()) throw ConfigError("tasks", "expected a non-empty list");

  int grid_n = 5;
  if (config.contains("grid")) {
    const Json& g = config["grid"];
    if (!g.is_number_integer()) throw ConfigError("grid", "expected an integer");
    grid_n = g.get<int>();
  }
  if (overrides.grid) grid_n = *overrides.grid;
  if (grid_n < 2) throw ConfigError("grid", "needs at least 2 points per coordinate");

  double tol = soliton::kDefaultTolerance;
  if (config.contains("tol")) tol = get_number(config["tol"], "tol");
  if (overrides.tol) tol = *overrides.tol;
  if (!(tol > 0.0)) throw ConfigError("tol", "must be positive");

  std::optional<std::int64_t> seed;
  if (config.contains("seed")) {
    if (!config["seed"].is_number_integer()) throw ConfigError("seed", "expected an integer");
    seed = config["seed"].get<std::int64_t>();
  }

  const SequentialWarpedProduct M = build_instance(require(config, "", "instance"));
  const Fields F = config.contains("fields") ? parse_fields(M, config["fields"]) : Fields{};
  std::optional<soliton::SolitonInstance> S;
  if (config.contains("soliton")) S = parse_soliton(M, F, config["soliton"]);
  std::vector<Task> tasks;
  for (std::size_t q = 0; q < tasks_json.size(); ++q) tasks.push_back(parse_task(M, F, tasks_json[q], at("tasks", q)));

  const std::vector<Point> grid = M.sample_grid(grid_n);
  guarded("instance", [&] {
    M.validate_on(grid);
    return 0;
  });

  Outcome out;
  out.info.instance = M.name();
  out.info.kind = to_string(M.kind());
  out.info.coordinates = M.coordinates();
  out.info.grid = grid_n;
  out.info.points = grid.size();
  out.info.tol = tol;
  out.info.seed = seed;
  for (const auto& t : tasks) out.reports.push_back(execute(t, M, S, grid, tol));
  out.exit_code = verify::exit_code(out.reports);
  out.info.exit_code = out.exit_code;
  return out;
}

std::string catalog_listing() {
  std::string s;
  for (const auto& n : catalog::names()) s += n + "  " + catalog::describe(n) + "\n";
  return s;
}

int run(const Request& request, std::ostream& out, std::ostream& err) {
  Json config;
  {
    std::ifstream in(request.config_path);
    if (!in) {
      err << "error: cannot read config '" << request.config_path << "'\n";
      return kExitError;
    }
    try {
      config = Json::parse(in);
    } catch (const Json::parse_error& e) {
      err << "error: config is not valid JSON: " << e.what() << "\n";
      return kExitError;
    }
  }

  Outcome o;
  try {
    o = evaluate(config, request.overrides);
  } catch (const ConfigError& e) {
    err << "error: " << e.what() << "\n";
    return kExitError;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << "\n";
    return kExitError;
  }
  o.info.generated_at = report::timestamp_utc();

  namespace fs = std::filesystem;
  std::error_code ec;
  fs::create_directories(request.out_dir, ec);
  if (ec) {
    err << "error: cannot create output directory '" << request.out_dir << "': " << ec.message() << "\n";
    return kExitError;
  }
  const std::string text = report::render_text(o.info, o.reports);
  auto write = [&](const char* name, const std::string& body) {
    std::ofstream f(fs::path(request.out_dir) / name, std::ios::binary);
    f << body;
    return static_cast<bool>(f);
  };
  if (request.format != Format::Text && !write("report.json", report::dump(report::to_json(o.info, o.reports)))) {
    err << "error: cannot write report.json\n";
    return kExitError;
  }
  if (request.format != Format::Json && !write("report.txt", text)) {
    err << "error: cannot write report.txt\n";
    return kExitError;
  }
  if (!request.quiet) out << text;
  return o.exit_code;
}

} // namespace swp::run
