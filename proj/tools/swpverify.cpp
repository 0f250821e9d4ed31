#include "swp/run.hpp"

#include <CLI11.hpp>

#include <iostream>
#include <map>

int main(int argc, char** argv) {
  CLI::App app{"Verify sequential warped product soliton identities against a coordinate oracle"};
  swp::run::Request req;
  int grid = 0;
  double tol = 0.0;
  std::string format = "both";
  bool list = false;

  app.add_option("--config", req.config_path, "JSON run configuration")->check(CLI::ExistingFile);
  auto* grid_opt = app.add_option("--grid", grid, "points per coordinate (overrides config)")->check(CLI::Range(2, 1000));
  auto* tol_opt = app.add_option("--tol", tol, "tolerance (overrides config)")->check(CLI::PositiveNumber);
  app.add_option("--format", format, "report files to write")->check(CLI::IsMember({"text", "json", "both"}));
  app.add_flag("--catalog", list, "list built-in instances and exit");
  app.add_option("--out", req.out_dir, "output directory for report.json and report.txt");
  app.add_flag("--quiet", req.quiet, "do not print the text report");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : swp::run::kExitError;
  }

  if (list) {
    std::cout << swp::run::catalog_listing();
    return 0;
  }
  if (req.config_path.empty()) {
    std::cerr << "error: --config is required\n";
    return swp::run::kExitError;
  }
  if (*grid_opt) req.overrides.grid = grid;
  if (*tol_opt) req.overrides.tol = tol;
  static const std::map<std::string, swp::run::Format> formats{
      {"text", swp::run::Format::Text}, {"json", swp::run::Format::Json}, {"both", swp::run::Format::Both}};
  req.format = formats.at(format);
  return swp::run::run(req, std::cout, std::cerr);
}
