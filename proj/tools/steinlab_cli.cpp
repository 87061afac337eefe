#include <CLI11.hpp>

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>

#include "steinlab/error.hpp"
#include "steinlab/scenario.hpp"

namespace fs = std::filesystem;
using namespace steinlab;

namespace {

struct Common {
  std::string config;
  std::optional<std::uint64_t> seed;
  std::optional<std::int64_t> samples;
  std::optional<double> tol;
  std::string out;
  bool json = false;
};

void add_common(CLI::App* app, Common& c) {
  app->add_option("--config", c.config, "scenario file, or preset:<name>")->required();
  app->add_option("--seed", c.seed, "Monte-Carlo seed override");
  app->add_option("--samples", c.samples, "Monte-Carlo path count override");
  app->add_option("--tol", c.tol, "verdict tolerance floor override");
  app->add_option("--out", c.out, "output directory (run) or CSV path (sweep)");
  app->add_flag("--json", c.json, "print the JSON report to stdout");
}

Scenario load(const Common& c) {
  Scenario s = resolve_scenario(c.config);
  if (c.seed) s.mc.seed = *c.seed;
  if (c.samples) s.mc.paths = *c.samples;
  if (c.tol) s.verdict_floor = *c.tol;
  return s;
}

void write_file(const fs::path& p, const std::string& text) {
  if (p.has_parent_path()) fs::create_directories(p.parent_path());
  std::ofstream o(p, std::ios::binary);
  if (!o) fail(ErrorCode::ConfigError, "cannot write '" + p.string() + "'");
  o << text;
}

void print_table(const Report& r) {
  std::printf("%s\n", r.name.c_str());
  std::printf("  H = %.10g (+- %.2g)  I = %.10g (+- %.2g)  S = %.10g  W2 = %.10g\n", r.H.value, r.H.error, r.I.value,
              r.I.error, r.S.value, r.W2.value);
  for (const auto& v : r.verdicts)
    std::printf("  %-5s %-20s %-28s lhs=%-14.8g rhs=%-14.8g margin=%.3g\n", v.holds ? "ok" : "FAIL", v.name.c_str(),
                v.case_label.c_str(), v.lhs, v.rhs, v.margin);
}

int cmd_run(const Common& c) {
  const Scenario s = load(c);
  const Report r = run_scenario(s);
  const std::string text = emit_json(r);
  std::string json_path = s.json_out, csv_path = s.csv_out;
  if (!c.out.empty()) {
    json_path = (fs::path(c.out) / "report.json").string();
    csv_path = (fs::path(c.out) / "verdicts.csv").string();
  }
  if (!json_path.empty()) write_file(json_path, text);
  if (!csv_path.empty()) write_file(csv_path, csv_header() + csv_rows(r));
  if (c.json) std::cout << text;
  else print_table(r);
  return r.exit_code;
}

std::vector<double> parse_grid(const std::string& g) {
  std::vector<double> out;
  std::stringstream ss(g);
  std::string item;
  while (std::getline(ss, item, ',')) {
    if (item.empty()) continue;
    try {
      out.push_back(std::stod(item));
    } catch (const std::exception&) {
      fail(ErrorCode::ConfigError, "bad grid value '" + item + "'");
    }
  }
  return out;
}

int cmd_sweep(const Common& c, const std::string& param, const std::string& grid) {
  const Scenario s = load(c);
  const SweepResult r = sweep(s, param, parse_grid(grid));
  const std::string csv = sweep_csv(r);
  if (!c.out.empty()) write_file(c.out, csv);
  else std::cout << csv;
  return r.exit_code;
}

int cmd_functionals(const Common& c) {
  Scenario s = load(c);
  s.inequalities.clear();
  const Report r = run_scenario(s);
  nlohmann::json j = report_to_json(r);
  nlohmann::json out = {{"name", r.name}, {"functionals", j["functionals"]}, {"closed_forms", j["closed_forms"]},
                        {"constants", j["constants"]}};
  std::cout << out.dump(2) << "\n";
  return 0;
}

int cmd_verify_hessian(const Common& c) {
  Scenario s = load(c);
  std::vector<InequalitySpec> keep;
  for (const auto& q : s.inequalities)
    if (q.kind == "hessian") keep.push_back(q);
  if (keep.empty()) fail(ErrorCode::ConfigError, "scenario has no hessian checks");
  s.inequalities = keep;
  s.functionals.with_w2 = false;
  const Report r = run_scenario(s);
  if (c.json) std::cout << emit_json(r);
  else print_table(r);
  if (!c.out.empty()) write_file(c.out, csv_header() + csv_rows(r));
  return r.exit_code;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Numerical checks of entropy, Fisher information, Stein discrepancy and W2 inequalities"};
  app.require_subcommand(1);
  Common run_c, sweep_c, fun_c, hess_c;
  std::string param, grid, dump;

  auto* run = app.add_subcommand("run", "evaluate a scenario");
  add_common(run, run_c);
  auto* sw = app.add_subcommand("sweep", "rerun a scenario across a parameter grid");
  add_common(sw, sweep_c);
  sw->add_option("--param", param, "sigma2 | shift_m | quartic_a | kappa | t")->required();
  sw->add_option("--grid", grid, "comma-separated values")->required();
  auto* fun = app.add_subcommand("functionals", "print H, I, W2, S_p and moment ratios");
  add_common(fun, fun_c);
  auto* hess = app.add_subcommand("verify-hessian", "run the Monte-Carlo Hessian checks of a scenario");
  add_common(hess, hess_c);
  auto* pre = app.add_subcommand("presets", "list built-in scenarios");
  pre->add_option("--dump", dump, "print the YAML of one preset");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 3;
  }
  try {
    if (*run) return cmd_run(run_c);
    if (*sw) return cmd_sweep(sweep_c, param, grid);
    if (*fun) return cmd_functionals(fun_c);
    if (*hess) return cmd_verify_hessian(hess_c);
    if (*pre) {
      if (!dump.empty()) std::cout << preset_yaml(dump);
      else
        for (const auto& n : preset_names()) std::cout << n << "\n";
      return 0;
    }
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return exit_code_for(e);
  }
  return 0;
}
