#pragma once

#include <Eigen/Dense>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "steinlab/bounds.hpp"
#include "steinlab/functionals.hpp"
#include "steinlab/geometry.hpp"
#include "steinlab/mc_sim.hpp"
#include "steinlab/measures.hpp"
#include "steinlab/semigroup.hpp"
#include "steinlab/verdict.hpp"
#include "json.hpp"

namespace steinlab {

// One requested check. `kind` is one of hsi, ws, hwsi, talagrand_refinement,
// lsi_refinement, lsi, de_bruijn, fisher_decay, fisher_stein, hessian,
// variance_control.
struct InequalitySpec {
  std::string kind;
  std::string variant;       // hsi case, ws variant, hessian variant, psi variant for fisher_stein
  double constant = 0.0;     // lsi: H <= I / (2 constant); 0 means K
  std::vector<double> t;     // fisher_stein and hessian times; empty uses the engine grid
  std::string field;         // hessian test function
  std::vector<double> point; // hessian base point (ambient); empty uses the preset default
};

struct BoundSettings {
  std::string eps_choice = "grid";  // grid | fixed | quartic
  double eps = 1.0;                 // used when eps_choice = fixed
  double p = 2.0;
  double delta = 0.0;               // 0 with a quartic potential: delta^2 = 1/(24 a)
};

struct Scenario {
  std::string name = "unnamed";
  ModelSpace space = ModelSpace::gaussian(1, 1.0);
  DensitySpec density;
  int resolution = 1024;
  Backend backend = Backend::MehlerOU;
  std::vector<double> t_grid{0.25, 0.5, 1.0, 2.0};
  double engine_tol = 1e-8;
  EngineOptions engine;
  FunctionalOptions functionals;
  BoundSettings bounds;
  McConfig mc;
  double verdict_floor = 1e-12;  // added to every numeric_error
  std::vector<InequalitySpec> inequalities;
  std::string json_out;
  std::string csv_out;
};

Scenario parse_scenario(const std::string& yaml_text);
Scenario load_scenario(const std::string& path);
// Every resolved field, defaults included.
nlohmann::json scenario_to_json(const Scenario& s);

std::vector<std::string> preset_names();
std::string preset_yaml(const std::string& name);
// Accepts a file path or "preset:<name>".
Scenario resolve_scenario(const std::string& config);

struct KernelSummary {
  std::string construction;
  double residual = 0.0;
  double drift_balance = 0.0;
  bool finite_discrepancy = true;
  int test_functions = 0;
  int basis_degree = 0;
};

struct Report {
  std::string name;
  nlohmann::json scenario;
  Estimate H, I, W2, S;
  std::string w2_method;
  std::map<double, double> S_p;
  std::map<int, double> moment_ratio;
  double variance_defect = 0.0;
  KernelSummary kernel;
  std::map<std::string, double> closed_forms;
  CurvatureConstants constants;
  std::vector<InequalityVerdict> verdicts;
  nlohmann::json provenance;
  int exit_code = 0;

  bool operator==(const Report& o) const;
};

// Computes functionals, evaluates every requested inequality; exit_code is 0 or 1.
// Numeric and hypothesis failures propagate as steinlab::Error.
Report run_scenario(const Scenario& s);
Report run_scenario(const Scenario& s, const FunctionalReport& precomputed);

// Exit code for an exception escaping run_scenario: 3 precondition, 2 numeric.
int exit_code_for(const std::exception& e);

// Sweep parameters: sigma2, shift_m, quartic_a, kappa, t.
Scenario with_parameter(const Scenario& s, const std::string& parameter, double value);

struct SweepRow {
  std::string parameter;
  double value = 0.0;
  std::string scenario;
  InequalityVerdict verdict;
};
struct SweepResult {
  std::vector<SweepRow> rows;
  int exit_code = 0;
};
SweepResult sweep(const Scenario& s, const std::string& parameter, const std::vector<double>& grid);

nlohmann::json report_to_json(const Report& r);
Report report_from_json(const nlohmann::json& j);
std::string emit_json(const Report& r);

std::string csv_header();
std::string csv_rows(const Report& r);
std::string sweep_csv(const SweepResult& s);

// Encodes non-finite doubles as "inf", "-inf", "nan".
nlohmann::json number(double x);
double number_from(const nlohmann::json& j);

}  // namespace steinlab
