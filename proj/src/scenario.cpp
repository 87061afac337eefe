#include "steinlab/scenario.hpp"

#include <yaml-cpp/yaml.h>

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <set>
#include <sstream>

#include "steinlab/error.hpp"

namespace steinlab {

namespace {

using nlohmann::json;

[[noreturn]] void config_error(const std::string& what) { fail(ErrorCode::ConfigError, what); }

void check_keys(const YAML::Node& node, const std::string& where, std::initializer_list<const char*> allowed) {
  if (!node) return;
  if (!node.IsMap()) config_error("'" + where + "' must be a mapping");
  std::set<std::string> ok(allowed.begin(), allowed.end());
  for (const auto& kv : node) {
    const std::string key = kv.first.as<std::string>();
    if (!ok.count(key)) config_error("unknown key '" + key + "' in '" + where + "'");
  }
}

template <class T>
void read(const YAML::Node& node, const char* key, T& out) {
  if (!node || !node[key]) return;
  try {
    out = node[key].as<T>();
  } catch (const YAML::Exception& e) {
    config_error(std::string("bad value for '") + key + "': " + e.what());
  }
}

std::vector<double> read_list(const YAML::Node& node, const char* key, std::vector<double> fallback) {
  if (!node || !node[key]) return fallback;
  const YAML::Node v = node[key];
  try {
    if (v.IsScalar()) return {v.as<double>()};
    if (!v.IsSequence()) config_error(std::string("'") + key + "' must be a number or a list");
    std::vector<double> out;
    for (const auto& x : v) out.push_back(x.as<double>());
    return out;
  } catch (const YAML::Exception& e) {
    config_error(std::string("bad list for '") + key + "': " + e.what());
  }
}

KernelConstruction construction_from_string(const std::string& s) {
  for (auto c : {KernelConstruction::Explicit1D, KernelConstruction::ClosedFormGaussian,
                 KernelConstruction::LeastSquaresBasis})
    if (to_string(c) == s) return c;
  config_error("unknown kernel construction '" + s + "'");
}

const std::set<std::string> kKinds{"hsi",          "ws",           "hwsi",          "talagrand_refinement",
                                   "lsi_refinement", "lsi",        "de_bruijn",     "fisher_decay",
                                   "fisher_stein", "hessian",      "variance_control"};

ModelSpace parse_space(const YAML::Node& n) {
  check_keys(n, "space", {"kind", "dimension", "potential"});
  std::string kind = "line";
  read(n, "kind", kind);
  int dim = kind == "sphere" ? 2 : 1;
  read(n, "dimension", dim);
  PotentialSpec V;
  if (n && n["potential"]) {
    const YAML::Node p = n["potential"];
    check_keys(p, "space.potential", {"kind", "K", "a"});
    std::string pk = "zero";
    double K = 1.0, a = 0.0;
    read(p, "kind", pk);
    read(p, "K", K);
    read(p, "a", a);
    if (pk == "zero") V = PotentialSpec::zero();
    else if (pk == "quadratic") V = PotentialSpec::quadratic(K);
    else if (pk == "quartic") V = PotentialSpec::quartic(a);
    else config_error("unknown potential kind '" + pk + "'");
  } else if (kind != "sphere") {
    V = PotentialSpec::quadratic(1.0);
  }
  ModelSpace s;
  if (kind == "line") s = ModelSpace::line(V);
  else if (kind == "euclidean") s = ModelSpace::euclidean(dim, V);
  else if (kind == "sphere") {
    if (V.kind != PotentialKind::Zero) fail(ErrorCode::UnsupportedSpace, "sphere potentials must be zero");
    s.kind = SpaceKind::Sphere;
    s.dimension = dim;
  } else {
    config_error("unknown space kind '" + kind + "'");
  }
  s.validate();
  return s;
}

InequalitySpec parse_inequality(const YAML::Node& n) {
  check_keys(n, "inequalities[]", {"kind", "case", "variant", "constant", "t", "field", "point"});
  InequalitySpec q;
  read(n, "kind", q.kind);
  if (!kKinds.count(q.kind)) config_error("unknown inequality kind '" + q.kind + "'");
  read(n, "variant", q.variant);
  read(n, "case", q.variant);
  read(n, "constant", q.constant);
  q.t = read_list(n, "t", {});
  read(n, "field", q.field);
  q.point = read_list(n, "point", {});
  return q;
}

}  // namespace

Scenario parse_scenario(const std::string& yaml_text) {
  YAML::Node root;
  try {
    root = YAML::Load(yaml_text);
  } catch (const YAML::Exception& e) {
    config_error(std::string("config does not parse: ") + e.what());
  }
  if (!root.IsMap()) config_error("config root must be a mapping");
  check_keys(root, "root",
             {"name", "space", "measure", "engine", "functionals", "bounds", "mc", "tolerances", "inequalities",
              "output"});
  Scenario s;
  read(root, "name", s.name);
  s.space = parse_space(root["space"]);

  const YAML::Node m = root["measure"];
  check_keys(m, "measure", {"family", "sigma2", "shift", "a", "kappa", "c", "resolution"});
  std::string family = "identity";
  read(m, "family", family);
  s.density.family = family_from_string(family);
  read(m, "sigma2", s.density.sigma2);
  read(m, "shift", s.density.shift);
  read(m, "a", s.density.a);
  read(m, "kappa", s.density.kappa);
  read(m, "c", s.density.c);
  read(m, "resolution", s.resolution);
  if (s.resolution < 64) config_error("measure.resolution must be >= 64");

  const YAML::Node e = root["engine"];
  check_keys(e, "engine",
             {"backend", "t_grid", "tol", "dx", "dt_max", "hermite_order", "degree", "max_degree", "spectral_tail",
              "t_max"});
  s.backend = default_backend(s.space);
  if (e && e["backend"]) s.backend = backend_from_string(e["backend"].as<std::string>());
  s.t_grid = read_list(e, "t_grid", s.t_grid);
  read(e, "tol", s.engine_tol);
  read(e, "dx", s.engine.dx);
  read(e, "dt_max", s.engine.dt_max);
  read(e, "hermite_order", s.engine.hermite_order);
  read(e, "degree", s.engine.degree);
  read(e, "max_degree", s.engine.max_degree);
  read(e, "spectral_tail", s.engine.spectral_tail);
  read(e, "t_max", s.engine.t_max);

  const YAML::Node f = root["functionals"];
  check_keys(f, "functionals", {"w2", "ps", "moment_ps", "moment_f", "sinkhorn", "kernel"});
  FunctionalOptions& fo = s.functionals;
  read(f, "w2", fo.with_w2);
  fo.ps = read_list(f, "ps", fo.ps);
  {
    std::vector<double> mp(fo.moment_ps.begin(), fo.moment_ps.end());
    mp = read_list(f, "moment_ps", mp);
    fo.moment_ps.clear();
    for (double p : mp) {
      if (p != std::floor(p) || p < 2 || static_cast<int>(p) % 2) config_error("moment_ps must be even integers");
      fo.moment_ps.push_back(static_cast<int>(p));
    }
  }
  if (f && f["moment_f"]) fo.moment_f = test_function_from_string(f["moment_f"].as<std::string>());
  if (f && f["sinkhorn"]) {
    const YAML::Node k = f["sinkhorn"];
    check_keys(k, "functionals.sinkhorn",
               {"eps_start", "eps_min", "eps_factor", "iters_per_level", "marginal_tol", "debias", "points", "seed"});
    read(k, "eps_start", fo.sinkhorn.eps_start);
    read(k, "eps_min", fo.sinkhorn.eps_min);
    read(k, "eps_factor", fo.sinkhorn.eps_factor);
    read(k, "iters_per_level", fo.sinkhorn.iters_per_level);
    read(k, "marginal_tol", fo.sinkhorn.marginal_tol);
    read(k, "debias", fo.sinkhorn.debias);
    read(k, "points", fo.sinkhorn.points);
    read(k, "seed", fo.sinkhorn.seed);
  }
  if (f && f["kernel"]) {
    const YAML::Node k = f["kernel"];
    check_keys(k, "functionals.kernel", {"construction", "test_functions", "basis_degree", "test_degree", "balance_tol"});
    if (k["construction"]) fo.kernel.construction = construction_from_string(k["construction"].as<std::string>());
    read(k, "test_functions", fo.kernel.test_functions);
    read(k, "basis_degree", fo.kernel.basis_degree);
    read(k, "test_degree", fo.kernel.test_degree);
    read(k, "balance_tol", fo.kernel.balance_tol);
  }

  const YAML::Node b = root["bounds"];
  check_keys(b, "bounds", {"eps_choice", "eps", "p", "delta"});
  read(b, "eps_choice", s.bounds.eps_choice);
  read(b, "eps", s.bounds.eps);
  read(b, "p", s.bounds.p);
  read(b, "delta", s.bounds.delta);
  if (s.bounds.eps_choice != "grid" && s.bounds.eps_choice != "fixed" && s.bounds.eps_choice != "quartic")
    config_error("bounds.eps_choice must be grid, fixed or quartic");

  const YAML::Node mc = root["mc"];
  check_keys(mc, "mc", {"seed", "paths", "step", "threads", "batches"});
  read(mc, "seed", s.mc.seed);
  read(mc, "paths", s.mc.paths);
  read(mc, "step", s.mc.step);
  read(mc, "threads", s.mc.threads);
  read(mc, "batches", s.mc.batches);

  const YAML::Node t = root["tolerances"];
  check_keys(t, "tolerances", {"verdict_floor", "engine"});
  read(t, "verdict_floor", s.verdict_floor);
  read(t, "engine", s.engine_tol);

  const YAML::Node ineq = root["inequalities"];
  if (ineq) {
    if (!ineq.IsSequence()) config_error("'inequalities' must be a list");
    for (const auto& q : ineq) s.inequalities.push_back(parse_inequality(q));
  }
  const YAML::Node o = root["output"];
  check_keys(o, "output", {"json", "csv"});
  read(o, "json", s.json_out);
  read(o, "csv", s.csv_out);
  return s;
}

Scenario load_scenario(const std::string& path) {
  std::ifstream in(path);
  if (!in) config_error("cannot open config '" + path + "'");
  std::stringstream ss;
  ss << in.rdbuf();
  return parse_scenario(ss.str());
}

json scenario_to_json(const Scenario& s) {
  json j;
  j["name"] = s.name;
  j["space"] = {{"kind", to_string(s.space.kind)},
                {"dimension", s.space.dimension},
                {"potential", {{"kind", to_string(s.space.potential.kind)}, {"K", s.space.potential.K},
                               {"a", s.space.potential.a}}}};
  j["measure"] = {{"family", to_string(s.density.family)}, {"sigma2", s.density.sigma2}, {"shift", s.density.shift},
                  {"a", s.density.a}, {"kappa", s.density.kappa}, {"c", s.density.c},
                  {"resolution", s.resolution}};
  const EngineOptions& e = s.engine;
  j["engine"] = {{"backend", to_string(s.backend)}, {"t_grid", s.t_grid}, {"tol", s.engine_tol},
                 {"dx", e.dx}, {"dt_max", e.dt_max}, {"hermite_order", e.hermite_order}, {"degree", e.degree},
                 {"max_degree", e.max_degree}, {"spectral_tail", e.spectral_tail}, {"t_max", e.t_max}};
  const FunctionalOptions& f = s.functionals;
  const SinkhornOptions& k = f.sinkhorn;
  j["functionals"] = {
      {"w2", f.with_w2},
      {"ps", f.ps},
      {"moment_ps", f.moment_ps},
      {"moment_f", to_string(f.moment_f)},
      {"sinkhorn",
       {{"eps_start", k.eps_start}, {"eps_min", k.eps_min}, {"eps_factor", k.eps_factor},
        {"iters_per_level", k.iters_per_level}, {"marginal_tol", k.marginal_tol}, {"debias", k.debias},
        {"points", k.points}, {"seed", k.seed}}},
      {"kernel",
       {{"construction", f.kernel.construction ? to_string(*f.kernel.construction) : std::string("auto")},
        {"test_functions", f.kernel.test_functions}, {"basis_degree", f.kernel.basis_degree},
        {"test_degree", f.kernel.test_degree}, {"balance_tol", f.kernel.balance_tol}}}};
  j["bounds"] = {{"eps_choice", s.bounds.eps_choice}, {"eps", s.bounds.eps}, {"p", s.bounds.p},
                 {"delta", s.bounds.delta}};
  j["mc"] = {{"seed", s.mc.seed}, {"paths", s.mc.paths}, {"step", s.mc.step}, {"threads", s.mc.threads},
             {"batches", s.mc.batches}};
  j["tolerances"] = {{"verdict_floor", s.verdict_floor}, {"engine", s.engine_tol}};
  json list = json::array();
  for (const auto& q : s.inequalities)
    list.push_back({{"kind", q.kind}, {"variant", q.variant}, {"constant", q.constant}, {"t", q.t},
                    {"field", q.field}, {"point", q.point}});
  j["inequalities"] = list;
  j["output"] = {{"json", s.json_out}, {"csv", s.csv_out}};
  return j;
}

// ----------------------------------------------------------------- presets

namespace {

const std::map<std::string, std::string>& presets() {
  static const std::map<std::string, std::string> p{
      {"identity", R"(name: identity
space: {kind: line, potential: {kind: quadratic, K: 1}}
measure: {family: identity}
engine: {t_grid: [0.5, 1, 2]}
inequalities:
  - {kind: hsi, case: flat}
  - {kind: hsi, case: generic_inf}
  - {kind: ws, variant: flat_arccos}
  - {kind: hwsi}
  - {kind: lsi_refinement}
  - {kind: de_bruijn}
  - {kind: fisher_decay}
  - {kind: fisher_stein}
  - {kind: variance_control}
)"},
      {"gaussian-hsi", R"(name: gaussian-hsi
space: {kind: line, potential: {kind: quadratic, K: 1}}
measure: {family: gaussian_scale, sigma2: 2}
engine: {t_grid: [0.25, 0.5, 1, 2, 4]}
inequalities:
  - {kind: hsi, case: flat}
  - {kind: hsi, case: case0_ii}
  - {kind: hsi, case: c0_general}
  - {kind: hsi, case: generic_inf}
  - {kind: lsi_refinement, case: flat}
  - {kind: ws, variant: flat_arccos}
  - {kind: ws, variant: integral_typeI}
  - {kind: hwsi}
  - {kind: talagrand_refinement}
  - {kind: de_bruijn}
  - {kind: fisher_decay}
  - {kind: fisher_stein}
  - {kind: variance_control}
)"},
      {"gaussian-shift", R"(name: gaussian-shift
space: {kind: line, potential: {kind: quadratic, K: 1}}
measure: {family: gaussian_shift, shift: 1}
engine: {t_grid: [0.5, 1, 2]}
inequalities:
  - {kind: hsi, case: flat}
  - {kind: ws, variant: flat_arccos}
  - {kind: hwsi}
  - {kind: talagrand_refinement}
  - {kind: de_bruijn}
  - {kind: fisher_decay}
)"},
      {"fisher-decay", R"(name: fisher-decay
space: {kind: line, potential: {kind: quadratic, K: 1}}
measure: {family: gaussian_scale, sigma2: 4}
engine: {backend: line_pde, t_grid: [0.1, 0.25, 0.5, 1, 2, 4]}
functionals: {w2: false}
inequalities:
  - {kind: fisher_decay}
  - {kind: fisher_stein}
  - {kind: de_bruijn}
)"},
      {"quartic", R"(name: quartic
space: {kind: line, potential: {kind: quartic, a: 1}}
measure: {family: quartic_tilt, a: 0.5}
engine: {t_grid: [0.5, 1, 2]}
bounds: {eps_choice: quartic, p: 2}
functionals: {w2: false}
inequalities:
  - {kind: hsi, case: unbounded_beta}
  - {kind: lsi_refinement, case: unbounded_beta}
  - {kind: fisher_stein, variant: unbounded_beta}
  - {kind: de_bruijn}
  - {kind: fisher_decay}
  - {kind: variance_control}
)"},
      {"sphere-n2-case2", R"(name: sphere-n2-case2
space: {kind: sphere, dimension: 2}
measure: {family: von_mises, kappa: 1}
engine: {t_grid: [0.25, 0.5, 1, 2]}
functionals: {w2: false}
inequalities:
  - {kind: hsi, case: case2_ii}
  - {kind: hsi, case: case2_i}
  - {kind: hsi, case: c0_exact}
  - {kind: hsi, case: generic_inf}
  - {kind: lsi_refinement, case: case2_ii}
  - {kind: de_bruijn}
  - {kind: fisher_decay}
  - {kind: fisher_stein}
)"},
      {"sphere-w2", R"(name: sphere-w2
space: {kind: sphere, dimension: 2}
measure: {family: von_mises, kappa: 1}
engine: {t_grid: [0.5, 1]}
functionals: {sinkhorn: {points: 400, eps_min: 0.01, iters_per_level: 2000}}
inequalities:
  - {kind: ws, variant: integral_typeI}
  - {kind: ws, variant: integral_typeII}
)"},
      {"sphere-n10-gamma", R"(name: sphere-n10-gamma
space: {kind: sphere, dimension: 10}
measure: {family: von_mises, kappa: 0.5}
engine: {t_grid: [0.1, 0.5]}
functionals: {w2: false}
inequalities:
  - {kind: hsi, case: gamma_calculus}
  - {kind: hsi, case: case2_ii}
  - {kind: de_bruijn}
)"},
      {"sphere-hessian", R"(name: sphere-hessian
space: {kind: sphere, dimension: 2}
measure: {family: identity}
functionals: {w2: false}
mc: {seed: 11, paths: 20000, step: 0.001}
inequalities:
  - {kind: hessian, field: zonal_l1, t: [0.25, 1]}
  - {kind: hessian, field: zonal_l2, t: [1]}
)"},
      {"ou-hessian", R"(name: ou-hessian
space: {kind: line, potential: {kind: quadratic, K: 1}}
measure: {family: identity}
functionals: {w2: false}
mc: {seed: 5, paths: 20000, step: 0.001}
inequalities:
  - {kind: hessian, field: sin, t: [0.5], variant: typeI_op}
  - {kind: hessian, field: sin, t: [0.5], variant: typeII_op}
  - {kind: hessian, field: x2, t: [1]}
)"},
  };
  return p;
}

}  // namespace

std::vector<std::string> preset_names() {
  std::vector<std::string> out;
  for (const auto& kv : presets()) out.push_back(kv.first);
  return out;
}

std::string preset_yaml(const std::string& name) {
  const auto it = presets().find(name);
  if (it == presets().end()) fail(ErrorCode::ConfigError, "unknown preset '" + name + "'");
  return it->second;
}

Scenario resolve_scenario(const std::string& config) {
  const std::string tag = "preset:";
  if (config.rfind(tag, 0) == 0) return parse_scenario(preset_yaml(config.substr(tag.size())));
  return load_scenario(config);
}

// ------------------------------------------------------------------- run

namespace {

std::string fmt(double x) {
  char b[64];
  std::snprintf(b, sizeof b, "%.6g", x);
  return b;
}

struct Context {
  const Scenario& s;
  const MeasurePair& pair;
  const FunctionalReport& fr;
  const CurvatureConstants& cc;
  double H, I, S, W2, eH, eI, eS, eW;
  std::optional<SemigroupEngine> engine;

  const SemigroupEngine& get_engine() {
    if (!engine) engine.emplace(s.backend, s.space, s.t_grid, s.engine_tol, s.engine);
    return *engine;
  }
};

BoundParams params_for(const Context& c, const std::string& variant) {
  BoundParams P = BoundParams::from(c.cc);
  if (c.s.space.kind == SpaceKind::Sphere && c.s.space.dimension >= 2) {
    try {
      const GammaConstants g = gamma_constants(c.s.space);
      P.rho = g.rho;
      P.kappa = g.kappa;
      P.sigma = g.sigma;
    } catch (const Error&) {
    }
  }
  P.p = c.s.bounds.p;
  P.delta = c.s.bounds.delta;
  if (variant == "unbounded_beta") {
    const PotentialSpec& V = c.s.space.potential;
    if (P.delta <= 0.0) {
      if (V.kind != PotentialKind::Quartic || !(V.a > 0.0) || P.p != 2.0)
        fail(ErrorCode::HypothesisViolated, "unbounded_beta needs bounds.delta > 0");
      P.delta = 1.0 / std::sqrt(24.0 * V.a);
    }
    P.K = require_theorem3(c.s.space, P.p, P.delta);
  }
  if (c.s.bounds.eps_choice == "fixed") P.eps = c.s.bounds.eps;
  else if (c.s.bounds.eps_choice == "quartic" && variant == "unbounded_beta") P.eps = quartic_eps(P);
  return P;
}

std::map<std::string, double> base_inputs(const Context& c) {
  return {{"H", c.H}, {"I", c.I}, {"S", c.S}, {"K", c.cc.K}};
}

double floor_of(const Context& c) { return c.s.verdict_floor; }

// |f(I + eI, S + eS) - f(I, S)|, the first-order error of a bound fed by I and S.
template <class F>
double sensitivity(const Context& c, F&& f, double base) {
  if (!std::isfinite(base)) return 0.0;
  const double S_up = std::isfinite(c.S) ? c.S + c.eS : c.S;
  const double up = f(c.I + c.eI, S_up);
  return std::isfinite(up) ? std::abs(up - base) : 0.0;
}

std::string default_hsi_case(const Context& c) {
  return c.cc.hess_exact ? "flat" : "generic_inf";
}

void eval_one(Context& c, const InequalitySpec& q, std::vector<InequalityVerdict>& out) {
  const auto& k = q.kind;
  if (k == "hsi" || k == "lsi_refinement") {
    const std::string cs = q.variant.empty() ? default_hsi_case(c) : q.variant;
    const HsiCase hc = hsi_case_from_string(cs);
    const BoundParams P = params_for(c, cs);
    auto f = [&](double I, double S) { return hsi_bound(I, S, P, hc); };
    const double rhs = f(c.I, c.S);
    auto in = base_inputs(c);
    in["K_used"] = P.K;
    if (P.eps > 0.0) in["eps"] = P.eps;
    if (k == "hsi") {
      out.push_back(verdict("hsi", c.H, rhs, c.eH + sensitivity(c, f, rhs) + floor_of(c), cs, in));
    } else {
      const double lsi = lsi_bound(c.I, P.K);
      const double err = 1e-12 * std::max(1.0, lsi) + floor_of(c);
      out.push_back(verdict("lsi_refinement", rhs, lsi, err, cs, in));
    }
  } else if (k == "lsi") {
    const double C = q.constant > 0.0 ? q.constant : c.cc.K;
    const double rhs = lsi_bound(c.I, C);
    auto in = base_inputs(c);
    in["constant"] = C;
    out.push_back(verdict("lsi", c.H, rhs, c.eH + c.eI / (2.0 * C) + floor_of(c), "constant=" + fmt(C), in));
  } else if (k == "ws") {
    const std::string v = q.variant.empty() ? "flat_arccos" : q.variant;
    const WsVariant wv = ws_variant_from_string(v);
    const BoundParams P = params_for(c, v);
    const double rhs = ws_bound(c.S, P, wv, c.H);
    double err = c.eW + floor_of(c);
    if (std::isfinite(rhs) && std::isfinite(c.S)) {
      const double up = ws_bound(c.S + c.eS, P, wv, c.H + c.eH);
      err += std::abs(up - rhs);
    }
    out.push_back(verdict("ws", c.W2, rhs, err, v, base_inputs(c)));
  } else if (k == "hwsi") {
    const BoundParams P = params_for(c, "hwsi");
    const double rhs = hwsi_bound(c.H, c.S, P);
    double err = c.eW + floor_of(c);
    if (std::isfinite(c.S)) err += std::abs(hwsi_bound(c.H + c.eH, c.S + c.eS, P) - rhs);
    out.push_back(verdict("hwsi", c.W2, rhs, err, "", base_inputs(c)));
  } else if (k == "talagrand_refinement") {
    const std::string v = q.variant.empty() ? "flat_arccos" : q.variant;
    const BoundParams P = params_for(c, v);
    const double lhs = v == "hwsi" ? hwsi_bound(c.H, c.S, P) : ws_bound(c.S, P, ws_variant_from_string(v), c.H);
    const double rhs = talagrand_bound(c.H, P.K);
    out.push_back(verdict("talagrand_refinement", lhs, rhs, 1e-12 * std::max(1.0, rhs) + floor_of(c), v,
                          base_inputs(c)));
  } else if (k == "de_bruijn") {
    const DeBruijn db = de_bruijn_entropy(c.get_engine(), c.pair);
    const double lhs = std::abs(db.value - c.H);
    const double rhs = std::max(1e-4, 1e-3 * c.H);
    out.push_back(verdict("de_bruijn", lhs, rhs, floor_of(c), to_string(c.s.backend),
                          {{"half_integral", db.value}, {"H", c.H}, {"quadrature_error", db.error},
                           {"horizon", db.horizon}}));
  } else if (k == "fisher_decay") {
    auto v = fisher_decay_check(c.get_engine(), c.pair, c.cc.K);
    for (auto& x : v) {
      x.numeric_error += floor_of(c);
      x.holds = x.margin >= -x.numeric_error;
      x.case_label = to_string(c.s.backend) + " " + x.case_label;
      out.push_back(std::move(x));
    }
  } else if (k == "fisher_stein") {
    const std::string v = q.variant.empty() ? "best" : q.variant;
    const BoundParams P = params_for(c, v);
    const auto& times = q.t.empty() ? c.s.t_grid : q.t;
    for (double t : times) {
      const FlowSnapshot snap = c.get_engine().evolve(c.pair, t);
      const double ps = v == "best" ? psi_best(t, P) : psi(t, P, psi_variant_from_string(v));
      const double rhs = std::isinf(c.S) ? c.S : ps * c.S * c.S;
      const double err = snap.I_error + (std::isfinite(c.S) ? ps * (2.0 * c.S * c.eS + c.eS * c.eS) : 0.0);
      out.push_back(verdict("fisher_stein", snap.I_t, rhs, err + floor_of(c), v + " t=" + fmt(t),
                            {{"t", t}, {"psi", ps}, {"S", c.S}}));
    }
  } else if (k == "hessian") {
    if (q.field.empty()) config_error("hessian check needs a field");
    const FieldPreset fp = field_preset_from_string(q.field);
    Eigen::VectorXd x = q.point.empty() ? default_point(c.s.space, fp)
                                        : Eigen::Map<const Eigen::VectorXd>(q.point.data(), q.point.size());
    std::vector<HessianVariant> which;
    if (!q.variant.empty()) which.push_back(hessian_variant_from_string(q.variant));
    else {
      which = {HessianVariant::TypeIOp, HessianVariant::TypeIIOp};
      if (c.cc.ric_exact) {
        which.push_back(HessianVariant::TypeIHS);
        which.push_back(HessianVariant::TypeIIHS);
      }
    }
    const BoundParams P = BoundParams::from(c.cc);
    const auto times = q.t.empty() ? std::vector<double>{1.0} : q.t;
    for (double t : times) {
      for (HessianVariant hv : which) (void)hessian_rhs(P, hv, t, 1.0, 1.0);
      const HessianMatrixEstimate est = hessian_matrix_estimate(c.s.space, fp, x, t, c.s.mc);
      auto v = verify_hessian_bounds(est, c.s.space, which);
      for (auto& r : v) {
        r.case_label = q.field + " " + r.case_label;
        r.numeric_error += floor_of(c);
        r.holds = r.margin >= -r.numeric_error;
        if (auto o = hessian_oracle(c.s.space, fp, x, t)) r.inputs["oracle_value00"] = (*o)(0, 0);
        r.inputs["mc_value00"] = est.value(0, 0);
        r.inputs["mc_ci00"] = est.ci(0, 0);
        out.push_back(std::move(r));
      }
    }
  } else if (k == "variance_control") {
    const double lhs = 1.0 + c.fr.variance_defect;
    out.push_back(verdict("variance_control", lhs, 1.0, 1e-12 + floor_of(c), "op<=1+hs", {}));
  } else {
    config_error("unknown inequality kind '" + k + "'");
  }
}

KernelSummary summarize(const SteinKernelField& k) {
  KernelSummary s;
  s.construction = to_string(k.construction);
  s.residual = k.residual;
  s.drift_balance = k.drift_balance;
  s.finite_discrepancy = k.finite_discrepancy;
  s.test_functions = k.test_functions;
  s.basis_degree = k.basis_degree;
  return s;
}

Report run_with(const Scenario& s, const MeasurePair& pair, const FunctionalReport& fr);

}  // namespace

Report run_scenario(const Scenario& s) {
  s.space.validate();
  const MeasurePair pair = make_pair(s.space, s.density, s.resolution);
  // Verdicts that need no W2 skip the transport solve.
  Scenario local = s;
  const bool need_w2 = std::any_of(s.inequalities.begin(), s.inequalities.end(), [](const InequalitySpec& q) {
    return q.kind == "ws" || q.kind == "hwsi";
  });
  if (need_w2) local.functionals.with_w2 = true;
  const FunctionalReport fr = compute_functionals(pair, local.functionals);
  return run_with(local, pair, fr);
}

Report run_scenario(const Scenario& s, const FunctionalReport& fr) {
  s.space.validate();
  return run_with(s, make_pair(s.space, s.density, s.resolution), fr);
}

namespace {

Report run_with(const Scenario& s, const MeasurePair& pair, const FunctionalReport& fr) {
  const CurvatureConstants cc = curvature_constants(s.space);
  Report r;
  r.name = s.name;
  r.scenario = scenario_to_json(s);
  r.H = fr.H;
  r.I = fr.I;
  r.W2 = fr.W2;
  r.S = {fr.S(), fr.S_error};
  r.w2_method = fr.w2_method;
  r.S_p = fr.S_p;
  r.moment_ratio = fr.moment_ratio;
  r.variance_defect = fr.variance_defect;
  if (fr.kernel) r.kernel = summarize(*fr.kernel);
  const ClosedForms cf = closed_forms(s.space, s.density);
  if (cf.H) r.closed_forms["H"] = *cf.H;
  if (cf.I) r.closed_forms["I"] = *cf.I;
  if (cf.W2) r.closed_forms["W2"] = *cf.W2;
  if (cf.S) r.closed_forms["S"] = *cf.S;
  r.constants = cc;

  Context c{s, pair, fr, cc, fr.H.value, fr.I.value, fr.S(), fr.W2.value,
            fr.H.error, fr.I.error, fr.S_error, fr.W2.error, std::nullopt};
  for (const auto& q : s.inequalities) eval_one(c, q, r.verdicts);

  r.provenance = {{"library", "steinlab"},
                  {"version", "0.1.0"},
                  {"seed", s.mc.seed},
                  {"resolution", s.resolution},
                  {"grid_nodes", pair.grid().size()},
                  {"grid_domain", {pair.grid().a, pair.grid().b}},
                  {"tail_mass", pair.tail_mass()},
                  {"backend", to_string(s.backend)},
                  {"sinkhorn_points", s.functionals.sinkhorn.points},
                  {"mc_paths", s.mc.paths},
                  {"mc_step", s.mc.step}};
  r.exit_code = std::all_of(r.verdicts.begin(), r.verdicts.end(), [](const auto& v) { return v.holds; }) ? 0 : 1;
  return r;
}

}  // namespace

int exit_code_for(const std::exception& e) {
  if (const auto* se = dynamic_cast<const Error*>(&e)) return is_precondition_failure(se->code()) ? 3 : 2;
  if (dynamic_cast<const YAML::Exception*>(&e)) return 3;
  return 2;
}

Scenario with_parameter(const Scenario& s, const std::string& parameter, double value) {
  Scenario o = s;
  if (parameter == "sigma2") {
    if (o.density.family != Family::GaussianScale) config_error("sigma2 sweep needs a gaussian_scale measure");
    o.density.sigma2 = value;
  } else if (parameter == "shift_m") {
    if (o.density.family != Family::GaussianShift && o.density.family != Family::QuarticTilt)
      config_error("shift_m sweep needs a gaussian_shift or quartic_tilt measure");
    o.density.shift = value;
  } else if (parameter == "quartic_a") {
    if (o.space.potential.kind == PotentialKind::Quartic) o.space.potential.a = value;
    else if (o.density.family == Family::QuarticTilt) o.density.a = value;
    else config_error("quartic_a sweep needs a quartic potential or quartic_tilt measure");
  } else if (parameter == "kappa") {
    if (o.density.family != Family::SphereVonMises) config_error("kappa sweep needs a von_mises measure");
    o.density.kappa = value;
  } else if (parameter == "t") {
    if (!(value > 0.0)) config_error("t sweep values must be positive");
    o.t_grid = {value};
    for (auto& q : o.inequalities)
      if (q.kind == "hessian" || q.kind == "fisher_stein") q.t = {value};
  } else {
    config_error("sweep parameter must be one of sigma2, shift_m, quartic_a, kappa, t");
  }
  o.space.validate();
  return o;
}

SweepResult sweep(const Scenario& s, const std::string& parameter, const std::vector<double>& grid) {
  if (grid.empty()) config_error("sweep grid is empty");
  SweepResult out;
  for (double v : grid) {
    const Report r = run_scenario(with_parameter(s, parameter, v));
    for (const auto& x : r.verdicts) out.rows.push_back({parameter, v, r.name, x});
    out.exit_code = std::max(out.exit_code, r.exit_code);
  }
  return out;
}

}  // namespace steinlab
