#include <cmath>
#include <cstdio>
#include <limits>
#include <sstream>

#include "steinlab/error.hpp"
#include "steinlab/scenario.hpp"

namespace steinlab {

using nlohmann::json;

json number(double x) {
  if (std::isnan(x)) return "nan";
  if (std::isinf(x)) return x > 0 ? "inf" : "-inf";
  return x;
}

double number_from(const json& j) {
  if (j.is_number()) return j.get<double>();
  if (j.is_string()) {
    const std::string s = j.get<std::string>();
    if (s == "inf") return std::numeric_limits<double>::infinity();
    if (s == "-inf") return -std::numeric_limits<double>::infinity();
    if (s == "nan") return std::numeric_limits<double>::quiet_NaN();
  }
  fail(ErrorCode::ConfigError, "report field is not a number: " + j.dump());
}

namespace {

std::string key_of(double p) {
  char b[40];
  std::snprintf(b, sizeof b, "%.17g", p);
  return b;
}

json estimate(const Estimate& e) { return {{"value", number(e.value)}, {"error", number(e.error)}}; }
Estimate estimate_from(const json& j) { return {number_from(j.at("value")), number_from(j.at("error"))}; }

json verdict_json(const InequalityVerdict& v) {
  json in = json::object();
  for (const auto& [k, x] : v.inputs) in[k] = number(x);
  return {{"name", v.name},           {"case", v.case_label},        {"lhs", number(v.lhs)},
          {"rhs", number(v.rhs)},     {"margin", number(v.margin)},  {"numeric_error", number(v.numeric_error)},
          {"holds", v.holds},         {"inputs", in}};
}

InequalityVerdict verdict_from(const json& j) {
  InequalityVerdict v;
  v.name = j.at("name").get<std::string>();
  v.case_label = j.at("case").get<std::string>();
  v.lhs = number_from(j.at("lhs"));
  v.rhs = number_from(j.at("rhs"));
  v.margin = number_from(j.at("margin"));
  v.numeric_error = number_from(j.at("numeric_error"));
  v.holds = j.at("holds").get<bool>();
  for (const auto& [k, x] : j.at("inputs").items()) v.inputs[k] = number_from(x);
  return v;
}

bool same(double a, double b) { return (std::isnan(a) && std::isnan(b)) || a == b; }
bool same(const Estimate& a, const Estimate& b) { return same(a.value, b.value) && same(a.error, b.error); }

template <class M>
bool same_map(const M& a, const M& b) {
  if (a.size() != b.size()) return false;
  for (auto i = a.begin(), j = b.begin(); i != a.end(); ++i, ++j)
    if (i->first != j->first || !same(i->second, j->second)) return false;
  return true;
}

bool same(const InequalityVerdict& a, const InequalityVerdict& b) {
  return a.name == b.name && a.case_label == b.case_label && same(a.lhs, b.lhs) && same(a.rhs, b.rhs) &&
         same(a.margin, b.margin) && same(a.numeric_error, b.numeric_error) && a.holds == b.holds &&
         same_map(a.inputs, b.inputs);
}

std::string csv_field(const std::string& s) {
  if (s.find_first_of(",\"\r\n") == std::string::npos) return s;
  std::string o = "\"";
  for (char c : s) {
    if (c == '"') o += '"';
    o += c;
  }
  return o + "\"";
}

std::string csv_number(double x) {
  if (std::isnan(x)) return "nan";
  if (std::isinf(x)) return x > 0 ? "inf" : "-inf";
  char b[40];
  std::snprintf(b, sizeof b, "%.17g", x);
  return b;
}

std::string csv_line(const std::string& scenario, const InequalityVerdict& v) {
  return csv_field(scenario) + "," + csv_field(v.name) + "," + csv_field(v.case_label) + "," + csv_number(v.lhs) +
         "," + csv_number(v.rhs) + "," + csv_number(v.margin) + "," + csv_number(v.numeric_error) + "," +
         (v.holds ? "true" : "false") + "\r\n";
}

}  // namespace

bool Report::operator==(const Report& o) const {
  if (name != o.name || scenario != o.scenario || w2_method != o.w2_method || provenance != o.provenance ||
      exit_code != o.exit_code)
    return false;
  if (!same(H, o.H) || !same(I, o.I) || !same(W2, o.W2) || !same(S, o.S)) return false;
  if (!same_map(S_p, o.S_p) || !same_map(moment_ratio, o.moment_ratio) || !same_map(closed_forms, o.closed_forms))
    return false;
  if (!same(variance_defect, o.variance_defect)) return false;
  const KernelSummary &k = kernel, &ok = o.kernel;
  if (k.construction != ok.construction || !same(k.residual, ok.residual) || !same(k.drift_balance, ok.drift_balance) ||
      k.finite_discrepancy != ok.finite_discrepancy || k.test_functions != ok.test_functions ||
      k.basis_degree != ok.basis_degree)
    return false;
  const CurvatureConstants &c = constants, &oc = o.constants;
  if (!same(c.K, oc.K) || c.ric_exact != oc.ric_exact || c.hess_exact != oc.hess_exact || !same(c.alpha1, oc.alpha1) ||
      !same(c.alpha2, oc.alpha2) || !same(c.beta, oc.beta) || !same(c.alpha, oc.alpha) ||
      !same(c.alpha_tilde, oc.alpha_tilde) || c.n != oc.n)
    return false;
  if (verdicts.size() != o.verdicts.size()) return false;
  for (std::size_t i = 0; i < verdicts.size(); ++i)
    if (!same(verdicts[i], o.verdicts[i])) return false;
  return true;
}

json report_to_json(const Report& r) {
  json sp = json::object(), mr = json::object(), cf = json::object();
  for (const auto& [p, v] : r.S_p) sp[key_of(p)] = number(v);
  for (const auto& [p, v] : r.moment_ratio) mr[std::to_string(p)] = number(v);
  for (const auto& [k, v] : r.closed_forms) cf[k] = number(v);
  json verdicts = json::array();
  for (const auto& v : r.verdicts) verdicts.push_back(verdict_json(v));
  const CurvatureConstants& c = r.constants;
  json j;
  j["name"] = r.name;
  j["scenario"] = r.scenario;
  j["functionals"] = {{"H", estimate(r.H)},
                      {"I", estimate(r.I)},
                      {"W2", estimate(r.W2)},
                      {"S", estimate(r.S)},
                      {"w2_method", r.w2_method},
                      {"S_p", sp},
                      {"moment_ratio", mr},
                      {"variance_defect", number(r.variance_defect)},
                      {"kernel",
                       {{"construction", r.kernel.construction},
                        {"residual", number(r.kernel.residual)},
                        {"drift_balance", number(r.kernel.drift_balance)},
                        {"finite_discrepancy", r.kernel.finite_discrepancy},
                        {"test_functions", r.kernel.test_functions},
                        {"basis_degree", r.kernel.basis_degree}}}};
  j["closed_forms"] = cf;
  j["constants"] = {{"K", number(c.K)},           {"ric_exact", c.ric_exact},
                    {"hess_exact", c.hess_exact}, {"alpha1", number(c.alpha1)},
                    {"alpha2", number(c.alpha2)}, {"beta", number(c.beta)},
                    {"alpha", number(c.alpha)},   {"alpha_tilde", number(c.alpha_tilde)},
                    {"n", c.n}};
  j["verdicts"] = verdicts;
  j["provenance"] = r.provenance;
  j["exit_code"] = r.exit_code;
  return j;
}

Report report_from_json(const json& j) {
  Report r;
  r.name = j.at("name").get<std::string>();
  r.scenario = j.at("scenario");
  const json& f = j.at("functionals");
  r.H = estimate_from(f.at("H"));
  r.I = estimate_from(f.at("I"));
  r.W2 = estimate_from(f.at("W2"));
  r.S = estimate_from(f.at("S"));
  r.w2_method = f.at("w2_method").get<std::string>();
  for (const auto& [k, v] : f.at("S_p").items()) r.S_p[std::stod(k)] = number_from(v);
  for (const auto& [k, v] : f.at("moment_ratio").items()) r.moment_ratio[std::stoi(k)] = number_from(v);
  r.variance_defect = number_from(f.at("variance_defect"));
  const json& k = f.at("kernel");
  r.kernel.construction = k.at("construction").get<std::string>();
  r.kernel.residual = number_from(k.at("residual"));
  r.kernel.drift_balance = number_from(k.at("drift_balance"));
  r.kernel.finite_discrepancy = k.at("finite_discrepancy").get<bool>();
  r.kernel.test_functions = k.at("test_functions").get<int>();
  r.kernel.basis_degree = k.at("basis_degree").get<int>();
  for (const auto& [key, v] : j.at("closed_forms").items()) r.closed_forms[key] = number_from(v);
  const json& c = j.at("constants");
  r.constants.K = number_from(c.at("K"));
  r.constants.ric_exact = c.at("ric_exact").get<bool>();
  r.constants.hess_exact = c.at("hess_exact").get<bool>();
  r.constants.alpha1 = number_from(c.at("alpha1"));
  r.constants.alpha2 = number_from(c.at("alpha2"));
  r.constants.beta = number_from(c.at("beta"));
  r.constants.alpha = number_from(c.at("alpha"));
  r.constants.alpha_tilde = number_from(c.at("alpha_tilde"));
  r.constants.n = c.at("n").get<int>();
  for (const auto& v : j.at("verdicts")) r.verdicts.push_back(verdict_from(v));
  r.provenance = j.at("provenance");
  r.exit_code = j.at("exit_code").get<int>();
  return r;
}

std::string emit_json(const Report& r) { return report_to_json(r).dump(2) + "\n"; }

std::string csv_header() { return "scenario,name,case,lhs,rhs,margin,numeric_error,holds\r\n"; }

std::string csv_rows(const Report& r) {
  std::string out;
  for (const auto& v : r.verdicts) out += csv_line(r.name, v);
  return out;
}

std::string sweep_csv(const SweepResult& s) {
  std::string out = "parameter,value," + csv_header();
  for (const auto& row : s.rows) out += csv_field(row.parameter) + "," + csv_number(row.value) + "," + csv_line(row.scenario, row.verdict);
  return out;
}

}  // namespace steinlab
