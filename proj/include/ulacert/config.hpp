#pragma once

#include <fstream>
#include <optional>
#include <set>
#include <sstream>
#include <string>

#include <json.hpp>

#include "ulacert/certifier.hpp"
#include "ulacert/potentials.hpp"
#include "ulacert/schedule.hpp"

namespace ulacert {

using json = nlohmann::json;

namespace cfg {

inline void require_keys(const json& j, const std::string& where,
                         const std::set<std::string>& allowed,
                         const std::set<std::string>& required = {}) {
  if (!j.is_object()) throw ConfigError("config: '" + where + "' must be an object");
  for (auto it = j.begin(); it != j.end(); ++it)
    if (!allowed.count(it.key()))
      throw ConfigError("config: unknown key '" + it.key() + "' in '" + where + "'");
  for (const auto& k : required)
    if (!j.contains(k)) throw ConfigError("config: '" + where + "' is missing key '" + k + "'");
}

inline double num(const json& j, const std::string& key, const std::string& where) {
  if (!j.contains(key) || !j[key].is_number())
    throw ConfigError("config: '" + where + "." + key + "' must be a number");
  return j[key].get<double>();
}

inline double num_or(const json& j, const std::string& key, double dflt) {
  return j.contains(key) ? j[key].get<double>() : dflt;
}

inline int64_t count(const json& j, const std::string& key, const std::string& where) {
  if (!j.contains(key) || !j[key].is_number_integer())
    throw ConfigError("config: '" + where + "." + key + "' must be an integer");
  return j[key].get<int64_t>();
}

inline Vec vec(const json& j, const std::string& key, const std::string& where) {
  if (!j.contains(key) || !j[key].is_array())
    throw ConfigError("config: '" + where + "." + key + "' must be an array of numbers");
  Vec v;
  for (const auto& e : j[key]) v.push_back(e.get<double>());
  return v;
}

}  // namespace cfg

inline PotentialModel parse_potential(const json& j) {
  cfg::require_keys(j, "potential", {"family", "dim", "params"}, {"family", "dim"});
  const std::string family = j["family"].get<std::string>();
  const int dim = static_cast<int>(cfg::count(j, "dim", "potential"));
  const json params = j.contains("params") ? j["params"] : json::object();
  if (family == "isotropic_quadratic") {
    cfg::require_keys(params, "potential.params", {"curvature"});
    return PotentialModel::isotropic_quadratic(dim, cfg::num_or(params, "curvature", 1.0));
  }
  if (family == "anisotropic_quadratic") {
    cfg::require_keys(params, "potential.params", {"m", "L"}, {"m", "L"});
    return PotentialModel::anisotropic_quadratic(dim, cfg::num(params, "m", "potential.params"),
                                                 cfg::num(params, "L", "potential.params"));
  }
  if (family == "huber") {
    cfg::require_keys(params, "potential.params", {"scale"});
    return PotentialModel::huber(dim, cfg::num_or(params, "scale", 1.0));
  }
  if (family == "quadratic_plus_cosine") {
    cfg::require_keys(params, "potential.params", {"amplitude"}, {"amplitude"});
    return PotentialModel::quadratic_plus_cosine(dim, cfg::num(params, "amplitude", "potential.params"));
  }
  throw ConfigError("config: unknown potential family '" + family + "'");
}

inline ClassCertificate parse_certificate(const json& j, const PotentialModel& model) {
  if (j.contains("builtin")) {
    cfg::require_keys(j, "certificate", {"builtin"});
    return builtin_certificate(model, j["builtin"].get<std::string>());
  }
  cfg::require_keys(j, "certificate",
                    {"class", "rho", "alpha", "M_rho", "eta", "M_eta", "m", "M_s", "L1", "xstar1",
                     "sup_U2", "sup_gradU2", "osc_U2"},
                    {"class"});
  const std::string cls = j["class"].get<std::string>();
  ClassCertificate cert;
  if (cls == "superexponential")
    cert = Superexponential{cfg::num(j, "rho", "certificate"), cfg::num(j, "alpha", "certificate"),
                            cfg::num(j, "M_rho", "certificate")};
  else if (cls == "log_concave")
    cert = LogConcave{cfg::num(j, "eta", "certificate"), cfg::num(j, "M_eta", "certificate")};
  else if (cls == "strongly_convex_outside_ball")
    cert = StronglyConvexOutsideBall{cfg::num(j, "m", "certificate"),
                                     cfg::num(j, "M_s", "certificate")};
  else if (cls == "perturbed_strongly_convex")
    cert = PerturbedStronglyConvex{cfg::num(j, "m", "certificate"),
                                   cfg::num(j, "L1", "certificate"),
                                   cfg::vec(j, "xstar1", "certificate"),
                                   cfg::num(j, "sup_U2", "certificate"),
                                   cfg::num(j, "sup_gradU2", "certificate"),
                                   cfg::num(j, "osc_U2", "certificate")};
  else
    throw ConfigError("config: unknown certificate class '" + cls + "'");
  validate_certificate(cert);
  return cert;
}

inline StepSchedule parse_schedule(const json& j) {
  cfg::require_keys(j, "schedule", {"kind", "gamma", "gamma1", "exponent", "values"}, {"kind"});
  const std::string kind = j["kind"].get<std::string>();
  if (kind == "constant") return StepSchedule::constant(cfg::num(j, "gamma", "schedule"));
  if (kind == "polynomial")
    return StepSchedule::polynomial(cfg::num(j, "gamma1", "schedule"),
                                    cfg::num_or(j, "exponent", 0.5));
  if (kind == "explicit") {
    Vec v = cfg::vec(j, "values", "schedule");
    return StepSchedule::explicit_values(std::move(v));
  }
  throw ConfigError("config: unknown schedule kind '" + kind + "'");
}

inline ExtraInputs parse_inputs(const json& j) {
  ExtraInputs in;
  if (j.is_null()) return in;
  cfg::require_keys(j, "inputs",
                    {"C_half", "upsilon_half", "C_quarter", "upsilon_quarter", "variance_integral",
                     "variance_provenance", "sde_theta", "sde_beta", "sde_delta", "sde_R",
                     "sde_epsilon", "sde_m_tilde", "sde_M_tilde", "reflection_proof_exponent"});
  auto opt = [&](const char* k) -> std::optional<double> {
    if (j.contains(k)) return j[k].get<double>();
    return std::nullopt;
  };
  in.C_half = opt("C_half");
  in.upsilon_half = opt("upsilon_half");
  in.C_quarter = opt("C_quarter");
  in.upsilon_quarter = opt("upsilon_quarter");
  in.variance_integral = opt("variance_integral");
  if (j.contains("variance_provenance")) {
    in.variance_provenance = j["variance_provenance"].get<std::string>();
    if (in.variance_provenance != "exact" && in.variance_provenance != "user" &&
        in.variance_provenance != "mc")
      throw ConfigError("config: variance_provenance must be exact|user|mc");
  } else if (in.variance_integral) {
    in.variance_provenance = "user";
  }
  in.sde_theta = opt("sde_theta");
  in.sde_beta = opt("sde_beta");
  in.sde_delta = opt("sde_delta");
  in.sde_R = opt("sde_R");
  if (j.contains("sde_epsilon")) in.sde_epsilon = j["sde_epsilon"].get<double>();
  in.sde_m_tilde = opt("sde_m_tilde");
  in.sde_M_tilde = opt("sde_M_tilde");
  if (j.contains("reflection_proof_exponent"))
    in.reflection_proof_exponent = j["reflection_proof_exponent"].get<bool>();
  return in;
}

struct ExperimentConfig {
  json raw;
  uint64_t hash = 0;
  PotentialModel model = PotentialModel::isotropic_quadratic(1);
  std::optional<ClassCertificate> certificate;
  StepSchedule schedule = StepSchedule::constant(0.1);
  std::optional<Route> route;
  ExtraInputs inputs;
  std::string operation;
  json op_params;
  uint64_t seed = 0;
  int workers = 0;
  std::string out_dir = "out";
};

inline uint64_t fnv1a64(const std::string& bytes) {
  uint64_t h = 1469598103934665603ULL;
  for (unsigned char c : bytes) {
    h ^= c;
    h *= 1099511628211ULL;
  }
  return h;
}

inline ExperimentConfig parse_config_text(const std::string& text, const std::string& operation) {
  json j;
  try {
    j = json::parse(text);
  } catch (const std::exception& e) {
    throw ConfigError(std::string("config: JSON parse failure: ") + e.what());
  }
  cfg::require_keys(j, "<root>",
                    {"potential", "certificate", "schedule", "route", "inputs", "operation",
                     "seed", "workers", "output", "plan", "certify", "sample", "couple",
                     "validate", "scaling", "explain"},
                    {"potential"});
  ExperimentConfig c;
  c.raw = j;
  c.hash = fnv1a64(text);
  c.model = parse_potential(j["potential"]);
  if (j.contains("certificate")) c.certificate = parse_certificate(j["certificate"], c.model);
  if (j.contains("schedule")) c.schedule = parse_schedule(j["schedule"]);
  if (j.contains("route")) c.route = route_from_name(j["route"].get<std::string>());
  if (j.contains("inputs")) c.inputs = parse_inputs(j["inputs"]);
  if (j.contains("seed")) c.seed = j["seed"].get<uint64_t>();
  if (j.contains("workers")) c.workers = j["workers"].get<int>();
  if (j.contains("output")) {
    cfg::require_keys(j["output"], "output", {"dir"});
    if (j["output"].contains("dir")) c.out_dir = j["output"]["dir"].get<std::string>();
  }
  c.operation = operation;
  if (j.contains("operation")) {
    const std::string declared = j["operation"].get<std::string>();
    if (operation.empty())
      c.operation = declared;
    else if (declared != operation)
      throw ConfigError("config: declared operation '" + declared +
                        "' does not match the subcommand '" + operation + "'");
  }
  if (c.operation.empty()) throw ConfigError("config: no operation given");
  if (j.contains(c.operation)) c.op_params = j[c.operation];
  return c;
}

inline ExperimentConfig load_config(const std::string& path, const std::string& operation) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ConfigError("config: cannot open " + path);
  std::stringstream ss;
  ss << in.rdbuf();
  return parse_config_text(ss.str(), operation);
}

}  // namespace ulacert
