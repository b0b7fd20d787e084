#pragma once

#include <chrono>
#include <filesystem>
#include <fstream>

#include "ulacert/bounds.hpp"
#include "ulacert/config.hpp"
#include "ulacert/coupling.hpp"
#include "ulacert/csv.hpp"
#include "ulacert/oracle.hpp"
#include "ulacert/planner.hpp"
#include "ulacert/sampler.hpp"

namespace ulacert {

namespace detail {

inline std::string iso_timestamp() {
  const auto now = std::chrono::system_clock::now();
  const std::time_t t = std::chrono::system_clock::to_time_t(now);
  char buf[32];
  std::strftime(buf, sizeof(buf), "%Y-%m-%dT%H:%M:%SZ", std::gmtime(&t));
  return buf;
}

inline char hex_digit(uint64_t v) { return "0123456789abcdef"[v & 0xf]; }

inline std::string hash_hex(uint64_t h) {
  std::string s(16, '0');
  for (int i = 15; i >= 0; --i, h >>= 4) s[i] = hex_digit(h);
  return s;
}

inline Vec point_from(const json& p, const std::string& key, int dim, double dflt_norm = 0.0) {
  if (p.contains(key)) {
    Vec x = cfg::vec(p, key, "params");
    if (static_cast<int>(x.size()) != dim)
      throw ConfigError("config: point '" + key + "' has wrong dimension");
    return x;
  }
  Vec x(dim, 0.0);
  if (dflt_norm != 0.0) x[0] = dflt_norm;
  return x;
}

inline json drift_to_json(const DriftConstants& d) {
  return json{{"lambda", d.lambda},       {"log_lambda", d.log_lambda}, {"c", d.c},
              {"log_c", d.log_c},         {"gamma_bar", d.gamma_bar},   {"ball_K", d.ball_K},
              {"lyapunov", d.lyapunov.name()}};
}

inline json rate_to_json(const ErgodicityRate& r) {
  json j{{"route", route_name(r.route)}, {"kappa", r.kappa()}, {"log_kappa", r.log_kappa}};
  switch (r.route) {
    case Route::Poincare:
      j["theta_half"] = r.theta;
      j["log_beta_half"] = r.log_beta;
      j["K_half"] = r.ball_K;
      j["osc_U_on_K"] = r.osc_U_on_K;
      break;
    case Route::Bobkov:
      j["variance_integral"] = r.variance_integral;
      break;
    case Route::ReflectionConvex:
      j["theta"] = r.theta;
      j["log_beta"] = r.log_beta;
      j["R"] = r.R;
      j["omega"] = r.omega;
      j["log_varpi"] = r.log_varpi;
      break;
    case Route::StrongConvex:
      j["m"] = r.m;
      j["M_tilde"] = r.M_tilde;
      j["omega"] = r.omega;
      j["D"] = r.D_eps;
      break;
    case Route::LogSobolev:
      j["m"] = r.m;
      break;
    case Route::GenericSDE:
      j["eps"] = r.eps;
      if (r.theta_tilde > 0.0) {
        j["theta_tilde"] = r.theta_tilde;
        j["log_K_eps"] = r.log_K_eps;
        j["omega"] = r.omega;
      } else {
        j["m_tilde"] = r.m;
        j["M_tilde"] = r.M_tilde;
        j["D"] = r.D_eps;
      }
      break;
    case Route::UserSupplied:
      j["C_user"] = r.C_user;
      break;
  }
  return j;
}

inline json provenance_json(const ExperimentConfig& c) {
  json p = json::object();
  if (c.inputs.variance_integral) p["variance_integral"] = c.inputs.variance_provenance;
  if (c.inputs.C_half) p["C_half"] = "user";
  if (c.inputs.upsilon_half) p["upsilon_half"] = "user";
  if (c.inputs.C_quarter) p["C_quarter"] = "user";
  if (c.inputs.upsilon_quarter) p["upsilon_quarter"] = "user";
  return p;
}

}  // namespace detail

struct RunArtifacts {
  int exit_code = 0;
  json result;
  std::string out_dir;
};

class Runner {
 public:
  explicit Runner(ExperimentConfig config) : c_(std::move(config)) {}

  RunArtifacts run() {
    std::filesystem::create_directories(c_.out_dir);
    json result;
    result["metadata"] = {{"config_hash", detail::hash_hex(c_.hash)},
                          {"timestamp", detail::iso_timestamp()},
                          {"operation", c_.operation}};
    result["provenance"] = detail::provenance_json(c_);
    int exit_code = 0;

    if (c_.operation == "plan")
      run_plan(result);
    else if (c_.operation == "certify")
      run_certify(result);
    else if (c_.operation == "sample")
      run_sample(result);
    else if (c_.operation == "couple")
      exit_code = run_couple(result);
    else if (c_.operation == "validate")
      exit_code = run_validate(result);
    else if (c_.operation == "scaling")
      run_scaling(result);
    else if (c_.operation == "explain")
      run_explain(result);
    else
      throw ConfigError("config: unknown operation '" + c_.operation + "'");

    std::ofstream out(c_.out_dir + "/result.json", std::ios::binary);
    out << result.dump(2) << "\n";
    RunArtifacts a;
    a.exit_code = exit_code;
    a.result = std::move(result);
    a.out_dir = c_.out_dir;
    return a;
  }

 private:
  Route need_route() const {
    if (!c_.route) throw ConfigError("config: this operation needs a 'route'");
    return *c_.route;
  }
  ClassCertificate need_cert() const {
    if (!c_.certificate) throw ConfigError("config: this operation needs a 'certificate'");
    return *c_.certificate;
  }
  ExtraInputs inputs_with_defaults(Route route) const {
    ExtraInputs in = c_.inputs;
    if (route == Route::Bobkov && !in.variance_integral) {
      in.variance_integral = builtin_variance_integral(c_.model);
      in.variance_provenance = "exact";
    }
    return in;
  }

  void run_plan(json& result) {
    const Route route = need_route();
    const ClassCertificate cert = need_cert();
    const json& p = c_.op_params;
    cfg::require_keys(p, "plan", {"epsilon", "gamma_bar", "x", "fixed_budget"},
                      {"epsilon", "gamma_bar"});
    const double gamma_bar = cfg::num(p, "gamma_bar", "plan");
    const Vec x = detail::point_from(p, "x", c_.model.dim());
    const ExtraInputs in = inputs_with_defaults(route);
    if (p.contains("fixed_budget")) {
      cfg::require_keys(p["fixed_budget"], "plan.fixed_budget", {"p", "n"}, {"p"});
      const int64_t pp = cfg::count(p["fixed_budget"], "p", "plan.fixed_budget");
      const int64_t n = p["fixed_budget"].contains("n")
                            ? cfg::count(p["fixed_budget"], "n", "plan.fixed_budget")
                            : 0;
      const FixedBudgetPlan fb = plan_fixed_budget(route, c_.model, cert, x, pp, n, gamma_bar, in);
      result["results"] = {{"mode", "fixed_budget"},
                           {"gamma", fb.gamma},
                           {"p", fb.p},
                           {"n", fb.n},
                           {"bound", std::min(2.0, fb.bound)},
                           {"bound_raw", fb.bound},
                           {"log_bound", fb.log_bound}};
    } else {
      const Plan plan =
          plan_precision(route, c_.model, cert, x, cfg::num(p, "epsilon", "plan"), gamma_bar, in);
      result["results"] = {{"mode", "precision"},
                           {"gamma", plan.gamma},
                           {"p", plan.p},
                           {"T", plan.T},
                           {"epsilon", plan.epsilon},
                           {"certified", plan.certified},
                           {"A_bar", plan.A_bar},
                           {"log_C_bar", plan.log_C_bar},
                           {"kappa", plan.kappa},
                           {"n_split", plan.n_split},
                           {"degenerate", plan.degenerate},
                           {"gamma_reduced", plan.gamma_reduced}};
    }
    if (route != Route::LogSobolev)
      result["constants"] = {{"drift", detail::drift_to_json(euler_drift(c_.model, cert, gamma_bar))},
                             {"rate", detail::rate_to_json(ergodicity_rate(route, c_.model, cert, in))}};
    else
      result["constants"] = {{"rate", detail::rate_to_json(ergodicity_rate(route, c_.model, cert, in))}};
  }

  void run_certify(json& result) {
    const Route route = need_route();
    const ClassCertificate cert = need_cert();
    const json& p = c_.op_params;
    cfg::require_keys(p, "certify", {"x", "p_max", "gamma_bar", "split", "p_list"},
                      {"p_max", "gamma_bar"});
    const double gamma_bar = cfg::num(p, "gamma_bar", "certify");
    const Vec x = detail::point_from(p, "x", c_.model.dim());
    const int64_t p_max = cfg::count(p, "p_max", "certify");
    const std::string split = p.contains("split") ? p["split"].get<std::string>() : "optimize";
    const ExtraInputs in = inputs_with_defaults(route);
    const DriftConstants drift =
        route == Route::LogSobolev ? DriftConstants{} : euler_drift(c_.model, cert, gamma_bar);
    if (c_.schedule.gamma1() > gamma_bar + 1e-15)
      throw ConfigError("certify: schedule gamma1 exceeds gamma_bar");
    const ErgodicityRate rate = ergodicity_rate(route, c_.model, cert, in);
    BoundAssembler assembler(route, c_.model, cert, c_.schedule, drift, rate, x);
    const bool optimize = split == "optimize";
    const auto variant = split == "log_gamma" ? StepSchedule::SplitVariant::LogGamma
                                              : StepSchedule::SplitVariant::KappaGamma;
    TVBoundCurve curve;
    if (p.contains("p_list")) {
      std::vector<int64_t> ps;
      for (const auto& e : p["p_list"]) ps.push_back(e.get<int64_t>());
      curve = assembler.curve_at(ps, variant, optimize);
    } else {
      curve = assembler.curve(p_max, variant, optimize);
    }
    CsvWriter csv({"p", "n", "disc_term", "tail_term", "total", "total_raw", "clamped"});
    for (const auto& pt : curve.points)
      csv.add_row({static_cast<double>(pt.p), static_cast<double>(pt.n), pt.disc_term,
                   pt.tail_term, pt.total, pt.total_raw, pt.clamped ? 1.0 : 0.0});
    csv.write(c_.out_dir + "/curves.csv");
    result["results"] = {{"points", curve.points.size()},
                         {"A", assembler.A()},
                         {"split", split},
                         {"final_total", curve.points.empty() ? 2.0 : curve.points.back().total}};
    if (!curve.points.empty()) {
      result["results"]["final_n"] = curve.points.back().n;
      result["results"]["log_C_at_final_n"] = assembler.log_C(curve.points.back().n);
    }
    result["constants"] = {{"rate", detail::rate_to_json(rate)}};
    if (route != Route::LogSobolev) result["constants"]["drift"] = detail::drift_to_json(drift);
  }

  void run_sample(json& result) {
    const json& p = c_.op_params;
    cfg::require_keys(p, "sample",
                      {"x", "p", "n_chains", "record_at", "lyapunov", "eta", "start_spread"},
                      {"p", "n_chains"});
    ChainEnsemble ens;
    ens.model = c_.model;
    ens.schedule = c_.schedule;
    ens.n_chains = cfg::count(p, "n_chains", "sample");
    ens.start = detail::point_from(p, "x", c_.model.dim());
    ens.start_spread = cfg::num_or(p, "start_spread", 0.0);
    ens.seed = c_.seed;
    ens.workers = c_.workers;
    if (p.contains("lyapunov")) {
      const std::string name = p["lyapunov"].get<std::string>();
      if (name == "sq_dist")
        ens.lyapunov = {LyapunovDescriptor::Kind::SqDist, 0.0};
      else if (name == "exp_half_U")
        ens.lyapunov = {LyapunovDescriptor::Kind::ExpHalfU, 0.0};
      else if (name == "exp_eta_dist")
        ens.lyapunov = {LyapunovDescriptor::Kind::ExpEtaDist, cfg::num(p, "eta", "sample")};
      else
        throw ConfigError("sample: unknown lyapunov descriptor '" + name + "'");
    }
    const int64_t steps = cfg::count(p, "p", "sample");
    std::vector<int64_t> record_at;
    if (p.contains("record_at"))
      for (const auto& e : p["record_at"]) record_at.push_back(e.get<int64_t>());
    else
      record_at.push_back(steps);
    const RunResult rr = run_chains(ens, steps, record_at);
    CsvWriter csv({"step", "n", "mean_sq_dist", "se_sq_dist", "mean_grad_sq", "se_grad_sq",
                   "mean_V_log", "se_V"});
    for (const auto& rec : rr.moments.records)
      csv.add_row({static_cast<double>(rec.step), static_cast<double>(rec.count),
                   rec.mean_sq_dist(), rec.se_sq_dist(), rec.mean_grad_sq(), rec.se_grad_sq(),
                   rec.mean_V_log(), rec.se_V()});
    csv.write(c_.out_dir + "/moments.csv");
    result["results"] = {{"chains", ens.n_chains},
                         {"p", steps},
                         {"recorded", rr.moments.records.size()},
                         {"lyapunov", ens.lyapunov.name()}};
  }

  int run_couple(json& result) {
    const json& p = c_.op_params;
    cfg::require_keys(p, "couple",
                      {"x", "y", "t_grid", "dt", "n_runs", "merge_radius", "allowance",
                       "theorem", "gamma_bar"},
                      {"t_grid", "dt", "n_runs"});
    const Vec x = detail::point_from(p, "x", c_.model.dim(), 1.0);
    const Vec y = detail::point_from(p, "y", c_.model.dim(), -1.0);
    std::vector<double> t_grid;
    for (const auto& e : p["t_grid"]) t_grid.push_back(e.get<double>());
    const double dt = cfg::num(p, "dt", "couple");
    const int64_t n_runs = cfg::count(p, "n_runs", "couple");
    const double merge_radius = cfg::num_or(p, "merge_radius", 0.1 * std::sqrt(dt));
    const double allowance = cfg::num_or(p, "allowance", 0.02);

    CouplingTail tail = coupling_tail(langevin_drift(c_.model), c_.model.dim(), x, y, t_grid, dt,
                                      n_runs, merge_radius, c_.seed, c_.workers);
    // dt-halving sensitivity guard
    CouplingTail tail_half =
        coupling_tail(langevin_drift(c_.model), c_.model.dim(), x, y, t_grid, dt / 2.0, n_runs,
                      0.1 * std::sqrt(dt / 2.0), c_.seed + 1, c_.workers);
    bool dt_sensitive = false;
    for (size_t i = 0; i < t_grid.size(); ++i)
      if (std::abs(tail.empirical[i] - tail_half.empirical[i]) >
          2.0 * (tail.se[i] + tail_half.se[i]))
        dt_sensitive = true;

    bool theorem_pass = true;
    const bool want_theorem = p.contains("theorem") ? p["theorem"].get<bool>() : bool(c_.route);
    if (want_theorem) {
      const TvCouplingResult tv = tv_from_coupling(c_.model, need_cert(), need_route(), x, y,
                                                   t_grid, dt, n_runs, c_.seed, allowance,
                                                   c_.inputs, c_.workers);
      tail.theorem = tv.tail.theorem;
      theorem_pass = tv.pass;
    }
    CsvWriter csv({"t", "t_unscaled", "empirical_tail", "se", "analytic_bound", "theorem_curve",
                   "empirical_tail_dt_half"});
    for (size_t i = 0; i < t_grid.size(); ++i)
      csv.add_row({t_grid[i], t_grid[i] * clock_factor_to_unscaled(), tail.empirical[i],
                   tail.se[i], tail.analytic[i],
                   tail.theorem.empty() ? kNaN : tail.theorem[i], tail_half.empirical[i]});
    csv.write(c_.out_dir + "/couple.csv");
    bool analytic_ok = true;
    for (size_t i = 0; i < t_grid.size(); ++i)
      if (tail.empirical[i] > tail.analytic[i] + 3.0 * tail.se[i] + allowance) analytic_ok = false;
    result["results"] = {{"n_runs", n_runs},
                         {"dt", dt},
                         {"merge_radius", merge_radius},
                         {"dt_sensitive", dt_sensitive},
                         {"analytic_tail_ok", analytic_ok},
                         {"theorem_ok", theorem_pass}};
    return analytic_ok && theorem_pass ? 0 : 3;
  }

  int run_validate(json& result) {
    const Route route = need_route();
    const ClassCertificate cert = need_cert();
    const json& p = c_.op_params;
    cfg::require_keys(
        p, "validate",
        {"x_norm", "gammas", "p_min", "p_max", "n_p", "grid_points", "gamma_bar"},
        {"gammas", "gamma_bar"});
    if (c_.model.dim() != 1) throw ConfigError("validate: the grid oracle needs a 1-D model");
    const double x_norm = cfg::num_or(p, "x_norm", 3.0);
    const double gamma_bar = cfg::num(p, "gamma_bar", "validate");
    const int64_t p_min = p.contains("p_min") ? cfg::count(p, "p_min", "validate") : 10;
    const int64_t p_max = p.contains("p_max") ? cfg::count(p, "p_max", "validate") : 2000;
    const int n_p = p.contains("n_p") ? static_cast<int>(cfg::count(p, "n_p", "validate")) : 20;
    const int grid_points =
        p.contains("grid_points") ? static_cast<int>(cfg::count(p, "grid_points", "validate")) : 8192;
    std::vector<double> gammas;
    for (const auto& e : p["gammas"]) gammas.push_back(e.get<double>());

    std::vector<int64_t> ps;
    for (int i = 0; i < n_p; ++i) {
      const double t = n_p == 1 ? 0.0 : static_cast<double>(i) / (n_p - 1);
      const auto v = static_cast<int64_t>(
          std::llround(std::exp(std::log(static_cast<double>(p_min)) +
                                t * (std::log(static_cast<double>(p_max)) -
                                     std::log(static_cast<double>(p_min))))));
      if (ps.empty() || v > ps.back()) ps.push_back(v);
    }

    const ExtraInputs in = inputs_with_defaults(route);
    const ErgodicityRate rate = ergodicity_rate(route, c_.model, cert, in);
    CsvWriter csv({"gamma", "p", "n", "bound", "oracle_tv", "oracle_tv_unnormalized", "ok"});
    CsvWriter dens_csv({"grid_point", "density"});
    int violations = 0;
    const GaussianDist target{Vec(1, 0.0), 1.0};
    for (double gamma : gammas) {
      const auto sched = StepSchedule::constant(gamma);
      const DriftConstants drift =
          route == Route::LogSobolev ? DriftConstants{} : euler_drift(c_.model, cert, gamma_bar);
      BoundAssembler assembler(route, c_.model, cert, sched, drift, rate, Vec(1, x_norm));
      GridPropagator prop(c_.model, sched, x_norm, p_max, grid_points);
      for (int64_t pp : ps) {
        prop.advance_to(pp);
        const double oracle = grid_tv(prop.density(), target).tv;
        const TVBoundPoint pt = assembler.best_at(pp);
        const bool ok = pt.total >= oracle && pt.total <= 2.0 && oracle <= 2.0;
        if (!ok) ++violations;
        csv.add_row({gamma, static_cast<double>(pp), static_cast<double>(pt.n), pt.total, oracle,
                     2.0 * oracle, ok ? 1.0 : 0.0});
      }
      if (gamma == gammas.back()) {
        const GridDensity& dens = prop.density();
        for (int i = 0; i < dens.n_points(); ++i)
          dens_csv.add_row({dens.point(i), dens.values[i]});
      }
    }
    csv.write(c_.out_dir + "/validate.csv");
    dens_csv.write(c_.out_dir + "/densities.csv");
    result["results"] = {{"violations", violations}, {"rows", csv.size()}};
    return violations == 0 ? 0 : 3;
  }

  void run_scaling(json& result) {
    const Route route = need_route();
    const json& p = c_.op_params;
    cfg::require_keys(p, "scaling", {"d_list", "epsilon", "gamma_bar"},
                      {"d_list", "epsilon", "gamma_bar"});
    std::vector<int> d_list;
    for (const auto& e : p["d_list"]) d_list.push_back(e.get<int>());
    const double epsilon = cfg::num(p, "epsilon", "scaling");
    const double gamma_bar = cfg::num(p, "gamma_bar", "scaling");
    const PotentialModel base = c_.model;
    auto family = [&](int d) -> PotentialModel {
      switch (base.family()) {
        case PotentialModel::Family::IsotropicQuadratic:
          return PotentialModel::isotropic_quadratic(d, base.curvature());
        case PotentialModel::Family::AnisotropicQuadratic:
          return PotentialModel::anisotropic_quadratic(
              d, *std::min_element(base.spectrum().begin(), base.spectrum().end()),
              base.lipschitz_L());
        case PotentialModel::Family::Huber:
          return PotentialModel::huber(d, base.huber_scale());
        case PotentialModel::Family::QuadraticPlusCosine:
          return PotentialModel::quadratic_plus_cosine(d, base.cos_amplitude());
        default:
          throw ConfigError("scaling: family not dimension-parameterized");
      }
    };
    const std::string cls = c_.certificate ? certificate_class_name(*c_.certificate)
                                           : std::string();
    auto cert_for = [&](int d) -> ClassCertificate {
      if (cls.empty()) throw ConfigError("scaling: needs a certificate class");
      return builtin_certificate(family(d), cls);
    };
    const ExtraInputs in = inputs_with_defaults(route);
    const ScalingReport rep = scaling_study(route, family, cert_for, d_list, epsilon,
                                            [&](int) { return gamma_bar; }, in);
    CsvWriter csv({"d", "gamma", "p"});
    for (size_t i = 0; i < d_list.size(); ++i)
      csv.add_row({static_cast<double>(d_list[i]), rep.gammas[i], rep.ps[i]});
    csv.write(c_.out_dir + "/scaling.csv");
    result["results"] = {{"slope_gamma", rep.slope_gamma}, {"slope_p", rep.slope_p}};
  }

  void run_explain(json& result) {
    const Route route = need_route();
    const ClassCertificate cert = need_cert();
    const json& p = c_.op_params;
    cfg::require_keys(p, "explain", {"x", "gamma_bar"}, {"gamma_bar"});
    const double gamma_bar = cfg::num(p, "gamma_bar", "explain");
    const Vec x = detail::point_from(p, "x", c_.model.dim());
    const ExtraInputs in = inputs_with_defaults(route);
    std::vector<std::string> lines;
    lines.push_back("route: " + route_name(route));
    lines.push_back("master bound: tv(p) <= L sqrt(S/2) + tail,  S = sum_{k=n+1}^{p} "
                    "(gamma_k^3 A / 3 + d gamma_k^2)");
    if (route != Route::LogSobolev) {
      const DriftConstants d = euler_drift(c_.model, cert, gamma_bar);
      switch (d.lyapunov.kind) {
        case LyapunovDescriptor::Kind::ExpHalfU:
          lines.push_back("drift: V = exp(U/2), lambda = exp(-d L / (2 (1 - L gamma_bar))) = " +
                          std::to_string(d.lambda));
          lines.push_back("       K = max(M_rho, (-8 log lambda / rho^2)^{1/(2(alpha-1))}) = " +
                          std::to_string(d.ball_K));
          lines.push_back("       c = -2 log(lambda) lambda^{-gamma_bar} sup_{B(x*,K)} V, "
                          "sup bounded via U <= L K^2/2;  log c = " + std::to_string(d.log_c));
          break;
        case LyapunovDescriptor::Kind::ExpEtaDist:
          lines.push_back("drift: V = exp((eta/4) sqrt(|x-x*|^2+1)), lambda = "
                          "exp(-eta^2 (sqrt(2)-1)/16) = " + std::to_string(d.lambda));
          lines.push_back("       R_c = max(1, 2d/eta, M_eta) = " + std::to_string(d.ball_K) +
                          ";  log c = " + std::to_string(d.log_c));
          break;
        case LyapunovDescriptor::Kind::SqDist:
          lines.push_back("drift: V = |x-x*|^2, lambda = exp(-2m + gamma_bar L^2) = " +
                          std::to_string(d.lambda) + ", c = 2(d + m M_s^2) = " +
                          std::to_string(d.c));
          break;
      }
      const double A = A_bound(route, d, c_.model, cert, std::min(c_.schedule.gamma1(), gamma_bar), x);
      lines.push_back("gradient envelope: A = " + std::to_string(A) +
                      "  (G(l,c,g,w) = w + c/(-l^g log l) feeds every class formula)");
    }
    const ErgodicityRate r = ergodicity_rate(route, c_.model, cert, in);
    switch (route) {
      case Route::StrongConvex:
        lines.push_back("rate: log kappa = -(m/2) log 2 / (log((1 + e^{m omega(1/2,max(1,M_s))/4})"
                        "(1 + max(1,M_s))) + log 2) = " + std::to_string(r.log_kappa));
        lines.push_back("tail: C(n) = 6 + 2 sqrt(d/m + M_s^2) + 2 sqrt(F(lambda,Gamma_n,c,gamma_1,"
                        "|x-x*|^2));  tail = C(n) kappa^{Gamma_{n+1,p}}");
        break;
      case Route::ReflectionConvex:
        lines.push_back("rate: theta = eta^2/8 = " + std::to_string(r.theta) +
                        ", K = max(1, M_eta, 4d/eta) = " + std::to_string(r.ball_K) +
                        ", log beta = " + std::to_string(r.log_beta));
        lines.push_back("      R = (8/eta) log(4 beta/theta) = " + std::to_string(r.R) +
                        ", omega(1/2,R) = " + std::to_string(r.omega));
        lines.push_back("      log varpi = -log2 (theta/4) / (log(beta/theta (3 + 4 e^{theta "
                        "omega/4})) + log 2) = " + std::to_string(r.log_varpi));
        lines.push_back("tail: 2 Lambda(n) e^{-theta Gamma_{n+1,p}/4} + 4 varpi^{Gamma_{n+1,p}},"
                        "  Lambda(n) = (F(..)+beta/theta)/2 + 2 (beta/theta) e^{theta omega/4}");
        break;
      case Route::Bobkov:
        lines.push_back("rate: log kappa = -1/(432 var_pi) = " + std::to_string(r.log_kappa) +
                        "  (variance integral " + std::to_string(r.variance_integral) + ", " +
                        r.variance_provenance + ")");
        lines.push_back("tail: C(n) = ((2 pi)^{(d+1)/2} (d-1)! / (eta^d Gamma((d+1)/2)) + pi^{d/2} "
                        "M_eta^d / Gamma(d/2+1)) D_n e^{U(x)}");
        break;
      case Route::Poincare:
        lines.push_back("rate: log kappa = -theta_{1/2} / (1 + (4 beta_{1/2} K^2/pi^2) "
                        "e^{osc U on B(x*,K)}) = " + std::to_string(r.log_kappa));
        lines.push_back("tail: C(n) = (alpha+1)^d (2 pi)^{(d+1)/2} (d-1)! / (rho^d Gamma((d+1)/2)) "
                        "D_n e^{a_alpha} e^{U(x)}");
        break;
      case Route::LogSobolev:
        lines.push_back("rate: -log kappa = m e^{-osc U2} = " + std::to_string(-r.log_kappa));
        lines.push_back("tail: C(n)^2 = L1 e^{-varpi Gamma_n/2}|x-x1*|^2 + L1 gamma_n(gamma_n+"
                        "2/varpi)|grad U2|^2 + 2 osc U2 + 2 L1 (1-varpi gamma_n)(2d+(gamma_1+"
                        "2/varpi)|grad U2|^2)/varpi - d(1+log(2 gamma_n m)-2 L1 gamma_n)");
        break;
      case Route::UserSupplied:
        lines.push_back("rate: log kappa = -upsilon (user), C(n) = C_user F(lambda,Gamma_n,c,"
                        "gamma_1,V(x))");
        break;
      case Route::GenericSDE:
        lines.push_back("rate: theta~ = theta^2 delta/(2 beta + theta delta), K(eps) = "
                        "(beta/theta~)(1+e^{theta~ omega(eps,R)}) + delta/2");
        lines.push_back("      log kappa = (theta~/2) log(1-eps) / (log K(eps) - log(1-eps)) = " +
                        std::to_string(r.log_kappa));
        break;
    }
    lines.push_back("split: n(p) = min{k : kappa^{Gamma_{k+1,p}} > gamma_{k+1}}  or  "
                    "max(0, floor(log Gamma_p));  omega(eps,R) = R^2/(2 PhiInv(1-eps/2))^2");
    std::ofstream txt(c_.out_dir + "/explain.txt", std::ios::binary);
    json jl = json::array();
    for (const auto& l : lines) {
      txt << l << "\n";
      jl.push_back(l);
    }
    result["results"] = {{"lines", jl}};
  }

  ExperimentConfig c_;
};

inline RunArtifacts run_operation(const ExperimentConfig& config) {
  return Runner(config).run();
}

}  // namespace ulacert
