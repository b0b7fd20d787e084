#pragma once

#include <cstdint>
#include <functional>
#include <vector>

#include "ulacert/bounds.hpp"
#include "ulacert/certifier.hpp"

namespace ulacert {

struct Plan {
  Route route;
  double gamma = 0.0;
  int64_t p = 0;
  double T = 0.0;              // horizon in Gamma-time
  double epsilon = 0.0;        // requested precision
  double certified = 0.0;      // re-verified bound at (gamma, p)
  double A_bar = 0.0;
  double log_C_bar = 0.0;      // log of the n- and gamma-uniform initial constant
  double kappa = 0.0;
  int64_t n_split = 0;         // split at which the certificate was verified
  bool degenerate = false;     // T <= 0; a single step already certifies epsilon
  bool gamma_reduced = false;  // cap had to shrink to make the certificate close
};

namespace detail {

// gamma- and n-uniform log C-bar for the planner. Routes whose C grows with n
// cannot be planned this way.
inline double planner_log_C_bar(Route route, const PotentialModel& model,
                                const ClassCertificate& cert, const DriftConstants& drift,
                                const ErgodicityRate& rate, const Vec& x, double gamma_for_C) {
  const double d = model.dim();
  switch (route) {
    case Route::StrongConvex: {
      const auto& m = std::get<StronglyConvexOutsideBall>(cert);
      const double G =
          eval_G(drift.lambda, drift.c, gamma_for_C, sq_dist(x, model.minimizer()));
      return std::log(6.0 + 2.0 * std::sqrt(d / m.m + m.M_s * m.M_s) + 2.0 * std::sqrt(G));
    }
    case Route::UserSupplied: {
      const double logG = eval_G_log(drift.log_lambda, drift.log_c, gamma_for_C,
                                     lyapunov_log_value(drift.lyapunov, model, x));
      return std::log(rate.C_user) + logG;
    }
    case Route::ReflectionConvex: {
      const double logG = eval_G_log(drift.log_lambda, drift.log_c, gamma_for_C,
                                     lyapunov_log_value(drift.lyapunov, model, x));
      return log_sum_exp({std::log(0.5) + logG,
                          rate.log_beta - std::log(rate.theta) - std::log(2.0),
                          rate.exp_term_log});
    }
    case Route::LogSobolev: {
      // n-sup is at n = 1 for a constant schedule; gamma enters explicitly, so
      // the caller iterates on gamma_for_C.
      const auto sched = StepSchedule::constant(gamma_for_C);
      return C_bound_log(route, x, 1, sched, drift, rate, model, cert);
    }
    default:
      throw ConfigError("plan: route " + route_name(route) +
                        " has no n-uniform initial constant; certify with the log-split instead");
  }
}

inline double horizon_T(Route route, const ErgodicityRate& rate, double log_C_bar, double eps) {
  if (route == Route::ReflectionConvex) {
    const double t1 = (4.0 / rate.theta) * (std::log(8.0 / eps) + log_C_bar);
    const double t2 = std::log(16.0 / eps) / (-rate.log_varpi);
    return std::max(t1, t2);
  }
  return (log_C_bar - std::log(eps / 2.0)) / (-rate.log_kappa);
}

}  // namespace detail

// Step-size / iteration plan for a target precision: the step-size cap solves
// the discretization half of the budget, T the ergodic half, p = floor(T/gamma)+1.
// The output is re-certified by evaluating the bound at (gamma, p); if the
// floor/ceil slack leaves the certificate a hair above epsilon the cap is
// shrunk geometrically until it closes.
inline Plan plan_precision(Route route, const PotentialModel& model, const ClassCertificate& cert,
                           const Vec& x, double epsilon, double gamma_bar,
                           const ExtraInputs& extras = {}) {
  if (!(epsilon > 0.0 && epsilon < 2.0)) throw ConfigError("plan: epsilon must be in (0,2)");
  const DriftConstants drift = route == Route::LogSobolev
                                   ? DriftConstants{}
                                   : euler_drift(model, cert, gamma_bar);
  const ErgodicityRate rate = ergodicity_rate(route, model, cert, extras);
  const double L = model.lipschitz_L();
  const double d = model.dim();

  double gamma_for_C = route == Route::LogSobolev
                           ? std::min(gamma_bar, 2.0 / (std::get<PerturbedStronglyConvex>(cert).m +
                                                        std::get<PerturbedStronglyConvex>(cert).L1))
                           : gamma_bar;
  const double gamma_admissible = gamma_for_C;

  Plan plan;
  plan.route = route;
  plan.epsilon = epsilon;
  plan.kappa = rate.kappa();

  double log_C_bar = 0.0, T = 0.0, A_bar = 0.0, gamma = 0.0;
  for (int iter = 0; iter < 8; ++iter) {
    log_C_bar = detail::planner_log_C_bar(route, model, cert, drift, rate, x, gamma_for_C);
    T = detail::horizon_T(route, rate, log_C_bar, epsilon);
    A_bar = A_bound(route, drift, model, cert, gamma_admissible, x);
    if (!(T > 0.0)) {
      plan.degenerate = true;
      plan.T = T;
      plan.gamma = gamma_admissible;
      plan.p = 1;
      plan.A_bar = A_bar;
      plan.log_C_bar = log_C_bar;
      return plan;
    }
    const double q = (2.0 / 3.0) * A_bar * epsilon * epsilon / (L * L * T);
    const double cap = epsilon * epsilon / (L * L * T * (d + std::sqrt(d * d + q)));
    gamma = std::min(gamma_admissible, cap);
    if (route != Route::LogSobolev) break;
    // log-sobolev C-bar depends on gamma itself; fixed-point on the cap
    if (std::abs(gamma - gamma_for_C) <= 1e-12 * gamma) break;
    gamma_for_C = gamma;
  }

  plan.A_bar = A_bar;
  plan.log_C_bar = log_C_bar;
  plan.T = T;

  // re-certify, shrinking gamma if the integer split leaves no feasible n
  for (int attempt = 0; attempt < 80; ++attempt) {
    const int64_t p = static_cast<int64_t>(std::floor(T / gamma)) + 1;
    const auto sched = StepSchedule::constant(gamma);
    const DriftConstants drift_run =
        route == Route::LogSobolev ? DriftConstants{} : euler_drift(model, cert, gamma_bar);
    BoundAssembler asm_(route, model, cert, sched, drift_run, rate, x);
    std::vector<int64_t> candidates;
    const int64_t span = static_cast<int64_t>(T / gamma);
    for (int64_t n : {int64_t{0}, int64_t{1}, p - 1 - span, p - span, p - span + 1})
      if (n >= asm_.n_min() && n < p) candidates.push_back(n);
    if (p <= 4096)
      for (int64_t n = asm_.n_min(); n < p; ++n) candidates.push_back(n);
    TVBoundPoint best;
    best.total_raw = kInf;
    for (int64_t n : candidates) {
      const TVBoundPoint pt = asm_.at(p, n);
      if (pt.total_raw < best.total_raw) best = pt;
    }
    if (best.total_raw <= epsilon) {
      plan.gamma = gamma;
      plan.p = p;
      plan.certified = best.total_raw;
      plan.n_split = best.n;
      return plan;
    }
    gamma *= 0.95;
    plan.gamma_reduced = true;
  }
  throw InfeasibilityError("plan: could not certify epsilon after shrinking the step cap");
}

struct FixedBudgetPlan {
  double gamma = 0.0;
  double bound = 0.0;      // may exceed 2; callers clamp for reporting
  double log_bound = 0.0;
  int64_t p = 0, n = 0;
};

// Fixed iteration budget p: gamma = log(p-n) / ((p-n)(-log kappa)), with the
// closed-form bound value at that step size.
inline FixedBudgetPlan plan_fixed_budget(Route route, const PotentialModel& model,
                                         const ClassCertificate& cert, const Vec& x, int64_t p,
                                         int64_t n, double gamma_bar,
                                         const ExtraInputs& extras = {}) {
  if (!(p > n && n >= 0)) throw ConfigError("plan_fixed_budget: need p > n >= 0");
  const ErgodicityRate rate = ergodicity_rate(route, model, cert, extras);
  const DriftConstants drift =
      route == Route::LogSobolev ? DriftConstants{} : euler_drift(model, cert, gamma_bar);
  const double q = static_cast<double>(p - n);
  const double gamma = std::log(q) / (q * (-rate.log_kappa));
  const double gamma_admissible =
      route == Route::LogSobolev
          ? std::min(gamma_bar, 2.0 / (std::get<PerturbedStronglyConvex>(cert).m +
                                       std::get<PerturbedStronglyConvex>(cert).L1))
          : gamma_bar;
  if (gamma > gamma_admissible) {
    // log(q)/q decreases for q >= 3; find the minimal feasible budget
    const double y = gamma_admissible * (-rate.log_kappa);
    int64_t q_min = 2;
    while (std::log(static_cast<double>(q_min)) / q_min > y && q_min < (int64_t{1} << 56))
      q_min <<= 1;
    int64_t lo = q_min >> 1, hi = q_min;
    while (hi - lo > 1) {
      const int64_t mid = lo + (hi - lo) / 2;
      if (std::log(static_cast<double>(mid)) / mid > y)
        lo = mid;
      else
        hi = mid;
    }
    throw InfeasibilityError("plan_fixed_budget: gamma " + std::to_string(gamma) +
                             " exceeds gamma_bar; smallest feasible p is " +
                             std::to_string(hi + n));
  }
  const double A_bar = A_bound(route, drift, model, cert, gamma_admissible, x);
  const double log_C_bar =
      detail::planner_log_C_bar(route, model, cert, drift, rate, x,
                                route == Route::LogSobolev ? gamma : gamma_admissible);
  FixedBudgetPlan out;
  out.p = p;
  out.n = n;
  out.gamma = gamma;
  const double lq = std::log(q);
  const double inner = model.dim() + A_bar * lq / q;
  out.log_bound = log_sum_exp(log_C_bar - lq, std::log(lq) + 0.5 * std::log(inner)) - 0.5 * lq;
  out.bound = std::exp(out.log_bound);
  return out;
}

struct ScalingReport {
  std::vector<int> d_list;
  std::vector<double> gammas, ps;
  double slope_gamma = 0.0, slope_p = 0.0;
};

// Runs the precision planner across dimensions and fits log-log slopes.
inline ScalingReport scaling_study(Route route,
                                   const std::function<PotentialModel(int)>& family,
                                   const std::function<ClassCertificate(int)>& cert_for,
                                   const std::vector<int>& d_list, double epsilon,
                                   const std::function<double(int)>& gamma_bar_for,
                                   const ExtraInputs& extras = {}) {
  if (d_list.size() < 3) throw ConfigError("scaling_study: need at least 3 dimensions to fit");
  ScalingReport out;
  out.d_list = d_list;
  for (int d : d_list) {
    const PotentialModel model = family(d);
    const Plan plan = plan_precision(route, model, cert_for(d), Vec(d, 0.0), epsilon,
                                     gamma_bar_for(d), extras);
    out.gammas.push_back(plan.gamma);
    out.ps.push_back(static_cast<double>(plan.p));
  }
  auto slope = [&](const std::vector<double>& ys) {
    double sx = 0, sy = 0, sxx = 0, sxy = 0;
    const int n = static_cast<int>(d_list.size());
    for (int i = 0; i < n; ++i) {
      const double xi = std::log(static_cast<double>(d_list[i]));
      const double yi = std::log(ys[i]);
      sx += xi;
      sy += yi;
      sxx += xi * xi;
      sxy += xi * yi;
    }
    return (n * sxy - sx * sy) / (n * sxx - sx * sx);
  };
  out.slope_gamma = slope(out.gammas);
  out.slope_p = slope(out.ps);
  return out;
}

}  // namespace ulacert
