#pragma once

#include <optional>
#include <string>
#include <vector>

#include "ulacert/common.hpp"
#include "ulacert/potentials.hpp"
#include "ulacert/schedule.hpp"

namespace ulacert {

// ---- Lyapunov descriptors ---------------------------------------------------

// The drift function V attached to a class: V = e^{U/2}, V = W_c (exponential
// of the smoothed distance, parameter eta), or V = ||x - x*||^2. Exponential
// families are always handled through log V.
struct LyapunovDescriptor {
  enum class Kind { ExpHalfU, ExpEtaDist, SqDist };
  Kind kind = Kind::SqDist;
  double eta = 0.0;

  std::string name() const {
    switch (kind) {
      case Kind::ExpHalfU: return "exp_half_U";
      case Kind::ExpEtaDist: return "exp_eta_dist";
      case Kind::SqDist: return "sq_dist";
    }
    return "";
  }
};

inline double lyapunov_log_value(const LyapunovDescriptor& lyap, const PotentialModel& model,
                                 const Vec& x) {
  switch (lyap.kind) {
    case LyapunovDescriptor::Kind::ExpHalfU:
      return 0.5 * model.value(x);
    case LyapunovDescriptor::Kind::ExpEtaDist:
      return (lyap.eta / 4.0) * std::sqrt(sq_dist(x, model.minimizer()) + 1.0);
    case LyapunovDescriptor::Kind::SqDist: {
      const double v = sq_dist(x, model.minimizer());
      return v > 0.0 ? std::log(v) : -kInf;
    }
  }
  return -kInf;
}

// ---- drift constants ---------------------------------------------------------

// Foster-Lyapunov constants for the discretized kernel:
//   R_gamma V <= lambda^gamma V + gamma c   for gamma in (0, gamma_bar].
struct DriftConstants {
  double lambda = 0.0;
  double log_lambda = 0.0;
  double c = 0.0;
  double log_c = -kInf;
  double gamma_bar = 0.0;
  LyapunovDescriptor lyapunov;
  std::optional<double> varsigma;
  double ball_K = 0.0;  // radius of the small set used to build c
};

inline DriftConstants euler_drift(const PotentialModel& model, const ClassCertificate& cert,
                                  double gamma_bar) {
  validate_certificate(cert);
  if (!(gamma_bar > 0.0)) throw ConfigError("euler_drift: gamma_bar must be > 0");
  const double L = model.lipschitz_L();
  const double d = model.dim();
  DriftConstants out;
  out.gamma_bar = gamma_bar;

  if (const auto* s = std::get_if<Superexponential>(&cert)) {
    if (!(gamma_bar < 1.0 / L))
      throw ConfigError("euler_drift: superexponential class needs gamma_bar < 1/L (open)");
    out.log_lambda = -d * L / (2.0 * (1.0 - L * gamma_bar));
    out.lambda = std::exp(out.log_lambda);
    // The small-set radius solves ||grad U||^2 >= -8 log(lambda) using the
    // growth ||grad U|| >= rho r^{alpha-1}.
    const double base = -8.0 * out.log_lambda / (s->rho * s->rho);
    const double K = std::max(s->M_rho, std::exp(std::log(base) / (2.0 * (s->alpha - 1.0))));
    out.ball_K = K;
    // sup over the ball of V = e^{U/2} bounded analytically via U <= L K^2 / 2.
    const double log_supV = L * K * K / 4.0;
    out.log_c = std::log(2.0 * (-out.log_lambda)) - gamma_bar * out.log_lambda + log_supV;
    out.c = std::exp(out.log_c);
    out.lyapunov = {LyapunovDescriptor::Kind::ExpHalfU, 0.0};
  } else if (const auto* l = std::get_if<LogConcave>(&cert)) {
    if (!(gamma_bar <= 1.0 / L))
      throw ConfigError("euler_drift: log-concave class needs gamma_bar <= 1/L");
    const double eta = l->eta;
    out.log_lambda = -eta * eta * (std::sqrt(2.0) - 1.0) / 16.0;
    out.lambda = std::exp(out.log_lambda);
    const double Rc = std::max({1.0, 2.0 * d / eta, l->M_eta});
    out.ball_K = Rc;
    const double pre = (eta / 4.0) * (d + eta * gamma_bar / 4.0) - out.log_lambda;
    out.log_c = std::log(pre) + eta * std::sqrt(Rc * Rc + 1.0) / 4.0 +
                (eta * gamma_bar / 4.0) * (d + eta * gamma_bar / 4.0);
    out.c = std::exp(out.log_c);
    out.lyapunov = {LyapunovDescriptor::Kind::ExpEtaDist, eta};
  } else if (const auto* m = std::get_if<StronglyConvexOutsideBall>(&cert)) {
    if (!(gamma_bar < 2.0 * m->m / (L * L)))
      throw ConfigError("euler_drift: strongly convex class needs gamma_bar < 2m/L^2 (open)");
    out.log_lambda = -2.0 * m->m + gamma_bar * L * L;
    out.lambda = std::exp(out.log_lambda);
    out.c = 2.0 * (d + m->m * m->M_s * m->M_s);
    out.log_c = std::log(out.c);
    out.ball_K = std::max(1.0, m->M_s);
    out.lyapunov = {LyapunovDescriptor::Kind::SqDist, 0.0};
  } else {
    throw ConfigError(
        "euler_drift: the perturbed class controls moments through its own recursion; "
        "no drift constants are defined for it");
  }
  if (!(out.lambda > 0.0 && out.lambda < 1.0))
    throw InfeasibilityError("euler_drift: lambda fell outside (0,1)");
  return out;
}

// ---- moment envelopes F and G -------------------------------------------------

// F(lambda,a,c,gamma,w) = lambda^a w + c / (-lambda^gamma log lambda)
inline double eval_F(double lambda, double a, double c, double gamma, double w) {
  if (!(lambda > 0.0 && lambda < 1.0)) throw NumericError("eval_F: lambda must be in (0,1)");
  if (!(a >= 0.0 && c >= 0.0 && gamma > 0.0 && w >= 0.0))
    throw NumericError("eval_F: arguments out of domain");
  const double ll = std::log(lambda);
  const double head = std::exp(a * ll) * w;  // underflows cleanly to 0
  return head + c * std::exp(-gamma * ll) / (-ll);
}

// G(lambda,c,gamma,w) = w + c / (-lambda^gamma log lambda); dominates F for all a.
inline double eval_G(double lambda, double c, double gamma, double w) {
  if (!(lambda > 0.0 && lambda < 1.0)) throw NumericError("eval_G: lambda must be in (0,1)");
  if (!(c >= 0.0 && gamma > 0.0 && w >= 0.0)) throw NumericError("eval_G: arguments out of domain");
  const double ll = std::log(lambda);
  return w + c * std::exp(-gamma * ll) / (-ll);
}

// log-space variants used whenever w or c is an exponential-family quantity.
inline double eval_F_log(double log_lambda, double a, double log_c, double gamma, double log_w) {
  const double tail = log_c - gamma * log_lambda - std::log(-log_lambda);
  return log_sum_exp(a * log_lambda + log_w, tail);
}

inline double eval_G_log(double log_lambda, double log_c, double gamma, double log_w) {
  return eval_F_log(log_lambda, 0.0, log_c, gamma, log_w);
}

// omega(eps, R) = R^2 / (2 PhiInv(1 - eps/2))^2
inline double eval_omega(double eps, double R) {
  if (!(eps > 0.0 && eps < 1.0)) throw NumericError("eval_omega: eps must be in (0,1)");
  if (!(R >= 0.0)) throw NumericError("eval_omega: R must be >= 0");
  if (R == 0.0) return 0.0;
  const double q = normal_quantile(1.0 - eps / 2.0);
  return R * R / (4.0 * q * q);
}

// ---- ergodicity rates ----------------------------------------------------------

enum class Route { UserSupplied, Poincare, Bobkov, ReflectionConvex, StrongConvex, LogSobolev, GenericSDE };

inline std::string route_name(Route r) {
  switch (r) {
    case Route::UserSupplied: return "user_supplied";
    case Route::Poincare: return "poincare";
    case Route::Bobkov: return "bobkov";
    case Route::ReflectionConvex: return "reflection_convex";
    case Route::StrongConvex: return "strong_convex";
    case Route::LogSobolev: return "log_sobolev";
    case Route::GenericSDE: return "generic_sde";
  }
  return "";
}

inline Route route_from_name(const std::string& s) {
  if (s == "user_supplied") return Route::UserSupplied;
  if (s == "poincare") return Route::Poincare;
  if (s == "bobkov") return Route::Bobkov;
  if (s == "reflection_convex") return Route::ReflectionConvex;
  if (s == "strong_convex") return Route::StrongConvex;
  if (s == "log_sobolev") return Route::LogSobolev;
  if (s == "generic_sde") return Route::GenericSDE;
  throw ConfigError("unknown route '" + s + "'");
}

// Inputs the formulas cannot produce themselves. Provenance is recorded in
// every emitted result.
struct ExtraInputs {
  std::optional<double> C_half;           // contraction prefactor, 1/2-power family
  std::optional<double> upsilon_half;     // continuous-time rate, 1/2-power family
  std::optional<double> C_quarter;        // same pair for the 1/4-power family
  std::optional<double> upsilon_quarter;
  std::optional<double> variance_integral;
  std::string variance_provenance = "exact";  // exact | user | mc
  std::optional<double> sde_theta, sde_beta, sde_delta, sde_R;
  double sde_epsilon = 0.5;
  std::optional<double> sde_m_tilde, sde_M_tilde;
  bool reflection_proof_exponent = false;  // sensitivity switch: e^{4 omega/theta}
};

struct ErgodicityRate {
  Route route = Route::StrongConvex;
  double log_kappa = -1.0;
  double kappa() const { return std::exp(log_kappa); }

  // route-specific constants (logs where magnitudes can be astronomical)
  double theta = 0.0;        // continuous drift rate (Poincare: theta_{1/2}; Reflection: eta^2/8)
  double log_beta = -kInf;   // continuous drift offset
  double ball_K = 0.0;
  double osc_U_on_K = 0.0;   // Poincare
  double variance_integral = 0.0;  // Bobkov
  std::string variance_provenance;
  double R = 0.0;            // Reflection / GenericSDE
  double omega = 0.0;
  double exp_term_log = -kInf;  // Reflection: log(2 beta/theta) + s
  double log_varpi = -kInf;     // Reflection second tail rate
  double theta_tilde = 0.0;     // GenericSDE
  double log_K_eps = -kInf;     // GenericSDE
  double D_eps = 0.0;           // GenericSDE, distance-drift form
  double eps = 0.5;
  double m = 0.0, M_tilde = 0.0;  // StrongConvex / sde distance form
  double C_user = 0.0;          // UserSupplied prefactor
};

inline ErgodicityRate ergodicity_rate(Route route, const PotentialModel& model,
                                      const ClassCertificate& cert, const ExtraInputs& extras) {
  validate_certificate(cert);
  ErgodicityRate r;
  r.route = route;
  const double L = model.lipschitz_L();
  const double d = model.dim();

  switch (route) {
    case Route::UserSupplied: {
      if (!std::holds_alternative<Superexponential>(cert))
        throw ConfigError("ergodicity_rate: user_supplied route pairs with the superexponential class");
      if (!extras.upsilon_half || !extras.C_half)
        throw ConfigError(
            "ergodicity_rate: user_supplied route needs the (C, upsilon) pair for the 1/2-power "
            "family; they are not derivable from the formulas here");
      if (!(*extras.upsilon_half > 0.0)) throw ConfigError("ergodicity_rate: upsilon must be > 0");
      r.log_kappa = -*extras.upsilon_half;
      r.C_user = *extras.C_half;
      break;
    }
    case Route::Poincare: {
      const auto* s = std::get_if<Superexponential>(&cert);
      if (!s) throw ConfigError("ergodicity_rate: poincare route pairs with the superexponential class");
      const double sigma = 0.5;  // the 1/2-power Lyapunov family
      r.theta = sigma * d * L;
      const double base = 2.0 * d * L / (s->rho * (1.0 - sigma));
      const double K = std::max(s->M_rho, std::exp(std::log(base) / (2.0 * (s->alpha - 1.0))));
      r.ball_K = K;
      r.osc_U_on_K = L * K * K / 2.0;  // analytic envelope of osc U on the ball
      r.log_beta = std::log(sigma * d * L) + sigma * L * K * K / 2.0;
      const double logD =
          log_sum_exp(0.0, std::log(4.0 / (M_PI * M_PI)) + r.log_beta + 2.0 * std::log(K) +
                               r.osc_U_on_K);
      r.log_kappa = -r.theta * std::exp(-logD);
      break;
    }
    case Route::Bobkov: {
      if (!std::holds_alternative<LogConcave>(cert))
        throw ConfigError("ergodicity_rate: bobkov route pairs with the log-concave class");
      if (!extras.variance_integral)
        throw ConfigError("ergodicity_rate: bobkov route needs the variance integral of the target");
      const double v = *extras.variance_integral;
      if (!(v > 0.0)) throw ConfigError("ergodicity_rate: variance integral must be > 0");
      r.variance_integral = v;
      r.variance_provenance = extras.variance_provenance;
      r.log_kappa = -1.0 / (432.0 * v);
      break;
    }
    case Route::ReflectionConvex: {
      const auto* l = std::get_if<LogConcave>(&cert);
      if (!l) throw ConfigError("ergodicity_rate: reflection route pairs with the log-concave class");
      const double eta = l->eta;
      r.theta = eta * eta / 8.0;
      const double K = std::max({1.0, l->M_eta, 4.0 * d / eta});
      r.ball_K = K;
      const double sq = std::sqrt(K * K + 1.0);
      const double branch = eta * sq / 4.0 - std::log(sq);
      r.log_beta = std::log((eta / 4.0) * ((eta / 4.0) * K + d)) + std::max(0.0, branch);
      r.R = (8.0 / eta) * (std::log(4.0) + r.log_beta - std::log(r.theta));
      if (!(r.R > 0.0)) throw InfeasibilityError("ergodicity_rate: nonpositive coupling radius");
      r.omega = eval_omega(0.5, r.R);
      const double s_exp = extras.reflection_proof_exponent ? 4.0 * r.omega / r.theta
                                                            : r.theta * r.omega / 4.0;
      r.exp_term_log = std::log(2.0) - std::log(r.theta) + r.log_beta + s_exp;
      const double log_inner = -std::log(r.theta) + r.log_beta +
                               log_sum_exp(std::log(3.0), std::log(4.0) + s_exp);
      r.log_varpi = -std::log(2.0) * (r.theta / 4.0) / (log_inner + std::log(2.0));
      // headline rate used by split rules: the slower of the two tails
      r.log_kappa = std::max(-r.theta / 4.0, r.log_varpi);
      break;
    }
    case Route::StrongConvex: {
      const auto* m = std::get_if<StronglyConvexOutsideBall>(&cert);
      if (!m) throw ConfigError("ergodicity_rate: strong route pairs with the strongly convex class");
      r.m = m->m;
      r.M_tilde = std::max(1.0, m->M_s);
      r.omega = eval_omega(0.5, r.M_tilde);
      const double D = (1.0 + std::exp(m->m * r.omega / 4.0)) * (1.0 + r.M_tilde);
      r.D_eps = D;
      r.log_kappa = -(m->m / 2.0) * std::log(2.0) / (std::log(D) + std::log(2.0));
      break;
    }
    case Route::LogSobolev: {
      const auto* p = std::get_if<PerturbedStronglyConvex>(&cert);
      if (!p) throw ConfigError("ergodicity_rate: log-sobolev route pairs with the perturbed class");
      r.m = p->m;
      r.log_kappa = -p->m * std::exp(-p->osc_U2);
      break;
    }
    case Route::GenericSDE: {
      r.eps = extras.sde_epsilon;
      if (!(r.eps > 0.0 && r.eps < 1.0)) throw ConfigError("ergodicity_rate: eps must be in (0,1)");
      if (extras.sde_theta && extras.sde_beta && extras.sde_delta && extras.sde_R) {
        const double th = *extras.sde_theta, be = *extras.sde_beta, de = *extras.sde_delta,
                     R = *extras.sde_R;
        if (!(th > 0.0 && be >= 0.0 && de > 0.0 && R >= 0.0))
          throw ConfigError("ergodicity_rate: generic-sde constants out of domain");
        r.theta = th;
        r.log_beta = be > 0.0 ? std::log(be) : -kInf;
        r.R = R;
        r.theta_tilde = th * th * de / (2.0 * be + th * de);
        r.omega = eval_omega(r.eps, R);
        r.log_K_eps = log_sum_exp(
            {r.log_beta - std::log(r.theta_tilde),
             r.log_beta - std::log(r.theta_tilde) + r.theta_tilde * r.omega,
             std::log(de / 2.0)});
        r.log_kappa = (r.theta_tilde / 2.0) * std::log1p(-r.eps) /
                      (r.log_K_eps - std::log1p(-r.eps));
      } else if (extras.sde_m_tilde && extras.sde_M_tilde) {
        const double mt = *extras.sde_m_tilde, Mt = *extras.sde_M_tilde;
        if (!(mt > 0.0 && Mt >= 1.0))
          throw ConfigError("ergodicity_rate: distance-drift form needs m_tilde > 0, M_tilde >= 1");
        r.m = mt;
        r.M_tilde = Mt;
        r.omega = eval_omega(r.eps, Mt);
        r.D_eps = (1.0 + std::exp(mt * r.omega / 2.0)) * (1.0 + Mt);
        r.log_kappa = (mt / 2.0) * std::log1p(-r.eps) / (std::log(r.D_eps) - std::log1p(-r.eps));
      } else {
        throw ConfigError(
            "ergodicity_rate: generic-sde route needs either (theta,beta,delta,R) or "
            "(m_tilde,M_tilde)");
      }
      break;
    }
  }
  if (!(r.log_kappa < 0.0)) {
    throw InfeasibilityError("ergodicity_rate: kappa >= 1 for route " + route_name(route) +
                             " (log kappa = " + std::to_string(r.log_kappa) + ")");
  }
  return r;
}

// ---- gradient second-moment envelope A ----------------------------------------

// Certified upper bound on sup_k of the mean squared gradient along the chain.
// gamma1 is the first (largest) step of the schedule in use; passing gamma_bar
// instead yields the bound uniform over all admissible schedules.
inline double A_bound(Route route, const DriftConstants& drift, const PotentialModel& model,
                      const ClassCertificate& cert, double gamma1, const Vec& x) {
  const double L = model.lipschitz_L();
  const double d = model.dim();
  switch (route) {
    case Route::StrongConvex: {
      if (!std::holds_alternative<StronglyConvexOutsideBall>(cert))
        throw ConfigError("A_bound: strong route needs the strongly convex certificate");
      if (!(gamma1 <= drift.gamma_bar + 1e-15)) throw ConfigError("A_bound: gamma1 > gamma_bar");
      return L * L * eval_G(drift.lambda, drift.c, gamma1, sq_dist(x, model.minimizer()));
    }
    case Route::UserSupplied:
    case Route::Poincare: {
      const auto* s = std::get_if<Superexponential>(&cert);
      if (!s) throw ConfigError("A_bound: route needs the superexponential certificate");
      if (!(gamma1 <= drift.gamma_bar + 1e-15)) throw ConfigError("A_bound: gamma1 > gamma_bar");
      const double logG = eval_G_log(drift.log_lambda, drift.log_c, gamma1,
                                     lyapunov_log_value(drift.lyapunov, model, x));
      const double aa = a_alpha(*s, L);
      const double inner = ((s->alpha + 1.0) / s->rho) *
                           (aa + 4.0 * (2.0 - s->alpha) * (s->alpha + 1.0) / (s->alpha * s->rho) +
                            2.0 * logG);
      return L * L * std::exp((2.0 / s->alpha) * std::log(inner));
    }
    case Route::Bobkov:
    case Route::ReflectionConvex: {
      const auto* l = std::get_if<LogConcave>(&cert);
      if (!l) throw ConfigError("A_bound: route needs the log-concave certificate");
      if (!(gamma1 <= drift.gamma_bar + 1e-15)) throw ConfigError("A_bound: gamma1 > gamma_bar");
      const double logG = eval_G_log(drift.log_lambda, drift.log_c, gamma1,
                                     lyapunov_log_value(drift.lyapunov, model, x));
      const double t = (4.0 / l->eta) * (1.0 + logG);
      return L * L * t * t;
    }
    case Route::LogSobolev: {
      const auto* p = std::get_if<PerturbedStronglyConvex>(&cert);
      if (!p) throw ConfigError("A_bound: log-sobolev route needs the perturbed certificate");
      const double varpi = 2.0 * p->m * p->L1 / (p->m + p->L1);
      if (!(gamma1 <= 2.0 / (p->m + p->L1) + 1e-15))
        throw ConfigError("A_bound: log-sobolev route needs gamma1 <= 2/(m+L1)");
      const double g2 = p->sup_gradU2 * p->sup_gradU2;
      const double moment = sq_dist(p->xstar1, model.minimizer()) +
                            (2.0 / varpi) * (2.0 * d + (gamma1 + 2.0 / varpi) * g2);
      return 2.0 * p->L1 * p->L1 * moment + 2.0 * g2;
    }
    case Route::GenericSDE:
      throw ConfigError("A_bound: generic-sde route carries no discretization envelope");
  }
  return kNaN;
}

// ---- initial-condition constants C(delta_x Q^n) --------------------------------

// Prefix data for the density-variance factor D_n; reused across many n.
struct DnCache {
  std::vector<double> prefix_log1m;  // sum_{k<=n} log(1 - L gamma_k)
  std::vector<double> prefix_ratio;  // sum_{k<=n} gamma_k / (1 - L gamma_k)

  static DnCache build(const StepSchedule& sched, double L, int64_t n_max) {
    DnCache c;
    c.prefix_log1m.assign(n_max + 1, 0.0);
    c.prefix_ratio.assign(n_max + 1, 0.0);
    KahanSum s1, s2;
    for (int64_t k = 1; k <= n_max; ++k) {
      const double g = sched.gamma(k);
      if (!(L * g < 1.0))
        throw ConfigError("D_n: needs gamma_k < 1/L for every step in the window");
      s1.add(std::log1p(-L * g));
      s2.add(g / (1.0 - L * g));
      c.prefix_log1m[k] = s1.value();
      c.prefix_ratio[k] = s2.value();
    }
    return c;
  }

  double log_Dn(int64_t n, int dim) const {
    if (n < 1) throw ConfigError("D_n: needs n >= 1");
    return -(dim / 2.0) *
           (std::log(4.0 * M_PI) + 2.0 * prefix_log1m[n] + std::log(prefix_ratio[n]));
  }
};

inline double log_Dn_direct(const StepSchedule& sched, double L, int64_t n, int dim) {
  return DnCache::build(sched, L, n).log_Dn(n, dim);
}

// Returns log C(delta_x Q^n) for the route. Factorial/Gamma-function and
// power terms are assembled in log space.
inline double C_bound_log(Route route, const Vec& x, int64_t n, const StepSchedule& sched,
                          const DriftConstants& drift, const ErgodicityRate& rate,
                          const PotentialModel& model, const ClassCertificate& cert,
                          const DnCache* dn_cache = nullptr) {
  if (n < 0) throw ConfigError("C_bound: n must be >= 0");
  const double d = model.dim();
  const double L = model.lipschitz_L();
  const double gamma1 = sched.gamma1();

  switch (route) {
    case Route::UserSupplied: {
      if (!(rate.C_user > 0.0))
        throw ConfigError("C_bound: user_supplied route needs the C prefactor input");
      const double logF = eval_F_log(drift.log_lambda, sched.partial_sum(1, n), drift.log_c, gamma1,
                                     lyapunov_log_value(drift.lyapunov, model, x));
      return std::log(rate.C_user) + logF;
    }
    case Route::Poincare: {
      const auto* s = std::get_if<Superexponential>(&cert);
      if (!s) throw ConfigError("C_bound: poincare route needs the superexponential certificate");
      if (n < 1) throw ConfigError("C_bound: poincare route needs n >= 1");
      const double logDn =
          dn_cache ? dn_cache->log_Dn(n, model.dim()) : log_Dn_direct(sched, L, n, model.dim());
      return d * std::log(s->alpha + 1.0) + 0.5 * (d + 1.0) * std::log(2.0 * M_PI) +
             std::lgamma(d) - d * std::log(s->rho) - std::lgamma((d + 1.0) / 2.0) + logDn +
             a_alpha(*s, L) + model.value(x);
    }
    case Route::Bobkov: {
      const auto* l = std::get_if<LogConcave>(&cert);
      if (!l) throw ConfigError("C_bound: bobkov route needs the log-concave certificate");
      if (n < 1) throw ConfigError("C_bound: bobkov route needs n >= 1");
      const double logDn =
          dn_cache ? dn_cache->log_Dn(n, model.dim()) : log_Dn_direct(sched, L, n, model.dim());
      const double t1 = 0.5 * (d + 1.0) * std::log(2.0 * M_PI) + std::lgamma(d) -
                        d * std::log(l->eta) - std::lgamma((d + 1.0) / 2.0);
      const double t2 = l->M_eta > 0.0 ? (d / 2.0) * std::log(M_PI) + d * std::log(l->M_eta) -
                                             std::lgamma(d / 2.0 + 1.0)
                                       : -kInf;
      return log_sum_exp(t1, t2) + logDn + model.value(x);
    }
    case Route::ReflectionConvex: {
      const double logF = eval_F_log(drift.log_lambda, sched.partial_sum(1, n), drift.log_c, gamma1,
                                     lyapunov_log_value(drift.lyapunov, model, x));
      return log_sum_exp({std::log(0.5) + logF,
                          rate.log_beta - std::log(rate.theta) - std::log(2.0),
                          rate.exp_term_log});
    }
    case Route::StrongConvex: {
      const auto* m = std::get_if<StronglyConvexOutsideBall>(&cert);
      if (!m) throw ConfigError("C_bound: strong route needs the strongly convex certificate");
      const double F = eval_F(drift.lambda, sched.partial_sum(1, n), drift.c, gamma1,
                              sq_dist(x, model.minimizer()));
      const double C = 6.0 + 2.0 * std::sqrt(d / m->m + m->M_s * m->M_s) + 2.0 * std::sqrt(F);
      return std::log(C);
    }
    case Route::LogSobolev: {
      const auto* p = std::get_if<PerturbedStronglyConvex>(&cert);
      if (!p) throw ConfigError("C_bound: log-sobolev route needs the perturbed certificate");
      if (n < 1) throw ConfigError("C_bound: log-sobolev route needs n >= 1");
      const double gn = sched.gamma(n);
      if (!(gamma1 <= 2.0 / (p->m + p->L1) + 1e-15))
        throw ConfigError("C_bound: log-sobolev route needs gamma1 <= 2/(m+L1)");
      const double varpi = 2.0 * p->m * p->L1 / (p->m + p->L1);
      const double g2 = p->sup_gradU2 * p->sup_gradU2;
      const double Gn = sched.partial_sum(1, n);
      double C2 = p->L1 * std::exp(-varpi * Gn / 2.0) * sq_dist(x, p->xstar1);
      C2 += p->L1 * gn * (gn + 2.0 / varpi) * g2;
      C2 += 2.0 * p->osc_U2;
      C2 += 2.0 * p->L1 * (1.0 - varpi * gn) * (2.0 * d + (gamma1 + 2.0 / varpi) * g2) / varpi;
      C2 += -d * (1.0 + std::log(2.0 * gn * p->m) - 2.0 * p->L1 * gn);
      if (!(C2 >= 0.0)) C2 = 0.0;
      return 0.5 * std::log(C2);
    }
    case Route::GenericSDE:
      throw ConfigError("C_bound: generic-sde route has no chain-initialization constant");
  }
  return kNaN;
}

}  // namespace ulacert
