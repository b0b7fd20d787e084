#pragma once

#include <cstdint>
#include <vector>

#include "ulacert/certifier.hpp"

namespace ulacert {

// One evaluated point of a total-variation bound curve.
struct TVBoundPoint {
  int64_t p = 0;
  int64_t n = 0;
  bool n_degenerate = false;
  double disc_term = 0.0;   // discretization-error term
  double tail_term = 0.0;   // ergodic-decay term (both tails for the reflection route)
  double total_raw = 0.0;   // unclamped sum, kept for slope studies
  double total = 0.0;       // min(2, total_raw)
  bool clamped = false;
};

struct TVBoundCurve {
  Route route;
  std::string schedule;
  std::vector<TVBoundPoint> points;
};

// Assembles bound(p) = 2^{-1/2} L ( sum_{k=n}^{p-1} { gamma_{k+1}^3 A / 3 +
// d gamma_{k+1}^2 } )^{1/2} + tail(n, p) for one fixed start x. The tail is
// C(delta_x Q^n) kappa^{Gamma_{n+1,p}}, except on the reflection route where
// it has the two-rate form 2 Lambda_n e^{-theta Gamma/4} + 4 varpi^Gamma.
class BoundAssembler {
 public:
  BoundAssembler(Route route, const PotentialModel& model, const ClassCertificate& cert,
                 const StepSchedule& sched, const DriftConstants& drift,
                 const ErgodicityRate& rate, const Vec& x)
      : route_(route), model_(model), cert_(cert), sched_(sched), drift_(drift), rate_(rate),
        x_(x) {
    A_ = A_bound(route, drift, model, cert, sched.gamma1(), x);
    needs_dn_ = route == Route::Poincare || route == Route::Bobkov;
    n_min_ = (route == Route::Poincare || route == Route::Bobkov || route == Route::LogSobolev)
                 ? 1
                 : 0;
  }

  double A() const { return A_; }
  int64_t n_min() const { return n_min_; }

  void reserve(int64_t p_max) {
    if (needs_dn_ && static_cast<int64_t>(dn_.prefix_ratio.size()) <= p_max)
      dn_ = DnCache::build(sched_, model_.lipschitz_L(), p_max);
  }

  double log_C(int64_t n) const {
    return C_bound_log(route_, x_, n, sched_, drift_, rate_, model_, cert_,
                       needs_dn_ && n < static_cast<int64_t>(dn_.prefix_ratio.size()) ? &dn_
                                                                                      : nullptr);
  }

  TVBoundPoint at(int64_t p, int64_t n, bool n_degenerate = false) const {
    if (!(n >= 0 && n < p)) throw ConfigError("tv_bound: need 0 <= n < p");
    TVBoundPoint pt;
    pt.p = p;
    pt.n = n;
    pt.n_degenerate = n_degenerate;
    const double L = model_.lipschitz_L();
    const double d = model_.dim();
    const double S =
        (A_ / 3.0) * sched_.power_sum(n + 1, p, 3) + d * sched_.power_sum(n + 1, p, 2);
    pt.disc_term = L * std::sqrt(S / 2.0);
    const double G_tail = sched_.partial_sum(n + 1, p);
    if (route_ == Route::ReflectionConvex) {
      const double t1 = std::log(2.0) + log_C(n) - rate_.theta * G_tail / 4.0;
      const double t2 = std::log(4.0) + rate_.log_varpi * G_tail;
      pt.tail_term = std::exp(t1) + std::exp(t2);
    } else {
      pt.tail_term = std::exp(log_C(n) + rate_.log_kappa * G_tail);
    }
    pt.total_raw = pt.disc_term + pt.tail_term;
    pt.total = std::min(2.0, pt.total_raw);
    pt.clamped = pt.total_raw > 2.0;
    return pt;
  }

  // Best split for a single p by exhaustive scan over n.
  TVBoundPoint best_at(int64_t p) const {
    TVBoundPoint best;
    best.total_raw = kInf;
    for (int64_t n = n_min_; n < p; ++n) {
      const TVBoundPoint pt = at(p, n);
      if (pt.total_raw < best.total_raw) best = pt;
    }
    if (!(best.total_raw < kInf)) throw ConfigError("tv_bound: empty split range");
    return best;
  }

  TVBoundCurve curve(int64_t p_max, StepSchedule::SplitVariant variant, bool optimize_n) {
    if (p_max < 1) throw ConfigError("tv_bound_curve: p_max must be >= 1");
    reserve(p_max);
    TVBoundCurve out;
    out.route = route_;
    out.schedule = sched_.describe();
    out.points.reserve(p_max);
    // routes whose initial constant needs n >= 1 have no split for p = 1
    for (int64_t p = n_min_ + 1; p <= p_max; ++p)
      out.points.push_back(point_for(p, variant, optimize_n));
    return out;
  }

  TVBoundCurve curve_at(const std::vector<int64_t>& ps, StepSchedule::SplitVariant variant,
                        bool optimize_n) {
    int64_t p_max = 1;
    for (int64_t p : ps) p_max = std::max(p_max, p);
    reserve(p_max);
    TVBoundCurve out;
    out.route = route_;
    out.schedule = sched_.describe();
    for (int64_t p : ps) out.points.push_back(point_for(p, variant, optimize_n));
    return out;
  }

  TVBoundPoint point_for(int64_t p, StepSchedule::SplitVariant variant, bool optimize_n) {
    if (optimize_n) return best_at(p);
    auto split = sched_.burnin_split(p, rate_.kappa(), variant);
    int64_t n = std::max<int64_t>(split.n, n_min_);
    bool degenerate = split.degenerate || n != split.n;
    if (n >= p) {
      n = p - 1;
      degenerate = true;
    }
    if (n < n_min_) {  // p == 1 on a route that needs n >= 1
      throw ConfigError("tv_bound_curve: route needs n >= 1, so p must be >= 2");
    }
    return at(p, n, degenerate);
  }

 private:
  Route route_;
  PotentialModel model_;
  ClassCertificate cert_;
  StepSchedule sched_;
  DriftConstants drift_;
  ErgodicityRate rate_;
  Vec x_;
  double A_ = 0.0;
  bool needs_dn_ = false;
  int64_t n_min_ = 0;
  DnCache dn_;
};

// ---- stationary-bias envelope ---------------------------------------------

struct BiasBound {
  double B = 0.0;
  double B2 = 0.0;
  double leading_coeff = 0.0;  // B(gamma,1)/sqrt(gamma)
  double grad_vhalf_norm = 0.0;
};

// Envelope of sup ||grad U(x)|| e^{-U(x)/4}: radial grid scan under the
// superexponential tail control, which certifies the sup is attained inside a
// finite ball.
inline double grad_vhalf_norm(const PotentialModel& model, const Superexponential& cert,
                              uint64_t seed = 20240401ULL) {
  const double L = model.lipschitz_L();
  const double aa = a_alpha(cert, L);
  // envelope beyond M_rho: L r exp(a/4) exp(-rho r^alpha / (4(alpha+1))),
  // maximized at r^alpha = 4(alpha+1)/(rho alpha).
  const double r_peak =
      std::pow(4.0 * (cert.alpha + 1.0) / (cert.rho * cert.alpha), 1.0 / cert.alpha);
  double r_cut = std::max({cert.M_rho, r_peak, 1.0}) * 2.0;
  auto envelope = [&](double r) {
    return L * r * std::exp(aa / 4.0 - cert.rho * std::pow(r, cert.alpha) / (4.0 * (cert.alpha + 1.0)));
  };
  double best = 0.0;
  const int d = model.dim();
  Vec x(d);
  for (int i = 0; i <= 400; ++i) {
    const double r = r_cut * i / 400.0;
    for (int dir = 0; dir < 8; ++dir) {
      rng::fill_normal(seed, dir, i, x.data(), d);
      const double nr = norm2(x);
      for (int k = 0; k < d; ++k)
        x[k] = model.minimizer()[k] + (nr > 0.0 ? x[k] / nr * r : 0.0);
      const double g = norm2(model.gradient(x)) * std::exp(-model.value(x) / 4.0);
      best = std::max(best, g);
    }
  }
  // grow the cut until the analytic envelope falls below the observed max
  int guard = 0;
  while (envelope(r_cut) > best && guard++ < 60) {
    r_cut *= 1.5;
    best = std::max(best, envelope(r_cut / 1.5));
  }
  if (guard >= 60 || !std::isfinite(best))
    throw InfeasibilityError("bias_bound: could not certify the weighted gradient norm finite");
  return best;
}

// The pure formula
//   B^2 = L^2 max(1, C^2) (1+gamma) (1-kappa)^{-2} (2G + beta/theta)
//         (gamma d + gamma^2/3 |grad U|_{V^{1/2}}^2 G).
inline double bias_bound_core(double L, double C_quarter, double kappa, double gamma, double d,
                              double G, double beta_over_theta, double grad_vhalf) {
  if (!(kappa > 0.0 && kappa < 1.0)) throw ConfigError("bias_bound: kappa must be in (0,1)");
  const double front = L * L * std::max(1.0, C_quarter * C_quarter) * (1.0 + gamma) /
                       ((1.0 - kappa) * (1.0 - kappa));
  return front * (2.0 * G + beta_over_theta) *
         (gamma * d + gamma * gamma / 3.0 * grad_vhalf * grad_vhalf * G);
}

// B(gamma, v) for a superexponential target; kappa and the C prefactor for
// the 1/4-power family are user inputs.
inline BiasBound bias_bound_B(const PotentialModel& model, const Superexponential& cert,
                              const DriftConstants& drift, double C_quarter, double kappa,
                              double gamma, double v_log, bool v_is_log = true) {
  if (!(gamma > 0.0 && gamma <= drift.gamma_bar)) throw ConfigError("bias_bound: gamma out of range");
  const double L = model.lipschitz_L();
  const double d = model.dim();
  // continuous-time 1/2-power drift pair
  const double sigma = 0.5;
  const double Khalf = std::max(
      cert.M_rho,
      std::exp(std::log(2.0 * d * L / (cert.rho * (1.0 - sigma))) / (2.0 * (cert.alpha - 1.0))));
  const double theta_half = sigma * d * L;
  const double log_beta_half = std::log(theta_half) + sigma * L * Khalf * Khalf / 2.0;
  const double beta_over_theta = std::exp(log_beta_half - std::log(theta_half));
  const double gn = grad_vhalf_norm(model, cert);
  const double logw = v_is_log ? v_log : std::log(v_log);
  const double G = std::exp(eval_G_log(drift.log_lambda, drift.log_c, gamma, logw));
  BiasBound out;
  out.grad_vhalf_norm = gn;
  out.B2 = bias_bound_core(L, C_quarter, kappa, gamma, d, G, beta_over_theta, gn);
  if (!std::isfinite(out.B2)) throw InfeasibilityError("bias_bound: overflow in B^2");
  out.B = std::sqrt(out.B2);
  out.leading_coeff = out.B / std::sqrt(gamma);
  return out;
}

}  // namespace ulacert
