#pragma once

#include <cstdint>
#include <functional>
#include <vector>

#include "ulacert/certifier.hpp"
#include "ulacert/common.hpp"
#include "ulacert/potentials.hpp"
#include "ulacert/rng.hpp"

namespace ulacert {

// Reflection coupling of dX = b(X)dt + dB, dY = b(Y)dt + (Id - 2ee^T)dB with
// e = (X-Y)/|X-Y| and e(0) = 0. Once merged the two chains share increments.
struct CoupledState {
  Vec x, y;
  bool coupled = false;
  double tau_c = -1.0;  // coupling time in the diffusion clock; -1 = not yet
  double t = 0.0;
};

using DriftFn = std::function<void(const double*, double*)>;

// The rescaled overdamped drift b = -(1/2) grad U; times are in the rescaled
// clock. clock_factor_to_unscaled() converts to the clock of the sqrt(2)-noise
// diffusion the chain discretizes.
inline DriftFn langevin_drift(const PotentialModel& model) {
  return [model](const double* v, double* out) {
    model.gradient(v, out);
    for (int i = 0; i < model.dim(); ++i) out[i] = -0.5 * out[i];
  };
}

inline constexpr double clock_factor_to_unscaled() { return 0.5; }

inline CoupledState reflection_step(const CoupledState& state, const DriftFn& b, double dt,
                                    const Vec& z, double merge_radius) {
  if (!(dt > 0.0)) throw ConfigError("reflection_step: dt must be > 0");
  const int d = static_cast<int>(state.x.size());
  CoupledState next = state;
  next.t = state.t + dt;
  const double sdt = std::sqrt(dt);
  Vec bx(d), by(d);
  b(state.x.data(), bx.data());
  if (state.coupled) {
    for (int i = 0; i < d; ++i) next.x[i] = state.x[i] + bx[i] * dt + sdt * z[i];
    next.y = next.x;
    return next;
  }
  b(state.y.data(), by.data());
  Vec e = sub(state.x, state.y);
  const double dist = norm2(e);
  if (dist > 0.0)
    for (double& v : e) v /= dist;
  const double ez = dot(e, z);
  for (int i = 0; i < d; ++i) {
    next.x[i] = state.x[i] + bx[i] * dt + sdt * z[i];
    next.y[i] = state.y[i] + by[i] * dt + sdt * (z[i] - 2.0 * ez * e[i]);
  }
  for (int i = 0; i < d; ++i)
    if (!std::isfinite(next.x[i]) || !std::isfinite(next.y[i]))
      throw NumericError("reflection_step: non-finite state");
  // merge when the gap closes or the difference crosses through zero between
  // grid points (pure thresholding would bias tau_c upward). A crossing is a
  // sign flip whose interpolating segment passes within merge_radius of zero.
  const Vec diff_old = sub(state.x, state.y);
  const Vec diff_new = sub(next.x, next.y);
  const double gap = norm2(diff_new);
  bool merge = gap <= merge_radius;
  if (!merge && dot(diff_old, diff_new) < 0.0) {
    double dd = 0.0, num = 0.0;
    for (int i = 0; i < d; ++i) {
      const double step_i = diff_new[i] - diff_old[i];
      dd += step_i * step_i;
      num -= diff_old[i] * step_i;
    }
    const double tstar = dd > 0.0 ? std::min(1.0, std::max(0.0, num / dd)) : 0.0;
    double closest = 0.0;
    for (int i = 0; i < d; ++i) {
      const double v = diff_old[i] + tstar * (diff_new[i] - diff_old[i]);
      closest += v * v;
    }
    merge = std::sqrt(closest) <= merge_radius;
  }
  if (merge) {
    next.coupled = true;
    next.tau_c = next.t;
    next.y = next.x;
  }
  return next;
}

struct CouplingTail {
  std::vector<double> t_grid;
  std::vector<double> empirical;   // P(tau_c > t)
  std::vector<double> se;          // binomial standard error
  std::vector<double> analytic;    // 2 (Phi(|x-y| / (2 sqrt t)) - 1/2)
  std::vector<double> theorem;     // optional certified curve (empty if unused)
  int64_t n_runs = 0;
  double dt = 0.0;
};

// Simulates n_runs reflection couplings and tabulates the survival function
// of tau_c on t_grid next to the analytic tail bound.
inline CouplingTail coupling_tail(const DriftFn& b, int dim, const Vec& x0, const Vec& y0,
                                  const std::vector<double>& t_grid, double dt, int64_t n_runs,
                                  double merge_radius, uint64_t seed, int workers = 0) {
  if (t_grid.empty()) throw ConfigError("coupling_tail: empty t grid");
  for (size_t i = 1; i < t_grid.size(); ++i)
    if (!(t_grid[i] > t_grid[i - 1])) throw ConfigError("coupling_tail: t grid must increase");
  if (!(dt > 0.0)) throw ConfigError("coupling_tail: dt must be > 0");
  if (n_runs < 1) throw ConfigError("coupling_tail: n_runs must be >= 1");

  const double t_max = t_grid.back();
  const int64_t n_steps = static_cast<int64_t>(std::ceil(t_max / dt - 1e-12));
  const int nblocks = workers > 0 ? workers : std::max(1u, std::thread::hardware_concurrency());
  std::vector<std::vector<int64_t>> survived(nblocks, std::vector<int64_t>(t_grid.size(), 0));
  std::vector<std::string> errors(nblocks);

  parallel_blocks(n_runs, nblocks, [&](int block, int64_t lo, int64_t hi) {
    try {
      Vec z(dim);
      for (int64_t run = lo; run < hi; ++run) {
        CoupledState st;
        st.x = x0;
        st.y = y0;
        double tau = kInf;
        for (int64_t k = 0; k < n_steps && !st.coupled; ++k) {
          rng::fill_normal(seed, static_cast<uint64_t>(run), static_cast<uint64_t>(k), z.data(),
                           dim);
          st = reflection_step(st, b, dt, z, merge_radius);
        }
        if (st.coupled) tau = st.tau_c;
        for (size_t i = 0; i < t_grid.size(); ++i)
          if (tau > t_grid[i] + 1e-15) ++survived[block][i];
      }
    } catch (const std::exception& e) {
      errors[block] = e.what();
    }
  });
  for (const auto& e : errors)
    if (!e.empty()) throw NumericError(e);

  CouplingTail out;
  out.t_grid = t_grid;
  out.n_runs = n_runs;
  out.dt = dt;
  const double dist0 = std::sqrt(sq_dist(x0, y0));
  for (size_t i = 0; i < t_grid.size(); ++i) {
    int64_t s = 0;
    for (int b2 = 0; b2 < nblocks; ++b2) s += survived[b2][i];
    const double phat = static_cast<double>(s) / n_runs;
    out.empirical.push_back(phat);
    out.se.push_back(std::sqrt(std::max(phat * (1.0 - phat), 1.0 / n_runs) / n_runs));
    out.analytic.push_back(2.0 * (normal_cdf(dist0 / (2.0 * std::sqrt(t_grid[i]))) - 0.5));
  }
  return out;
}

// Certified total-variation decay curves for the coupled diffusion, in the
// drift clock of b. Exponential pieces are assembled in log space.
inline double sde_theorem_curve(const ErgodicityRate& rate, double log_V_sum_half,
                                double dist0, double t) {
  if (rate.route == Route::GenericSDE && rate.theta_tilde > 0.0) {
    const double head =
        std::log(2.0) - rate.theta_tilde * t / 2.0 +
        log_sum_exp(log_V_sum_half, rate.theta_tilde * rate.omega + rate.log_beta -
                                        std::log(rate.theta_tilde));
    return std::exp(head) + 4.0 * std::exp(rate.log_kappa * t);
  }
  // distance-drift form: 2 ((1-eps)^{-1} + 1 + |x-y|) kappa^t
  return 2.0 * (1.0 / (1.0 - rate.eps) + 1.0 + dist0) * std::exp(rate.log_kappa * t);
}

// Route constants restated in the clock of the unit-noise diffusion with
// drift -(1/2) grad U, which halves theta/beta of the continuous drift pair
// and halves the distance-contraction rate.
inline ErgodicityRate sde_rate_for_coupling(Route route, const PotentialModel& model,
                                            const ClassCertificate& cert,
                                            const ExtraInputs& extras = {}) {
  ExtraInputs e = extras;
  if (route == Route::StrongConvex) {
    const auto& m = std::get<StronglyConvexOutsideBall>(cert);
    e.sde_m_tilde = m.m / 2.0;
    e.sde_M_tilde = std::max(1.0, m.M_s);
    e.sde_theta.reset();
    return ergodicity_rate(Route::GenericSDE, model, cert, e);
  }
  if (route == Route::ReflectionConvex) {
    const ErgodicityRate base = ergodicity_rate(Route::ReflectionConvex, model, cert, extras);
    const double beta = std::exp(base.log_beta);
    if (!std::isfinite(beta))
      throw InfeasibilityError("coupling: drift offset too large to simulate at this dimension");
    e.sde_theta = base.theta / 2.0;
    e.sde_beta = beta / 2.0;
    e.sde_delta = 2.0 * beta / base.theta;
    e.sde_R = base.R;
    e.sde_m_tilde.reset();
    return ergodicity_rate(Route::GenericSDE, model, cert, e);
  }
  if (route == Route::GenericSDE) return ergodicity_rate(route, model, cert, e);
  throw ConfigError("coupling: theorem curves exist for strong_convex, reflection_convex or "
                    "generic_sde constants");
}

struct TvCouplingResult {
  CouplingTail tail;
  double allowance = 0.0;
  bool pass = true;  // empirical <= theorem + 3 se + allowance on the grid
};

// Runs the coupled simulation for a Langevin target and compares the
// empirical coupling tail (a TV upper bound) against the certified decay
// curve. Times are in the rescaled drift clock.
inline TvCouplingResult tv_from_coupling(const PotentialModel& model, const ClassCertificate& cert,
                                         Route route, const Vec& x, const Vec& y,
                                         const std::vector<double>& t_grid, double dt,
                                         int64_t n_runs, uint64_t seed, double allowance = 0.02,
                                         const ExtraInputs& extras = {}, int workers = 0) {
  const ErgodicityRate rate = sde_rate_for_coupling(route, model, cert, extras);
  const double merge_radius = 0.1 * std::sqrt(dt);
  TvCouplingResult out;
  out.allowance = allowance;
  out.tail = coupling_tail(langevin_drift(model), model.dim(), x, y, t_grid, dt, n_runs,
                           merge_radius, seed, workers);
  double log_V_half = -kInf;
  if (route == Route::ReflectionConvex) {
    const auto& l = std::get<LogConcave>(cert);
    const LyapunovDescriptor lyap{LyapunovDescriptor::Kind::ExpEtaDist, l.eta};
    log_V_half = log_sum_exp(lyapunov_log_value(lyap, model, x),
                             lyapunov_log_value(lyap, model, y)) -
                 std::log(2.0);
  }
  const double dist0 = std::sqrt(sq_dist(x, y));
  for (size_t i = 0; i < t_grid.size(); ++i) {
    out.tail.theorem.push_back(sde_theorem_curve(rate, log_V_half, dist0, t_grid[i]));
    if (out.tail.empirical[i] > out.tail.theorem[i] + 3.0 * out.tail.se[i] + allowance)
      out.pass = false;
  }
  return out;
}

}  // namespace ulacert
