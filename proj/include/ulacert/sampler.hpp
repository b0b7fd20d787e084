#pragma once

#include <cstdint>
#include <vector>

#include "ulacert/certifier.hpp"
#include "ulacert/common.hpp"
#include "ulacert/potentials.hpp"
#include "ulacert/rng.hpp"
#include "ulacert/schedule.hpp"

namespace ulacert {

inline constexpr double kDivergenceThreshold = 1e100;

struct DivergenceError : NumericError {
  DivergenceError(int64_t chain, int64_t step, const Vec& x)
      : NumericError("sampler: divergence at chain " + std::to_string(chain) + ", step " +
                     std::to_string(step) + ", |x|_inf = " + std::to_string([&] {
                       double m = 0.0;
                       for (double v : x) m = std::max(m, std::abs(v));
                       return m;
                     }())) {}
};

// One step of the unadjusted Langevin recursion:
//   x' = x - gamma grad U(x) + sqrt(2 gamma) z.
inline void ula_step_inplace(const PotentialModel& model, Vec& x, Vec& g, double gamma,
                             const double* z) {
  model.gradient(x.data(), g.data());
  const double s = std::sqrt(2.0 * gamma);
  for (int i = 0; i < model.dim(); ++i) x[i] += -gamma * g[i] + s * z[i];
}

inline Vec ula_step(const PotentialModel& model, const Vec& x, double gamma, const Vec& z) {
  if (!(gamma > 0.0)) throw ConfigError("ula_step: gamma must be > 0");
  if (static_cast<int>(z.size()) != model.dim()) throw ConfigError("ula_step: z has wrong dimension");
  Vec y = x, g(model.dim());
  ula_step_inplace(model, y, g, gamma, z.data());
  for (double v : y)
    if (!std::isfinite(v) || std::abs(v) > kDivergenceThreshold) throw DivergenceError(0, 0, y);
  return y;
}

// Running moments at one recorded step, for n_chains chains. Second moments
// back the standard errors; V is tracked through log-sum-exp so that
// exponential Lyapunov functions cannot overflow the accumulator.
struct MomentRecord {
  int64_t step = 0;
  int64_t count = 0;
  double sum_sq_dist = 0.0, sum_sq_dist2 = 0.0;
  double sum_grad_sq = 0.0, sum_grad_sq2 = 0.0;
  double lse_V = -kInf;   // log sum of V
  double lse_V2 = -kInf;  // log sum of V^2

  void add(double sq_d, double grad_sq, double log_V) {
    ++count;
    sum_sq_dist += sq_d;
    sum_sq_dist2 += sq_d * sq_d;
    sum_grad_sq += grad_sq;
    sum_grad_sq2 += grad_sq * grad_sq;
    lse_V = log_sum_exp(lse_V, log_V);
    lse_V2 = log_sum_exp(lse_V2, 2.0 * log_V);
  }
  void merge(const MomentRecord& o) {
    count += o.count;
    sum_sq_dist += o.sum_sq_dist;
    sum_sq_dist2 += o.sum_sq_dist2;
    sum_grad_sq += o.sum_grad_sq;
    sum_grad_sq2 += o.sum_grad_sq2;
    lse_V = log_sum_exp(lse_V, o.lse_V);
    lse_V2 = log_sum_exp(lse_V2, o.lse_V2);
  }
  double mean_sq_dist() const { return sum_sq_dist / count; }
  double se_sq_dist() const {
    const double m = mean_sq_dist();
    const double var = std::max(0.0, sum_sq_dist2 / count - m * m);
    return std::sqrt(var / count);
  }
  double mean_grad_sq() const { return sum_grad_sq / count; }
  double se_grad_sq() const {
    const double m = mean_grad_sq();
    const double var = std::max(0.0, sum_grad_sq2 / count - m * m);
    return std::sqrt(var / count);
  }
  double mean_V_log() const { return lse_V - std::log(static_cast<double>(count)); }
  double mean_V() const { return std::exp(mean_V_log()); }
  double se_V() const {
    const double l1 = mean_V_log();
    const double l2 = lse_V2 - std::log(static_cast<double>(count));
    const double lvar = log_diff_exp(l2, 2.0 * l1);
    return std::exp(0.5 * (lvar - std::log(static_cast<double>(count))));
  }
};

struct MomentAccumulator {
  std::vector<MomentRecord> records;  // one per recorded step, in step order
};

struct ChainEnsemble {
  PotentialModel model;
  StepSchedule schedule;
  int64_t n_chains = 1;
  Vec start;
  double start_spread = 0.0;  // > 0: X_0 ~ N(start, spread^2 I); certification runs keep 0
  uint64_t seed = 0;
  LyapunovDescriptor lyapunov;  // which V the accumulator tracks
  int workers = 0;              // 0 = hardware concurrency
};

struct RunResult {
  MomentAccumulator moments;
  std::vector<Vec> final_states;  // in chain order
};

// Advances all chains p steps with per-chain counter-based substreams and
// accumulates moments at the recorded steps. Deterministic for a fixed
// (seed, n_chains, schedule, p) regardless of worker count.
inline RunResult run_chains(const ChainEnsemble& ens, int64_t p,
                            const std::vector<int64_t>& record_at) {
  if (p < 0) throw ConfigError("run_chains: p must be >= 0");
  if (ens.n_chains < 1) throw ConfigError("run_chains: n_chains must be >= 1");
  for (int64_t r : record_at)
    if (r < 0 || r > p) throw ConfigError("run_chains: record_at entries must lie in [0,p]");
  const int d = ens.model.dim();
  if (static_cast<int>(ens.start.size()) != d)
    throw ConfigError("run_chains: start point has wrong dimension");

  std::vector<int64_t> rec = record_at;
  std::sort(rec.begin(), rec.end());
  rec.erase(std::unique(rec.begin(), rec.end()), rec.end());

  const int workers = ens.workers > 0 ? ens.workers
                                      : std::max(1u, std::thread::hardware_concurrency());
  const int nblocks =
      static_cast<int>(std::min<int64_t>(ens.n_chains, workers));
  std::vector<std::vector<MomentRecord>> block_records(
      nblocks, std::vector<MomentRecord>(rec.size()));
  for (auto& br : block_records)
    for (size_t i = 0; i < rec.size(); ++i) br[i].step = rec[i];
  RunResult out;
  out.final_states.assign(ens.n_chains, Vec());

  std::vector<std::string> block_errors(nblocks);
  parallel_blocks(ens.n_chains, nblocks, [&](int block, int64_t lo, int64_t hi) {
    try {
      Vec x(d), g(d), z(d);
      for (int64_t chain = lo; chain < hi; ++chain) {
        x = ens.start;
        if (ens.start_spread > 0.0) {
          rng::fill_normal(ens.seed ^ 0xb10bb10bULL, static_cast<uint64_t>(chain), 0, z.data(), d);
          for (int i = 0; i < d; ++i) x[i] += ens.start_spread * z[i];
        }
        size_t ri = 0;
        auto record = [&](int64_t step) {
          while (ri < rec.size() && rec[ri] == step) {
            ens.model.gradient(x.data(), g.data());
            block_records[block][ri].add(sq_dist(x, ens.model.minimizer()), sq_norm(g),
                                         lyapunov_log_value(ens.lyapunov, ens.model, x));
            ++ri;
          }
        };
        record(0);
        const uint64_t chain_h = rng::stream_prefix(ens.seed, static_cast<uint64_t>(chain));
        for (int64_t k = 1; k <= p; ++k) {
          const double gamma = ens.schedule.gamma(k);
          rng::fill_normal_at(rng::step_prefix(chain_h, static_cast<uint64_t>(k)), z.data(), d);
          ula_step_inplace(ens.model, x, g, gamma, z.data());
          for (int i = 0; i < d; ++i)
            if (!std::isfinite(x[i]) || std::abs(x[i]) > kDivergenceThreshold)
              throw DivergenceError(chain, k, x);
          record(k);
        }
        out.final_states[chain] = x;
      }
    } catch (const std::exception& e) {
      block_errors[block] = e.what();
    }
  });
  for (const auto& err : block_errors)
    if (!err.empty()) throw NumericError(err);

  out.moments.records.resize(rec.size());
  for (size_t i = 0; i < rec.size(); ++i) {
    out.moments.records[i].step = rec[i];
    for (int b = 0; b < nblocks; ++b) out.moments.records[i].merge(block_records[b][i]);
  }
  return out;
}

// ---- drift-inequality spot checks ------------------------------------------

struct DriftPointReport {
  Vec x;
  double log_estimate;   // log MC estimate of R_gamma V(x)
  double log_bound;      // log( lambda^gamma V(x) + gamma c )
  double log_se;         // log of the MC standard error
  double margin;         // estimate - bound (linear scale; may overflow to inf)
  double se;
  bool pass;             // margin <= 3 se, evaluated in log space
};

struct DriftViolationReport {
  std::vector<DriftPointReport> points;
  bool pass() const {
    for (const auto& p : points)
      if (!p.pass) return false;
    return true;
  }
};

// Monte-Carlo estimate of R_gamma V at each x against the certified drift
// envelope lambda^gamma V(x) + gamma c. Everything runs in log space so that
// exponential V cannot overflow.
inline DriftViolationReport estimate_drift_violation(const PotentialModel& model,
                                                     const DriftConstants& drift,
                                                     const std::vector<Vec>& x_points, double gamma,
                                                     int64_t n_mc, uint64_t seed) {
  if (n_mc < 1) throw ConfigError("estimate_drift_violation: n_mc must be >= 1");
  if (!(gamma > 0.0 && gamma <= drift.gamma_bar))
    throw ConfigError("estimate_drift_violation: need 0 < gamma <= gamma_bar");
  DriftViolationReport out;
  const int d = model.dim();
  Vec g(d), z(d), y(d);
  for (size_t pi = 0; pi < x_points.size(); ++pi) {
    const Vec& x = x_points[pi];
    Vec gx = model.gradient(x);
    const double s = std::sqrt(2.0 * gamma);
    double lse1 = -kInf, lse2 = -kInf;
    for (int64_t i = 0; i < n_mc; ++i) {
      rng::fill_normal(seed, pi, static_cast<uint64_t>(i), z.data(), d);
      for (int k = 0; k < d; ++k) y[k] = x[k] - gamma * gx[k] + s * z[k];
      const double lv = lyapunov_log_value(drift.lyapunov, model, y);
      if (!std::isfinite(lv) && lv != -kInf)
        throw NumericError("estimate_drift_violation: V not evaluable in log space");
      lse1 = log_sum_exp(lse1, lv);
      lse2 = log_sum_exp(lse2, 2.0 * lv);
    }
    const double logn = std::log(static_cast<double>(n_mc));
    DriftPointReport r;
    r.x = x;
    r.log_estimate = lse1 - logn;
    const double l2 = lse2 - logn;
    const double lvar = log_diff_exp(l2, 2.0 * r.log_estimate);
    r.log_se = 0.5 * (lvar - logn);
    r.log_bound = log_sum_exp(gamma * drift.log_lambda + lyapunov_log_value(drift.lyapunov, model, x),
                              std::log(gamma) + drift.log_c);
    r.pass = r.log_estimate <= log_sum_exp(r.log_bound, std::log(3.0) + r.log_se);
    r.margin = std::exp(r.log_estimate) - std::exp(r.log_bound);
    r.se = std::exp(r.log_se);
    out.points.push_back(std::move(r));
  }
  return out;
}

}  // namespace ulacert
