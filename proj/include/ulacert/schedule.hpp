#pragma once

#include <cstdint>
#include <mutex>
#include <string>
#include <vector>

#include "ulacert/common.hpp"

namespace ulacert {

// Step-size sequence (gamma_k)_{k>=1}, nonincreasing, with the window sums
// Gamma_{n,p} = sum_{k=n}^{p} gamma_k used everywhere in the bound assembly.
class StepSchedule {
 public:
  enum class Kind { Constant, PolynomialDecay, Explicit };

  StepSchedule() = default;
  StepSchedule(const StepSchedule& o)
      : kind_(o.kind_), gamma1_(o.gamma1_), beta_(o.beta_), values_(o.values_) {}
  StepSchedule& operator=(const StepSchedule& o) {
    kind_ = o.kind_;
    gamma1_ = o.gamma1_;
    beta_ = o.beta_;
    values_ = o.values_;
    prefix1_.clear();
    prefix2_.clear();
    prefix3_.clear();
    kahan1_ = kahan2_ = kahan3_ = KahanSum{};
    return *this;
  }

  static StepSchedule constant(double gamma) {
    if (!(gamma > 0.0)) throw ConfigError("schedule: constant gamma must be > 0");
    StepSchedule s;
    s.kind_ = Kind::Constant;
    s.gamma1_ = gamma;
    return s;
  }

  // gamma_k = gamma1 * k^{-beta}, beta in (0,1].
  static StepSchedule polynomial(double gamma1, double beta = 0.5) {
    if (!(gamma1 > 0.0)) throw ConfigError("schedule: gamma1 must be > 0");
    if (!(beta > 0.0 && beta <= 1.0)) throw ConfigError("schedule: decay exponent must be in (0,1]");
    StepSchedule s;
    s.kind_ = Kind::PolynomialDecay;
    s.gamma1_ = gamma1;
    s.beta_ = beta;
    return s;
  }

  // Finite positive nonincreasing list; extends past the end by repeating the
  // last value so planners may probe beyond the provided horizon.
  static StepSchedule explicit_values(std::vector<double> values) {
    if (values.empty()) throw ConfigError("schedule: explicit list must be nonempty");
    for (size_t i = 0; i < values.size(); ++i) {
      if (!(values[i] > 0.0)) throw ConfigError("schedule: explicit steps must be > 0");
      if (i > 0 && values[i] > values[i - 1] * (1.0 + 1e-15))
        throw ConfigError("schedule: explicit steps must be nonincreasing");
    }
    StepSchedule s;
    s.kind_ = Kind::Explicit;
    s.values_ = std::move(values);
    s.gamma1_ = s.values_.front();
    return s;
  }

  Kind kind() const { return kind_; }
  double gamma1() const { return gamma1_; }
  double decay_exponent() const { return beta_; }
  const std::vector<double>& values() const { return values_; }

  double gamma(int64_t k) const {
    if (k < 1) throw ConfigError("schedule: step index must be >= 1");
    switch (kind_) {
      case Kind::Constant:
        return gamma1_;
      case Kind::PolynomialDecay:
        return gamma1_ * std::pow(static_cast<double>(k), -beta_);
      case Kind::Explicit:
        return k <= static_cast<int64_t>(values_.size()) ? values_[k - 1] : values_.back();
    }
    return gamma1_;
  }

  // Gamma_{n,p} = sum_{k=n}^p gamma_k, with the empty-window convention
  // Gamma_{n,p} = 0 for p < n.
  double partial_sum(int64_t n, int64_t p) const {
    if (n < 1) throw ConfigError("schedule: partial_sum needs n >= 1");
    if (p < n) return 0.0;
    return prefix(p, 1) - prefix(n - 1, 1);
  }

  // sum_{k=n}^p gamma_k^ell for ell >= 2.
  double power_sum(int64_t n, int64_t p, int ell) const {
    if (n < 1) throw ConfigError("schedule: power_sum needs n >= 1");
    if (ell < 2) throw ConfigError("schedule: power_sum needs ell >= 2");
    if (p < n) return 0.0;
    return prefix(p, ell) - prefix(n - 1, ell);
  }

  struct BurninResult {
    int64_t n = 0;
    bool degenerate = false;  // defining preconditions failed; n fell back to 0
  };

  enum class SplitVariant { KappaGamma, LogGamma };

  // Burn-in index separating the discretization window from the ergodic-decay
  // window. KappaGamma: min{k in [0,p) : kappa^{Gamma_{k+1,p}} > gamma_{k+1}},
  // valid once kappa^{gamma_p} > gamma_p and kappa^{Gamma_p} <= gamma_1;
  // otherwise 0 with a degenerate flag. LogGamma: max(0, floor(log Gamma_p)).
  // All kappa-powers are compared in log space.
  BurninResult burnin_split(int64_t p, double kappa, SplitVariant variant) const {
    if (p < 1) throw ConfigError("schedule: burnin_split needs p >= 1");
    if (!(kappa > 0.0 && kappa < 1.0)) throw ConfigError("schedule: kappa must be in (0,1)");
    BurninResult r;
    if (variant == SplitVariant::LogGamma) {
      const double G = partial_sum(1, p);
      if (G > 0.0) {
        const double lg = std::floor(std::log(G));
        r.n = lg > 0.0 ? static_cast<int64_t>(lg) : 0;
      }
      if (r.n >= p) {
        r.n = p - 1;
        r.degenerate = true;
      }
      return r;
    }
    const double log_kappa = std::log(kappa);
    // preconditions of the split rule
    const double gp = gamma(p);
    const bool pre1 = gp * log_kappa > std::log(gp);
    const bool pre2 = partial_sum(1, p) * log_kappa <= std::log(gamma1());
    if (!pre1 || !pre2) {
      r.degenerate = true;
      r.n = 0;
      return r;
    }
    // The predicate kappa^{Gamma_{k+1,p}} > gamma_{k+1} is monotone in k
    // (lhs increases, rhs does not), so the minimum is a binary search.
    auto holds = [&](int64_t k) {
      const double G = partial_sum(k + 1, p);
      return G * log_kappa > std::log(gamma(k + 1));
    };
    int64_t lo = 0, hi = p - 1;  // holds(p-1) == pre1 == true
    if (holds(0)) return r;      // n = 0 (pre2 normally excludes this)
    while (hi - lo > 1) {
      const int64_t mid = lo + (hi - lo) / 2;
      if (holds(mid))
        hi = mid;
      else
        lo = mid;
    }
    r.n = hi;
    return r;
  }

  std::string describe() const {
    switch (kind_) {
      case Kind::Constant:
        return "constant(gamma=" + std::to_string(gamma1_) + ")";
      case Kind::PolynomialDecay:
        return "polynomial(gamma1=" + std::to_string(gamma1_) +
               ", exponent=" + std::to_string(beta_) + ")";
      case Kind::Explicit:
        return "explicit(" + std::to_string(values_.size()) + " values, tail=" +
               std::to_string(values_.back()) + ")";
    }
    return "";
  }

 private:
  // prefix(p, ell) = sum_{k=1}^p gamma_k^ell, cached for non-constant kinds.
  double prefix(int64_t p, int ell) const {
    if (p <= 0) return 0.0;
    if (kind_ == Kind::Constant) return static_cast<double>(p) * std::pow(gamma1_, ell);
    if (kind_ == Kind::Explicit && p > static_cast<int64_t>(values_.size())) {
      const int64_t m = static_cast<int64_t>(values_.size());
      return prefix(m, ell) + static_cast<double>(p - m) * std::pow(values_.back(), ell);
    }
    if (p > kMaxCachedPrefix)
      throw ConfigError("schedule: window end too large for a decaying schedule (>1e8)");
    if (ell > 3) {  // rare; no caching
      KahanSum s;
      for (int64_t k = 1; k <= p; ++k) s.add(std::pow(gamma(k), ell));
      return s.value();
    }
    std::lock_guard<std::mutex> lock(cache_mutex_);
    auto& cache = ell == 1 ? prefix1_ : (ell == 2 ? prefix2_ : prefix3_);
    auto& kahan = ell == 1 ? kahan1_ : (ell == 2 ? kahan2_ : kahan3_);
    while (static_cast<int64_t>(cache.size()) <= p) {
      const int64_t k = static_cast<int64_t>(cache.size());
      if (k == 0) {
        cache.push_back(0.0);
        continue;
      }
      kahan.add(std::pow(gamma(k), ell));
      cache.push_back(kahan.value());
    }
    return cache[p];
  }

  static constexpr int64_t kMaxCachedPrefix = 100'000'000;

  Kind kind_ = Kind::Constant;
  double gamma1_ = 0.1;
  double beta_ = 0.5;
  std::vector<double> values_;
  mutable std::mutex cache_mutex_;
  mutable std::vector<double> prefix1_, prefix2_, prefix3_;
  mutable KahanSum kahan1_, kahan2_, kahan3_;
};

}  // namespace ulacert
