#include <catch_amalgamated.hpp>

#include "ulacert/schedule.hpp"

using namespace ulacert;
using Catch::Approx;

TEST_CASE("gamma per kind") {
  CHECK(StepSchedule::constant(0.1).gamma(7) == 0.1);
  CHECK(StepSchedule::polynomial(0.5, 1.0).gamma(4) == Approx(0.125).epsilon(1e-15));
  CHECK(StepSchedule::explicit_values({0.3, 0.2, 0.1}).gamma(5) == 0.1);  // tail rule
  CHECK_THROWS_AS(StepSchedule::constant(0.0), ConfigError);
  CHECK_THROWS_AS(StepSchedule::explicit_values({0.1, 0.2}), ConfigError);  // increasing
}

TEST_CASE("partial sums") {
  const auto c = StepSchedule::constant(0.1);
  CHECK(c.partial_sum(1, 10) == Approx(1.0).epsilon(1e-14));
  CHECK(c.partial_sum(5, 3) == 0.0);  // empty-window convention
  const auto h = StepSchedule::polynomial(1.0, 1.0);
  CHECK(h.partial_sum(1, 4) == Approx(1.0 + 0.5 + 1.0 / 3.0 + 0.25).epsilon(1e-14));
}

TEST_CASE("power sums") {
  const auto c = StepSchedule::constant(0.1);
  CHECK(c.power_sum(1, 10, 2) == Approx(0.1).epsilon(1e-14));
  CHECK(c.power_sum(4, 3, 2) == 0.0);
  const auto h = StepSchedule::polynomial(1.0, 1.0);
  CHECK(h.power_sum(1, 3, 3) == Approx(1.0 + 1.0 / 8.0 + 1.0 / 27.0).epsilon(1e-14));
}

TEST_CASE("window additivity") {
  const auto s = StepSchedule::polynomial(0.7, 0.5);
  for (int64_t n : {1, 3, 17}) {
    for (int64_t p : {int64_t{5}, int64_t{40}, int64_t{999}}) {
      if (p < n) continue;
      for (int64_t q : {p + 1, p + 13, p + 400}) {
        const double lhs = s.partial_sum(n, p) + s.partial_sum(p + 1, q);
        const double rhs = s.partial_sum(n, q);
        CHECK(lhs == Approx(rhs).epsilon(1e-12));
      }
    }
  }
}

TEST_CASE("burn-in split: kappa-gamma rule") {
  const auto s = StepSchedule::constant(0.1);
  // 0.5^{0.1 (100-k)} > 0.1  iff  k > 100 - 10 log(10)/log(2)
  const auto r = s.burnin_split(100, 0.5, StepSchedule::SplitVariant::KappaGamma);
  CHECK_FALSE(r.degenerate);
  CHECK(r.n == 67);
  // both sides of the min definition at the returned index
  const double lk = std::log(0.5);
  CHECK(s.partial_sum(r.n, 100) * lk <= std::log(s.gamma(r.n)));
  CHECK(s.partial_sum(r.n + 1, 100) * lk > std::log(s.gamma(r.n + 1)));
}

TEST_CASE("burn-in split: log-gamma rule and edge cases") {
  const auto s = StepSchedule::constant(0.1);
  CHECK(s.burnin_split(100, 0.5, StepSchedule::SplitVariant::LogGamma).n == 2);  // floor(log 10)
  CHECK(s.burnin_split(1, 0.5, StepSchedule::SplitVariant::KappaGamma).n == 0);
  CHECK(s.burnin_split(1, 0.5, StepSchedule::SplitVariant::LogGamma).n == 0);
  // preconditions fail for tiny p: flagged, not thrown
  const auto degen = s.burnin_split(2, 0.5, StepSchedule::SplitVariant::KappaGamma);
  CHECK(degen.degenerate);
  CHECK(degen.n == 0);
}

TEST_CASE("burn-in split grows with p") {
  const auto s = StepSchedule::constant(0.05);
  int64_t prev = 0;
  for (int64_t p : {100, 300, 1000, 3000, 10000, 30000, 100000}) {
    const auto r = s.burnin_split(p, 0.8, StepSchedule::SplitVariant::KappaGamma);
    CHECK(r.n >= prev);
    CHECK(r.n >= 0);
    CHECK(r.n < p);
    prev = r.n;
  }
  CHECK(prev > 90000);  // n(p) -> infinity
}
