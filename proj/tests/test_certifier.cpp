#include <catch_amalgamated.hpp>

#include "ulacert/certifier.hpp"

using namespace ulacert;
using Catch::Approx;

TEST_CASE("F and G envelopes") {
  // degenerate: both extra terms vanish
  CHECK(eval_F(0.3, 0.0, 0.0, 1.0, 5.0) == 5.0);
  CHECK(eval_F(0.9, 17.0, 0.0, 2.0, 0.0) == 0.0);
  // direct high-precision evaluation of 0.25 + 1/(0.5 ln 2)
  CHECK(eval_F(0.5, 2.0, 1.0, 1.0, 1.0) ==
        Approx(0.25 + 1.0 / (0.5 * std::log(2.0))).epsilon(1e-15));
  CHECK(eval_F(0.5, 2.0, 1.0, 1.0, 1.0) == Approx(3.1353901).epsilon(1e-7));
  CHECK_THROWS_AS(eval_F(1.0, 1.0, 1.0, 1.0, 1.0), NumericError);
  CHECK_THROWS_AS(eval_G(0.0, 1.0, 1.0, 1.0), NumericError);
  // G dominates F for every a >= 0
  for (double a : {0.0, 0.5, 3.0, 100.0})
    CHECK(eval_G(0.7, 2.0, 0.3, 1.5) >= eval_F(0.7, a, 2.0, 0.3, 1.5));
  // log form agrees with the linear form
  CHECK(eval_F_log(std::log(0.5), 2.0, std::log(1.0), 1.0, std::log(1.0)) ==
        Approx(std::log(eval_F(0.5, 2.0, 1.0, 1.0, 1.0))).epsilon(1e-14));
}

TEST_CASE("omega quantile plumbing") {
  CHECK(eval_omega(0.37, 0.0) == 0.0);
  // eps = 2(1 - Phi(1)) makes the quantile exactly 1, so omega = R^2/4
  const double eps = 2.0 * (1.0 - normal_cdf(1.0));
  CHECK(eval_omega(eps, 2.0) == Approx(1.0).epsilon(1e-12));
  // bisection oracle for PhiInv(0.75)
  double lo = 0.0, hi = 3.0;
  for (int i = 0; i < 200; ++i) {
    const double mid = 0.5 * (lo + hi);
    (normal_cdf(mid) < 0.75 ? lo : hi) = mid;
  }
  const double q = 0.5 * (lo + hi);
  CHECK(eval_omega(0.5, 1.0) == Approx(1.0 / (4.0 * q * q)).epsilon(1e-12));
  CHECK(eval_omega(0.5, 1.0) == Approx(0.5495273).epsilon(1e-7));
  CHECK_THROWS_AS(eval_omega(0.0, 1.0), NumericError);
  CHECK_THROWS_AS(eval_omega(1.0, 1.0), NumericError);
}

TEST_CASE("euler drift: strongly convex class") {
  const auto model = PotentialModel::isotropic_quadratic(2);
  const auto drift = euler_drift(model, StronglyConvexOutsideBall{1.0, 0.0}, 0.5);
  CHECK(drift.lambda == Approx(std::exp(-1.5)).epsilon(1e-15));
  CHECK(drift.c == 4.0);  // 2(d + m M_s^2) with d = 2
  CHECK(drift.lyapunov.kind == LyapunovDescriptor::Kind::SqDist);
  CHECK_THROWS_AS(euler_drift(model, StronglyConvexOutsideBall{1.0, 0.0}, 2.0), ConfigError);
}

TEST_CASE("euler drift: superexponential class") {
  const auto model = PotentialModel::isotropic_quadratic(2);
  const Superexponential cert{1.0, 2.0, 0.0};
  CHECK_THROWS_AS(euler_drift(model, cert, 1.0), ConfigError);  // open bound at 1/L
  const auto drift = euler_drift(model, cert, 0.5);
  CHECK(drift.lambda == Approx(std::exp(-2.0 * 1.0 / (2.0 * 0.5))).epsilon(1e-12));
  CHECK(drift.lyapunov.kind == LyapunovDescriptor::Kind::ExpHalfU);
  // K solves rho^2 K^{2(alpha-1)} = -8 log lambda
  CHECK(drift.ball_K == Approx(std::sqrt(-8.0 * drift.log_lambda)).epsilon(1e-12));
  CHECK(drift.log_c ==
        Approx(std::log(-2.0 * drift.log_lambda) - 0.5 * drift.log_lambda +
               drift.ball_K * drift.ball_K / 4.0)
            .epsilon(1e-12));
}

TEST_CASE("euler drift: log-concave class") {
  const auto model = PotentialModel::huber(1);
  const auto drift = euler_drift(model, LogConcave{1.0, 1.0}, 1.0);
  // lambda = exp(-(sqrt 2 - 1)/16), independent of d
  CHECK(drift.lambda == Approx(std::exp(-(std::sqrt(2.0) - 1.0) / 16.0)).epsilon(1e-15));
  CHECK(drift.lambda == Approx(0.9744439).epsilon(1e-7));
  const auto drift_d = euler_drift(PotentialModel::huber(7), LogConcave{1.0, 1.0}, 1.0);
  CHECK(drift_d.lambda == drift.lambda);
  CHECK_THROWS_AS(euler_drift(model, LogConcave{1.0, 1.0}, 1.5), ConfigError);
}

TEST_CASE("A bound: strongly convex route") {
  const auto model = PotentialModel::isotropic_quadratic(1);
  const auto cert = StronglyConvexOutsideBall{1.0, 0.0};
  const auto drift = euler_drift(model, cert, 0.5);
  const Vec x{0.0};
  const double A = A_bound(Route::StrongConvex, drift, model, cert, 0.1, x);
  // G = 0 + c/(-lambda^gamma log lambda) = 2/(1.5 e^{-0.15})
  CHECK(A == Approx(2.0 / (1.5 * std::exp(-0.15))).epsilon(1e-14));
  CHECK(A == Approx(1.5491123).epsilon(1e-7));
  // nondecreasing in |x - x*|
  double prev = 0.0;
  for (double r : {0.0, 1.0, 3.0}) {
    const double v = A_bound(Route::StrongConvex, drift, model, cert, 0.1, Vec{r});
    CHECK(v >= prev);
    prev = v;
  }
}

TEST_CASE("A bound: perturbed route with vanishing perturbation") {
  const auto model = PotentialModel::quadratic_plus_cosine(3, 0.0);
  const PerturbedStronglyConvex cert{1.0, 1.0, Vec(3, 0.0), 0.0, 0.0, 0.0};
  const double varpi = 2.0 * 1.0 * 1.0 / 2.0;  // = 1
  const double A = A_bound(Route::LogSobolev, DriftConstants{}, model, cert, 0.5, Vec(3, 0.0));
  CHECK(A == Approx(8.0 * 1.0 * 3.0 / varpi).epsilon(1e-14));  // 8 L1^2 d / varpi
}

TEST_CASE("ergodicity rates") {
  const auto gauss1 = PotentialModel::isotropic_quadratic(1);
  SECTION("bobkov: unit variance integral") {
    ExtraInputs in;
    in.variance_integral = 1.0;
    const auto r = ergodicity_rate(Route::Bobkov, gauss1, LogConcave{1.0, 2.0}, in);
    CHECK(r.kappa() == Approx(std::exp(-1.0 / 432.0)).epsilon(1e-15));
    CHECK(r.kappa() == Approx(0.9976879).epsilon(1e-7));
    // kappa -> 1 as the variance grows
    in.variance_integral = 1e6;
    const auto r2 = ergodicity_rate(Route::Bobkov, gauss1, LogConcave{1.0, 2.0}, in);
    CHECK(r2.kappa() > r.kappa());
    CHECK(r2.kappa() < 1.0);
  }
  SECTION("log-sobolev: rate m e^{-osc}") {
    const PerturbedStronglyConvex cert{1.0, 1.0, Vec(1, 0.0), 0.0, 0.0, 0.0};
    const auto r = ergodicity_rate(Route::LogSobolev, gauss1, cert, {});
    CHECK(r.kappa() == Approx(std::exp(-1.0)).epsilon(1e-15));
  }
  SECTION("generic sde: substitution chain") {
    ExtraInputs in;
    in.sde_theta = 1.0;
    in.sde_beta = 1.0;
    in.sde_delta = 2.0;
    in.sde_R = 0.0;
    in.sde_epsilon = 0.5;
    const auto r = ergodicity_rate(Route::GenericSDE, gauss1, LogConcave{1.0, 0.0}, in);
    CHECK(r.theta_tilde == Approx(0.5).epsilon(1e-15));
    CHECK(r.omega == 0.0);
    CHECK(std::exp(r.log_K_eps) == Approx(5.0).epsilon(1e-13));
    CHECK(r.log_kappa ==
          Approx(0.25 * std::log(0.5) / (std::log(5.0) - std::log(0.5))).epsilon(1e-13));
    CHECK(r.log_kappa == Approx(-0.0752575).epsilon(1e-6));
  }
  SECTION("strong route is dimension-free") {
    const auto cert = StronglyConvexOutsideBall{0.7, 1.3};
    const auto r1 = ergodicity_rate(Route::StrongConvex, PotentialModel::isotropic_quadratic(1, 0.7),
                                    cert, {});
    const auto r64 = ergodicity_rate(Route::StrongConvex,
                                     PotentialModel::isotropic_quadratic(64, 0.7), cert, {});
    CHECK(r1.log_kappa == r64.log_kappa);
  }
  SECTION("missing inputs are configuration errors") {
    CHECK_THROWS_AS(ergodicity_rate(Route::Bobkov, gauss1, LogConcave{1.0, 0.0}, {}), ConfigError);
    CHECK_THROWS_AS(ergodicity_rate(Route::UserSupplied, gauss1, Superexponential{1.0, 2.0, 0.0}, {}),
                    ConfigError);
    CHECK_THROWS_AS(ergodicity_rate(Route::GenericSDE, gauss1, LogConcave{1.0, 0.0}, {}),
                    ConfigError);
  }
}

TEST_CASE("C bounds") {
  const auto gauss1 = PotentialModel::isotropic_quadratic(1);
  SECTION("strongly convex, from the minimizer at n = 0") {
    const auto cert = StronglyConvexOutsideBall{1.0, 0.0};
    const auto drift = euler_drift(gauss1, cert, 0.5);
    const auto rate = ergodicity_rate(Route::StrongConvex, gauss1, cert, {});
    const auto sched = StepSchedule::constant(0.1);
    const double logC =
        C_bound_log(Route::StrongConvex, Vec{0.0}, 0, sched, drift, rate, gauss1, cert);
    const double F = eval_F(drift.lambda, 0.0, drift.c, 0.1, 0.0);
    CHECK(std::exp(logC) == Approx(6.0 + 2.0 + 2.0 * std::sqrt(F)).epsilon(1e-13));
    CHECK(std::exp(logC) == Approx(10.4892668).epsilon(1e-7));
  }
  SECTION("density-variance factor D_n") {
    const auto sched = StepSchedule::constant(0.1);
    // D_1 = (4 pi (1-L gamma)^2 gamma/(1-L gamma))^{-1/2} at L=1, gamma=0.1
    const double logD1 = log_Dn_direct(sched, 1.0, 1, 1);
    CHECK(std::exp(logD1) ==
          Approx(std::pow(4.0 * M_PI * 0.81 * (0.1 / 0.9), -0.5)).epsilon(1e-13));
    CHECK(std::exp(logD1) == Approx(0.9403160).epsilon(1e-6));
    const auto cache = DnCache::build(sched, 1.0, 10);
    CHECK(cache.log_Dn(1, 1) == Approx(logD1).epsilon(1e-14));
  }
  SECTION("reflection route at the minimizer, n = 0") {
    const auto huber = PotentialModel::huber(1);
    const LogConcave cert{0.5, 1.5};
    const auto drift = euler_drift(huber, cert, 1.0);
    const auto rate = ergodicity_rate(Route::ReflectionConvex, huber, cert, {});
    const auto sched = StepSchedule::constant(0.2);
    const double logL =
        C_bound_log(Route::ReflectionConvex, Vec{0.0}, 0, sched, drift, rate, huber, cert);
    // F-term reduces to W_c(x*) + c/(-lambda^{gamma_1} log lambda), W_c(x*) = e^{eta/4}
    const double F = std::exp(eval_F_log(drift.log_lambda, 0.0, drift.log_c, 0.2, cert.eta / 4.0));
    CHECK(F == Approx(std::exp(cert.eta / 4.0) +
                      drift.c / (std::pow(drift.lambda, 0.2) * (-drift.log_lambda)))
                   .epsilon(1e-12));
    const double expect = 0.5 * (F + std::exp(rate.log_beta) / rate.theta) +
                          std::exp(rate.exp_term_log);
    CHECK(std::exp(logL) == Approx(expect).epsilon(1e-12));
  }
  SECTION("poincare and bobkov need n >= 1") {
    const auto sched = StepSchedule::constant(0.1);
    const Superexponential scert{1.0, 2.0, 0.0};
    const auto drift = euler_drift(gauss1, scert, 0.5);
    const auto rate = ergodicity_rate(Route::Poincare, gauss1, scert, {});
    CHECK_THROWS_AS(
        C_bound_log(Route::Poincare, Vec{0.0}, 0, sched, drift, rate, gauss1, scert),
        ConfigError);
    CHECK(std::isfinite(
        C_bound_log(Route::Poincare, Vec{1.0}, 3, sched, drift, rate, gauss1, scert)));
  }
}

TEST_CASE("constants stay finite at desk scale") {
  // d up to 128 and Gamma up to 1e4 must not overflow the log-space assembly
  for (int d : {1, 16, 128}) {
    const auto model = PotentialModel::huber(d);
    const LogConcave cert{0.5, 1.5};
    const auto drift = euler_drift(model, cert, 1.0);
    const auto rate = ergodicity_rate(Route::ReflectionConvex, model, cert, {});
    CHECK(std::isfinite(rate.log_varpi));
    CHECK(std::isfinite(rate.log_beta));
    CHECK(rate.log_varpi < 0.0);
    const auto sched = StepSchedule::constant(0.5);
    const double logC = C_bound_log(Route::ReflectionConvex, Vec(d, 0.0), 20000, sched, drift,
                                    rate, model, cert);
    CHECK(std::isfinite(logC));
    const double A = A_bound(Route::ReflectionConvex, drift, model, cert, 0.5, Vec(d, 0.0));
    CHECK(std::isfinite(A));
  }
}

TEST_CASE("constant evaluation is pure") {
  const auto model = PotentialModel::huber(3);
  const LogConcave cert{0.5, 1.5};
  const auto r1 = ergodicity_rate(Route::ReflectionConvex, model, cert, {});
  const auto r2 = ergodicity_rate(Route::ReflectionConvex, model, cert, {});
  CHECK(r1.log_kappa == r2.log_kappa);
  CHECK(r1.log_beta == r2.log_beta);
  CHECK(r1.omega == r2.omega);
}
