#pragma once

#include <functional>
#include <optional>
#include <string>
#include <variant>
#include <vector>

#include "ulacert/common.hpp"
#include "ulacert/rng.hpp"

namespace ulacert {

// ---- class certificates ---------------------------------------------------

// Superexponential growth outside a ball:
//   <grad U(x), x - x*> >= rho ||x - x*||^alpha  for ||x - x*|| >= M_rho.
struct Superexponential {
  double rho;
  double alpha;  // in (1,2]
  double M_rho;
};

// Convex with linear growth outside a ball: U(x) >= eta ||x - x*||.
struct LogConcave {
  double eta;
  double M_eta;
};

// Convex, curvature m for pairs at distance >= M_s.
struct StronglyConvexOutsideBall {
  double m;
  double M_s;
};

// U = U1 + U2 with U1 m-strongly convex (L1-smooth, minimizer xstar1) and U2
// a bounded perturbation.
struct PerturbedStronglyConvex {
  double m;
  double L1;
  Vec xstar1;
  double sup_U2;
  double sup_gradU2;
  double osc_U2;
};

using ClassCertificate = std::variant<Superexponential, LogConcave,
                                      StronglyConvexOutsideBall, PerturbedStronglyConvex>;

inline void validate_certificate(const ClassCertificate& cert) {
  if (const auto* s = std::get_if<Superexponential>(&cert)) {
    if (!(s->rho > 0.0)) throw ConfigError("certificate: rho must be > 0");
    if (!(s->alpha > 1.0 && s->alpha <= 2.0))
      throw ConfigError("certificate: alpha must be in (1,2]");
    if (!(s->M_rho >= 0.0)) throw ConfigError("certificate: M_rho must be >= 0");
  } else if (const auto* l = std::get_if<LogConcave>(&cert)) {
    if (!(l->eta > 0.0)) throw ConfigError("certificate: eta must be > 0");
    if (!(l->M_eta >= 0.0)) throw ConfigError("certificate: M_eta must be >= 0");
  } else if (const auto* m = std::get_if<StronglyConvexOutsideBall>(&cert)) {
    if (!(m->m > 0.0)) throw ConfigError("certificate: m must be > 0");
    if (!(m->M_s >= 0.0)) throw ConfigError("certificate: M_s must be >= 0");
  } else if (const auto* p = std::get_if<PerturbedStronglyConvex>(&cert)) {
    if (!(p->m > 0.0)) throw ConfigError("certificate: m must be > 0");
    if (!(p->L1 > 0.0)) throw ConfigError("certificate: L1 must be > 0");
    if (!(p->m <= p->L1)) throw ConfigError("certificate: m must be <= L1");
    if (!(p->sup_U2 >= 0.0 && p->sup_gradU2 >= 0.0 && p->osc_U2 >= 0.0))
      throw ConfigError("certificate: perturbation magnitudes must be >= 0");
    if (!(p->osc_U2 <= 2.0 * p->sup_U2 + 1e-12))
      throw ConfigError("certificate: osc_U2 must be <= 2*sup_U2");
  }
}

inline std::string certificate_class_name(const ClassCertificate& cert) {
  if (std::holds_alternative<Superexponential>(cert)) return "superexponential";
  if (std::holds_alternative<LogConcave>(cert)) return "log_concave";
  if (std::holds_alternative<StronglyConvexOutsideBall>(cert)) return "strongly_convex_outside_ball";
  return "perturbed_strongly_convex";
}

// a_alpha = rho M_rho^alpha / (alpha+1) + M_rho^2 L / 2; the additive slack in
// the superexponential lower bound on U.
inline double a_alpha(const Superexponential& cert, double L) {
  return cert.rho * std::pow(cert.M_rho, cert.alpha) / (cert.alpha + 1.0) +
         cert.M_rho * cert.M_rho * L / 2.0;
}

// ---- potential models ------------------------------------------------------

// Immutable target potential: U normalized so U(x*) = 0, its gradient, the
// minimizer, and the gradient Lipschitz constant L. Built-ins are registered
// closed-form families configured by coefficients; config files cannot inject
// arbitrary code.
class PotentialModel {
 public:
  enum class Family { IsotropicQuadratic, AnisotropicQuadratic, Huber, QuadraticPlusCosine, Callback };

  // U(x) = curvature * ||x||^2 / 2
  static PotentialModel isotropic_quadratic(int dim, double curvature = 1.0) {
    if (dim < 1) throw ConfigError("potential: dim must be >= 1");
    if (!(curvature > 0.0)) throw ConfigError("potential: curvature must be > 0");
    PotentialModel m;
    m.family_ = Family::IsotropicQuadratic;
    m.dim_ = dim;
    m.curvature_ = curvature;
    m.minimizer_.assign(dim, 0.0);
    m.lipschitz_L_ = curvature;
    return m;
  }

  // U(x) = sum_i a_i x_i^2 / 2 with a_i evenly spaced over [m_spec, L_spec].
  static PotentialModel anisotropic_quadratic(int dim, double m_spec, double L_spec) {
    if (dim < 1) throw ConfigError("potential: dim must be >= 1");
    if (!(m_spec > 0.0 && L_spec >= m_spec))
      throw ConfigError("potential: need 0 < m <= L for the quadratic spectrum");
    PotentialModel m;
    m.family_ = Family::AnisotropicQuadratic;
    m.dim_ = dim;
    m.diag_.resize(dim);
    for (int i = 0; i < dim; ++i)
      m.diag_[i] = dim == 1 ? L_spec : m_spec + (L_spec - m_spec) * i / (dim - 1.0);
    m.minimizer_.assign(dim, 0.0);
    m.lipschitz_L_ = L_spec;
    return m;
  }

  // U(x) = sqrt(scale^2 + ||x||^2) - scale; L = 1/scale.
  static PotentialModel huber(int dim, double scale = 1.0) {
    if (dim < 1) throw ConfigError("potential: dim must be >= 1");
    if (!(scale > 0.0)) throw ConfigError("potential: huber scale must be > 0");
    PotentialModel m;
    m.family_ = Family::Huber;
    m.dim_ = dim;
    m.huber_scale_ = scale;
    m.minimizer_.assign(dim, 0.0);
    m.lipschitz_L_ = 1.0 / scale;
    return m;
  }

  // U(x) = ||x||^2/2 + a cos(x_1) - a, amplitude a in [0,1).
  static PotentialModel quadratic_plus_cosine(int dim, double amplitude) {
    if (dim < 1) throw ConfigError("potential: dim must be >= 1");
    if (!(amplitude >= 0.0 && amplitude < 1.0))
      throw ConfigError("potential: cosine amplitude must be in [0,1)");
    PotentialModel m;
    m.family_ = Family::QuadraticPlusCosine;
    m.dim_ = dim;
    m.cos_amplitude_ = amplitude;
    m.minimizer_.assign(dim, 0.0);
    m.lipschitz_L_ = 1.0 + amplitude;
    return m;
  }

  // Test hook; not reachable from config files.
  static PotentialModel callback(int dim, Vec minimizer, double L,
                                 std::function<double(const Vec&)> value,
                                 std::function<Vec(const Vec&)> grad) {
    PotentialModel m;
    m.family_ = Family::Callback;
    m.dim_ = dim;
    m.minimizer_ = std::move(minimizer);
    m.lipschitz_L_ = L;
    m.fn_value_ = std::move(value);
    m.fn_grad_ = std::move(grad);
    m.value_offset_ = m.fn_value_(m.minimizer_);
    return m;
  }

  int dim() const { return dim_; }
  double lipschitz_L() const { return lipschitz_L_; }
  const Vec& minimizer() const { return minimizer_; }
  Family family() const { return family_; }
  double cos_amplitude() const { return cos_amplitude_; }
  double huber_scale() const { return huber_scale_; }
  double curvature() const { return curvature_; }
  const Vec& spectrum() const { return diag_; }

  double value(const Vec& x) const {
    switch (family_) {
      case Family::IsotropicQuadratic:
        return 0.5 * curvature_ * sq_norm(x);
      case Family::AnisotropicQuadratic: {
        double s = 0.0;
        for (int i = 0; i < dim_; ++i) s += diag_[i] * x[i] * x[i];
        return 0.5 * s;
      }
      case Family::Huber:
        return std::sqrt(huber_scale_ * huber_scale_ + sq_norm(x)) - huber_scale_;
      case Family::QuadraticPlusCosine:
        return 0.5 * sq_norm(x) + cos_amplitude_ * std::cos(x[0]) - cos_amplitude_;
      case Family::Callback:
        return fn_value_(x) - value_offset_;
    }
    return 0.0;
  }

  void gradient(const double* x, double* g) const {
    switch (family_) {
      case Family::IsotropicQuadratic:
        for (int i = 0; i < dim_; ++i) g[i] = curvature_ * x[i];
        return;
      case Family::AnisotropicQuadratic:
        for (int i = 0; i < dim_; ++i) g[i] = diag_[i] * x[i];
        return;
      case Family::Huber: {
        double s = huber_scale_ * huber_scale_;
        for (int i = 0; i < dim_; ++i) s += x[i] * x[i];
        const double inv = 1.0 / std::sqrt(s);
        for (int i = 0; i < dim_; ++i) g[i] = x[i] * inv;
        return;
      }
      case Family::QuadraticPlusCosine:
        for (int i = 0; i < dim_; ++i) g[i] = x[i];
        g[0] -= cos_amplitude_ * std::sin(x[0]);
        return;
      case Family::Callback: {
        const Vec xv(x, x + dim_);
        const Vec gv = fn_grad_(xv);
        for (int i = 0; i < dim_; ++i) g[i] = gv[i];
        return;
      }
    }
  }

  Vec gradient(const Vec& x) const {
    Vec g(dim_);
    gradient(x.data(), g.data());
    return g;
  }

  // The perturbed class needs the split U = U1 + U2. Only families that know
  // their decomposition provide it.
  bool has_perturbation_split() const { return family_ == Family::QuadraticPlusCosine; }
  double value_U2(const Vec& x) const {
    if (!has_perturbation_split()) throw ConfigError("potential: no U1+U2 decomposition available");
    return cos_amplitude_ * std::cos(x[0]);
  }
  Vec gradient_U1(const Vec& x) const {
    if (!has_perturbation_split()) throw ConfigError("potential: no U1+U2 decomposition available");
    return x;  // U1 = ||x||^2/2
  }
  Vec gradient_U2(const Vec& x) const {
    Vec g(dim_, 0.0);
    if (!has_perturbation_split()) throw ConfigError("potential: no U1+U2 decomposition available");
    g[0] = -cos_amplitude_ * std::sin(x[0]);
    return g;
  }

  std::string family_name() const {
    switch (family_) {
      case Family::IsotropicQuadratic: return "isotropic_quadratic";
      case Family::AnisotropicQuadratic: return "anisotropic_quadratic";
      case Family::Huber: return "huber";
      case Family::QuadraticPlusCosine: return "quadratic_plus_cosine";
      case Family::Callback: return "callback";
    }
    return "";
  }

 private:
  Family family_ = Family::IsotropicQuadratic;
  int dim_ = 1;
  double lipschitz_L_ = 1.0;
  Vec minimizer_;
  double curvature_ = 1.0;
  Vec diag_;
  double huber_scale_ = 1.0;
  double cos_amplitude_ = 0.0;
  std::function<double(const Vec&)> fn_value_;
  std::function<Vec(const Vec&)> fn_grad_;
  double value_offset_ = 0.0;
};

// Shipped certificates for the built-in families.
inline ClassCertificate builtin_certificate(const PotentialModel& model,
                                            const std::string& cls) {
  switch (model.family()) {
    case PotentialModel::Family::IsotropicQuadratic: {
      const double w = model.curvature();
      if (cls == "strongly_convex_outside_ball") return StronglyConvexOutsideBall{w, 0.0};
      if (cls == "superexponential") return Superexponential{w, 2.0, 0.0};
      if (cls == "log_concave") return LogConcave{w, 2.0};  // w r^2/2 >= w r for r >= 2
      break;
    }
    case PotentialModel::Family::AnisotropicQuadratic: {
      const double m = *std::min_element(model.spectrum().begin(), model.spectrum().end());
      if (cls == "strongly_convex_outside_ball") return StronglyConvexOutsideBall{m, 0.0};
      if (cls == "superexponential") return Superexponential{m, 2.0, 0.0};
      break;
    }
    case PotentialModel::Family::Huber: {
      // (sqrt(s^2+r^2)-s)/r >= eta for r >= 2 eta s/(1-eta^2); eta = 1/2.
      if (cls == "log_concave") {
        const double s = model.huber_scale();
        return LogConcave{0.5, 1.5 * s};
      }
      break;
    }
    case PotentialModel::Family::QuadraticPlusCosine: {
      const double a = model.cos_amplitude();
      if (cls == "perturbed_strongly_convex")
        return PerturbedStronglyConvex{1.0, 1.0, Vec(model.dim(), 0.0), a, a, 2.0 * a};
      // <grad U, x> = ||x||^2 - a x_1 sin x_1 >= ||x||^2/2 for ||x|| >= 2a.
      if (cls == "superexponential") return Superexponential{0.5, 2.0, std::max(2.0 * a, 1e-12)};
      break;
    }
    default:
      break;
  }
  throw ConfigError("potential: family '" + model.family_name() +
                    "' ships no certificate of class '" + cls + "'");
}

// ---- operations ------------------------------------------------------------

// Max relative error between analytic gradient and central differences.
inline double eval_gradient_check(const PotentialModel& model, const std::vector<Vec>& points,
                                  double h) {
  if (!(h > 0.0)) throw ConfigError("eval_gradient_check: h must be > 0");
  if (points.empty()) throw ConfigError("eval_gradient_check: points must be nonempty");
  double worst = 0.0;
  for (const Vec& x : points) {
    const double ux = model.value(x);
    const Vec g = model.gradient(x);
    if (!std::isfinite(ux) || !all_finite(g)) {
      std::string at = "(";
      for (size_t i = 0; i < x.size(); ++i) at += (i ? "," : "") + std::to_string(x[i]);
      throw NumericError("eval_gradient_check: non-finite value/gradient at point " + at + ")");
    }
    const double scale = std::max(1.0, norm2(g));
    Vec xp = x, xm = x;
    for (int i = 0; i < model.dim(); ++i) {
      xp[i] = x[i] + h;
      xm[i] = x[i] - h;
      const double fd = (model.value(xp) - model.value(xm)) / (2.0 * h);
      worst = std::max(worst, std::abs(fd - g[i]) / scale);
      xp[i] = x[i];
      xm[i] = x[i];
    }
  }
  return worst;
}

struct ViolationReport {
  std::vector<Vec> violations;
  std::vector<std::string> details;
  bool pass() const { return violations.empty(); }
};

// Samples points (and pairs) uniformly in the ball of the given radius around
// the minimizer and checks the class inequality of the certificate. A pass is
// sampling evidence, not a proof.
inline ViolationReport verify_certificate(const PotentialModel& model, const ClassCertificate& cert,
                                          int n_samples, double radius, uint64_t seed) {
  if (n_samples < 1) throw ConfigError("verify_certificate: n_samples must be >= 1");
  if (!(radius > 0.0)) throw ConfigError("verify_certificate: radius must be > 0");
  validate_certificate(cert);
  ViolationReport report;
  const int d = model.dim();
  const Vec& xs = model.minimizer();
  const double tol = 1e-9;

  auto sample_in_ball = [&](uint64_t idx, uint64_t stream) {
    Vec x(d);
    rng::fill_normal(seed, stream, idx, x.data(), d);
    const double r = radius * std::pow(rng::uniform(seed, stream, idx, 1000), 1.0 / d);
    const double n = norm2(x);
    for (int i = 0; i < d; ++i) x[i] = xs[i] + (n > 0 ? x[i] / n * r : 0.0);
    return x;
  };
  auto flag = [&](const Vec& x, const std::string& what) {
    if (report.violations.size() < 32) {
      report.violations.push_back(x);
      report.details.push_back(what);
    } else {
      report.violations.push_back(x);
    }
  };

  for (int i = 0; i < n_samples; ++i) {
    const Vec x = sample_in_ball(i, 1);
    const Vec y = sample_in_ball(i, 2);
    const double ux = model.value(x);
    if (!std::isfinite(ux)) throw NumericError("verify_certificate: non-finite U");
    if (const auto* s = std::get_if<Superexponential>(&cert)) {
      const Vec dx = sub(x, xs);
      const double r = norm2(dx);
      if (r >= s->M_rho) {
        const double lhs = dot(model.gradient(x), dx);
        const double rhs = s->rho * std::pow(r, s->alpha);
        if (lhs < rhs - tol * std::max(1.0, rhs)) flag(x, "superexponential growth");
      }
    } else if (const auto* l = std::get_if<LogConcave>(&cert)) {
      const double r = norm2(sub(x, xs));
      if (r >= l->M_eta && ux < l->eta * r - tol * std::max(1.0, l->eta * r))
        flag(x, "linear growth");
      Vec mid(d);
      for (int k = 0; k < d; ++k) mid[k] = 0.5 * (x[k] + y[k]);
      const double lhs = model.value(mid);
      const double rhs = 0.5 * (ux + model.value(y));
      if (lhs > rhs + tol * std::max(1.0, std::abs(rhs))) flag(x, "midpoint convexity");
    } else if (const auto* m = std::get_if<StronglyConvexOutsideBall>(&cert)) {
      const Vec dxy = sub(x, y);
      const double r2 = sq_norm(dxy);
      if (std::sqrt(r2) >= m->M_s) {
        const double lhs = dot(sub(model.gradient(x), model.gradient(y)), dxy);
        const double rhs = m->m * r2;
        if (lhs < rhs - tol * std::max(1.0, rhs)) flag(x, "strong convexity");
      }
    } else if (const auto* pc = std::get_if<PerturbedStronglyConvex>(&cert)) {
      if (!model.has_perturbation_split())
        throw ConfigError("verify_certificate: model has no U1+U2 decomposition");
      const Vec dxy = sub(x, y);
      const double r2 = sq_norm(dxy);
      const double lhs = dot(sub(model.gradient_U1(x), model.gradient_U1(y)), dxy);
      if (lhs < pc->m * r2 - tol * std::max(1.0, pc->m * r2)) flag(x, "U1 strong convexity");
      const double g1 = norm2(sub(model.gradient_U1(x), model.gradient_U1(y)));
      if (g1 > pc->L1 * std::sqrt(r2) + tol * std::max(1.0, g1)) flag(x, "U1 smoothness");
      if (std::abs(model.value_U2(x)) > pc->sup_U2 + tol) flag(x, "sup U2");
      if (norm2(model.gradient_U2(x)) > pc->sup_gradU2 + tol) flag(x, "sup grad U2");
    }
  }
  // oscillation check for the perturbed class over all sampled points
  if (const auto* pc = std::get_if<PerturbedStronglyConvex>(&cert)) {
    double lo = kInf, hi = -kInf;
    for (int i = 0; i < n_samples; ++i) {
      const double u2 = model.value_U2(sample_in_ball(i, 1));
      lo = std::min(lo, u2);
      hi = std::max(hi, u2);
    }
    if (hi - lo > pc->osc_U2 + tol) flag(model.minimizer(), "osc U2");
  }
  return report;
}

}  // namespace ulacert
