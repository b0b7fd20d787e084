#pragma once

#include <complex>
#include <cstdint>
#include <vector>

#include "ulacert/common.hpp"
#include "ulacert/potentials.hpp"
#include "ulacert/schedule.hpp"

namespace ulacert {

// ---- isotropic Gaussian laws -------------------------------------------------

struct GaussianDist {
  Vec mean;
  double variance = 1.0;  // per-coordinate variance of the isotropic covariance
  int dim() const { return static_cast<int>(mean.size()); }
};

// Exact law of the chain after p steps on the standard Gaussian target
// (U = ||x||^2/2): mean (1-gamma)^p x, per-coordinate variance
// (1 - (1-gamma)^{2p})/(1 - gamma/2). Verified against the one-step law
// N((1-gamma)x, 2 gamma) at p = 1 and against empirical chain moments.
inline GaussianDist gaussian_ula_marginal(const Vec& x, double gamma, int64_t p) {
  if (!(gamma > 0.0 && gamma < 1.0)) throw NumericError("gaussian_ula_marginal: gamma must be in (0,1)");
  if (p < 1)
    throw ConfigError("gaussian_ula_marginal: p = 0 is the start point mass; use p >= 1");
  GaussianDist g;
  const double a = std::pow(1.0 - gamma, static_cast<double>(p));
  g.mean.resize(x.size());
  for (size_t i = 0; i < x.size(); ++i) g.mean[i] = a * x[i];
  g.variance = -std::expm1(2.0 * static_cast<double>(p) * std::log1p(-gamma)) / (1.0 - gamma / 2.0);
  return g;
}

inline double gaussian_kl(const GaussianDist& a, const GaussianDist& b) {
  if (a.dim() != b.dim()) throw ConfigError("gaussian_kl: dimension mismatch");
  const double d = a.dim();
  const double r = a.variance / b.variance;
  return 0.5 * (d * (r - 1.0 - std::log(r)) + sq_dist(a.mean, b.mean) / b.variance);
}

// Total variation between isotropic Gaussians, in the sup_A |mu(A)-nu(A)|
// normalization (diameter 1). Closed forms where available, radial quadrature
// for the equal-mean case, otherwise an explicit no-closed-form error.
inline double gaussian_tv(const GaussianDist& a, const GaussianDist& b) {
  if (a.dim() != b.dim()) throw ConfigError("gaussian_tv: dimension mismatch");
  const int d = a.dim();
  const double sa = std::sqrt(a.variance), sb = std::sqrt(b.variance);
  const double mean_shift = std::sqrt(sq_dist(a.mean, b.mean));
  if (std::abs(a.variance - b.variance) < 1e-14 * std::max(a.variance, b.variance)) {
    // pure mean shift
    return 2.0 * normal_cdf(mean_shift / (2.0 * sa)) - 1.0;
  }
  if (d == 1) {
    // density-crossing formula: the two roots of log f_a = log f_b
    const double va = a.variance, vb = b.variance;
    const double ma = a.mean[0], mb = b.mean[0];
    const double A = 1.0 / vb - 1.0 / va;
    const double B = -2.0 * (mb / vb - ma / va);
    const double C = mb * mb / vb - ma * ma / va - std::log(va / vb);
    const double disc = B * B - 4.0 * A * C;
    auto Fa = [&](double t) { return normal_cdf((t - ma) / sa); };
    auto Fb = [&](double t) { return normal_cdf((t - mb) / sb); };
    if (disc <= 0.0) return 0.0;  // densities never cross transversally: identical
    const double r1 = (-B - std::sqrt(disc)) / (2.0 * A);
    const double r2 = (-B + std::sqrt(disc)) / (2.0 * A);
    const double lo = std::min(r1, r2), hi = std::max(r1, r2);
    const double h1 = Fa(lo) - Fb(lo);
    const double h2 = Fa(hi) - Fb(hi);
    // total variation of F_a - F_b over the three monotone pieces, halved
    return 0.5 * (std::abs(h1) + std::abs(h2 - h1) + std::abs(h2));
  }
  if (mean_shift < 1e-13) {
    // equal means, different spread: 1-D radial reduction by quadrature
    const double smax = std::max(sa, sb);
    const double R = 12.0 * smax * std::sqrt(static_cast<double>(d));
    const int n = 40000;
    const double h = R / n;
    const double logc_a = -0.5 * d * std::log(2.0 * M_PI * a.variance);
    const double logc_b = -0.5 * d * std::log(2.0 * M_PI * b.variance);
    // |S_{d-1}| = 2 pi^{d/2} / Gamma(d/2)
    const double log_sphere = std::log(2.0) + 0.5 * d * std::log(M_PI) - std::lgamma(d / 2.0);
    KahanSum s;
    for (int i = 0; i <= n; ++i) {
      const double r = i * h;
      const double lr = r > 0.0 ? (d - 1.0) * std::log(r) : (d == 1 ? 0.0 : -kInf);
      const double fa = std::exp(logc_a - 0.5 * r * r / a.variance + lr + log_sphere);
      const double fb = std::exp(logc_b - 0.5 * r * r / b.variance + lr + log_sphere);
      const double w = (i == 0 || i == n) ? 0.5 : 1.0;
      s.add(w * std::abs(fa - fb));
    }
    return 0.5 * s.value() * h;
  }
  throw NumericError(
      "gaussian_tv: no closed form for unequal variances with a mean shift in d > 1; use the "
      "grid oracle");
}

struct PinskerReport {
  double rhs = 0.0;          // d [ log s - 1 + s^{-1} (1 + (1-g)^{2p} x^2 / d) ]
  double two_kl_rev = 0.0;   // 2 KL(pi | marginal)  (equals rhs analytically)
  double two_kl_fwd = 0.0;   // 2 KL(marginal | pi)
  double tv = 0.0;           // unnormalized TV (diameter 2) between marginal and pi
};

// The closed-form squared-TV envelope for the standard Gaussian target. The
// report carries both KL directions; the chain TV^2 <= 2 KL(pi|marginal) <= rhs
// holds exactly, while the forward KL need not stay below rhs.
inline PinskerReport pinsker_rhs(double x_norm, double gamma, int64_t p, int dim) {
  if (!(gamma > 0.0 && gamma < 1.0)) throw NumericError("pinsker_rhs: gamma must be in (0,1)");
  if (p < 1) throw ConfigError("pinsker_rhs: needs p >= 1");
  const double d = dim;
  Vec x0(dim, 0.0);
  x0[0] = x_norm;
  const GaussianDist marg = gaussian_ula_marginal(x0, gamma, p);
  const GaussianDist target{Vec(dim, 0.0), 1.0};
  const double s = marg.variance;
  const double shrink = std::pow(1.0 - gamma, 2.0 * static_cast<double>(p));
  PinskerReport r;
  r.rhs = d * (std::log(s) - 1.0 + (1.0 + shrink * x_norm * x_norm / d) / s);
  r.two_kl_rev = 2.0 * gaussian_kl(target, marg);
  r.two_kl_fwd = 2.0 * gaussian_kl(marg, target);
  r.tv = 2.0 * gaussian_tv(marg, target);
  return r;
}

// ---- 1-D grid density oracle ---------------------------------------------------

struct GridDensity {
  double lo = 0.0, hi = 0.0;
  std::vector<double> values;
  int n_points() const { return static_cast<int>(values.size()); }
  double h() const { return (hi - lo) / (n_points() - 1); }
  double point(int i) const { return lo + i * h(); }
  double mass() const {
    KahanSum s;
    for (int i = 0; i < n_points(); ++i)
      s.add((i == 0 || i == n_points() - 1 ? 0.5 : 1.0) * values[i]);
    return s.value() * h();
  }
};

namespace detail {

// In-place iterative radix-2 FFT; enough for the optional constant-step fast
// path, so no external FFT dependency is pulled in.
inline void fft_radix2(std::vector<std::complex<double>>& a, bool inverse) {
  const size_t n = a.size();
  for (size_t i = 1, j = 0; i < n; ++i) {
    size_t bit = n >> 1;
    for (; j & bit; bit >>= 1) j ^= bit;
    j ^= bit;
    if (i < j) std::swap(a[i], a[j]);
  }
  for (size_t len = 2; len <= n; len <<= 1) {
    const double ang = 2.0 * M_PI / len * (inverse ? -1.0 : 1.0);
    const std::complex<double> wl(std::cos(ang), std::sin(ang));
    for (size_t i = 0; i < n; i += len) {
      std::complex<double> w(1.0, 0.0);
      for (size_t k = 0; k < len / 2; ++k) {
        const auto u = a[i + k];
        const auto v = a[i + k + len / 2] * w;
        a[i + k] = u + v;
        a[i + k + len / 2] = u - v;
        w *= wl;
      }
    }
  }
  if (inverse)
    for (auto& v : a) v /= static_cast<double>(n);
}

}  // namespace detail

class GridPropagator {
 public:
  // Grid covering x* +/- max(10, |x - x*| + 10 sqrt(2 Gamma_p)).
  GridPropagator(const PotentialModel& model, const StepSchedule& sched, double x_start, int64_t p,
                 int n_points, bool use_fft = false)
      : model_(model), sched_(sched), use_fft_(use_fft) {
    if (model.dim() != 1) throw ConfigError("grid oracle: model must be 1-D");
    if (n_points < 16) throw ConfigError("grid oracle: need at least 16 grid points");
    if (p < 1) throw ConfigError("grid oracle: p = 0 is a point mass; use p >= 1");
    if (use_fft_ && sched.kind() != StepSchedule::Kind::Constant)
      throw ConfigError("grid oracle: the fft fast path needs a constant schedule");
    const double xs = model.minimizer()[0];
    const double radius =
        std::max(10.0, std::abs(x_start - xs) + 10.0 * std::sqrt(2.0 * sched.partial_sum(1, p)));
    dens_.lo = xs - radius;
    dens_.hi = xs + radius;
    dens_.values.assign(n_points, 0.0);
    // first step is exact: the kernel from a point mass is a Gaussian
    const double g1 = sched.gamma(1);
    const double m = x_start - g1 * grad(x_start);
    const double v = 2.0 * g1;
    for (int i = 0; i < n_points; ++i) {
      const double y = dens_.point(i);
      dens_.values[i] = std::exp(-(y - m) * (y - m) / (2.0 * v)) / std::sqrt(2.0 * M_PI * v);
    }
    step_done_ = 1;
  }

  const GridDensity& density() const { return dens_; }
  int64_t step() const { return step_done_; }

  // Apply kernels gamma_{step+1} .. gamma_{p}.
  void advance_to(int64_t p) {
    while (step_done_ < p) {
      apply_kernel(sched_.gamma(step_done_ + 1));
      ++step_done_;
    }
    const double deficit = 1.0 - dens_.mass();
    if (deficit > 1e-6)
      throw NumericError("grid oracle: mass deficit " + std::to_string(deficit) +
                         " beyond budget 1e-6; suggest bounds [" +
                         std::to_string(dens_.lo - 0.5 * (dens_.hi - dens_.lo)) + ", " +
                         std::to_string(dens_.hi + 0.5 * (dens_.hi - dens_.lo)) + "]");
  }

  // One kernel application from an arbitrary density (exposed for operator-
  // composition checks).
  void apply_kernel(double gamma) {
    const int n = dens_.n_points();
    const double h = dens_.h();
    const double var = 2.0 * gamma;
    const double sd = std::sqrt(var);
    if (use_fft_) {
      apply_kernel_fft(gamma);
      return;
    }
    // tabulate the drifted centers m_i = x_i - gamma U'(x_i); increasing in i
    // as long as gamma < 1/L
    std::vector<double> centers(n), src(n);
    for (int i = 0; i < n; ++i) {
      const double x = dens_.point(i);
      centers[i] = x - gamma * grad(x);
      src[i] = dens_.values[i] * (i == 0 || i == n - 1 ? 0.5 : 1.0);
    }
    const double window = 8.5 * sd;
    const double inv2v = 1.0 / (2.0 * var);
    const double norm = h / std::sqrt(2.0 * M_PI * var);
    std::vector<double> out(n, 0.0);
    int lo = 0, hi = 0;  // sliding window over sources for increasing y
    for (int j = 0; j < n; ++j) {
      const double y = dens_.point(j);
      while (lo < n && centers[lo] < y - window) ++lo;
      if (hi < lo) hi = lo;
      while (hi < n && centers[hi] <= y + window) ++hi;
      double s = 0.0;
      for (int i = lo; i < hi; ++i) {
        const double dydm = y - centers[i];
        s += src[i] * std::exp(-dydm * dydm * inv2v);
      }
      out[j] = s * norm;
    }
    dens_.values.swap(out);
  }

 private:
  double grad(double x) const {
    double g;
    model_.gradient(&x, &g);
    return g;
  }

  // Constant-step fast path: substitute u = x - gamma U'(x) (monotone for
  // gamma < 1/L), resample the pushed-forward density onto the y-grid by
  // cubic interpolation, then convolve with the shift-invariant Gaussian by
  // FFT.
  void apply_kernel_fft(double gamma) {
    const int n = dens_.n_points();
    const double h = dens_.h();
    std::vector<double> centers(n);
    for (int i = 0; i < n; ++i) {
      const double x = dens_.point(i);
      centers[i] = x - gamma * grad(x);
    }
    // pushed-forward density on the uniform grid: q~(u) = q(m^{-1}(u)) / m'(m^{-1}(u))
    std::vector<double> pushed(n, 0.0);
    int seg = 0;
    for (int j = 0; j < n; ++j) {
      const double u = dens_.point(j);
      if (u < centers.front() || u > centers.back()) continue;
      while (seg + 1 < n - 1 && centers[seg + 1] < u) ++seg;
      // invert m on [seg, seg+1] by monotone cubic (Newton on the local cubic
      // interpolant of m built from 4 neighbours)
      const double t = (u - centers[seg]) / (centers[seg + 1] - centers[seg]);
      const double z = dens_.point(seg) + t * h;  // first-order guess
      // derivative m' by centered differences of the tabulated centers
      const int i0 = std::min(std::max(seg, 1), n - 2);
      const double mp = (centers[i0 + 1] - centers[i0 - 1]) / (2.0 * h);
      // one Newton correction using the interpolated m
      auto m_of = [&](double zz) { return zz - gamma * grad(zz); };
      const double z1 = z - (m_of(z) - u) / mp;
      const double q = interp_cubic(z1);
      const double mp1 = 1.0 - gamma * (grad(z1 + h) - grad(z1 - h)) / (2.0 * h);
      pushed[j] = std::max(0.0, q / mp1);
    }
    // FFT convolution with N(0, 2 gamma)
    size_t m = 1;
    while (m < static_cast<size_t>(2 * n)) m <<= 1;
    std::vector<std::complex<double>> fa(m), fb(m);
    for (int i = 0; i < n; ++i) fa[i] = pushed[i];
    const double var = 2.0 * gamma;
    const double norm = h / std::sqrt(2.0 * M_PI * var);
    const int kmax = std::min<int>(n - 1, static_cast<int>(std::ceil(8.5 * std::sqrt(var) / h)));
    for (int k = -kmax; k <= kmax; ++k) {
      const double w = norm * std::exp(-(k * h) * (k * h) / (2.0 * var));
      fb[(k + static_cast<int>(m)) % m] += w;
    }
    detail::fft_radix2(fa, false);
    detail::fft_radix2(fb, false);
    for (size_t i = 0; i < m; ++i) fa[i] *= fb[i];
    detail::fft_radix2(fa, true);
    for (int i = 0; i < n; ++i) dens_.values[i] = std::max(0.0, fa[i].real());
  }

  double interp_cubic(double x) const {
    const int n = dens_.n_points();
    const double h = dens_.h();
    const double t = (x - dens_.lo) / h;
    int i = static_cast<int>(std::floor(t));
    i = std::min(std::max(i, 1), n - 3);
    const double s = t - i;
    const double ym1 = dens_.values[i - 1], y0 = dens_.values[i], y1 = dens_.values[i + 1],
                 y2 = dens_.values[i + 2];
    // Catmull-Rom
    return y0 + 0.5 * s * (y1 - ym1 +
                           s * (2.0 * ym1 - 5.0 * y0 + 4.0 * y1 - y2 +
                                s * (3.0 * (y0 - y1) + y2 - ym1)));
  }

  PotentialModel model_;
  StepSchedule sched_;
  GridDensity dens_;
  int64_t step_done_ = 0;
  bool use_fft_ = false;
};

inline GridDensity grid_propagate(const PotentialModel& model, const StepSchedule& sched,
                                  double x_start, int64_t p, int n_points, bool use_fft = false) {
  GridPropagator prop(model, sched, x_start, p, n_points, use_fft);
  prop.advance_to(p);
  return prop.density();
}

struct GridTV {
  double tv = 0.0;
  double refine_err = 0.0;  // |TV(full grid) - TV(half grid)|
};

inline GridTV grid_tv(const GridDensity& a, const std::vector<double>& b_values) {
  if (b_values.size() != a.values.size()) throw ConfigError("grid_tv: incompatible grids");
  const int n = a.n_points();
  auto tv_with_stride = [&](int stride) {
    KahanSum s;
    const double hh = a.h() * stride;
    int last = 0;
    for (int i = 0; i < n; i += stride) last = i;
    for (int i = 0; i < n; i += stride) {
      const double w = (i == 0 || i == last) ? 0.5 : 1.0;
      s.add(w * std::abs(a.values[i] - b_values[i]));
    }
    return 0.5 * s.value() * hh;
  };
  GridTV out;
  out.tv = tv_with_stride(1);
  out.refine_err = std::abs(out.tv - tv_with_stride(2));
  return out;
}

inline GridTV grid_tv(const GridDensity& a, const GridDensity& b) {
  if (a.n_points() != b.n_points() || std::abs(a.lo - b.lo) > 1e-12 ||
      std::abs(a.hi - b.hi) > 1e-12)
    throw ConfigError("grid_tv: incompatible numeric grids");
  return grid_tv(a, b.values);
}

inline GridTV grid_tv(const GridDensity& a, const GaussianDist& b) {
  if (b.dim() != 1) throw ConfigError("grid_tv: analytic reference must be 1-D");
  std::vector<double> vals(a.n_points());
  const double s = std::sqrt(b.variance);
  for (int i = 0; i < a.n_points(); ++i) {
    const double y = a.point(i);
    vals[i] = normal_pdf((y - b.mean[0]) / s) / s;
  }
  return grid_tv(a, vals);
}

// ---- variance integrals for built-in families ----------------------------------

namespace detail {
// composite Simpson on [0, R]
template <class F>
double simpson(F f, double lo, double hi, int n) {
  if (n % 2) ++n;
  const double h = (hi - lo) / n;
  double s = f(lo) + f(hi);
  for (int i = 1; i < n; ++i) s += f(lo + i * h) * (i % 2 ? 4.0 : 2.0);
  return s * h / 3.0;
}
}  // namespace detail

// int ||x - mean||^2 dpi for the built-in families; closed form for the
// quadratics, deterministic quadrature for the others.
inline double builtin_variance_integral(const PotentialModel& model) {
  const int d = model.dim();
  switch (model.family()) {
    case PotentialModel::Family::IsotropicQuadratic:
      return d / model.curvature();
    case PotentialModel::Family::AnisotropicQuadratic: {
      double s = 0.0;
      for (double a : model.spectrum()) s += 1.0 / a;
      return s;
    }
    case PotentialModel::Family::Huber: {
      const double sc = model.huber_scale();
      auto integrand = [&](int k) {
        return [=](double r) {
          const double lu = -(std::sqrt(sc * sc + r * r) - sc);
          const double lr = r > 0.0 ? (d - 1.0 + k) * std::log(r) : (d - 1 + k == 0 ? 0.0 : -kInf);
          return std::exp(lu + lr);
        };
      };
      const double R = 10.0 * (d + 10.0) * std::max(1.0, sc);
      const double i2 = detail::simpson(integrand(2), 0.0, R, 40000);
      const double i0 = detail::simpson(integrand(0), 0.0, R, 40000);
      return i2 / i0;  // mean is the origin by symmetry
    }
    case PotentialModel::Family::QuadraticPlusCosine: {
      const double a = model.cos_amplitude();
      auto f0 = [&](double x) { return std::exp(-0.5 * x * x - a * std::cos(x)); };
      auto f2 = [&](double x) { return x * x * f0(x); };
      const double I0 = detail::simpson(f0, -14.0, 14.0, 20000);
      const double I2 = detail::simpson(f2, -14.0, 14.0, 20000);
      return (d - 1.0) + I2 / I0;  // coordinate 1 non-Gaussian, others standard normal
    }
    default:
      throw ConfigError("variance integral: no exact value for this family");
  }
}

}  // namespace ulacert
