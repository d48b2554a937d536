#pragma once

// Approximate log-likelihoods of the standard, damped and fractional MRW models.
//
// The latent log-volatility h has a Gaussian prior represented by its truncated
// order-K autoregression (exact conditionals for the first K values, the order-K
// predictor afterwards). The integral over h of p(x|h) p(h) is evaluated with Laplace's
// method: log p(x) ~ F(h*) + (n/2) log 2pi - (1/2) log det(-F''(h*)),
// F(h) = log p(x|h) + log p(h), with h* found by damped Newton iteration. Every Hessian
// involved is banded with bandwidth K.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <numbers>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "mrw/banded.hpp"
#include "mrw/error.hpp"
#include "mrw/levinson.hpp"
#include "mrw/model.hpp"
#include "mrw/series.hpp"

namespace mrw {

inline constexpr std::size_t kDefaultTruncation = 256;

namespace detail {

inline constexpr double kLogTwoPi = 1.8378770664093454836;

// Precision matrix A^T D^-1 A of a sequence whose k-th prediction residual is row k of
// A applied to it, with prediction order min(k, K) and variance D_k; scaled by `scale`.
// Rows k >= K all carry the same coefficients, so their contribution to entry (i, j) is a
// partial autocorrelation of that one row, read off per-lag prefix sums.
inline SymmetricBand ar_precision(const ArRepresentation& ar, std::size_t n, double scale) {
  const std::size_t order = std::min(ar.order(), n - 1);
  SymmetricBand q(n, order);
  std::vector<double> row;
  auto residual_row = [&](std::size_t m) {
    const auto a = ar.coefficients(m);
    row.resize(m + 1);
    for (std::size_t i = 0; i < m; ++i) row[i] = -a[m - i - 1];
    row[m] = 1.0;
  };
  for (std::size_t k = 0; k < order; ++k) {
    residual_row(k);
    q.add_outer(0, row, scale / ar.prediction_variance(k));
  }

  residual_row(order);
  const double w = scale / ar.prediction_variance(order);
  std::vector<std::size_t> offset(order + 2, 0);
  for (std::size_t d = 0; d <= order; ++d) offset[d + 1] = offset[d] + order - d + 2;
  std::vector<double> prefix(offset[order + 1]);
  for (std::size_t d = 0; d <= order; ++d) {
    double* p = prefix.data() + offset[d];
    p[0] = 0.0;
    for (std::size_t t = 0; t + d <= order; ++t) p[t + 1] = p[t] + row[t + d] * row[t];
  }
  for (std::size_t i = 0; i < n; ++i) {
    const std::size_t first = i > order ? i - order : 0;
    double* qi = q.row(i, first);
    for (std::size_t j = first; j <= i; ++j) {
      const std::size_t lo = std::max(order, i), hi = std::min(n - 1, j + order);
      if (lo > hi) continue;
      const double* p = prefix.data() + offset[i - j];
      qi[j - first] += w * (p[j + order - lo + 1] - p[j + order - hi]);
    }
  }
  return q;
}

// residual_k = v_k - sum_j a_j^(m) v_{k-j}, m = min(k, order).
inline void ar_residuals(const ArRepresentation& ar, std::size_t order, std::span<const double> v,
                         std::span<double> out) {
  for (std::size_t k = 0; k < v.size(); ++k) {
    const std::size_t m = std::min(k, order);
    const auto a = ar.coefficients(m);
    double e = v[k];
    for (std::size_t j = 1; j <= m; ++j) e -= a[j - 1] * v[k - j];
    out[k] = e;
  }
}

// out += A^T u for the residual operator above.
inline void ar_residuals_adjoint(const ArRepresentation& ar, std::size_t order,
                                 std::span<const double> u, std::span<double> out) {
  for (std::size_t k = 0; k < u.size(); ++k) {
    const std::size_t m = std::min(k, order);
    const auto a = ar.coefficients(m);
    out[k] += u[k];
    for (std::size_t j = 1; j <= m; ++j) out[k - j] -= a[j - 1] * u[k];
  }
}

inline void copy_band(const SymmetricBand& src, SymmetricBand& dst) {
  const std::size_t bw = src.bandwidth();
  for (std::size_t i = 0; i < src.size(); ++i) {
    const std::size_t first = i > bw ? i - bw : 0;
    std::copy_n(src.row(i, first), i - first + 1, dst.row(i, first));
  }
}

}  // namespace detail

// Gaussian law of h_1..h_n implied by the truncated autoregression.
class LatentPrior {
 public:
  LatentPrior(ArRepresentation ar, std::size_t n)
      : ar_(std::move(ar)), n_(n), order_(std::min(ar_.order(), n == 0 ? 0 : n - 1)) {
    if (n == 0) throw domain_error("LatentPrior: n must be >= 1");
    precision_ = detail::ar_precision(ar_, n_, 1.0);
  }

  // Requires lambda > 0 and T > dt (otherwise h is identically zero).
  static LatentPrior from_params(const ModelParams& p, std::size_t n,
                                 std::size_t truncation = kDefaultTruncation) {
    validate(p);
    if (n == 0) throw domain_error("LatentPrior: n must be >= 1");
    const std::size_t order = std::min(truncation, n - 1);
    const CascadeKernel kernel = cascade_kernel(p, order);
    if (!(kernel.gamma[0] > 0.0))
      throw domain_error("latent density is degenerate for lambda = 0 or T = dt; use the "
                         "Gaussian likelihood");
    return LatentPrior(durbin_levinson(kernel.gamma), n);
  }

  std::size_t size() const noexcept { return n_; }
  std::size_t order() const noexcept { return order_; }
  const ArRepresentation& representation() const noexcept { return ar_; }
  const SymmetricBand& precision() const noexcept { return precision_; }

  double log_density(std::span<const double> h) const {
    check(h);
    std::vector<double> e(n_);
    detail::ar_residuals(ar_, order_, h, e);
    double s = 0.0;
    for (std::size_t k = 0; k < n_; ++k) {
      const double v = ar_.prediction_variance(std::min(k, order_));
      s -= 0.5 * (detail::kLogTwoPi + std::log(v)) + 0.5 * e[k] * e[k] / v;
    }
    return s;
  }

  // g += d/dh log p(h) = -Q h.
  void add_gradient(std::span<const double> h, std::span<double> g) const {
    check(h);
    std::vector<double> e(n_);
    detail::ar_residuals(ar_, order_, h, e);
    for (std::size_t k = 0; k < n_; ++k) e[k] = -e[k] / ar_.prediction_variance(std::min(k, order_));
    detail::ar_residuals_adjoint(ar_, order_, e, g);
  }

 private:
  void check(std::span<const double> h) const {
    if (h.size() != n_) throw domain_error("LatentPrior: length mismatch");
  }

  ArRepresentation ar_;
  std::size_t n_;
  std::size_t order_;
  SymmetricBand precision_;
};

// log p(x|h) for the standard and damped models: x_k ~ N(0, sigma^2 c e^{h_k}) independently.
class IndependentObservation {
 public:
  IndependentObservation(std::span<const double> x, double sigma, double c)
      : x2_(x.size()), log_s2_(std::log(sigma * sigma * c)), inv_2s2_(0.5 / (sigma * sigma * c)) {
    for (std::size_t k = 0; k < x.size(); ++k) x2_[k] = x[k] * x[k];
  }

  std::size_t size() const noexcept { return x2_.size(); }
  std::size_t bandwidth() const noexcept { return 0; }

  double value(std::span<const double> h) const {
    double s = 0.0;
    for (std::size_t k = 0; k < x2_.size(); ++k)
      s -= 0.5 * (detail::kLogTwoPi + log_s2_ + h[k]) + x2_[k] * inv_2s2_ * std::exp(-h[k]);
    return s;
  }

  void add_gradient(std::span<const double> h, std::span<double> g) const {
    for (std::size_t k = 0; k < x2_.size(); ++k) g[k] += -0.5 + x2_[k] * inv_2s2_ * std::exp(-h[k]);
  }

  void add_negative_hessian(std::span<const double> h, SymmetricBand& a) const {
    for (std::size_t k = 0; k < x2_.size(); ++k) a(k, k) += x2_[k] * inv_2s2_ * std::exp(-h[k]);
  }

  // Mode of each factor on its own, log(x^2 / (sigma^2 c)), floored at zero returns.
  std::vector<double> initial_guess() const {
    std::vector<double> h(x2_.size());
    const double s2 = 0.5 / inv_2s2_;
    for (std::size_t k = 0; k < h.size(); ++k) h[k] = std::log((x2_[k] + 1e-8 * s2) / s2);
    return h;
  }

 private:
  std::vector<double> x2_;
  double log_s2_;
  double inv_2s2_;
};

// log p(x|h) for the fractional model. With b_k = x_k e^{-h_k/2}, the vector b/(sigma sqrt c)
// is unit-variance fGn, whose density uses the truncated autoregression of its covariance:
//   log p(x|h) = sum_k [ -log(sigma sqrt(2 pi c)) - h_k/2 - log r_k - e_k^2 / (2 sigma^2 c r_k^2) ],
// e = A b the fGn prediction residuals, r_k^2 their variances.
class FractionalObservation {
 public:
  FractionalObservation(std::span<const double> x, double sigma, double c, ArRepresentation fgn_ar)
      : x_(x.begin(), x.end()),
        ar_(std::move(fgn_ar)),
        order_(std::min(ar_.order(), x.empty() ? 0 : x.size() - 1)),
        s2_(sigma * sigma * c) {
    if (x.empty()) throw domain_error("FractionalObservation: empty series");
    precision_ = detail::ar_precision(ar_, x_.size(), 1.0 / s2_);
  }

  static FractionalObservation from_params(std::span<const double> x, const ModelParams& p,
                                           std::size_t truncation = kDefaultTruncation) {
    validate(p);
    const std::size_t order = std::min(truncation, x.empty() ? 0 : x.size() - 1);
    return FractionalObservation(x, p.sigma, cascade_normalizer(p),
                                 durbin_levinson(fgn_kernel(p.hurst, order).beta));
  }

  std::size_t size() const noexcept { return x_.size(); }
  std::size_t bandwidth() const noexcept { return order_; }

  double value(std::span<const double> h) const {
    const std::size_t n = x_.size();
    std::vector<double> b(n), e(n);
    whiten(h, b);
    detail::ar_residuals(ar_, order_, b, e);
    double s = 0.0;
    for (std::size_t k = 0; k < n; ++k) {
      const double r2 = ar_.prediction_variance(std::min(k, order_));
      s -= 0.5 * (detail::kLogTwoPi + std::log(s2_ * r2) + h[k]) + 0.5 * e[k] * e[k] / (s2_ * r2);
    }
    return s;
  }

  void add_gradient(std::span<const double> h, std::span<double> g) const {
    const std::size_t n = x_.size();
    std::vector<double> b(n), w(n, 0.0);
    weighted_adjoint(h, b, w);
    for (std::size_t k = 0; k < n; ++k) g[k] += -0.5 + 0.5 * b[k] * w[k];
  }

  // -d2/dh2 log p(x|h) = (1/4) diag(b o P b) + (1/4) diag(b) P diag(b), P the precision of b.
  // Not necessarily positive definite away from the mode.
  void add_negative_hessian(std::span<const double> h, SymmetricBand& a) const {
    const std::size_t n = x_.size();
    std::vector<double> b(n), w(n, 0.0);
    weighted_adjoint(h, b, w);
    const std::size_t bw = precision_.bandwidth();
    for (std::size_t i = 0; i < n; ++i) {
      const std::size_t first = i > bw ? i - bw : 0;
      const double* p = precision_.row(i, first);
      double* dst = a.row(i, first);
      for (std::size_t j = first; j <= i; ++j) dst[j - first] += 0.25 * b[i] * p[j - first] * b[j];
      a(i, i) += 0.25 * b[i] * w[i];
    }
  }

  std::vector<double> initial_guess() const {
    std::vector<double> h(x_.size());
    for (std::size_t k = 0; k < h.size(); ++k)
      h[k] = std::log((x_[k] * x_[k] + 1e-8 * s2_) / s2_);
    return h;
  }

 private:
  void whiten(std::span<const double> h, std::span<double> b) const {
    for (std::size_t k = 0; k < x_.size(); ++k) b[k] = x_[k] * std::exp(-0.5 * h[k]);
  }

  // b = whitened series, w = P b.
  void weighted_adjoint(std::span<const double> h, std::span<double> b, std::span<double> w) const {
    const std::size_t n = x_.size();
    whiten(h, b);
    std::vector<double> u(n);
    detail::ar_residuals(ar_, order_, b, u);
    for (std::size_t k = 0; k < n; ++k) u[k] /= s2_ * ar_.prediction_variance(std::min(k, order_));
    detail::ar_residuals_adjoint(ar_, order_, u, w);
  }

  std::vector<double> x_;
  ArRepresentation ar_;
  std::size_t order_;
  double s2_;
  SymmetricBand precision_;
};

struct LaplaceOptions {
  std::size_t max_iterations = 200;
  // Stop when the Newton decrement g^T H^-1 g falls below this value.
  double decrement_tolerance = 1e-12;
  // Optional starting point (e.g. the mode found at a nearby parameter value).
  std::span<const double> initial{};
};

struct LikelihoodResult {
  double loglik = 0.0;
  std::vector<double> h_star;
  // log det of -d2/dh2 [log p(x|h) + log p(h)] at h*.
  double log_det_hessian = 0.0;
  bool converged = false;
  // False when the Hessian at h* was not negative definite; the value then uses a
  // shifted factorization and should be treated as a warning.
  bool hessian_definite = true;
  std::size_t newton_iters = 0;
  // Infinity norm of the gradient of f_x(h) = F(h)/n at h*.
  double gradient_norm = 0.0;
};

// Laplace approximation of log \int exp(obs(h)) p(h) dh for any observation term that
// exposes value / add_gradient / add_negative_hessian / bandwidth.
template <class Observation>
LikelihoodResult laplace_integrate(const LatentPrior& prior, const Observation& obs,
                                   std::span<const double> initial,
                                   const LaplaceOptions& opt = {}) {
  const std::size_t n = prior.size();
  if (initial.size() != n) throw domain_error("laplace_integrate: initial point length mismatch");
  const std::size_t bw = std::max(prior.precision().bandwidth(), obs.bandwidth());

  std::vector<double> h(initial.begin(), initial.end());
  auto objective = [&](std::span<const double> v) { return prior.log_density(v) + obs.value(v); };

  LikelihoodResult res;
  double f = objective(h);
  std::vector<double> g(n), trial(n);
  std::optional<BandCholesky> chol;
  double decrement = 0.0;

  for (std::size_t it = 0;; ++it) {
    std::fill(g.begin(), g.end(), 0.0);
    prior.add_gradient(h, g);
    obs.add_gradient(h, g);

    SymmetricBand neg_h(n, bw);
    detail::copy_band(prior.precision(), neg_h);
    obs.add_negative_hessian(h, neg_h);
    chol = BandCholesky::factor(neg_h);
    res.hessian_definite = chol.has_value();
    if (!chol) {
      // Levenberg shift until the system is positive definite.
      double shift = 1e-8 * std::max(1.0, neg_h.max_abs_diagonal());
      while (!chol) {
        SymmetricBand shifted = neg_h;
        shifted.add_diagonal(shift);
        chol = BandCholesky::factor(std::move(shifted));
        shift *= 10.0;
      }
    }
    const std::vector<double> step = chol->solve(g);
    decrement = 0.0;
    for (std::size_t k = 0; k < n; ++k) decrement += g[k] * step[k];

    res.newton_iters = it;
    if ((decrement < opt.decrement_tolerance && res.hessian_definite) ||
        it == opt.max_iterations)
      break;

    double t = 1.0, f_new = f;
    bool accepted = false;
    for (int halvings = 0; halvings < 60; ++halvings, t *= 0.5) {
      for (std::size_t k = 0; k < n; ++k) trial[k] = h[k] + t * step[k];
      f_new = objective(trial);
      if (std::isfinite(f_new) && f_new >= f + 1e-4 * t * decrement) {
        accepted = true;
        break;
      }
    }
    if (!accepted) break;
    h.swap(trial);
    f = f_new;
  }

  double gmax = 0.0;
  for (double v : g) gmax = std::max(gmax, std::abs(v));
  res.gradient_norm = gmax / static_cast<double>(n);
  res.converged = decrement < opt.decrement_tolerance;
  res.log_det_hessian = chol->log_determinant();
  res.loglik = f + 0.5 * static_cast<double>(n) * detail::kLogTwoPi - 0.5 * res.log_det_hessian;
  res.h_star = std::move(h);
  return res;
}

template <class Observation>
LikelihoodResult laplace_integrate(const LatentPrior& prior, const Observation& obs,
                                   const LaplaceOptions& opt = {}) {
  if (opt.initial.size() == prior.size()) return laplace_integrate(prior, obs, opt.initial, opt);
  std::vector<double> h0 = obs.initial_guess();
  for (double& v : h0) v *= 0.5;
  return laplace_integrate(prior, obs, h0, opt);
}

// Truncated-autoregression log-density of the latent log-volatility vector.
inline double log_density_latent(std::span<const double> h, const ModelParams& p,
                                 std::size_t truncation = kDefaultTruncation) {
  return LatentPrior::from_params(p, h.size(), truncation).log_density(h);
}

// log p(x|h). The truncation order matters only for the fractional variant.
inline double log_density_obs_given_latent(std::span<const double> x, std::span<const double> h,
                                           const ModelParams& p,
                                           std::size_t truncation = kDefaultTruncation) {
  validate(p);
  if (x.size() != h.size()) throw domain_error("log_density_obs_given_latent: length mismatch");
  if (x.empty()) return 0.0;
  if (p.variant == Variant::fractional)
    return FractionalObservation::from_params(x, p, truncation).value(h);
  return IndependentObservation(x, p.sigma, cascade_normalizer(p)).value(h);
}

// Laplace log-likelihood of the drift-free series z under the variant's observation law
// (independent Gaussian for standard/damped, whitened fGn for fractional). lambda > 0.
inline LikelihoodResult laplace_loglik(std::span<const double> z, const ModelParams& p,
                                       std::size_t truncation = kDefaultTruncation,
                                       const LaplaceOptions& opt = {}) {
  validate(p);
  if (z.empty()) throw domain_error("laplace_loglik: empty series");
  if (!(p.lambda > 0.0)) throw domain_error("laplace_loglik: requires lambda > 0");
  const LatentPrior prior = LatentPrior::from_params(p, z.size(), truncation);
  if (p.variant == Variant::fractional)
    return laplace_integrate(prior, FractionalObservation::from_params(z, p, truncation), opt);
  return laplace_integrate(prior, IndependentObservation(z, p.sigma, cascade_normalizer(p)), opt);
}

// Exact Gaussian log-likelihood of the lambda = 0 (or T = dt) models.
inline double gaussian_loglik(std::span<const double> z, const ModelParams& p,
                              std::size_t truncation = kDefaultTruncation) {
  validate(p);
  const double s2 = p.sigma * p.sigma;
  if (p.variant != Variant::fractional) {
    double s = 0.0;
    for (double v : z) s -= 0.5 * (detail::kLogTwoPi + std::log(s2)) + 0.5 * v * v / s2;
    return s;
  }
  if (z.empty()) return 0.0;
  const std::vector<double> h(z.size(), 0.0);
  const std::size_t order = std::min(truncation, z.size() - 1);
  return FractionalObservation(z, p.sigma, 1.0, durbin_levinson(fgn_kernel(p.hurst, order).beta))
      .value(h);
}

// (z_1, z_2 - phi z_1, ..., z_n - phi z_{n-1}); the damped-model likelihood with y_0 = 0
// is the standard-model likelihood of this vector.
inline std::vector<double> damped_residual_transform(std::span<const double> z, double phi) {
  if (!(phi >= 0.0 && phi <= 1.0)) throw domain_error("damped_residual_transform: phi outside [0,1]");
  std::vector<double> r(z.size());
  for (std::size_t k = 0; k < z.size(); ++k) r[k] = k == 0 ? z[0] : z[k] - phi * z[k - 1];
  return r;
}

// Dispatcher. `data` holds returns for the standard and fractional variants and levels
// (y_1..y_n with y_0 = 0) for the damped variant.
inline LikelihoodResult model_loglik(std::span<const double> data, const ModelParams& p,
                                     std::size_t truncation = kDefaultTruncation,
                                     const LaplaceOptions& opt = {}) {
  validate(p);
  std::vector<double> transformed;
  std::span<const double> x = data;
  if (p.variant == Variant::damped) {
    transformed = damped_residual_transform(data, p.phi);
    x = transformed;
  }
  if (p.lambda == 0.0 || cascade_covariance(0, p) == 0.0) {
    LikelihoodResult r;
    r.loglik = gaussian_loglik(x, p, truncation);
    r.h_star.assign(x.size(), 0.0);
    r.converged = true;
    return r;
  }
  return laplace_loglik(x, p, truncation, opt);
}

// Frame values are levels; the standard and fractional variants use their first differences.
inline LikelihoodResult model_loglik(const SeriesFrame& z, const ModelParams& p,
                                     std::size_t truncation = kDefaultTruncation,
                                     const LaplaceOptions& opt = {}) {
  require_contiguous(z, "model_loglik");
  if (p.variant == Variant::damped) return model_loglik(z.values, p, truncation, opt);
  return model_loglik(first_differences(z.values), p, truncation, opt);
}

}  // namespace mrw
