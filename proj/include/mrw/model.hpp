#pragma once

// Model variants and the covariance kernels shared by simulation and likelihood code.
//
//   standard:    y_k = y_{k-1} + sigma sqrt(M_k) eps_k
//   damped:      y_k = phi y_{k-1} + sigma sqrt(M_k) eps_k,     phi = 1 - nu dt
//   fractional:  y_k = y_{k-1} + sigma sqrt(M_k) eps^(H)_k
//
// with M_k = c exp(h_k), h a centered Gaussian process with
// Cov(h_k, h_l) = lambda^2 log+( T / ((|k-l|+1) dt) ) and c = exp(-Var(h)/2).

#include <cmath>
#include <cstddef>
#include <string>
#include <string_view>
#include <vector>

#include "mrw/error.hpp"

namespace mrw {

enum class Variant { standard, damped, fractional };

inline std::string_view to_string(Variant v) {
  switch (v) {
    case Variant::standard: return "standard";
    case Variant::damped: return "damped";
    case Variant::fractional: return "fractional";
  }
  return "unknown";
}

inline Variant parse_variant(std::string_view name) {
  if (name == "standard") return Variant::standard;
  if (name == "damped") return Variant::damped;
  if (name == "fractional") return Variant::fractional;
  throw domain_error("unknown model variant '" + std::string(name) + "'");
}

// Parameter vector of one model variant. Times (t_corr, dt, 1/nu) share one unit,
// weeks by default. `phi` is used only by the damped variant, `hurst` only by the
// fractional one.
struct ModelParams {
  Variant variant = Variant::standard;
  double lambda = 0.0;
  double sigma = 1.0;
  double t_corr = 1.0;
  double phi = 0.0;
  double hurst = 0.5;
  double mu = 0.0;
  double dt = 1.0;

  static ModelParams standard(double lambda, double sigma, double t_corr, double dt = 1.0) {
    ModelParams p;
    p.variant = Variant::standard;
    p.lambda = lambda;
    p.sigma = sigma;
    p.t_corr = t_corr;
    p.dt = dt;
    return p;
  }

  // `relaxation` is 1/nu in the same unit as dt; phi = 1 - dt/relaxation.
  static ModelParams damped(double lambda, double sigma, double t_corr, double relaxation,
                            double dt = 1.0) {
    ModelParams p = standard(lambda, sigma, t_corr, dt);
    p.variant = Variant::damped;
    p.phi = 1.0 - dt / relaxation;
    return p;
  }

  static ModelParams fractional(double lambda, double sigma, double t_corr, double hurst,
                                double dt = 1.0) {
    ModelParams p = standard(lambda, sigma, t_corr, dt);
    p.variant = Variant::fractional;
    p.hurst = hurst;
    return p;
  }

  double nu() const { return (1.0 - phi) / dt; }
  double relaxation_time() const { return dt / (1.0 - phi); }
  // T in units of dt.
  double t_ratio() const { return t_corr / dt; }
};

inline void validate(const ModelParams& p) {
  if (!(p.dt > 0.0) || !std::isfinite(p.dt)) throw domain_error("dt must be positive");
  if (!(p.lambda >= 0.0) || !std::isfinite(p.lambda))
    throw domain_error("lambda must be nonnegative");
  if (!(p.sigma > 0.0) || !std::isfinite(p.sigma)) throw domain_error("sigma must be positive");
  if (!(p.t_corr >= p.dt) || !std::isfinite(p.t_corr))
    throw domain_error("t_corr must be at least dt");
  if (!std::isfinite(p.mu)) throw domain_error("mu must be finite");
  if (p.variant == Variant::damped && !(p.phi > 0.0 && p.phi < 1.0))
    throw domain_error("damped model requires 0 < phi < 1");
  if (p.variant == Variant::fractional && !(p.hurst > 0.0 && p.hurst < 1.0))
    throw domain_error("fractional model requires 0 < H < 1");
}

// lambda^2 * max(0, log(T / ((lag+1) dt))).
inline double cascade_covariance(std::ptrdiff_t lag, const ModelParams& p) {
  if (lag < 0) throw domain_error("cascade_covariance: negative lag");
  if (!(p.t_corr >= p.dt)) throw domain_error("cascade_covariance: t_corr < dt");
  if (!(p.lambda >= 0.0)) throw domain_error("cascade_covariance: negative lambda");
  const double span = static_cast<double>(lag + 1) * p.dt;
  if (span >= p.t_corr) return 0.0;
  return p.lambda * p.lambda * std::log(p.t_corr / span);
}

// Number of lags with nonzero cascade covariance, ceil(T/dt) - 1 (at least 0).
inline std::size_t cascade_support(const ModelParams& p) {
  const double r = p.t_corr / p.dt;
  const double c = std::ceil(r) - 1.0;
  return c > 0.0 ? static_cast<std::size_t>(c) : 0;
}

// c = exp(-gamma(0)/2), so that E[c exp(h_k)] = 1.
inline double cascade_normalizer(const ModelParams& p) {
  validate(p);
  return std::exp(-0.5 * cascade_covariance(0, p));
}

// Autocovariance gamma(0..max_lag) of the log-volatility.
struct CascadeKernel {
  std::vector<double> gamma;
  double c_norm = 1.0;
};

inline CascadeKernel cascade_kernel(const ModelParams& p, std::size_t max_lag) {
  validate(p);
  CascadeKernel k;
  k.gamma.resize(max_lag + 1);
  for (std::size_t i = 0; i <= max_lag; ++i)
    k.gamma[i] = cascade_covariance(static_cast<std::ptrdiff_t>(i), p);
  k.c_norm = std::exp(-0.5 * k.gamma[0]);
  return k;
}

// Autocovariance of unit-variance fractional Gaussian noise.
inline double fgn_covariance(std::ptrdiff_t lag, double hurst) {
  if (!(hurst > 0.0 && hurst < 1.0)) throw domain_error("fgn_covariance: H outside (0,1)");
  if (lag < 0) lag = -lag;
  if (lag == 0) return 1.0;
  const double k = static_cast<double>(lag);
  const double e = 2.0 * hurst;
  return 0.5 * (std::pow(k + 1.0, e) - 2.0 * std::pow(k, e) + std::pow(k - 1.0, e));
}

struct FgnKernel {
  std::vector<double> beta;
};

inline FgnKernel fgn_kernel(double hurst, std::size_t max_lag) {
  FgnKernel k;
  k.beta.resize(max_lag + 1);
  for (std::size_t i = 0; i <= max_lag; ++i)
    k.beta[i] = fgn_covariance(static_cast<std::ptrdiff_t>(i), hurst);
  return k;
}

// Asymptotic shape of the return autocovariance at lag >= 1.
//   damped:     -(dt^2 sigma^2 nu^2 / (1 - phi^2)) exp(-nu k dt)
//   fractional: 2H(2H-1) k^(2H - 2 - lambda^2/4)   (up to a positive constant)
//   standard:   0
inline double theoretical_return_acf(std::ptrdiff_t lag, const ModelParams& p) {
  if (lag < 1) throw domain_error("theoretical_return_acf: lag must be >= 1");
  const double k = static_cast<double>(lag);
  switch (p.variant) {
    case Variant::standard: return 0.0;
    case Variant::damped: {
      const double nu = p.nu();
      return -(p.dt * p.dt * p.sigma * p.sigma * nu * nu / (1.0 - p.phi * p.phi)) *
             std::exp(-nu * k * p.dt);
    }
    case Variant::fractional: {
      const double h2 = 2.0 * p.hurst;
      return h2 * (h2 - 1.0) * std::pow(k, h2 - 2.0 - 0.25 * p.lambda * p.lambda);
    }
  }
  return 0.0;
}

}  // namespace mrw
