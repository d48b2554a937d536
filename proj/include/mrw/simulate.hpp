#pragma once

#include <Eigen/Eigenvalues>

#include <algorithm>
#include <cmath>
#include <complex>
#include <cstdint>
#include <numbers>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "mrw/banded.hpp"
#include "mrw/error.hpp"
#include "mrw/fft.hpp"
#include "mrw/levinson.hpp"
#include "mrw/model.hpp"
#include "mrw/rng.hpp"

namespace mrw {

// One realization of the log-volatility h and the volatility multipliers M = c exp(h).
struct LatentPath {
  std::vector<double> h;
  std::vector<double> m;
};

enum class FgnMethod { none, circulant, sequential };

inline std::string_view to_string(FgnMethod m) {
  switch (m) {
    case FgnMethod::none: return "none";
    case FgnMethod::circulant: return "circulant";
    case FgnMethod::sequential: return "sequential";
  }
  return "unknown";
}

// levels[k-1] = y_k and returns[k-1] = y_k - y_{k-1} for k = 1..n, with y_0 = 0.
struct SimOutput {
  std::vector<double> levels;
  std::vector<double> returns;
  LatentPath latent;
  SimSeeds seeds;
  ModelParams params;
  FgnMethod fgn_method = FgnMethod::none;
};

struct LatentSamplerOptions {
  // Paths up to this length are drawn from the exact Gaussian law.
  std::size_t dense_limit = 4096;
  // Truncation order of the autoregressive recursion used beyond dense_limit.
  std::size_t ar_order = 256;
};

// Sampler for the centered Gaussian log-volatility h_1..h_n.
//
// For n <= dense_limit the covariance matrix is factored once (it is banded with
// bandwidth ceil(T/dt) - 1, so the factor is exact and cheap); longer paths use the
// order-K autoregressive recursion with exact conditionals for the first K values.
// Construct once and call sample() repeatedly to amortize the factorization.
class LatentSampler {
 public:
  LatentSampler(std::size_t n, const ModelParams& p, LatentSamplerOptions opt = {})
      : n_(n), opt_(opt) {
    if (n == 0) throw domain_error("sample_log_volatility: n must be >= 1");
    validate(p);
    kernel_ = cascade_kernel(p, std::min(n - 1, std::max(cascade_support(p), opt.ar_order)));
    if (p.lambda == 0.0 || kernel_.gamma[0] == 0.0) {
      degenerate_ = true;
      return;
    }
    if (n <= opt.dense_limit) {
      const std::size_t bw = std::min(cascade_support(p), n - 1);
      SymmetricBand cov(n, bw);
      for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = (i > bw ? i - bw : 0); j <= i; ++j) cov(i, j) = kernel_.gamma[i - j];
      std::size_t bad_row = 0;
      double pivot = 0.0;
      auto chol = BandCholesky::factor(cov, &bad_row, &pivot);
      if (!chol) {
        // Smallest eigenvalue of the leading block that failed, for the report.
        const std::size_t m = std::min<std::size_t>(bad_row + 1, 2048);
        Eigen::MatrixXd lead = cov.to_dense().topLeftCorner(static_cast<Eigen::Index>(m),
                                                            static_cast<Eigen::Index>(m));
        const double ev = Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd>(lead, Eigen::EigenvaluesOnly)
                              .eigenvalues()
                              .minCoeff();
        throw not_psd_error("log-volatility covariance is not positive definite (smallest "
                            "eigenvalue " + std::to_string(ev) + ")",
                            bad_row, ev);
      }
      chol_ = std::move(*chol);
    } else {
      const std::size_t order = std::min(opt.ar_order, n - 1);
      ar_ = durbin_levinson(std::span<const double>(kernel_.gamma.data(), order + 1));
    }
  }

  std::size_t size() const noexcept { return n_; }
  double normalizer() const noexcept { return kernel_.c_norm; }

  LatentPath sample(std::uint64_t seed) const {
    LatentPath path;
    GaussianStream gauss(seed);
    if (degenerate_) {
      path.h.assign(n_, 0.0);
    } else if (chol_) {
      path.h = chol_->lower_multiply(gauss.draw(n_));
    } else {
      path.h.resize(n_);
      const std::size_t order = ar_->order();
      for (std::size_t k = 0; k < n_; ++k) {
        const std::size_t m = std::min(k, order);
        const auto a = ar_->coefficients(m);
        double mean = 0.0;
        for (std::size_t j = 1; j <= m; ++j) mean += a[j - 1] * path.h[k - j];
        path.h[k] = mean + ar_->prediction_sd(m) * gauss();
      }
    }
    path.m.resize(n_);
    for (std::size_t k = 0; k < n_; ++k) path.m[k] = kernel_.c_norm * std::exp(path.h[k]);
    return path;
  }

 private:
  std::size_t n_;
  LatentSamplerOptions opt_;
  CascadeKernel kernel_;
  bool degenerate_ = false;
  std::optional<BandCholesky> chol_;
  std::optional<ArRepresentation> ar_;
};

inline LatentPath sample_log_volatility(std::size_t n, const ModelParams& p, std::uint64_t seed,
                                        LatentSamplerOptions opt = {}) {
  return LatentSampler(n, p, opt).sample(seed);
}

struct FgnDraw {
  std::vector<double> values;
  FgnMethod method = FgnMethod::circulant;
};

// Exact sequential sampler for unit-variance fGn: each value is drawn from its
// Gaussian conditional given all previous ones (Durbin-Levinson run alongside).
inline std::vector<double> simulate_fgn_sequential(std::size_t n, double hurst,
                                                   std::uint64_t seed) {
  const FgnKernel kernel = fgn_kernel(hurst, n == 0 ? 0 : n - 1);
  GaussianStream gauss(seed);
  std::vector<double> x(n), a, prev;
  double v = 1.0;
  for (std::size_t k = 0; k < n; ++k) {
    if (k > 0) {
      // Extend the predictor from order k-1 to order k.
      prev = a;
      double num = kernel.beta[k];
      for (std::size_t j = 1; j < k; ++j) num -= prev[j - 1] * kernel.beta[k - j];
      const double kappa = num / v;
      a.resize(k);
      for (std::size_t j = 1; j < k; ++j) a[j - 1] = prev[j - 1] - kappa * prev[k - j - 1];
      a[k - 1] = kappa;
      v *= 1.0 - kappa * kappa;
    }
    double mean = 0.0;
    for (std::size_t j = 1; j <= k; ++j) mean += a[j - 1] * x[k - j];
    x[k] = mean + std::sqrt(v) * gauss();
  }
  return x;
}

// Sampler for unit-variance fGn of length n. Prefers circulant embedding of the
// covariance in a circulant of size 2(n-1); if the embedding has a negative eigenvalue
// (or `force_sequential`), falls back to the sequential conditional sampler.
class FgnSampler {
 public:
  FgnSampler(std::size_t n, double hurst, bool force_sequential = false) : n_(n), hurst_(hurst) {
    if (!(hurst > 0.0 && hurst < 1.0)) throw domain_error("simulate_fgn: H outside (0,1)");
    if (n == 0) throw domain_error("simulate_fgn: n must be >= 1");
    if (force_sequential) {
      method_ = FgnMethod::sequential;
      return;
    }
    if (n == 1) {
      method_ = FgnMethod::circulant;
      return;
    }
    const std::size_t m = 2 * (n - 1);
    std::vector<std::complex<double>> row(m);
    for (std::size_t j = 0; j < m; ++j)
      row[j] = fgn_covariance(static_cast<std::ptrdiff_t>(std::min(j, m - j)), hurst);
    const auto eig = fft::forward(std::move(row));
    double max_ev = 0.0;
    for (const auto& e : eig) max_ev = std::max(max_ev, e.real());
    scale_.resize(m);
    for (std::size_t k = 0; k < m; ++k) {
      double ev = eig[k].real();
      if (ev < 0.0) {
        if (ev < -1e-10 * max_ev) {
          method_ = FgnMethod::sequential;
          scale_.clear();
          return;
        }
        ev = 0.0;
      }
      scale_[k] = std::sqrt(ev / static_cast<double>(m));
    }
    method_ = FgnMethod::circulant;
  }

  FgnMethod method() const noexcept { return method_; }

  std::vector<double> sample(std::uint64_t seed) const {
    if (method_ == FgnMethod::sequential) return simulate_fgn_sequential(n_, hurst_, seed);
    GaussianStream gauss(seed);
    if (n_ == 1) return {gauss()};
    const std::size_t m = scale_.size();
    std::vector<std::complex<double>> z(m);
    for (std::size_t k = 0; k < m; ++k) {
      const double re = gauss();
      const double im = gauss();
      z[k] = {scale_[k] * re, scale_[k] * im};
    }
    const auto y = fft::forward(std::move(z));
    std::vector<double> out(n_);
    for (std::size_t i = 0; i < n_; ++i) out[i] = y[i].real();
    return out;
  }

 private:
  std::size_t n_;
  double hurst_;
  FgnMethod method_ = FgnMethod::circulant;
  std::vector<double> scale_;
};

inline FgnDraw simulate_fgn(std::size_t n, double hurst, std::uint64_t seed,
                            bool force_sequential = false) {
  FgnSampler s(n, hurst, force_sequential);
  return {s.sample(seed), s.method()};
}

// Reusable simulator of any model variant; caches the latent factorization and the
// fGn embedding so that ensembles pay for them once.
class Simulator {
 public:
  Simulator(std::size_t n, const ModelParams& p, LatentSamplerOptions opt = {})
      : n_(n), p_(p), latent_(n, p, opt) {
    if (p.variant == Variant::fractional) fgn_.emplace(n, p.hurst);
  }

  const ModelParams& params() const noexcept { return p_; }
  std::size_t size() const noexcept { return n_; }

  SimOutput run(std::uint64_t root_seed) const { return run(SimSeeds::from_root(root_seed)); }

  SimOutput run(SimSeeds seeds) const {
    SimOutput out;
    out.params = p_;
    out.seeds = seeds;
    out.latent = latent_.sample(seeds.latent);
    std::vector<double> eps;
    if (fgn_) {
      eps = fgn_->sample(seeds.innovation);
      out.fgn_method = fgn_->method();
    } else {
      eps = GaussianStream(seeds.innovation).draw(n_);
    }
    out.levels.resize(n_);
    out.returns.resize(n_);
    const double drift = p_.mu * p_.dt;
    const double phi = p_.variant == Variant::damped ? p_.phi : 1.0;
    double y = 0.0;
    for (std::size_t k = 0; k < n_; ++k) {
      const double dx = (phi - 1.0) * y + p_.sigma * std::sqrt(out.latent.m[k]) * eps[k] + drift;
      y += dx;
      out.levels[k] = y;
      out.returns[k] = dx;
    }
    return out;
  }

 private:
  std::size_t n_;
  ModelParams p_;
  LatentSampler latent_;
  std::optional<FgnSampler> fgn_;
};

inline void require_variant(const ModelParams& p, Variant v, const char* who) {
  validate(p);
  if (p.variant != v)
    throw domain_error(std::string(who) + ": expected " + std::string(to_string(v)) +
                       " parameters");
}

inline SimOutput simulate_mrw(std::size_t n, const ModelParams& p, std::uint64_t seed) {
  require_variant(p, Variant::standard, "simulate_mrw");
  return Simulator(n, p).run(seed);
}

inline SimOutput simulate_damped_mrw(std::size_t n, const ModelParams& p, std::uint64_t seed) {
  require_variant(p, Variant::damped, "simulate_damped_mrw");
  return Simulator(n, p).run(seed);
}

inline SimOutput simulate_fractional_mrw(std::size_t n, const ModelParams& p,
                                         std::uint64_t seed) {
  require_variant(p, Variant::fractional, "simulate_fractional_mrw");
  return Simulator(n, p).run(seed);
}

inline SimOutput simulate(std::size_t n, const ModelParams& p, std::uint64_t seed) {
  validate(p);
  return Simulator(n, p).run(seed);
}

// y'_k = y_k + amplitude sin(2 pi k dt / period + phase), k = 0..n-1.
inline std::vector<double> add_seasonal(std::span<const double> y, double amplitude,
                                        double period, double phase, double dt = 1.0) {
  if (!(period > 0.0)) throw domain_error("add_seasonal: period must be positive");
  std::vector<double> out(y.begin(), y.end());
  if (amplitude == 0.0) return out;
  const double w = 2.0 * std::numbers::pi * dt / period;
  for (std::size_t k = 0; k < out.size(); ++k)
    out[k] += amplitude * std::sin(w * static_cast<double>(k) + phase);
  return out;
}

// Number of initial samples to drop before computing stationary statistics of a
// damped path, ceil(10 / nu) in units of dt.
inline std::size_t damped_burn_in(const ModelParams& p) {
  return static_cast<std::size_t>(std::ceil(10.0 / (p.nu() * p.dt)));
}

}  // namespace mrw
