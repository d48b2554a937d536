#pragma once

// Maximum-likelihood fitting of the MRW variants.
//
// Each parameter is searched on an unbounded coordinate
//   u = logit((g(theta) - g(lo)) / (g(hi) - g(lo))),
// g = log for lambda, sigma, T and the relaxation time 1/nu, g = identity for phi and H.
// The search runs Nelder-Mead from a moment-based start and from rows of a fixed
// Latin-hypercube design over the box.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <numeric>
#include <optional>
#include <random>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "mrw/error.hpp"
#include "mrw/likelihood.hpp"
#include "mrw/model.hpp"
#include "mrw/optimize.hpp"
#include "mrw/rng.hpp"
#include "mrw/series.hpp"

namespace mrw {

enum class FitStatus { ok, boundary, no_converge };

inline std::string_view to_string(FitStatus s) {
  switch (s) {
    case FitStatus::ok: return "ok";
    case FitStatus::boundary: return "boundary";
    case FitStatus::no_converge: return "no_converge";
  }
  return "unknown";
}

enum class DampingCoordinate { phi, relaxation };

using Interval = std::pair<double, double>;

// Boxes in natural units; unset entries take the defaults listed in ParameterMap.
struct FitBounds {
  std::optional<Interval> lambda, sigma, t_corr, relaxation, hurst;
};

struct FitConfig {
  std::size_t truncation = kDefaultTruncation;
  std::size_t n_starts = 5;
  // Per start.
  std::size_t max_evals = 1500;
  std::uint64_t seed = 0;
  FitBounds bounds;
  DampingCoordinate damping = DampingCoordinate::phi;
  double dt = 1.0;
  // Size of the Latin-hypercube design the non-moment starts are taken from.
  std::size_t design_size = 16;
  NelderMeadOptions optimizer{.max_evals = 1500, .f_tol = 1e-6, .x_tol = 1e-3, .initial_step = 0.5, .restarts = 1};
  // Inner mode search; `initial` is managed by the fit. A decrement of 1e-8 moves the
  // log-likelihood by about 5e-9.
  LaplaceOptions laplace{.max_iterations = 200, .decrement_tolerance = 1e-8, .initial = {}};
};

struct StartRecord {
  ModelParams start;
  ModelParams end;
  double loglik = -std::numeric_limits<double>::infinity();
  std::size_t evals = 0;
  bool converged = false;
};

struct FitResult {
  ModelParams theta_hat;
  double loglik = -std::numeric_limits<double>::infinity();
  std::vector<StartRecord> starts;
  FitStatus status = FitStatus::no_converge;
  std::vector<std::string> warnings;
  std::size_t n = 0;
  std::size_t truncation = 0;
  // Normalized box coordinates of theta_hat, in [0, 1].
  std::vector<double> box_position;
};

inline constexpr std::size_t kShortSeriesWarning = 100;
inline constexpr double kBoundaryMargin = 1e-3;

// Mean first difference per unit time.
inline double drift_estimate(std::span<const double> levels, double dt = 1.0) {
  if (levels.size() < 2) throw domain_error("drift_estimate: need at least 2 values");
  if (!(dt > 0.0)) throw domain_error("drift_estimate: dt must be positive");
  return (levels.back() - levels.front()) / (static_cast<double>(levels.size() - 1) * dt);
}

namespace detail {

struct Coordinate {
  Interval box;
  bool log_scale = false;

  double g(double v) const { return log_scale ? std::log(v) : v; }
  double g_inv(double v) const { return log_scale ? std::exp(v) : v; }

  double to_unit(double v) const {
    return (g(v) - g(box.first)) / (g(box.second) - g(box.first));
  }
  double from_unit(double s) const {
    return g_inv(g(box.first) + s * (g(box.second) - g(box.first)));
  }
};

inline double logistic(double u) {
  u = std::clamp(u, -30.0, 30.0);
  return 1.0 / (1.0 + std::exp(-u));
}

inline double logit(double s) {
  s = std::clamp(s, 1e-12, 1.0 - 1e-12);
  return std::log(s / (1.0 - s));
}

// Parameter layout: lambda, sigma, T, then phi / relaxation time / H for the damped and
// fractional variants.
class ParameterMap {
 public:
  ParameterMap(Variant v, std::size_t n, const FitConfig& cfg) : variant_(v), damping_(cfg.damping), dt_(cfg.dt) {
    if (!(cfg.dt > 0.0)) throw domain_error("fit: dt must be positive");
    const double nd = static_cast<double>(n) * cfg.dt;
    const FitBounds& b = cfg.bounds;
    coords_.push_back({b.lambda.value_or(Interval{0.05, 1.5}), true});
    coords_.push_back({b.sigma.value_or(Interval{1e-3, 5.0}), true});
    coords_.push_back({b.t_corr.value_or(Interval{2.0 * cfg.dt, std::max(4.0 * nd, 4.0 * cfg.dt)}), true});
    if (v == Variant::damped) {
      const Interval relax = b.relaxation.value_or(Interval{cfg.dt, std::max(10.0 * nd, 2.0 * cfg.dt)});
      if (!(relax.first >= cfg.dt)) throw domain_error("fit: relaxation-time bounds must be >= dt");
      if (damping_ == DampingCoordinate::phi)
        coords_.push_back({{1.0 - cfg.dt / relax.first, 1.0 - cfg.dt / relax.second}, false});
      else
        coords_.push_back({relax, true});
    } else if (v == Variant::fractional) {
      coords_.push_back({b.hurst.value_or(Interval{0.05, 0.95}), false});
    }
    for (const auto& c : coords_) {
      if (!(c.box.first < c.box.second) || !std::isfinite(c.box.first) || !std::isfinite(c.box.second))
        throw domain_error("fit: empty or invalid parameter bounds");
      if (c.log_scale && !(c.box.first > 0.0)) throw domain_error("fit: bounds must be positive");
    }
    if (coords_[2].box.first < cfg.dt) throw domain_error("fit: T bounds must be >= dt");
    if (v == Variant::fractional && !(coords_[3].box.first > 0.0 && coords_[3].box.second < 1.0))
      throw domain_error("fit: H bounds must lie inside (0, 1)");
  }

  std::size_t dim() const noexcept { return coords_.size(); }

  ModelParams from_unit(std::span<const double> s) const {
    ModelParams p;
    p.variant = variant_;
    p.dt = dt_;
    p.lambda = coords_[0].from_unit(s[0]);
    p.sigma = coords_[1].from_unit(s[1]);
    p.t_corr = std::max(coords_[2].from_unit(s[2]), dt_);
    if (variant_ == Variant::damped) {
      const double v = coords_[3].from_unit(s[3]);
      p.phi = damping_ == DampingCoordinate::phi ? v : 1.0 - dt_ / v;
      p.phi = std::clamp(p.phi, std::numeric_limits<double>::min(), 1.0 - 1e-15);
    } else if (variant_ == Variant::fractional) {
      p.hurst = coords_[3].from_unit(s[3]);
    }
    return p;
  }

  std::vector<double> to_unit(const ModelParams& p) const {
    std::vector<double> s(dim());
    s[0] = coords_[0].to_unit(p.lambda);
    s[1] = coords_[1].to_unit(p.sigma);
    s[2] = coords_[2].to_unit(p.t_corr);
    if (variant_ == Variant::damped)
      s[3] = coords_[3].to_unit(damping_ == DampingCoordinate::phi ? p.phi : p.relaxation_time());
    else if (variant_ == Variant::fractional)
      s[3] = coords_[3].to_unit(p.hurst);
    return s;
  }

  ModelParams from_search(std::span<const double> u) const {
    std::vector<double> s(u.size());
    for (std::size_t i = 0; i < u.size(); ++i) s[i] = logistic(u[i]);
    return from_unit(s);
  }

  std::vector<double> to_search(const ModelParams& p) const {
    auto s = to_unit(p);
    for (double& v : s) v = logit(std::clamp(v, 0.0, 1.0));
    return s;
  }

  // Projects a natural-unit value into the box interior.
  double clamp_into(std::size_t i, double v) const {
    const double s = std::clamp(coords_[i].to_unit(v), 0.02, 0.98);
    return coords_[i].from_unit(s);
  }

 private:
  Variant variant_;
  DampingCoordinate damping_;
  double dt_;
  std::vector<Coordinate> coords_;
};

inline double excess_kurtosis_lambda2(std::span<const double> e, double t_ratio) {
  double m2 = 0.0, m4 = 0.0;
  for (double v : e) {
    m2 += v * v;
    m4 += v * v * v * v;
  }
  const double ne = static_cast<double>(e.size());
  m2 /= ne;
  m4 /= ne;
  // E[x^4] / E[x^2]^2 = 3 exp(lambda^2 log(T/dt)) for conditionally Gaussian returns.
  const double gamma0 = m4 > 0.0 && m2 > 0.0 ? std::log(std::max(m4 / (3.0 * m2 * m2), 1.0)) : 0.0;
  return gamma0 / std::log(std::max(t_ratio, 2.0));
}

// Start built from sample moments of the data.
inline ModelParams moment_start(std::span<const double> data, Variant v, const ParameterMap& map, double dt) {
  const std::size_t n = data.size();
  ModelParams p;
  p.variant = v;
  p.dt = dt;
  p.t_corr = map.clamp_into(2, std::max(2.0 * dt, static_cast<double>(n) * dt / 8.0));
  std::vector<double> e(data.begin(), data.end());
  if (v == Variant::damped) {
    double sxy = 0.0, sxx = 0.0;
    for (std::size_t k = 1; k < n; ++k) {
      sxy += data[k] * data[k - 1];
      sxx += data[k - 1] * data[k - 1];
    }
    const double phi = sxx > 0.0 ? std::clamp(sxy / sxx, 0.05, 0.995) : 0.5;
    e = damped_residual_transform(data, phi);
    p.phi = phi;
    std::vector<double> s = map.to_unit(p);
    s[3] = std::clamp(s[3], 0.02, 0.98);
    p.phi = map.from_unit(s).phi;
  } else if (v == Variant::fractional) {
    double c1 = 0.0, c0 = 0.0;
    for (std::size_t k = 0; k < n; ++k) {
      c0 += data[k] * data[k];
      if (k + 1 < n) c1 += data[k] * data[k + 1];
    }
    const double rho = c0 > 0.0 ? std::clamp(c1 / c0, -0.45, 0.45) : 0.0;
    p.hurst = map.clamp_into(3, 0.5 * (std::log2(1.0 + rho) + 1.0));
  }
  double m2 = 0.0;
  for (double x : e) m2 += x * x;
  p.sigma = map.clamp_into(1, std::sqrt(std::max(m2 / static_cast<double>(n), 1e-300)));
  p.lambda = map.clamp_into(0, std::sqrt(std::max(excess_kurtosis_lambda2(e, p.t_ratio()), 0.01)));
  return p;
}

// Latin-hypercube design in [0,1]^d: each coordinate visits every stratum once.
inline std::vector<std::vector<double>> latin_hypercube(std::size_t rows, std::size_t d, std::uint64_t seed) {
  std::mt19937_64 gen(seed);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  std::vector<std::vector<double>> design(rows, std::vector<double>(d));
  std::vector<std::size_t> perm(rows);
  for (std::size_t k = 0; k < d; ++k) {
    std::iota(perm.begin(), perm.end(), 0);
    std::shuffle(perm.begin(), perm.end(), gen);
    for (std::size_t i = 0; i < rows; ++i)
      design[i][k] = (static_cast<double>(perm[i]) + u(gen)) / static_cast<double>(rows);
  }
  return design;
}

inline bool better(const StartRecord& a, const StartRecord& b) {
  const double tol = 1e-8 * std::max(1.0, std::abs(b.loglik));
  if (a.loglik > b.loglik + tol) return true;
  if (a.loglik < b.loglik - tol) return false;
  if (a.end.lambda != b.end.lambda) return a.end.lambda < b.end.lambda;
  if (a.end.sigma != b.end.sigma) return a.end.sigma < b.end.sigma;
  if (a.end.t_corr != b.end.t_corr) return a.end.t_corr < b.end.t_corr;
  if (a.end.phi != b.end.phi) return a.end.phi < b.end.phi;
  return a.end.hurst < b.end.hurst;
}

}  // namespace detail

// Fits `variant` to drift-free data: returns for the standard and fractional variants,
// levels (y_0 = 0) for the damped one.
inline FitResult fit(std::span<const double> data, Variant variant, const FitConfig& cfg = {}) {
  if (cfg.n_starts == 0) throw domain_error("fit: n_starts must be >= 1");
  if (data.size() < 2) throw domain_error("fit: need at least 2 observations");
  for (double v : data)
    if (!std::isfinite(v)) throw domain_error("fit: data contain non-finite values");

  const std::size_t n = data.size();
  const detail::ParameterMap map(variant, n, cfg);
  FitResult out;
  out.n = n;
  out.truncation = cfg.truncation;
  if (n < kShortSeriesWarning)
    out.warnings.push_back("short series (n = " + std::to_string(n) + " < " +
                           std::to_string(kShortSeriesWarning) + "); estimates are unreliable");

  std::vector<ModelParams> starts{detail::moment_start(data, variant, map, cfg.dt)};
  if (cfg.n_starts > 1) {
    const std::size_t rows = std::max(cfg.design_size, cfg.n_starts - 1);
    const auto design = detail::latin_hypercube(rows, map.dim(), derive_seed(cfg.seed, 0x5EED));
    for (std::size_t i = 0; i + 1 < cfg.n_starts; ++i) starts.push_back(map.from_unit(design[i]));
  }

  NelderMeadOptions nm = cfg.optimizer;
  nm.max_evals = cfg.max_evals;
  for (const ModelParams& start : starts) {
    std::vector<double> warm;
    double warm_value = -std::numeric_limits<double>::infinity();
    auto objective = [&](const std::vector<double>& u) {
      const ModelParams p = map.from_search(u);
      LaplaceOptions opt = cfg.laplace;
      opt.initial = warm.size() == n ? std::span<const double>(warm) : std::span<const double>();
      try {
        LikelihoodResult r = model_loglik(data, p, cfg.truncation, opt);
        if (!r.converged || !std::isfinite(r.loglik)) return std::numeric_limits<double>::infinity();
        // Keep the mode of the best point seen so far as the next starting guess.
        if (r.loglik > warm_value || warm.size() != n) {
          warm_value = r.loglik;
          warm = std::move(r.h_star);
        }
        return -r.loglik;
      } catch (const domain_error&) {
        return std::numeric_limits<double>::infinity();
      }
    };
    const NelderMeadResult r = nelder_mead(objective, map.to_search(start), nm);
    StartRecord rec;
    rec.start = start;
    rec.end = map.from_search(r.x);
    rec.loglik = std::isfinite(r.value) ? -r.value : -std::numeric_limits<double>::infinity();
    rec.evals = r.evals;
    rec.converged = r.converged;
    out.starts.push_back(rec);
  }

  const StartRecord* best = nullptr;
  for (const auto& s : out.starts)
    if (s.converged && (!best || detail::better(s, *best))) best = &s;
  if (best) {
    out.status = FitStatus::ok;
  } else {
    out.status = FitStatus::no_converge;
    out.warnings.push_back("no start converged; reporting the best point found");
    for (const auto& s : out.starts)
      if (!best || detail::better(s, *best)) best = &s;
  }
  out.theta_hat = best->end;
  out.loglik = best->loglik;
  out.box_position = map.to_unit(out.theta_hat);
  if (out.status == FitStatus::ok)
    for (double s : out.box_position)
      if (s < kBoundaryMargin || s > 1.0 - kBoundaryMargin) out.status = FitStatus::boundary;
  if (out.status == FitStatus::boundary) out.warnings.push_back("estimate on the boundary of the search box");
  return out;
}

// Frame values are levels; the standard and fractional variants use their differences.
inline FitResult fit(const SeriesFrame& z, Variant variant, const FitConfig& cfg = {}) {
  require_contiguous(z, "fit");
  if (variant == Variant::damped) return fit(std::span<const double>(z.values), variant, cfg);
  const auto d = first_differences(z.values);
  return fit(std::span<const double>(d), variant, cfg);
}

}  // namespace mrw
