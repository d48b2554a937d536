#pragma once

// Diagnostics: wavelet variograms, periodograms, autocorrelations, log-log slopes and
// simulated ensemble bands.

#include <algorithm>
#include <array>
#include <cmath>
#include <complex>
#include <cstdint>
#include <map>
#include <numbers>
#include <optional>
#include <span>
#include <vector>

#include "mrw/error.hpp"
#include "mrw/fft.hpp"
#include "mrw/model.hpp"
#include "mrw/rng.hpp"
#include "mrw/series.hpp"
#include "mrw/simulate.hpp"

namespace mrw {

// Half-width of the truncated wavelet and of the excluded boundary, in units of a.
inline constexpr double kWaveletCutoff = 4.0;

struct VariogramCurve {
  std::vector<double> scales;
  std::vector<double> V;
  std::vector<std::size_t> counts;

  std::size_t size() const noexcept { return scales.size(); }
};

struct Periodogram {
  std::vector<double> freqs;  // cycles per unit of time
  std::vector<double> power;
};

inline constexpr std::array<double, 4> kBandProbabilities{1.0 / 40.0, 1.0 / 8.0, 7.0 / 8.0,
                                                           39.0 / 40.0};
inline constexpr std::size_t kMinEnsembleSize = 40;

struct EnsembleBand {
  std::vector<double> scales;
  std::vector<double> mean;
  std::map<double, std::vector<double>> quantiles;
  std::size_t n_reps = 0;
};

struct SeasonalInjection {
  double amplitude = 0.0;
  double period = 52.1775;  // one year in weeks
  double phase = 0.0;
};

namespace detail {

inline std::size_t wavelet_half_width(double a) {
  return static_cast<std::size_t>(std::ceil(kWaveletCutoff * a));
}

// Taps a^{-1/2} psi(j / a), j = -J..J, psi(u) = C u exp(-u^2 / 2) with unit L2 norm.
inline std::vector<double> dog_filter(double a) {
  const std::size_t J = wavelet_half_width(a);
  const double c = std::sqrt(2.0 / std::sqrt(std::numbers::pi));
  std::vector<double> taps(2 * J + 1, 0.0);
  for (std::size_t i = 1; i <= J; ++i) {
    const double u = static_cast<double>(i) / a;
    const double v = c * u * std::exp(-0.5 * u * u) / std::sqrt(a);
    taps[J + i] = v;
    taps[J - i] = -v;
  }
  return taps;
}

inline std::size_t next_pow2(std::size_t n) {
  std::size_t m = 1;
  while (m < n) m <<= 1;
  return m;
}

inline void check_finite(std::span<const double> x, const char* who) {
  for (double v : x)
    if (!std::isfinite(v)) throw domain_error(std::string(who) + ": non-finite input");
}

// Contiguous runs of a frame, split wherever the step between timestamps exceeds the
// smallest observed step.
inline std::vector<std::span<const double>> contiguous_runs(const SeriesFrame& f) {
  std::vector<std::span<const double>> runs;
  const std::size_t n = f.size();
  if (n == 0) return runs;
  if (f.timestamps.size() != n) throw domain_error("frame: timestamps and values differ in length");
  auto step = std::chrono::seconds::max();
  for (std::size_t i = 1; i < n; ++i) step = std::min(step, f.timestamps[i] - f.timestamps[i - 1]);
  std::size_t start = 0;
  for (std::size_t i = 1; i <= n; ++i) {
    if (i == n || f.timestamps[i] - f.timestamps[i - 1] > step) {
      runs.emplace_back(f.values.data() + start, i - start);
      start = i;
    }
  }
  return runs;
}

}  // namespace detail

// Wavelet coefficients W(t, a) for the interior t = J..n-1-J, J = ceil(4a). Empty when
// the series is shorter than 8a.
inline std::vector<double> wavelet_transform(std::span<const double> x, double a) {
  if (!(a >= 2.0)) throw domain_error("wavelet_transform: scale must be at least 2 samples");
  const std::size_t n = x.size();
  if (static_cast<double>(n) < 8.0 * a) return {};
  const std::size_t J = detail::wavelet_half_width(a);
  if (n <= 2 * J) return {};
  const auto taps = detail::dog_filter(a);
  const std::size_t m = n - 2 * J;
  std::vector<double> w(m, 0.0);

  if (J <= 64) {
    for (std::size_t t = 0; t < m; ++t) {
      double s = 0.0;
      for (std::size_t j = 0; j < taps.size(); ++j) s += taps[j] * x[t + j];
      w[t] = s;
    }
    return w;
  }
  // Correlation through the FFT: w_t = sum_j taps_j x_{t+j}.
  const std::size_t L = detail::next_pow2(n + taps.size());
  std::vector<std::complex<double>> fx(L), ft(L);
  for (std::size_t i = 0; i < n; ++i) fx[i] = x[i];
  for (std::size_t j = 0; j < taps.size(); ++j) ft[(L - j) % L] = taps[j];
  fx = fft::forward(std::move(fx));
  ft = fft::forward(std::move(ft));
  for (std::size_t k = 0; k < L; ++k) fx[k] *= ft[k];
  fx = fft::backward(std::move(fx));
  for (std::size_t t = 0; t < m; ++t) w[t] = fx[t].real() / static_cast<double>(L);
  return w;
}

// 2, 4, 8, ... up to n / 8.
inline std::vector<double> dyadic_scales(std::size_t n) {
  std::vector<double> s;
  for (double a = 2.0; a <= static_cast<double>(n) / 8.0; a *= 2.0) s.push_back(a);
  return s;
}

// `count` log-spaced scales from lo to hi inclusive.
inline std::vector<double> log_scales(double lo, double hi, std::size_t count) {
  if (!(lo >= 2.0) || !(hi > lo) || count < 2) throw domain_error("log_scales: need 2 <= lo < hi, count >= 2");
  std::vector<double> s(count);
  const double r = std::log(hi / lo) / static_cast<double>(count - 1);
  for (std::size_t i = 0; i < count; ++i) s[i] = lo * std::exp(r * static_cast<double>(i));
  s.back() = hi;
  return s;
}

// V(a) = mean of squared interior coefficients. Scales without any valid coefficient
// are omitted.
inline VariogramCurve wavelet_variogram(std::span<const std::span<const double>> runs,
                                        std::span<const double> scales) {
  for (std::size_t i = 1; i < scales.size(); ++i)
    if (!(scales[i] > scales[i - 1])) throw domain_error("wavelet_variogram: scales must increase");
  VariogramCurve v;
  for (double a : scales) {
    double sum = 0.0;
    std::size_t count = 0;
    for (const auto& r : runs) {
      for (double w : wavelet_transform(r, a)) sum += w * w;
      count += r.size() >= 8.0 * a && r.size() > 2 * detail::wavelet_half_width(a)
                   ? r.size() - 2 * detail::wavelet_half_width(a)
                   : 0;
    }
    if (count == 0) continue;
    v.scales.push_back(a);
    v.V.push_back(sum / static_cast<double>(count));
    v.counts.push_back(count);
  }
  return v;
}

inline VariogramCurve wavelet_variogram(std::span<const double> x, std::span<const double> scales) {
  detail::check_finite(x, "wavelet_variogram");
  const std::array<std::span<const double>, 1> runs{x};
  return wavelet_variogram(std::span<const std::span<const double>>(runs), scales);
}

inline VariogramCurve wavelet_variogram(std::span<const double> x) {
  return wavelet_variogram(x, dyadic_scales(x.size()));
}

// Gap-aware version: coefficients are pooled over the contiguous runs of the frame.
inline VariogramCurve wavelet_variogram(const SeriesFrame& f, std::span<const double> scales) {
  detail::check_finite(f.values, "wavelet_variogram");
  const auto runs = detail::contiguous_runs(f);
  return wavelet_variogram(std::span<const std::span<const double>>(runs), scales);
}

// One-sided periodogram of the mean-removed series at f_k = k / (n dt), k = 1..n/2,
// scaled so that the powers sum to the biased sample variance.
inline Periodogram periodogram(std::span<const double> x, double dt = 1.0) {
  const std::size_t n = x.size();
  if (n < 16) throw domain_error("periodogram: need at least 16 samples");
  if (!(dt > 0.0)) throw domain_error("periodogram: dt must be positive");
  detail::check_finite(x, "periodogram");
  double mean = 0.0;
  for (double v : x) mean += v;
  mean /= static_cast<double>(n);
  std::vector<double> centered(n);
  for (std::size_t i = 0; i < n; ++i) centered[i] = x[i] - mean;
  const auto X = fft::forward_real(centered);
  Periodogram p;
  const double nn = static_cast<double>(n);
  for (std::size_t k = 1; k <= n / 2; ++k) {
    const double w = (2 * k == n) ? 1.0 : 2.0;
    p.freqs.push_back(static_cast<double>(k) / (nn * dt));
    p.power.push_back(w * std::norm(X[k]) / (nn * nn));
  }
  return p;
}

// Averages power over log-spaced frequency bins; each bin reports the geometric mean
// of its frequencies. Empty bins are dropped.
inline Periodogram log_binned(const Periodogram& p, std::size_t bins_per_decade = 10) {
  if (bins_per_decade == 0) throw domain_error("log_binned: bins_per_decade must be positive");
  Periodogram out;
  if (p.freqs.empty()) return out;
  const double lo = std::log10(p.freqs.front());
  const double width = 1.0 / static_cast<double>(bins_per_decade);
  std::size_t i = 0;
  while (i < p.freqs.size()) {
    const auto bin = static_cast<long>(std::floor((std::log10(p.freqs[i]) - lo) / width + 1e-12));
    double lf = 0.0, pw = 0.0;
    std::size_t c = 0;
    while (i < p.freqs.size() &&
           static_cast<long>(std::floor((std::log10(p.freqs[i]) - lo) / width + 1e-12)) == bin) {
      lf += std::log(p.freqs[i]);
      pw += p.power[i];
      ++c;
      ++i;
    }
    out.freqs.push_back(std::exp(lf / static_cast<double>(c)));
    out.power.push_back(pw / static_cast<double>(c));
  }
  return out;
}

// Biased sample autocorrelation at lags 0..max_lag.
inline std::vector<double> acf(std::span<const double> x, std::size_t max_lag) {
  const std::size_t n = x.size();
  if (n < 4 || max_lag > n / 4) throw domain_error("acf: max_lag must not exceed n / 4");
  detail::check_finite(x, "acf");
  double mean = 0.0;
  for (double v : x) mean += v;
  mean /= static_cast<double>(n);
  std::vector<double> c(n);
  for (std::size_t i = 0; i < n; ++i) c[i] = x[i] - mean;
  double c0 = 0.0;
  for (double v : c) c0 += v * v;
  std::vector<double> r(max_lag + 1, 0.0);
  if (c0 == 0.0) throw domain_error("acf: constant series");
  for (std::size_t k = 0; k <= max_lag; ++k) {
    double s = 0.0;
    for (std::size_t t = 0; t + k < n; ++t) s += c[t] * c[t + k];
    r[k] = s / c0;
  }
  return r;
}

inline std::vector<double> abs_acf(std::span<const double> x, std::size_t max_lag) {
  std::vector<double> a(x.size());
  std::transform(x.begin(), x.end(), a.begin(), [](double v) { return std::abs(v); });
  return acf(a, max_lag);
}

// Uncentered magnitude correlation mean(|x_t| |x_{t+k}|) / mean(x_t^2), k = 0..max_lag.
// For an MRW it decays as k^(-lambda^2/4) for k well below T; the centered ACF does not.
inline std::vector<double> abs_moment_correlation(std::span<const double> x, std::size_t max_lag) {
  const std::size_t n = x.size();
  if (max_lag == 0 || max_lag > n / 4) throw domain_error("abs_moment_correlation: need 0 < max_lag <= n/4");
  detail::check_finite(x, "abs_moment_correlation");
  double m2 = 0.0;
  for (double v : x) m2 += v * v;
  m2 /= static_cast<double>(n);
  if (!(m2 > 0.0)) throw domain_error("abs_moment_correlation: series is identically zero");
  std::vector<double> r(max_lag + 1);
  for (std::size_t k = 0; k <= max_lag; ++k) {
    double s = 0.0;
    for (std::size_t i = 0; i + k < n; ++i) s += std::abs(x[i]) * std::abs(x[i + k]);
    r[k] = s / static_cast<double>(n - k) / m2;
  }
  return r;
}

// Least-squares slope of log y on log x.
inline double loglog_slope(std::span<const double> x, std::span<const double> y) {
  if (x.size() != y.size()) throw domain_error("loglog_slope: size mismatch");
  if (x.size() < 3) throw domain_error("loglog_slope: need at least 3 points");
  double sx = 0.0, sy = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    if (!(x[i] > 0.0) || !(y[i] > 0.0)) throw domain_error("loglog_slope: values must be positive");
    sx += std::log(x[i]);
    sy += std::log(y[i]);
  }
  const double m = static_cast<double>(x.size());
  sx /= m;
  sy /= m;
  double sxy = 0.0, sxx = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    const double dx = std::log(x[i]) - sx;
    sxy += dx * (std::log(y[i]) - sy);
    sxx += dx * dx;
  }
  if (!(sxx > 0.0)) throw domain_error("loglog_slope: degenerate abscissae");
  return sxy / sxx;
}

// Slope of log V on log a over scales in [lo, hi].
inline double variogram_slope(const VariogramCurve& v, double lo, double hi) {
  std::vector<double> a, V;
  for (std::size_t i = 0; i < v.size(); ++i)
    if (v.scales[i] >= lo && v.scales[i] <= hi) {
      a.push_back(v.scales[i]);
      V.push_back(v.V[i]);
    }
  if (a.size() < 3) throw domain_error("variogram_slope: fewer than 3 scales in range");
  return loglog_slope(a, V);
}

// H = (slope - 1) / 2.
inline double hurst_slope(const VariogramCurve& v, double lo, double hi) {
  return (variogram_slope(v, lo, hi) - 1.0) / 2.0;
}

// Slopes between consecutive points, reported at the geometric mid-scale.
inline std::vector<std::pair<double, double>> local_slopes(std::span<const double> x,
                                                           std::span<const double> y) {
  if (x.size() != y.size()) throw domain_error("local_slopes: size mismatch");
  std::vector<std::pair<double, double>> out;
  for (std::size_t i = 1; i < x.size(); ++i)
    out.emplace_back(std::sqrt(x[i] * x[i - 1]),
                     std::log(y[i] / y[i - 1]) / std::log(x[i] / x[i - 1]));
  return out;
}

// Sample quantile, linear interpolation between order statistics (Hyndman-Fan type 7).
inline double quantile_sorted(std::span<const double> sorted, double p) {
  if (sorted.empty()) throw domain_error("quantile: empty sample");
  const double h = (static_cast<double>(sorted.size()) - 1.0) * p;
  const auto lo = static_cast<std::size_t>(std::floor(h));
  const std::size_t hi = std::min(lo + 1, sorted.size() - 1);
  return sorted[lo] + (h - static_cast<double>(lo)) * (sorted[hi] - sorted[lo]);
}

// Variogram band over simulated level paths, one path per seed. Damped paths start
// from the stationary regime (a burn-in is simulated and dropped). The reduction sorts
// each scale's sample first, so the band does not depend on the order of the seeds.
inline EnsembleBand ensemble_band(const ModelParams& p, std::size_t n,
                                  std::span<const std::uint64_t> path_seeds,
                                  std::span<const double> scales,
                                  const std::optional<SeasonalInjection>& seasonal = std::nullopt) {
  if (path_seeds.size() < kMinEnsembleSize)
    throw domain_error("ensemble_band: need at least 40 replicates for the 1/40 quantiles");
  validate(p);
  const std::size_t burn = p.variant == Variant::damped ? damped_burn_in(p) : 0;
  const Simulator sim(n + burn, p);
  std::vector<std::vector<double>> per_scale;
  std::vector<double> used_scales;
  for (std::size_t r = 0; r < path_seeds.size(); ++r) {
    auto path = sim.run(path_seeds[r]).levels;
    std::vector<double> levels(path.begin() + static_cast<std::ptrdiff_t>(burn), path.end());
    if (seasonal) levels = add_seasonal(levels, seasonal->amplitude, seasonal->period, seasonal->phase, p.dt);
    const auto v = wavelet_variogram(levels, scales);
    if (r == 0) {
      used_scales = v.scales;
      per_scale.assign(v.size(), std::vector<double>(path_seeds.size()));
    }
    for (std::size_t i = 0; i < v.size(); ++i) per_scale[i][r] = v.V[i];
  }
  EnsembleBand band;
  band.scales = used_scales;
  band.n_reps = path_seeds.size();
  for (double q : kBandProbabilities) band.quantiles[q].resize(used_scales.size());
  for (std::size_t i = 0; i < used_scales.size(); ++i) {
    auto& s = per_scale[i];
    std::sort(s.begin(), s.end());
    double sum = 0.0;
    for (double v : s) sum += v;
    band.mean.push_back(sum / static_cast<double>(s.size()));
    for (double q : kBandProbabilities) band.quantiles[q][i] = quantile_sorted(s, q);
  }
  return band;
}

inline std::vector<std::uint64_t> ensemble_seeds(std::uint64_t root, std::size_t n_reps) {
  std::vector<std::uint64_t> s(n_reps);
  for (std::size_t r = 0; r < n_reps; ++r) s[r] = derive_seed(root, kPathStreamBase + r);
  return s;
}

inline EnsembleBand ensemble_band(const ModelParams& p, std::size_t n, std::size_t n_reps,
                                  std::span<const double> scales, std::uint64_t root_seed,
                                  const std::optional<SeasonalInjection>& seasonal = std::nullopt) {
  if (n_reps < kMinEnsembleSize)
    throw domain_error("ensemble_band: need at least 40 replicates for the 1/40 quantiles");
  const auto seeds = ensemble_seeds(root_seed, n_reps);
  return ensemble_band(p, n, seeds, scales, seasonal);
}

}  // namespace mrw
