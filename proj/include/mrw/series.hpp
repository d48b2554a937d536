#pragma once

#include <chrono>
#include <cstddef>
#include <optional>
#include <string>
#include <vector>

#include "mrw/error.hpp"

namespace mrw {

using TimePoint = std::chrono::sys_seconds;

enum class Resolution { hourly, daily, weekly };

inline std::string to_string(Resolution r) {
  switch (r) {
    case Resolution::hourly: return "hourly";
    case Resolution::daily: return "daily";
    case Resolution::weekly: return "weekly";
  }
  return "unknown";
}

struct SeriesFlag {
  TimePoint when;
  std::string reason;
};

struct SeriesMeta {
  Resolution resolution = Resolution::daily;
  std::optional<int> weekday;  // ISO weekday 1 = Monday .. 7 = Sunday
  bool log_transformed = false;
  double drift_removed = 0.0;  // mu-hat per sampling step, 0 when not detrended
};

// Timestamped univariate series. Missing samples are never imputed: they are listed
// in `gaps`. `flags` annotates samples built from incomplete data (partial days/weeks).
struct SeriesFrame {
  std::vector<TimePoint> timestamps;
  std::vector<double> values;
  SeriesMeta meta;
  std::vector<TimePoint> gaps;
  std::vector<SeriesFlag> flags;
  // Per-sample UTC offset of the source wall clock, in minutes; empty when the input
  // timestamps carried no offset.
  std::vector<int> utc_offset_minutes;

  std::size_t size() const noexcept { return values.size(); }
  bool has_gaps() const noexcept { return !gaps.empty(); }
};

// Frame with synthetic consecutive timestamps, for in-memory or simulated series.
inline SeriesFrame make_frame(std::vector<double> values, Resolution res = Resolution::weekly) {
  SeriesFrame f;
  const auto step = res == Resolution::hourly  ? std::chrono::seconds(std::chrono::hours(1))
                    : res == Resolution::daily ? std::chrono::seconds(std::chrono::days(1))
                                               : std::chrono::seconds(std::chrono::weeks(1));
  f.timestamps.reserve(values.size());
  for (std::size_t i = 0; i < values.size(); ++i)
    f.timestamps.push_back(TimePoint{} + step * static_cast<long>(i));
  f.values = std::move(values);
  f.meta.resolution = res;
  return f;
}

inline void require_contiguous(const SeriesFrame& f, const char* who) {
  if (f.has_gaps())
    throw data_error(std::string(who) + ": series has " + std::to_string(f.gaps.size()) +
                     " gap(s); the likelihood requires a contiguous series");
}

inline std::vector<double> first_differences(const std::vector<double>& v) {
  std::vector<double> d;
  if (v.size() < 2) return d;
  d.resize(v.size() - 1);
  for (std::size_t i = 1; i < v.size(); ++i) d[i - 1] = v[i] - v[i - 1];
  return d;
}

}  // namespace mrw
