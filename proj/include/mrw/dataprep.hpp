#pragma once

// Ingestion of hourly spot prices and the daily / weekly series derived from them.

#include <algorithm>
#include <array>
#include <charconv>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <istream>
#include <map>
#include <numbers>
#include <optional>
#include <sstream>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "mrw/error.hpp"
#include "mrw/series.hpp"

namespace mrw {

inline constexpr double kWeeksPerYear = 52.1775;
inline constexpr double kDaysPerYear = 365.2425;
inline constexpr std::size_t kMinHoursPerDay = 12;

struct RejectedRecord {
  std::size_t line = 0;
  std::string reason;
};

enum class DailyMode { mean, max };

struct SinusoidFit {
  double amplitude = 0.0;
  double phase = 0.0;  // fit is amplitude * sin(2 pi w / period + phase), w = ISO week
  double period = kWeeksPerYear;
};

struct SeasonalProfile {
  std::array<double, 7> weekday_means{};  // ISO order, Monday first
  std::optional<std::vector<double>> weekofyear_means;  // index w - 1, NaN when absent
  std::optional<SinusoidFit> sinusoid;
  std::vector<std::string> warnings;
};

namespace detail {

inline std::string_view trim(std::string_view s) {
  while (!s.empty() && (s.front() == ' ' || s.front() == '\t')) s.remove_prefix(1);
  while (!s.empty() && (s.back() == ' ' || s.back() == '\t' || s.back() == '\r')) s.remove_suffix(1);
  return s;
}

inline bool parse_uint(std::string_view s, std::size_t len, int& out) {
  if (s.size() < len) return false;
  for (std::size_t i = 0; i < len; ++i)
    if (s[i] < '0' || s[i] > '9') return false;
  out = 0;
  for (std::size_t i = 0; i < len; ++i) out = out * 10 + (s[i] - '0');
  return true;
}

inline std::optional<double> parse_double(std::string_view s) {
  s = trim(s);
  if (!s.empty() && s.front() == '+') s.remove_prefix(1);
  double v = 0.0;
  const auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (ec != std::errc{} || ptr != s.data() + s.size() || !std::isfinite(v)) return std::nullopt;
  return v;
}

inline std::chrono::sys_days to_days(TimePoint t) { return std::chrono::floor<std::chrono::days>(t); }

inline unsigned iso_weekday(std::chrono::sys_days d) { return std::chrono::weekday{d}.iso_encoding(); }

// ISO week-numbering year and week (1..53).
inline std::pair<int, unsigned> iso_week(std::chrono::sys_days d) {
  using namespace std::chrono;
  const sys_days thursday = d + days{4 - static_cast<int>(iso_weekday(d))};
  const year y = year_month_day{thursday}.year();
  const sys_days jan1{y / January / 1};
  return {static_cast<int>(y), static_cast<unsigned>((thursday - jan1).count() / 7 + 1)};
}

inline std::chrono::sys_days iso_monday(std::chrono::sys_days d) {
  return d - std::chrono::days{iso_weekday(d) - 1};
}

}  // namespace detail

struct ParsedTimestamp {
  TimePoint utc;
  std::optional<int> offset_minutes;
};

// YYYY-MM-DD, optionally followed by 'T' or ' ' and hh:mm[:ss[.fff]], optionally
// followed by 'Z' or +hh:mm / -hh:mm. Timestamps with an offset are converted to UTC.
inline std::optional<ParsedTimestamp> parse_timestamp(std::string_view s) {
  using namespace std::chrono;
  s = detail::trim(s);
  int Y, M, D, h = 0, m = 0, sec = 0;
  if (s.size() < 10 || !detail::parse_uint(s, 4, Y) || s[4] != '-' ||
      !detail::parse_uint(s.substr(5), 2, M) || s[7] != '-' || !detail::parse_uint(s.substr(8), 2, D))
    return std::nullopt;
  const year_month_day ymd{year{Y}, month{static_cast<unsigned>(M)}, day{static_cast<unsigned>(D)}};
  if (!ymd.ok()) return std::nullopt;
  s.remove_prefix(10);
  if (!s.empty() && (s.front() == 'T' || s.front() == ' ')) {
    s.remove_prefix(1);
    if (s.size() < 5 || !detail::parse_uint(s, 2, h) || s[2] != ':' || !detail::parse_uint(s.substr(3), 2, m))
      return std::nullopt;
    s.remove_prefix(5);
    if (!s.empty() && s.front() == ':') {
      if (!detail::parse_uint(s.substr(1), 2, sec)) return std::nullopt;
      s.remove_prefix(3);
      if (!s.empty() && s.front() == '.') {
        s.remove_prefix(1);
        std::size_t k = 0;
        while (k < s.size() && s[k] >= '0' && s[k] <= '9') ++k;
        if (k == 0) return std::nullopt;
        s.remove_prefix(k);  // sub-second part is ignored
      }
    }
    if (h > 24 || m > 59 || sec > 60 || (h == 24 && (m != 0 || sec != 0))) return std::nullopt;
  }
  std::optional<int> offset;
  if (!s.empty()) {
    if (s == "Z") {
      offset = 0;
    } else if ((s.front() == '+' || s.front() == '-') && s.size() == 6 && s[3] == ':') {
      int oh, om;
      if (!detail::parse_uint(s.substr(1), 2, oh) || !detail::parse_uint(s.substr(4), 2, om) || oh > 23 || om > 59)
        return std::nullopt;
      offset = (s.front() == '-' ? -1 : 1) * (oh * 60 + om);
    } else {
      return std::nullopt;
    }
  }
  TimePoint t = sys_days{ymd} + hours{h} + minutes{m} + seconds{sec};
  if (offset) t -= minutes{*offset};
  return ParsedTimestamp{t, offset};
}

// ISO date (daily and coarser) or date-time with a 'Z' suffix.
inline std::string format_timestamp(TimePoint t, Resolution res) {
  using namespace std::chrono;
  const sys_days d = floor<days>(t);
  const year_month_day ymd{d};
  char buf[64];
  if (res != Resolution::hourly) {
    std::snprintf(buf, sizeof buf, "%04d-%02u-%02u", static_cast<int>(ymd.year()),
                  static_cast<unsigned>(ymd.month()), static_cast<unsigned>(ymd.day()));
  } else {
    const auto s = (t - d).count();
    std::snprintf(buf, sizeof buf, "%04d-%02u-%02uT%02lld:%02lld:%02lldZ", static_cast<int>(ymd.year()),
                  static_cast<unsigned>(ymd.month()), static_cast<unsigned>(ymd.day()),
                  static_cast<long long>(s / 3600), static_cast<long long>(s / 60 % 60),
                  static_cast<long long>(s % 60));
  }
  return buf;
}

// Hourly prices from CSV text with header `timestamp,price`. Records are sorted by
// time; missing hours between the first and last record are listed as gaps.
// Nonpositive prices are dropped and reported; duplicate timestamps and unparsable
// rows are hard errors carrying the line number.
inline SeriesFrame read_prices(std::istream& in, std::vector<RejectedRecord>* rejected = nullptr) {
  struct Rec {
    TimePoint t;
    double price;
    std::optional<int> offset;
    std::size_t line;
  };
  std::vector<Rec> recs;
  std::string raw;
  std::size_t line = 0;
  bool header = false, any_offset = false;
  while (std::getline(in, raw)) {
    ++line;
    std::string_view s = detail::trim(raw);
    if (line == 1 && s.size() >= 3 && s.substr(0, 3) == "\xEF\xBB\xBF") s.remove_prefix(3);
    if (s.empty()) continue;
    const auto comma = s.find(',');
    if (!header) {
      if (comma == std::string_view::npos || detail::trim(s.substr(0, comma)) != "timestamp" ||
          detail::trim(s.substr(comma + 1)) != "price")
        throw data_error("expected header `timestamp,price`", line);
      header = true;
      continue;
    }
    if (comma == std::string_view::npos || s.find(',', comma + 1) != std::string_view::npos)
      throw data_error("expected 2 comma-separated fields", line);
    const auto ts = parse_timestamp(s.substr(0, comma));
    if (!ts) throw data_error("unparsable timestamp '" + std::string(detail::trim(s.substr(0, comma))) + "'", line);
    const auto price = detail::parse_double(s.substr(comma + 1));
    if (!price) throw data_error("unparsable price '" + std::string(detail::trim(s.substr(comma + 1))) + "'", line);
    if (!(*price > 0.0)) {
      if (rejected) rejected->push_back({line, "nonpositive price " + std::string(detail::trim(s.substr(comma + 1)))});
      continue;
    }
    any_offset = any_offset || ts->offset_minutes.has_value();
    recs.push_back({ts->utc, *price, ts->offset_minutes, line});
  }
  if (recs.empty()) throw data_error("no records");
  std::stable_sort(recs.begin(), recs.end(), [](const Rec& a, const Rec& b) { return a.t < b.t; });

  SeriesFrame f;
  f.meta.resolution = Resolution::hourly;
  const std::chrono::seconds hour = std::chrono::hours(1);
  for (std::size_t i = 0; i < recs.size(); ++i) {
    if (i > 0) {
      const auto step = recs[i].t - recs[i - 1].t;
      if (step.count() == 0) {
        const auto [first, second] = std::minmax(recs[i - 1].line, recs[i].line);
        throw data_error("duplicate timestamp (also on line " + std::to_string(first) + ")", second);
      }
      if (step % hour != std::chrono::seconds::zero())
        throw data_error("timestamp is not on the hourly grid of the series", recs[i].line);
      for (auto t = recs[i - 1].t + hour; t < recs[i].t; t += hour) f.gaps.push_back(t);
    }
    f.timestamps.push_back(recs[i].t);
    f.values.push_back(recs[i].price);
    if (any_offset) f.utc_offset_minutes.push_back(recs[i].offset.value_or(0));
  }
  return f;
}

inline SeriesFrame load_prices(const std::string& path, std::vector<RejectedRecord>* rejected = nullptr) {
  std::ifstream in(path);
  if (!in) throw data_error("cannot open '" + path + "'");
  return read_prices(in, rejected);
}

// One value per calendar day (local wall-clock date when offsets are known) from the
// available hours. Days with a number of hours other than 24 are flagged; days without
// any hour are gaps.
inline SeriesFrame daily_aggregate(const SeriesFrame& hourly, DailyMode mode = DailyMode::mean) {
  using namespace std::chrono;
  if (hourly.meta.resolution != Resolution::hourly) throw domain_error("daily_aggregate: expected an hourly frame");
  SeriesFrame d;
  d.meta = hourly.meta;
  d.meta.resolution = Resolution::daily;
  if (hourly.size() == 0) return d;
  const bool local = !hourly.utc_offset_minutes.empty();
  std::map<sys_days, std::pair<double, std::size_t>> acc;
  for (std::size_t i = 0; i < hourly.size(); ++i) {
    TimePoint t = hourly.timestamps[i];
    if (local) t += minutes{hourly.utc_offset_minutes[i]};
    auto [it, fresh] = acc.try_emplace(detail::to_days(t), 0.0, 0);
    auto& [v, c] = it->second;
    const double x = hourly.values[i];
    v = mode == DailyMode::mean ? v + x : (fresh ? x : std::max(v, x));
    ++c;
  }
  sys_days prev = acc.begin()->first;
  for (const auto& [day, vc] : acc) {
    for (sys_days g = prev + days{1}; g < day; g += days{1}) d.gaps.push_back(g);
    prev = day;
    const auto [v, c] = vc;
    d.timestamps.push_back(day);
    d.values.push_back(mode == DailyMode::mean ? v / static_cast<double>(c) : v);
    if (c != 24)
      d.flags.push_back({day, std::to_string(c) + " hours" + (c < kMinHoursPerDay ? " (low coverage)" : "")});
  }
  return d;
}

// X_k = log P_k - mu k, with k counted in sampling steps from the first sample and
// mu = (log P_last - log P_first) / steps, the mean log-return of a contiguous series.
inline std::pair<SeriesFrame, double> log_detrend(const SeriesFrame& prices) {
  const std::size_t n = prices.size();
  if (n < 2) throw domain_error("log_detrend: need at least 2 samples");
  for (double p : prices.values)
    if (!(p > 0.0)) throw domain_error("log_detrend: prices must be positive");
  const auto step = prices.meta.resolution == Resolution::hourly  ? std::chrono::seconds(std::chrono::hours(1))
                    : prices.meta.resolution == Resolution::daily ? std::chrono::seconds(std::chrono::days(1))
                                                                  : std::chrono::seconds(std::chrono::weeks(1));
  std::vector<double> k(n);
  for (std::size_t i = 0; i < n; ++i)
    k[i] = static_cast<double>((prices.timestamps[i] - prices.timestamps[0]).count()) /
           static_cast<double>(step.count());
  double sum_diff = 0.0;
  for (std::size_t i = 1; i < n; ++i) sum_diff += std::log(prices.values[i]) - std::log(prices.values[i - 1]);
  const double mu = sum_diff / k[n - 1];
  SeriesFrame x = prices;
  for (std::size_t i = 0; i < n; ++i) x.values[i] = std::log(prices.values[i]) - mu * k[i];
  x.meta.log_transformed = true;
  x.meta.drift_removed = mu;
  return {std::move(x), mu};
}

// Subtracts the sample mean, so that a mean-reverting level fluctuates around zero.
inline std::pair<SeriesFrame, double> center_levels(const SeriesFrame& f) {
  if (f.size() == 0) throw domain_error("center_levels: empty series");
  double m = 0.0;
  for (double v : f.values) m += v;
  m /= static_cast<double>(f.size());
  SeriesFrame c = f;
  for (double& v : c.values) v -= m;
  return {std::move(c), m};
}

// Samples of a daily frame falling on ISO weekday `weekday` (1 = Monday), one per week.
// Weeks in which that day is missing become gaps.
inline SeriesFrame weekday_slice(const SeriesFrame& daily, int weekday) {
  using namespace std::chrono;
  if (weekday < 1 || weekday > 7) throw domain_error("weekday_slice: weekday must be 1..7");
  if (daily.meta.resolution != Resolution::daily) throw domain_error("weekday_slice: expected a daily frame");
  SeriesFrame w;
  w.meta = daily.meta;
  w.meta.resolution = Resolution::weekly;
  w.meta.weekday = weekday;
  std::optional<sys_days> prev;
  for (std::size_t i = 0; i < daily.size(); ++i) {
    const sys_days d = detail::to_days(daily.timestamps[i]);
    if (static_cast<int>(detail::iso_weekday(d)) != weekday) continue;
    if (prev)
      for (sys_days g = *prev + weeks{1}; g < d; g += weeks{1}) w.gaps.push_back(g);
    prev = d;
    w.timestamps.push_back(daily.timestamps[i]);
    w.values.push_back(daily.values[i]);
  }
  for (const auto& fl : daily.flags)
    if (static_cast<int>(detail::iso_weekday(detail::to_days(fl.when))) == weekday) w.flags.push_back(fl);
  return w;
}

// Means over ISO calendar weeks, stamped with the week's Monday. Weeks with fewer than
// seven available days are flagged; weeks with none are gaps.
inline SeriesFrame weekly_mean(const SeriesFrame& daily) {
  using namespace std::chrono;
  if (daily.meta.resolution != Resolution::daily) throw domain_error("weekly_mean: expected a daily frame");
  SeriesFrame w;
  w.meta = daily.meta;
  w.meta.resolution = Resolution::weekly;
  std::map<sys_days, std::pair<double, std::size_t>> acc;
  for (std::size_t i = 0; i < daily.size(); ++i) {
    auto& [s, c] = acc[detail::iso_monday(detail::to_days(daily.timestamps[i]))];
    s += daily.values[i];
    ++c;
  }
  std::optional<sys_days> prev;
  for (const auto& [monday, sc] : acc) {
    if (prev)
      for (sys_days g = *prev + weeks{1}; g < monday; g += weeks{1}) w.gaps.push_back(g);
    prev = monday;
    w.timestamps.push_back(monday);
    w.values.push_back(sc.first / static_cast<double>(sc.second));
    if (sc.second != 7) w.flags.push_back({monday, std::to_string(sc.second) + " of 7 days"});
  }
  return w;
}

// Weekday and ISO week-of-year conditional means; a one-year sinusoid plus constant
// is fitted by least squares to the week-of-year means.
inline SeasonalProfile seasonal_profile(const SeriesFrame& daily) {
  using namespace std::chrono;
  if (daily.meta.resolution != Resolution::daily) throw domain_error("seasonal_profile: expected a daily frame");
  if (daily.size() == 0) throw domain_error("seasonal_profile: empty series");
  SeasonalProfile prof;
  std::array<double, 7> wd_sum{};
  std::array<std::size_t, 7> wd_count{};
  std::vector<double> wk_sum(53, 0.0);
  std::vector<std::size_t> wk_count(53, 0);
  for (std::size_t i = 0; i < daily.size(); ++i) {
    const sys_days d = detail::to_days(daily.timestamps[i]);
    const auto wd = detail::iso_weekday(d) - 1;
    wd_sum[wd] += daily.values[i];
    ++wd_count[wd];
    const auto wk = detail::iso_week(d).second - 1;
    wk_sum[wk] += daily.values[i];
    ++wk_count[wk];
  }
  for (std::size_t k = 0; k < 7; ++k)
    prof.weekday_means[k] = wd_count[k] ? wd_sum[k] / static_cast<double>(wd_count[k]) : std::nan("");

  const auto span = detail::to_days(daily.timestamps.back()) - detail::to_days(daily.timestamps.front());
  if (static_cast<double>(span.count()) + 1.0 < 2.0 * kDaysPerYear) {
    prof.warnings.push_back("less than two years of data; week-of-year profile omitted");
    return prof;
  }
  std::vector<double> means(53, std::nan(""));
  // Normal equations for c + a sin(wt) + b cos(wt) over the available weeks.
  double S[3][3] = {}, r[3] = {};
  for (std::size_t k = 0; k < 53; ++k) {
    if (!wk_count[k]) continue;
    means[k] = wk_sum[k] / static_cast<double>(wk_count[k]);
    const double t = 2.0 * std::numbers::pi * static_cast<double>(k + 1) / kWeeksPerYear;
    const double basis[3] = {1.0, std::sin(t), std::cos(t)};
    for (int i = 0; i < 3; ++i) {
      r[i] += basis[i] * means[k];
      for (int j = 0; j < 3; ++j) S[i][j] += basis[i] * basis[j];
    }
  }
  prof.weekofyear_means = means;
  // Gaussian elimination on the 3x3 system.
  for (int c = 0; c < 3; ++c) {
    int piv = c;
    for (int i = c + 1; i < 3; ++i)
      if (std::abs(S[i][c]) > std::abs(S[piv][c])) piv = i;
    std::swap(S[c], S[piv]);
    std::swap(r[c], r[piv]);
    if (std::abs(S[c][c]) < 1e-12) {
      prof.warnings.push_back("too few weeks of the year to fit the annual sinusoid");
      return prof;
    }
    for (int i = c + 1; i < 3; ++i) {
      const double f = S[i][c] / S[c][c];
      for (int j = c; j < 3; ++j) S[i][j] -= f * S[c][j];
      r[i] -= f * r[c];
    }
  }
  double coef[3];
  for (int i = 2; i >= 0; --i) {
    double s = r[i];
    for (int j = i + 1; j < 3; ++j) s -= S[i][j] * coef[j];
    coef[i] = s / S[i][i];
  }
  prof.sinusoid = SinusoidFit{std::hypot(coef[1], coef[2]), std::atan2(coef[2], coef[1]), kWeeksPerYear};
  return prof;
}

// Shortest representation that round-trips.
inline std::string format_double(double v) {
  char buf[32];
  const auto r = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, r.ptr);
}

inline void write_series_csv(std::ostream& out, const SeriesFrame& f) {
  out << "timestamp,value\n";
  for (std::size_t i = 0; i < f.size(); ++i)
    out << format_timestamp(f.timestamps[i], f.meta.resolution) << ',' << format_double(f.values[i]) << '\n';
}

inline void write_gap_report(std::ostream& out, const SeriesFrame& f) {
  out << "missing\n";
  for (const auto& g : f.gaps) out << format_timestamp(g, f.meta.resolution) << '\n';
}

// CSV `timestamp,value`. Gaps go to a sidecar `<path>.gaps` with one missing timestamp
// per line; the sidecar is removed when the series has no gaps.
inline void save_series_csv(const std::string& path, const SeriesFrame& f) {
  {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw data_error("cannot write '" + path + "'");
    write_series_csv(out, f);
  }
  const std::string sidecar = path + ".gaps";
  if (f.has_gaps()) {
    std::ofstream out(sidecar, std::ios::binary);
    if (!out) throw data_error("cannot write '" + sidecar + "'");
    write_gap_report(out, f);
  } else {
    std::remove(sidecar.c_str());
  }
}

// Reads `timestamp,value` CSV written by save_series_csv (and its gap sidecar when
// present). The resolution is inferred from the smallest timestamp step.
inline SeriesFrame read_series_csv(std::istream& in) {
  SeriesFrame f;
  std::string raw;
  std::size_t line = 0;
  bool header = false;
  while (std::getline(in, raw)) {
    ++line;
    const std::string_view s = detail::trim(raw);
    if (s.empty() || s.front() == '#') continue;
    const auto comma = s.find(',');
    if (!header) {
      if (comma == std::string_view::npos || detail::trim(s.substr(0, comma)) != "timestamp")
        throw data_error("expected header `timestamp,value`", line);
      header = true;
      continue;
    }
    if (comma == std::string_view::npos) throw data_error("expected 2 comma-separated fields", line);
    const auto ts = parse_timestamp(s.substr(0, comma));
    const auto v = detail::parse_double(s.substr(comma + 1));
    if (!ts) throw data_error("unparsable timestamp", line);
    if (!v) throw data_error("unparsable value", line);
    if (!f.timestamps.empty() && ts->utc <= f.timestamps.back())
      throw data_error("timestamps must be strictly increasing", line);
    f.timestamps.push_back(ts->utc);
    f.values.push_back(*v);
  }
  if (f.values.empty()) throw data_error("no records");
  auto step = std::chrono::seconds::max();
  for (std::size_t i = 1; i < f.size(); ++i) step = std::min(step, f.timestamps[i] - f.timestamps[i - 1]);
  f.meta.resolution = step <= std::chrono::hours(1)  ? Resolution::hourly
                      : step < std::chrono::days(7) ? Resolution::daily
                                                    : Resolution::weekly;
  return f;
}

inline SeriesFrame load_series_csv(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw data_error("cannot open '" + path + "'");
  SeriesFrame f = read_series_csv(in);
  std::ifstream gaps(path + ".gaps");
  std::string raw;
  std::size_t line = 0;
  while (gaps && std::getline(gaps, raw)) {
    ++line;
    const auto s = detail::trim(raw);
    if (s.empty() || s == "missing") continue;
    const auto ts = parse_timestamp(s);
    if (!ts) throw data_error("unparsable gap timestamp in '" + path + ".gaps'", line);
    f.gaps.push_back(ts->utc);
  }
  return f;
}

}  // namespace mrw
