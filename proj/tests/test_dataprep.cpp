#include <gtest/gtest.h>

#include <cmath>
#include <filesystem>
#include <fstream>
#include <numbers>
#include <sstream>

#include "mrw/dataprep.hpp"
#include "mrw/rng.hpp"
#include "oracles.hpp"

namespace {

using namespace std::chrono;
using mrw::Resolution;
using mrw::SeriesFrame;

sys_days date(int y, unsigned m, unsigned d) { return sys_days{year{y} / month{m} / day{d}}; }

std::string hourly_csv(sys_days start, std::size_t hours, double price = 10.0) {
  std::ostringstream s;
  s << "timestamp,price\n";
  for (std::size_t h = 0; h < hours; ++h)
    s << mrw::format_timestamp(start + std::chrono::hours(h), Resolution::hourly) << ',' << price << '\n';
  return s.str();
}

SeriesFrame read(const std::string& text, std::vector<mrw::RejectedRecord>* rej = nullptr) {
  std::istringstream in(text);
  return mrw::read_prices(in, rej);
}

// Daily frame from values, starting at `start`.
SeriesFrame daily(std::vector<double> v, sys_days start = date(2001, 1, 1)) {
  SeriesFrame f;
  f.meta.resolution = Resolution::daily;
  for (std::size_t i = 0; i < v.size(); ++i) f.timestamps.push_back(start + days(i));
  f.values = std::move(v);
  return f;
}

std::size_t error_line(const std::string& text) {
  try {
    read(text);
  } catch (const mrw::data_error& e) {
    return e.line();
  }
  return 0;
}

// --- timestamps -------------------------------------------------------------------

TEST(Timestamp, ParsesIsoForms) {
  const auto base = date(2011, 8, 27);
  EXPECT_EQ(mrw::parse_timestamp("2011-08-27")->utc, base);
  EXPECT_EQ(mrw::parse_timestamp("2011-08-27T13:00")->utc, base + 13h);
  EXPECT_EQ(mrw::parse_timestamp("2011-08-27 13:05:09")->utc, base + 13h + 5min + 9s);
  EXPECT_EQ(mrw::parse_timestamp("2011-08-27T13:00:00.250Z")->utc, base + 13h);
  const auto cest = mrw::parse_timestamp("2011-08-27T13:00:00+02:00");
  EXPECT_EQ(cest->utc, base + 11h);
  EXPECT_EQ(cest->offset_minutes, 120);
  EXPECT_EQ(mrw::parse_timestamp("2011-08-27T00:30-01:30")->utc, base + 2h);
  EXPECT_EQ(mrw::parse_timestamp("2011-08-27T24:00")->utc, base + days(1));
  EXPECT_FALSE(mrw::parse_timestamp("2011-02-29").has_value());
  EXPECT_FALSE(mrw::parse_timestamp("2011-8-27").has_value());
  EXPECT_FALSE(mrw::parse_timestamp("2011-08-27T25:00").has_value());
  EXPECT_FALSE(mrw::parse_timestamp("2011-08-27T13:00+2").has_value());
  EXPECT_FALSE(mrw::parse_timestamp("27.08.2011").has_value());
}

TEST(Timestamp, IsoWeekConvention) {
  EXPECT_EQ(mrw::detail::iso_week(date(2021, 1, 3)), (std::pair<int, unsigned>{2020, 53}));
  EXPECT_EQ(mrw::detail::iso_week(date(2021, 1, 4)), (std::pair<int, unsigned>{2021, 1}));
  EXPECT_EQ(mrw::detail::iso_week(date(2008, 12, 29)), (std::pair<int, unsigned>{2009, 1}));
  EXPECT_EQ(mrw::detail::iso_weekday(date(1992, 5, 4)), 1u);  // a Monday
  EXPECT_EQ(mrw::detail::iso_weekday(date(2011, 8, 28)), 7u);
}

// --- load_prices ------------------------------------------------------------------

TEST(LoadPrices, EmptyInputHasNoRecords) {
  for (const std::string text : {"", "timestamp,price\n", "timestamp,price\n\n"}) {
    try {
      read(text);
      FAIL() << "expected data_error";
    } catch (const mrw::data_error& e) {
      EXPECT_NE(std::string(e.what()).find("no records"), std::string::npos);
    }
  }
}

TEST(LoadPrices, ConsecutiveHours) {
  const auto f = read(hourly_csv(date(2010, 3, 1), 48));
  EXPECT_EQ(f.size(), 48u);
  EXPECT_FALSE(f.has_gaps());
  EXPECT_EQ(f.meta.resolution, Resolution::hourly);
  EXPECT_EQ(f.timestamps.back() - f.timestamps.front(), 47h);
}

TEST(LoadPrices, MissingHourIsAGap) {
  auto text = hourly_csv(date(2010, 3, 1), 48);
  const auto pos = text.find("2010-03-01T05:00:00Z");
  text.erase(pos, text.find('\n', pos) - pos + 1);
  const auto f = read(text);
  EXPECT_EQ(f.size(), 47u);
  ASSERT_EQ(f.gaps.size(), 1u);
  EXPECT_EQ(f.gaps[0], date(2010, 3, 1) + 5h);
}

TEST(LoadPrices, NonpositivePriceRejectedWithReport) {
  const std::string text =
      "timestamp,price\n2010-03-01T00:00Z,5\n2010-03-01T01:00Z,0\n2010-03-01T02:00Z,-1.5\n2010-03-01T03:00Z,7\n";
  std::vector<mrw::RejectedRecord> rej;
  const auto f = read(text, &rej);
  EXPECT_EQ(f.values, (std::vector<double>{5, 7}));
  ASSERT_EQ(rej.size(), 2u);
  EXPECT_EQ(rej[0].line, 3u);
  EXPECT_EQ(rej[1].line, 4u);
  EXPECT_EQ(f.gaps.size(), 2u);
}

TEST(LoadPrices, BadRowsReportLineNumbers) {
  EXPECT_EQ(error_line("timestamp,price\n2010-03-01T00:00Z,5\n2010-03-01T01:00Z,abc\n"), 3u);
  EXPECT_EQ(error_line("timestamp,price\n2010-03-01T00:00Z,5\n\nyesterday,4\n"), 4u);
  EXPECT_EQ(error_line("timestamp,price\n2010-03-01T00:00Z,5,6\n"), 2u);
  EXPECT_EQ(error_line("time,price\n"), 1u);
  EXPECT_EQ(error_line("timestamp,price\n2010-03-01T00:00Z,5\n2010-03-01T01:30Z,5\n"), 3u);
  // Duplicates are reported on the later line, whatever the file order.
  EXPECT_EQ(error_line("timestamp,price\n2010-03-01T01:00Z,5\n2010-03-01T00:00Z,5\n2010-03-01T01:00Z,6\n"), 4u);
  EXPECT_THROW(mrw::load_prices("/nonexistent/prices.csv"), mrw::data_error);
}

TEST(LoadPrices, SortsAndHandlesCrlfAndBom) {
  const std::string text = "\xEF\xBB\xBFtimestamp,price\r\n2010-03-01T02:00Z,3\r\n2010-03-01T00:00Z,1\r\n2010-03-01T01:00Z,2\r\n";
  const auto f = read(text);
  EXPECT_EQ(f.values, (std::vector<double>{1, 2, 3}));
  EXPECT_FALSE(f.has_gaps());
}

// --- daily_aggregate --------------------------------------------------------------

TEST(DailyAggregate, ConstantPrice) {
  const auto h = read(hourly_csv(date(2010, 3, 1), 24 * 5, 42.5));
  for (auto mode : {mrw::DailyMode::mean, mrw::DailyMode::max}) {
    const auto d = mrw::daily_aggregate(h, mode);
    ASSERT_EQ(d.size(), 5u);
    for (double v : d.values) EXPECT_DOUBLE_EQ(v, 42.5);
    EXPECT_TRUE(d.flags.empty());
    EXPECT_EQ(d.meta.resolution, Resolution::daily);
  }
}

TEST(DailyAggregate, MeanAndMaxOfRamp) {
  std::ostringstream s;
  s << "timestamp,price\n";
  for (int k = 1; k <= 24; ++k)
    s << mrw::format_timestamp(date(2010, 3, 1) + hours(k - 1), Resolution::hourly) << ',' << k << '\n';
  const auto h = read(s.str());
  EXPECT_DOUBLE_EQ(mrw::daily_aggregate(h, mrw::DailyMode::mean).values[0], 12.5);
  EXPECT_DOUBLE_EQ(mrw::daily_aggregate(h, mrw::DailyMode::max).values[0], 24.0);
}

TEST(DailyAggregate, MaxDominatesMean) {
  std::ostringstream s;
  s << "timestamp,price\n";
  mrw::GaussianStream g(3);
  for (std::size_t k = 0; k < 24 * 30; ++k)
    s << mrw::format_timestamp(date(2010, 3, 1) + hours(k), Resolution::hourly) << ',' << std::exp(g()) << '\n';
  const auto h = read(s.str());
  const auto mean = mrw::daily_aggregate(h, mrw::DailyMode::mean), max = mrw::daily_aggregate(h, mrw::DailyMode::max);
  ASSERT_EQ(mean.size(), max.size());
  for (std::size_t i = 0; i < mean.size(); ++i) EXPECT_GE(max.values[i], mean.values[i]);
}

TEST(DailyAggregate, IncompleteAndMissingDays) {
  // Day 1: 24 hours; day 2: 6 hours; day 3: none; day 4: 24 hours.
  std::ostringstream s;
  s << "timestamp,price\n";
  auto put = [&](sys_days d, int from, int to) {
    for (int k = from; k < to; ++k) s << mrw::format_timestamp(d + hours(k), Resolution::hourly) << ",1\n";
  };
  put(date(2010, 3, 1), 0, 24);
  put(date(2010, 3, 2), 0, 6);
  put(date(2010, 3, 4), 0, 24);
  const auto d = mrw::daily_aggregate(read(s.str()));
  EXPECT_EQ(d.size(), 3u);
  ASSERT_EQ(d.gaps.size(), 1u);
  EXPECT_EQ(d.gaps[0], date(2010, 3, 3));
  ASSERT_EQ(d.flags.size(), 1u);
  EXPECT_EQ(d.flags[0].when, date(2010, 3, 2));
  EXPECT_NE(d.flags[0].reason.find("low coverage"), std::string::npos);
}

TEST(DailyAggregate, DaylightSavingDaysUseLocalDates) {
  // 2010-10-31 in CET/CEST has 25 local hours: 00:00..02:59 at +02:00, then 02:00.. at +01:00.
  std::ostringstream s;
  s << "timestamp,price\n";
  const sys_days d = date(2010, 10, 31);
  for (int k = 0; k <= 2; ++k) s << "2010-10-31T0" << k << ":00+02:00,2\n";
  for (int k = 2; k < 24; ++k) s << "2010-10-31T" << (k < 10 ? "0" : "") << k << ":00+01:00,2\n";
  s << "2010-11-01T00:00+01:00,4\n";
  const auto h = read(s.str());
  EXPECT_FALSE(h.has_gaps());
  EXPECT_EQ(h.timestamps.front(), d - 2h);
  const auto daily = mrw::daily_aggregate(h);
  ASSERT_EQ(daily.size(), 2u);
  EXPECT_EQ(daily.timestamps[0], d);
  ASSERT_EQ(daily.flags.size(), 2u);
  EXPECT_EQ(daily.flags[0].reason, "25 hours");
  EXPECT_DOUBLE_EQ(daily.values[0], 2.0);
}

// --- log_detrend ------------------------------------------------------------------

TEST(LogDetrend, ExponentialGrowthIsConstant) {
  const double m = 0.013;
  std::vector<double> p(400);
  for (std::size_t k = 0; k < p.size(); ++k) p[k] = 30.0 * std::exp(m * static_cast<double>(k));
  const auto [x, mu] = mrw::log_detrend(daily(p));
  EXPECT_NEAR(mu, m, 1e-14);
  for (double v : x.values) EXPECT_NEAR(v, std::log(30.0), 1e-11);
  EXPECT_TRUE(x.meta.log_transformed);
  EXPECT_EQ(x.meta.drift_removed, mu);
}

TEST(LogDetrend, ZeroMeanIncrementsAndExactRecovery) {
  mrw::GaussianStream g(4);
  std::vector<double> p(1000);
  double lp = std::log(200.0);
  for (double& v : p) {
    lp += 0.002 + 0.12 * g();
    v = std::exp(lp);
  }
  const auto [x, mu] = mrw::log_detrend(daily(p));
  double sum = 0.0;
  for (std::size_t k = 1; k < x.size(); ++k) sum += x.values[k] - x.values[k - 1];
  EXPECT_NEAR(sum / static_cast<double>(x.size() - 1), 0.0, 1e-12);
  // Cumulative returns plus mu k give back log P.
  double acc = x.values[0];
  for (std::size_t k = 1; k < x.size(); ++k) {
    acc += x.values[k] - x.values[k - 1];
    EXPECT_NEAR(acc + mu * static_cast<double>(k), std::log(p[k]), 1e-12 * std::abs(std::log(p[k])) + 1e-12);
  }
}

TEST(LogDetrend, FixtureReturnVolatility) {
  // Synthetic daily series calibrated to a daily log-return sd of 0.12.
  mrw::GaussianStream g(5);
  std::vector<double> p(7000);
  double lp = std::log(150.0);
  for (double& v : p) {
    lp += 0.12 * g();
    v = std::exp(lp);
  }
  const auto [x, mu] = mrw::log_detrend(daily(p));
  std::vector<double> r;
  for (std::size_t k = 1; k < x.size(); ++k) r.push_back(x.values[k] - x.values[k - 1]);
  const double m = oracle::mean(r);
  double ss = 0.0;
  for (double v : r) ss += (v - m) * (v - m);
  EXPECT_NEAR(std::sqrt(ss / static_cast<double>(r.size() - 1)), 0.12, 0.005);
}

TEST(LogDetrend, RejectsNonpositive) {
  EXPECT_THROW(mrw::log_detrend(daily({1.0, 0.0, 2.0})), mrw::domain_error);
  EXPECT_THROW(mrw::log_detrend(daily({1.0})), mrw::domain_error);
}

TEST(LogDetrend, GapsCountInTimeSteps) {
  auto f = daily({1.0, std::exp(0.1), std::exp(0.2), std::exp(0.3)});
  f.timestamps[3] += days(1);  // last sample one day later: k = 0, 1, 2, 4
  f.gaps.push_back(f.timestamps[2] + days(1));
  const auto [x, mu] = mrw::log_detrend(f);
  EXPECT_NEAR(mu, 0.3 / 4.0, 1e-15);
  EXPECT_NEAR(x.values[3], 0.3 - mu * 4.0, 1e-15);
}

TEST(CenterLevels, RemovesMean) {
  const auto [c, m] = mrw::center_levels(daily({1.0, 2.0, 6.0}));
  EXPECT_DOUBLE_EQ(m, 3.0);
  EXPECT_EQ(c.values, (std::vector<double>{-2.0, -1.0, 3.0}));
  EXPECT_THROW(mrw::center_levels(SeriesFrame{}), mrw::domain_error);
}

// --- weekday_slice / weekly_mean --------------------------------------------------

TEST(WeekdaySlice, PartitionOfDailySeries) {
  std::vector<double> v(28);
  for (std::size_t k = 0; k < v.size(); ++k) v[k] = static_cast<double>(k);
  const auto d = daily(v, date(2010, 3, 3));  // a Wednesday
  std::vector<std::pair<sys_days, double>> all;
  for (int wd = 1; wd <= 7; ++wd) {
    const auto w = mrw::weekday_slice(d, wd);
    EXPECT_EQ(w.size(), 4u);
    EXPECT_EQ(w.meta.weekday, wd);
    EXPECT_EQ(w.meta.resolution, Resolution::weekly);
    EXPECT_FALSE(w.has_gaps());
    for (std::size_t i = 0; i < w.size(); ++i) {
      const auto day = floor<days>(w.timestamps[i]);
      EXPECT_EQ(static_cast<int>(mrw::detail::iso_weekday(day)), wd);
      all.emplace_back(day, w.values[i]);
    }
  }
  std::sort(all.begin(), all.end());
  ASSERT_EQ(all.size(), d.size());
  for (std::size_t i = 0; i < all.size(); ++i) {
    EXPECT_EQ(all[i].first, floor<days>(d.timestamps[i]));
    EXPECT_EQ(all[i].second, d.values[i]);
  }
  EXPECT_THROW(mrw::weekday_slice(d, 0), mrw::domain_error);
  EXPECT_THROW(mrw::weekday_slice(d, 8), mrw::domain_error);
}

TEST(WeekdaySlice, MissingOccurrencesBecomeGaps) {
  auto d = daily(std::vector<double>(21, 1.0), date(2010, 3, 1));  // Monday
  d.timestamps.erase(d.timestamps.begin() + 7);
  d.values.erase(d.values.begin() + 7);
  const auto w = mrw::weekday_slice(d, 1);
  EXPECT_EQ(w.size(), 2u);
  ASSERT_EQ(w.gaps.size(), 1u);
  EXPECT_EQ(w.gaps[0], date(2010, 3, 8));
}

TEST(WeeklyMean, Examples) {
  const auto c = mrw::weekly_mean(daily(std::vector<double>(21, 2.5), date(2010, 3, 1)));
  EXPECT_EQ(c.values, (std::vector<double>{2.5, 2.5, 2.5}));
  EXPECT_TRUE(c.flags.empty());

  std::vector<double> alt(7);
  for (std::size_t k = 0; k < 7; ++k) alt[k] = k % 2 ? -1.0 : 1.0;
  EXPECT_NEAR(mrw::weekly_mean(daily(alt, date(2010, 3, 1))).values[0], 1.0 / 7.0, 1e-15);

  std::vector<double> ramp(70);
  for (std::size_t k = 0; k < ramp.size(); ++k) ramp[k] = 0.5 * static_cast<double>(k) - 3.0;
  const auto r = mrw::weekly_mean(daily(ramp, date(2010, 3, 1)));
  for (std::size_t i = 0; i < r.size(); ++i)
    EXPECT_NEAR(r.values[i], 0.5 * (7.0 * static_cast<double>(i) + 3.0) - 3.0, 1e-12);
}

TEST(WeeklyMean, PartialWeeksFlaggedAndEmptyWeeksAreGaps) {
  auto d = daily(std::vector<double>(10, 1.0), date(2010, 3, 3));  // Wed..Fri next week
  d.timestamps.push_back(date(2010, 3, 22));
  d.values.push_back(1.0);
  const auto w = mrw::weekly_mean(d);
  EXPECT_EQ(w.size(), 3u);
  EXPECT_EQ(w.timestamps[0], date(2010, 3, 1));
  ASSERT_EQ(w.gaps.size(), 1u);
  EXPECT_EQ(w.gaps[0], date(2010, 3, 15));
  EXPECT_EQ(w.flags.size(), 3u);
  EXPECT_EQ(w.flags[0].reason, "5 of 7 days");
}

// --- seasonal_profile -------------------------------------------------------------

TEST(SeasonalProfile, RecoversAnnualSinusoid) {
  mrw::GaussianStream g(6);
  const std::size_t n = 10 * 365;
  std::vector<double> v(n);
  const sys_days start = date(1995, 1, 1);
  for (std::size_t k = 0; k < n; ++k) {
    const double t = static_cast<double>((start + days(k)).time_since_epoch().count());
    v[k] = 0.25 * std::sin(2.0 * std::numbers::pi * t / mrw::kDaysPerYear + 1.0) + 0.1 * g();
  }
  const auto p = mrw::seasonal_profile(daily(v, start));
  ASSERT_TRUE(p.sinusoid.has_value());
  EXPECT_NEAR(p.sinusoid->amplitude, 0.25, 0.03);
  EXPECT_EQ(p.sinusoid->period, mrw::kWeeksPerYear);
  ASSERT_TRUE(p.weekofyear_means.has_value());
  EXPECT_EQ(p.weekofyear_means->size(), 53u);
  EXPECT_TRUE(p.warnings.empty());
}

TEST(SeasonalProfile, ConstantSeries) {
  const auto p = mrw::seasonal_profile(daily(std::vector<double>(800, 1.7)));
  for (double m : p.weekday_means) EXPECT_NEAR(m, 1.7, 1e-12);
  for (double m : *p.weekofyear_means) {
    if (!std::isnan(m)) {
      EXPECT_NEAR(m, 1.7, 1e-12);
    }
  }
  EXPECT_TRUE(std::isnan(p.weekofyear_means->back()));  // no ISO week 53 in 2001-2003
  EXPECT_LT(p.sinusoid->amplitude, 1e-10);
}

TEST(SeasonalProfile, WeekendStep) {
  mrw::GaussianStream g(7);
  const sys_days start = date(2003, 6, 2);  // Monday
  std::vector<double> v(3 * 365);
  for (std::size_t k = 0; k < v.size(); ++k) v[k] = (k % 7 >= 5 ? -0.15 : 0.0) + 0.03 * g();
  const auto p = mrw::seasonal_profile(daily(v, start));
  for (std::size_t d = 0; d < 7; ++d) EXPECT_NEAR(p.weekday_means[d], d >= 5 ? -0.15 : 0.0, 0.01) << d;
}

TEST(SeasonalProfile, ShortSpanOmitsWeekOfYear) {
  const auto p = mrw::seasonal_profile(daily(std::vector<double>(500, 0.0)));
  EXPECT_FALSE(p.weekofyear_means.has_value());
  EXPECT_FALSE(p.sinusoid.has_value());
  ASSERT_EQ(p.warnings.size(), 1u);
}

// --- series files -----------------------------------------------------------------

TEST(SeriesCsv, RoundTripAndGapSidecar) {
  const auto dir = std::filesystem::path(::testing::TempDir()) / "mrw_dataprep";
  std::filesystem::create_directories(dir);
  const auto path = (dir / "series.csv").string();
  auto f = daily({0.1, -2.5e-7, 1.0 / 3.0, 42.0}, date(2010, 3, 1));
  f.timestamps[3] += days(1);
  f.gaps.push_back(date(2010, 3, 4));
  mrw::save_series_csv(path, f);
  const auto back = mrw::load_series_csv(path);
  EXPECT_EQ(back.values, f.values);
  EXPECT_EQ(back.timestamps, f.timestamps);
  EXPECT_EQ(back.gaps, f.gaps);
  EXPECT_EQ(back.meta.resolution, Resolution::daily);

  std::ifstream in(path), gaps(path + ".gaps");
  std::stringstream a, b;
  a << in.rdbuf();
  b << gaps.rdbuf();
  EXPECT_EQ(a.str(), "timestamp,value\n2010-03-01,0.1\n2010-03-02,-2.5e-07\n2010-03-03,0.3333333333333333\n2010-03-05,42\n");
  EXPECT_EQ(b.str(), "missing\n2010-03-04\n");

  // Rewriting without gaps removes a stale sidecar; output is byte-identical across runs.
  f.gaps.clear();
  mrw::save_series_csv(path, f);
  EXPECT_FALSE(std::filesystem::exists(path + ".gaps"));
  std::stringstream c;
  c << std::ifstream(path).rdbuf();
  EXPECT_EQ(c.str(), a.str());
}

TEST(Pipeline, DeterministicOutput) {
  std::ostringstream s;
  s << "timestamp,price\n";
  mrw::GaussianStream g(8);
  for (std::size_t k = 0; k < 24 * 60; ++k)
    s << mrw::format_timestamp(date(2010, 3, 1) + hours(k), Resolution::hourly) << ',' << 30.0 * std::exp(0.2 * g()) << '\n';
  auto run = [&] {
    const auto [x, mu] = mrw::log_detrend(mrw::daily_aggregate(read(s.str())));
    std::ostringstream out;
    mrw::write_series_csv(out, mrw::weekday_slice(x, 2));
    return out.str();
  };
  EXPECT_EQ(run(), run());
}

}  // namespace
