#include <gtest/gtest.h>

#include <cmath>
#include <random>

#include "mrw/model.hpp"

namespace {

using mrw::ModelParams;

TEST(CascadeCovariance, ZeroAtAndBeyondCutoff) {
  const auto p = ModelParams::standard(0.7, 0.18, 26.0);
  EXPECT_GT(mrw::cascade_covariance(24, p), 0.0);
  for (int lag = 25; lag < 40; ++lag) EXPECT_EQ(mrw::cascade_covariance(lag, p), 0.0) << lag;
  EXPECT_EQ(mrw::cascade_support(p), 25u);
}

TEST(CascadeCovariance, LagZeroWithTableParameters) {
  const auto p = ModelParams::standard(0.7, 0.18, 26.0);
  EXPECT_NEAR(mrw::cascade_covariance(0, p), 0.49 * std::log(26.0), 1e-14);
  EXPECT_NEAR(mrw::cascade_covariance(0, p), 1.5965, 5e-5);
}

TEST(CascadeCovariance, DegenerateCascade) {
  const auto p = ModelParams::standard(0.0, 1.0, 100.0);
  for (int lag = 0; lag < 10; ++lag) EXPECT_EQ(mrw::cascade_covariance(lag, p), 0.0);
}

TEST(CascadeCovariance, NonincreasingAndNonnegative) {
  for (double t : {2.0, 7.5, 26.0, 104.0}) {
    const auto p = ModelParams::standard(0.5, 1.0, t, 1.0);
    double prev = mrw::cascade_covariance(0, p);
    for (int lag = 1; lag < 200; ++lag) {
      const double g = mrw::cascade_covariance(lag, p);
      EXPECT_LE(g, prev);
      EXPECT_GE(g, 0.0);
      prev = g;
    }
    const auto cutoff = static_cast<int>(std::ceil(t)) - 1;
    EXPECT_EQ(mrw::cascade_covariance(cutoff, p), 0.0);
    if (cutoff > 0) {
      EXPECT_GT(mrw::cascade_covariance(cutoff - 1, p), 0.0);
    }
  }
}

TEST(CascadeCovariance, DomainErrors) {
  auto p = ModelParams::standard(0.7, 1.0, 0.5, 1.0);
  EXPECT_THROW(mrw::cascade_covariance(0, p), mrw::domain_error);
  p.t_corr = 26.0;
  EXPECT_THROW(mrw::cascade_covariance(-1, p), mrw::domain_error);
}

TEST(CascadeNormalizer, TrivialCases) {
  EXPECT_EQ(mrw::cascade_normalizer(ModelParams::standard(0.0, 1.0, 26.0)), 1.0);
  EXPECT_EQ(mrw::cascade_normalizer(ModelParams::standard(0.7, 1.0, 1.0)), 1.0);
}

TEST(CascadeNormalizer, LognormalMeanIdentityByMonteCarlo) {
  const auto p = ModelParams::standard(0.7, 1.0, 26.0);
  const double c = mrw::cascade_normalizer(p);
  EXPECT_NEAR(c, std::exp(-0.79825), 1e-4);
  EXPECT_NEAR(c, 0.4501, 1e-4);
  const double sd = std::sqrt(mrw::cascade_covariance(0, p));
  std::mt19937_64 gen(7);
  std::normal_distribution<double> z;
  const int draws = 1'000'000;
  double s = 0.0, s2 = 0.0;
  for (int i = 0; i < draws; ++i) {
    const double m = c * std::exp(sd * z(gen));
    s += m;
    s2 += m * m;
  }
  const double mean = s / draws;
  const double se = std::sqrt((s2 / draws - mean * mean) / draws);
  EXPECT_NEAR(mean, 1.0, 0.01);
  EXPECT_NEAR(mean, 1.0, 3.0 * se);
}

TEST(FgnCovariance, Examples) {
  EXPECT_EQ(mrw::fgn_covariance(0, 0.3), 1.0);
  EXPECT_EQ(mrw::fgn_covariance(0, 0.8), 1.0);
  EXPECT_EQ(mrw::fgn_covariance(1, 0.5), 0.0);
  EXPECT_NEAR(mrw::fgn_covariance(1, 0.4), 0.5 * (std::pow(2.0, 0.8) - 2.0), 1e-15);
  EXPECT_NEAR(mrw::fgn_covariance(1, 0.4), -0.12945, 5e-6);
  EXPECT_THROW(mrw::fgn_covariance(1, 0.0), mrw::domain_error);
  EXPECT_THROW(mrw::fgn_covariance(1, 1.0), mrw::domain_error);
}

TEST(FgnCovariance, SignPattern) {
  for (int k = 1; k < 100; ++k) {
    EXPECT_EQ(mrw::fgn_covariance(k, 0.5), 0.0);
    EXPECT_LT(mrw::fgn_covariance(k, 0.3), 0.0);
    EXPECT_GT(mrw::fgn_covariance(k, 0.7), 0.0);
  }
}

TEST(FgnCovariance, TelescopingSum) {
  for (double h : {0.1, 0.25, 0.4, 0.5, 0.75, 0.9}) {
    for (int n = 0; n <= 12; ++n) {
      double s = 0.0;
      for (int k = -n; k <= n; ++k) s += mrw::fgn_covariance(k, h);
      const double expect = std::pow(n + 1.0, 2 * h) - std::pow(static_cast<double>(n), 2 * h);
      EXPECT_NEAR(s, expect, 1e-12) << "H=" << h << " n=" << n;
    }
  }
}

TEST(FgnCovariance, AntipersistentPartialSumsDecreaseTowardMinusHalf) {
  const double h = 0.4;
  double s = 0.0, prev = 0.0;
  for (int k = 1; k <= 100000; ++k) {
    s += mrw::fgn_covariance(k, h);
    EXPECT_LT(s, prev + 1e-15);
    EXPECT_GT(s, -0.5);
    prev = s;
  }
  EXPECT_NEAR(s, -0.5, 0.5 * std::pow(100001.0, 2 * h - 1) + 1e-9);
}

TEST(TheoreticalReturnAcf, DampedShape) {
  const auto p = ModelParams::damped(0.7, 0.18, 26.0, 22.0);
  EXPECT_LT(mrw::theoretical_return_acf(1, p), 0.0);
  EXPECT_NEAR(mrw::theoretical_return_acf(2000, p), 0.0, 1e-30);
  // Ratio per lag is exp(-nu dt); phi = 1 - nu dt agrees to first order.
  const double r = mrw::theoretical_return_acf(6, p) / mrw::theoretical_return_acf(5, p);
  EXPECT_NEAR(r, std::exp(-p.nu() * p.dt), 1e-14);
  EXPECT_NEAR(r, p.phi, 0.5 * p.nu() * p.nu());
}

TEST(TheoreticalReturnAcf, FractionalSign) {
  EXPECT_LT(mrw::theoretical_return_acf(1, ModelParams::fractional(0.67, 0.2, 101.0, 0.45)), 0.0);
  EXPECT_GT(mrw::theoretical_return_acf(1, ModelParams::fractional(0.67, 0.2, 101.0, 0.65)), 0.0);
  EXPECT_EQ(mrw::theoretical_return_acf(3, ModelParams::standard(0.67, 0.2, 101.0)), 0.0);
  EXPECT_THROW(mrw::theoretical_return_acf(0, ModelParams::standard(0.67, 0.2, 101.0)),
               mrw::domain_error);
}

TEST(ModelParams, Validation) {
  EXPECT_NO_THROW(mrw::validate(ModelParams::damped(0.7, 0.18, 26.0, 22.0)));
  EXPECT_THROW(mrw::validate(ModelParams::damped(0.7, 0.18, 26.0, 0.5)), mrw::domain_error);
  EXPECT_THROW(mrw::validate(ModelParams::fractional(0.7, 0.18, 26.0, 1.2)), mrw::domain_error);
  EXPECT_THROW(mrw::validate(ModelParams::standard(-0.1, 0.18, 26.0)), mrw::domain_error);
  EXPECT_THROW(mrw::validate(ModelParams::standard(0.1, 0.0, 26.0)), mrw::domain_error);
  const auto p = ModelParams::damped(0.7, 0.18, 26.0, 22.0);
  EXPECT_NEAR(p.relaxation_time(), 22.0, 1e-12);
  EXPECT_NEAR(p.nu(), 1.0 / 22.0, 1e-15);
}

}  // namespace
