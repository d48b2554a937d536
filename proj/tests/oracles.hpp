#pragma once

// Reference computations used only by the tests. Everything here works on dense
// matrices or direct numerical integration and shares no code path with the banded /
// recursive implementations it checks.

#include <Eigen/Cholesky>
#include <Eigen/Dense>
#include <Eigen/Eigenvalues>
#include <boost/math/quadrature/gauss_kronrod.hpp>

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <functional>
#include <numbers>
#include <span>
#include <vector>

namespace oracle {

inline Eigen::MatrixXd toeplitz(std::span<const double> acov, std::size_t n) {
  Eigen::MatrixXd m(static_cast<Eigen::Index>(n), static_cast<Eigen::Index>(n));
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = 0; j < n; ++j)
      m(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) = acov[i > j ? i - j : j - i];
  return m;
}

// Solution of sum_j a_j acov(|i-j|) = acov(i), i = 1..k, by dense factorization.
inline Eigen::VectorXd toeplitz_predictor(std::span<const double> acov, std::size_t k) {
  const Eigen::MatrixXd t = toeplitz(acov, k);
  Eigen::VectorXd rhs(static_cast<Eigen::Index>(k));
  for (std::size_t i = 0; i < k; ++i) rhs(static_cast<Eigen::Index>(i)) = acov[i + 1];
  return t.llt().solve(rhs);
}

inline double gaussian_logpdf(const Eigen::VectorXd& x, const Eigen::MatrixXd& cov) {
  const Eigen::LLT<Eigen::MatrixXd> llt(cov);
  const Eigen::VectorXd z = llt.matrixL().solve(x);
  const Eigen::MatrixXd l = llt.matrixL();
  double logdet = 0.0;
  for (Eigen::Index i = 0; i < l.rows(); ++i) logdet += 2.0 * std::log(l(i, i));
  return -0.5 * (static_cast<double>(x.size()) * std::log(2.0 * std::numbers::pi) + logdet +
                 z.squaredNorm());
}

inline double normal_logpdf(double x, double var) {
  return -0.5 * (std::log(2.0 * std::numbers::pi * var) + x * x / var);
}

// Probabilists' Gauss-Hermite rule (weight exp(-z^2/2)), weights normalized to sum 1,
// from the Golub-Welsch eigenproblem.
struct HermiteRule {
  std::vector<double> nodes;
  std::vector<double> weights;
};

inline HermiteRule gauss_hermite(int m) {
  Eigen::MatrixXd j = Eigen::MatrixXd::Zero(m, m);
  for (int i = 1; i < m; ++i) j(i, i - 1) = j(i - 1, i) = std::sqrt(static_cast<double>(i));
  const Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(j);
  HermiteRule r;
  for (int i = 0; i < m; ++i) {
    r.nodes.push_back(es.eigenvalues()(i));
    const double v = es.eigenvectors()(0, i);
    r.weights.push_back(v * v);
  }
  return r;
}

// log E_h[ prod_k N(x_k; 0, s2 e^{h_k}) ], h ~ N(0, cov), by tensor Gauss-Hermite
// quadrature in whitened coordinates h = L z. Works in log space for stability.
inline double latent_integral_gh(std::span<const double> x, double s2, const Eigen::MatrixXd& cov,
                                 int nodes) {
  const std::size_t n = x.size();
  const Eigen::MatrixXd l = cov.llt().matrixL();
  const HermiteRule rule = gauss_hermite(nodes);
  std::vector<int> idx(n, 0);
  std::vector<double> terms;
  double maxlog = -INFINITY;
  Eigen::VectorXd z(static_cast<Eigen::Index>(n));
  while (true) {
    double logw = 0.0;
    for (std::size_t d = 0; d < n; ++d) {
      z(static_cast<Eigen::Index>(d)) = rule.nodes[static_cast<std::size_t>(idx[d])];
      logw += std::log(rule.weights[static_cast<std::size_t>(idx[d])]);
    }
    const Eigen::VectorXd h = l * z;
    double lf = logw;
    for (std::size_t d = 0; d < n; ++d)
      lf += normal_logpdf(x[d], s2 * std::exp(h(static_cast<Eigen::Index>(d))));
    terms.push_back(lf);
    maxlog = std::max(maxlog, lf);
    std::size_t d = 0;
    while (d < n && ++idx[d] == nodes) idx[d++] = 0;
    if (d == n) break;
  }
  double s = 0.0;
  for (double t : terms) s += std::exp(t - maxlog);
  return maxlog + std::log(s);
}

// log \int N(x; 0, s2 e^h) N(h; 0, var) dh by adaptive Gauss-Kronrod quadrature.
inline double latent_integral_1d(double x, double s2, double var) {
  auto integrand = [&](double h) {
    return std::exp(normal_logpdf(x, s2 * std::exp(h)) + normal_logpdf(h, var));
  };
  const double sd = std::sqrt(var);
  double err = 0.0;
  const double v = boost::math::quadrature::gauss_kronrod<double, 61>::integrate(
      integrand, -14.0 * sd - 40.0, 14.0 * sd + 10.0, 20, 1e-14, &err);
  return std::log(v);
}

// Ordinary least-squares slope of y on x.
inline double ols_slope(std::span<const double> x, std::span<const double> y) {
  double mx = 0.0, my = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    mx += x[i];
    my += y[i];
  }
  mx /= static_cast<double>(x.size());
  my /= static_cast<double>(y.size());
  double sxy = 0.0, sxx = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    sxy += (x[i] - mx) * (y[i] - my);
    sxx += (x[i] - mx) * (x[i] - mx);
  }
  return sxy / sxx;
}

inline double median(std::vector<double> v) {
  std::sort(v.begin(), v.end());
  const std::size_t m = v.size() / 2;
  return v.size() % 2 ? v[m] : 0.5 * (v[m - 1] + v[m]);
}

inline double mean(std::span<const double> v) {
  double s = 0.0;
  for (double x : v) s += x;
  return s / static_cast<double>(v.size());
}

// Sample autocorrelation, mean removed, biased normalization.
inline double sample_acf(std::span<const double> x, std::size_t lag) {
  const double m = mean(x);
  double num = 0.0, den = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    den += (x[i] - m) * (x[i] - m);
    if (i + lag < x.size()) num += (x[i] - m) * (x[i + lag] - m);
  }
  return num / den;
}

}  // namespace oracle
