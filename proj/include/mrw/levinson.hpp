#pragma once

#include <cmath>
#include <cstddef>
#include <span>
#include <string>
#include <vector>

#include "mrw/error.hpp"

namespace mrw {

// Linear-prediction representation of a stationary Gaussian sequence up to order K.
//
// coefficients(k)[j-1] is the weight of the value j steps back in the best linear
// predictor that uses the k most recent values, i.e. the solution of
//   sum_j a_j^(k) acov(|i-j|) = acov(i),  i = 1..k.
// prediction_variance(k) is the variance of the corresponding prediction error, so
// prediction_variance(0) = acov(0).
class ArRepresentation {
 public:
  ArRepresentation() = default;

  std::size_t order() const noexcept { return order_; }

  std::span<const double> coefficients(std::size_t k) const {
    return {coeffs_.data() + offset(k), k};
  }

  double prediction_variance(std::size_t k) const { return variance_[k]; }
  double prediction_sd(std::size_t k) const { return std::sqrt(variance_[k]); }

 private:
  friend ArRepresentation durbin_levinson(std::span<const double> acov);

  static std::size_t offset(std::size_t k) noexcept { return k * (k - 1) / 2; }

  std::size_t order_ = 0;
  std::vector<double> coeffs_;    // row k (k = 1..K) stored at offset(k), length k
  std::vector<double> variance_;  // variance_[k], k = 0..K
};

// Durbin-Levinson recursion over acov[0..K]. Throws not_psd_error if a prediction
// variance becomes nonpositive.
inline ArRepresentation durbin_levinson(std::span<const double> acov) {
  if (acov.empty()) throw domain_error("durbin_levinson: empty autocovariance");
  if (!(acov[0] > 0.0)) throw domain_error("durbin_levinson: acov(0) must be positive");

  const std::size_t order = acov.size() - 1;
  ArRepresentation ar;
  ar.order_ = order;
  ar.coeffs_.resize(order * (order + 1) / 2);
  ar.variance_.resize(order + 1);
  ar.variance_[0] = acov[0];

  for (std::size_t k = 1; k <= order; ++k) {
    const double* prev = ar.coeffs_.data() + ArRepresentation::offset(k - 1);
    double* cur = ar.coeffs_.data() + ArRepresentation::offset(k);
    double num = acov[k];
    for (std::size_t j = 1; j < k; ++j) num -= prev[j - 1] * acov[k - j];
    const double kappa = num / ar.variance_[k - 1];
    for (std::size_t j = 1; j < k; ++j) cur[j - 1] = prev[j - 1] - kappa * prev[k - j - 1];
    cur[k - 1] = kappa;
    const double v = ar.variance_[k - 1] * (1.0 - kappa * kappa);
    if (!(v > 0.0) || !std::isfinite(v))
      throw not_psd_error("durbin_levinson: nonpositive prediction variance at order " +
                              std::to_string(k) + " (covariance sequence is not positive definite)",
                          k, v);
    ar.variance_[k] = v;
  }
  return ar;
}

}  // namespace mrw
