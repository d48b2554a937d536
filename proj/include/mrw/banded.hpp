#pragma once

#include <Eigen/Core>

#include <algorithm>
#include <cassert>
#include <cmath>
#include <cstddef>
#include <optional>
#include <span>
#include <vector>

namespace mrw {

// Symmetric matrix with lower bandwidth `bandwidth`, lower triangle stored row by row.
// Row i holds columns i-bandwidth .. i contiguously, so inner products along rows are
// plain dense dot products.
class SymmetricBand {
 public:
  SymmetricBand() = default;
  SymmetricBand(std::size_t n, std::size_t bandwidth)
      : n_(n), bw_(std::min(bandwidth, n == 0 ? 0 : n - 1)), data_(n * (bw_ + 1), 0.0) {}

  std::size_t size() const noexcept { return n_; }
  std::size_t bandwidth() const noexcept { return bw_; }

  // Requires j <= i <= j + bandwidth.
  double& operator()(std::size_t i, std::size_t j) {
    assert(j <= i && i - j <= bw_);
    return data_[i * (bw_ + 1) + (j + bw_ - i)];
  }
  double operator()(std::size_t i, std::size_t j) const {
    assert(j <= i && i - j <= bw_);
    return data_[i * (bw_ + 1) + (j + bw_ - i)];
  }

  // Symmetric lookup; zero outside the band.
  double at(std::size_t i, std::size_t j) const {
    if (j > i) std::swap(i, j);
    return i - j > bw_ ? 0.0 : (*this)(i, j);
  }

  // Pointer to entry (i, first) with first <= i; entries (i, first..i) follow contiguously.
  double* row(std::size_t i, std::size_t first) { return &(*this)(i, first); }
  const double* row(std::size_t i, std::size_t first) const {
    assert(first <= i && i - first <= bw_);
    return data_.data() + i * (bw_ + 1) + (first + bw_ - i);
  }

  void add_diagonal(std::span<const double> d) {
    for (std::size_t i = 0; i < n_; ++i) (*this)(i, i) += d[i];
  }
  void add_diagonal(double d) {
    for (std::size_t i = 0; i < n_; ++i) (*this)(i, i) += d;
  }

  // A += scale * v v^T where v occupies indices start .. start + v.size() - 1.
  void add_outer(std::size_t start, std::span<const double> v, double scale) {
    assert(v.size() <= bw_ + 1);
    for (std::size_t r = 0; r < v.size(); ++r) {
      const double f = scale * v[r];
      Eigen::Map<Eigen::VectorXd> dst(row(start + r, start), static_cast<Eigen::Index>(r + 1));
      dst += f * Eigen::Map<const Eigen::VectorXd>(v.data(), static_cast<Eigen::Index>(r + 1));
    }
  }

  // y = A x
  std::vector<double> multiply(std::span<const double> x) const {
    std::vector<double> y(n_, 0.0);
    for (std::size_t i = 0; i < n_; ++i) {
      const std::size_t first = i > bw_ ? i - bw_ : 0;
      const double* a = row(i, first);
      double acc = a[i - first] * x[i];
      for (std::size_t j = first; j < i; ++j) {
        acc += a[j - first] * x[j];
        y[j] += a[j - first] * x[i];
      }
      y[i] += acc;
    }
    return y;
  }

  double max_abs_diagonal() const {
    double m = 0.0;
    for (std::size_t i = 0; i < n_; ++i) m = std::max(m, std::abs((*this)(i, i)));
    return m;
  }

  Eigen::MatrixXd to_dense() const {
    Eigen::MatrixXd m = Eigen::MatrixXd::Zero(static_cast<Eigen::Index>(n_),
                                              static_cast<Eigen::Index>(n_));
    for (std::size_t i = 0; i < n_; ++i)
      for (std::size_t j = (i > bw_ ? i - bw_ : 0); j <= i; ++j) {
        m(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) = (*this)(i, j);
        m(static_cast<Eigen::Index>(j), static_cast<Eigen::Index>(i)) = (*this)(i, j);
      }
    return m;
  }

 private:
  std::size_t n_ = 0;
  std::size_t bw_ = 0;
  std::vector<double> data_;
};

// Cholesky factor A = L L^T of a positive-definite SymmetricBand. The factor has the
// same band structure, so storage and cost are O(n bw) and O(n bw^2).
//
// The factor is computed block column by block column (dense LLT of the diagonal block,
// triangular solve for the panel below it, rank update of the trailing window). Rows are
// stored with `pad` extra leading slots so that every panel is a plain strided block.
class BandCholesky {
 public:
  // Returns nullopt when a pivot is not positive; `failed_row`/`failed_pivot` then
  // describe the breakdown.
  static std::optional<BandCholesky> factor(const SymmetricBand& a, std::size_t* failed_row = nullptr,
                                            double* failed_pivot = nullptr) {
    using RowMat = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;
    using Block = Eigen::Map<RowMat, 0, Eigen::OuterStride<>>;
    BandCholesky c;
    const std::size_t n = a.size(), bw = a.bandwidth();
    c.n_ = n;
    c.bw_ = bw;
    c.nb_ = std::clamp<std::size_t>(bw, 1, 32);
    c.ld_ = bw + c.nb_ - 1;
    c.data_.assign(n * (c.ld_ + 1), 0.0);
    for (std::size_t i = 0; i < n; ++i) {
      const std::size_t first = i > bw ? i - bw : 0;
      std::copy_n(a.row(i, first), i - first + 1, c.ptr(i, first));
    }
    auto block = [&](std::size_t r, std::size_t col, std::size_t rows, std::size_t cols) {
      return Block(c.ptr(r, col), static_cast<Eigen::Index>(rows), static_cast<Eigen::Index>(cols),
                   Eigen::OuterStride<>(static_cast<Eigen::Index>(c.ld_)));
    };
    Eigen::MatrixXd diag;
    for (std::size_t k = 0; k < n; k += c.nb_) {
      const std::size_t b = std::min(c.nb_, n - k);
      diag = block(k, k, b, b).triangularView<Eigen::Lower>();
      // Unblocked Cholesky of the diagonal block, to locate a failing pivot exactly.
      for (Eigen::Index j = 0; j < static_cast<Eigen::Index>(b); ++j) {
        double d = diag(j, j) - diag.row(j).head(j).squaredNorm();
        if (!(d > 0.0) || !std::isfinite(d)) {
          if (failed_row) *failed_row = k + static_cast<std::size_t>(j);
          if (failed_pivot) *failed_pivot = d;
          return std::nullopt;
        }
        d = std::sqrt(d);
        diag(j, j) = d;
        const Eigen::Index rest = static_cast<Eigen::Index>(b) - j - 1;
        if (rest > 0)
          diag.col(j).tail(rest) =
              (diag.col(j).tail(rest) - diag.bottomLeftCorner(rest, j) * diag.row(j).head(j).transpose()) / d;
      }
      auto d11 = block(k, k, b, b);
      d11.triangularView<Eigen::Lower>() = diag.triangularView<Eigen::Lower>();
      const std::size_t below = std::min(bw, n - k - b);
      if (below == 0) continue;
      auto l21 = block(k + b, k, below, b);
      diag.triangularView<Eigen::Lower>().transpose().solveInPlace<Eigen::OnTheRight>(l21);
      block(k + b, k + b, below, below).selfadjointView<Eigen::Lower>().rankUpdate(l21, -1.0);
    }
    return c;
  }

  std::size_t size() const noexcept { return n_; }
  std::size_t bandwidth() const noexcept { return bw_; }

  // Entry (i, j) of L, j <= i.
  double operator()(std::size_t i, std::size_t j) const {
    return j + bw_ < i ? 0.0 : *cptr(i, j);
  }

  double log_determinant() const {
    double s = 0.0;
    for (std::size_t i = 0; i < n_; ++i) s += std::log(*cptr(i, i));
    return 2.0 * s;
  }

  // x = L y (used to colour white noise).
  std::vector<double> lower_multiply(std::span<const double> y) const {
    std::vector<double> x(n_);
    for (std::size_t i = 0; i < n_; ++i) {
      const std::size_t first = i > bw_ ? i - bw_ : 0;
      const std::size_t len = i - first + 1;
      x[i] = Eigen::Map<const Eigen::VectorXd>(cptr(i, first), static_cast<Eigen::Index>(len))
                 .dot(Eigen::Map<const Eigen::VectorXd>(y.data() + first, static_cast<Eigen::Index>(len)));
    }
    return x;
  }

  // Solves A x = b.
  std::vector<double> solve(std::span<const double> b) const {
    std::vector<double> y(b.begin(), b.end());
    for (std::size_t i = 0; i < n_; ++i) {
      const std::size_t first = i > bw_ ? i - bw_ : 0;
      const std::size_t len = i - first;
      double s = y[i];
      if (len > 0)
        s -= Eigen::Map<const Eigen::VectorXd>(cptr(i, first), static_cast<Eigen::Index>(len))
                 .dot(Eigen::Map<const Eigen::VectorXd>(y.data() + first, static_cast<Eigen::Index>(len)));
      y[i] = s / *cptr(i, i);
    }
    for (std::size_t i = n_; i-- > 0;) {
      const double xi = y[i] / *cptr(i, i);
      y[i] = xi;
      const std::size_t first = i > bw_ ? i - bw_ : 0;
      const std::size_t len = i - first;
      if (len > 0)
        Eigen::Map<Eigen::VectorXd>(y.data() + first, static_cast<Eigen::Index>(len)) -=
            xi * Eigen::Map<const Eigen::VectorXd>(cptr(i, first), static_cast<Eigen::Index>(len));
    }
    return y;
  }

  Eigen::MatrixXd to_dense() const {
    Eigen::MatrixXd m = Eigen::MatrixXd::Zero(static_cast<Eigen::Index>(n_), static_cast<Eigen::Index>(n_));
    for (std::size_t i = 0; i < n_; ++i)
      for (std::size_t j = (i > bw_ ? i - bw_ : 0); j <= i; ++j)
        m(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) = *cptr(i, j);
    return m;
  }

 private:
  // Row-major with row stride ld_: entry (i, j) lives at data_[i * ld_ + j + ld_], valid
  // for i - ld_ <= j <= i.
  double* ptr(std::size_t i, std::size_t j) { return data_.data() + i * ld_ + j + ld_; }
  const double* cptr(std::size_t i, std::size_t j) const {
    return data_.data() + i * ld_ + j + ld_;
  }

  std::size_t n_ = 0;
  std::size_t bw_ = 0;
  std::size_t nb_ = 1;
  std::size_t ld_ = 0;
  std::vector<double> data_;
};

}  // namespace mrw
