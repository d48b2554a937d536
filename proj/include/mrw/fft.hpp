#pragma once

#include <fftw3.h>

#include <complex>
#include <memory>
#include <mutex>
#include <span>
#include <stdexcept>
#include <vector>

namespace mrw::fft {

namespace detail {

// FFTW's planner is not thread safe; execution of distinct plans is.
inline std::mutex& planner_mutex() {
  static std::mutex m;
  return m;
}

struct PlanDeleter {
  void operator()(fftw_plan_s* p) const {
    std::lock_guard lock(planner_mutex());
    fftw_destroy_plan(p);
  }
};

using Plan = std::unique_ptr<fftw_plan_s, PlanDeleter>;

}  // namespace detail

// Unnormalized forward DFT: X_k = sum_t x_t exp(-2 pi i k t / n).
inline std::vector<std::complex<double>> forward(std::vector<std::complex<double>> data) {
  if (data.empty()) return data;
  auto* buf = reinterpret_cast<fftw_complex*>(data.data());
  detail::Plan plan;
  {
    std::lock_guard lock(detail::planner_mutex());
    plan.reset(fftw_plan_dft_1d(static_cast<int>(data.size()), buf, buf, FFTW_FORWARD,
                                FFTW_ESTIMATE));
  }
  if (!plan) throw std::runtime_error("fftw: plan creation failed");
  fftw_execute(plan.get());
  return data;
}

// Unnormalized backward DFT: x_t = sum_k X_k exp(+2 pi i k t / n).
inline std::vector<std::complex<double>> backward(std::vector<std::complex<double>> data) {
  if (data.empty()) return data;
  auto* buf = reinterpret_cast<fftw_complex*>(data.data());
  detail::Plan plan;
  {
    std::lock_guard lock(detail::planner_mutex());
    plan.reset(fftw_plan_dft_1d(static_cast<int>(data.size()), buf, buf, FFTW_BACKWARD,
                                FFTW_ESTIMATE));
  }
  if (!plan) throw std::runtime_error("fftw: plan creation failed");
  fftw_execute(plan.get());
  return data;
}

// Forward DFT of a real sequence; returns bins 0..n/2.
inline std::vector<std::complex<double>> forward_real(std::span<const double> x) {
  const std::size_t n = x.size();
  if (n == 0) return {};
  std::vector<double> in(x.begin(), x.end());
  std::vector<std::complex<double>> out(n / 2 + 1);
  detail::Plan plan;
  {
    std::lock_guard lock(detail::planner_mutex());
    plan.reset(fftw_plan_dft_r2c_1d(static_cast<int>(n), in.data(),
                                    reinterpret_cast<fftw_complex*>(out.data()), FFTW_ESTIMATE));
  }
  if (!plan) throw std::runtime_error("fftw: plan creation failed");
  fftw_execute(plan.get());
  return out;
}

}  // namespace mrw::fft
