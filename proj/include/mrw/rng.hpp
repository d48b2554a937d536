#pragma once

// Seeding scheme. A root seed is expanded with splitmix64 into independent substreams:
//
//   derive_seed(root, kLatentStream)      latent log-volatility h
//   derive_seed(root, kInnovationStream)  Gaussian / fGn innovations
//   derive_seed(root, kPathStreamBase+r)  root seed of ensemble realization r
//
// Each substream drives its own std::mt19937_64, so either stream can be replayed
// without touching the other.

#include <cstdint>
#include <random>
#include <span>
#include <vector>

namespace mrw {

inline constexpr std::uint64_t kLatentStream = 1;
inline constexpr std::uint64_t kInnovationStream = 2;
inline constexpr std::uint64_t kPathStreamBase = 1u << 20;

constexpr std::uint64_t splitmix64(std::uint64_t x) noexcept {
  x += 0x9E3779B97F4A7C15ull;
  x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ull;
  x = (x ^ (x >> 27)) * 0x94D049BB133111EBull;
  return x ^ (x >> 31);
}

constexpr std::uint64_t derive_seed(std::uint64_t root, std::uint64_t stream) noexcept {
  return splitmix64(splitmix64(root) ^ splitmix64(stream + 0x632BE59BD9B4E019ull));
}

struct SimSeeds {
  std::uint64_t latent = 0;
  std::uint64_t innovation = 0;

  static SimSeeds from_root(std::uint64_t root) {
    return {derive_seed(root, kLatentStream), derive_seed(root, kInnovationStream)};
  }
};

class GaussianStream {
 public:
  explicit GaussianStream(std::uint64_t seed) : engine_(seed) {}

  double operator()() { return dist_(engine_); }

  void fill(std::span<double> out) {
    for (double& v : out) v = dist_(engine_);
  }

  std::vector<double> draw(std::size_t n) {
    std::vector<double> v(n);
    fill(v);
    return v;
  }

  std::mt19937_64& engine() { return engine_; }

 private:
  std::mt19937_64 engine_;
  std::normal_distribution<double> dist_{0.0, 1.0};
};

}  // namespace mrw
