#pragma once

#include <cmath>
#include <cstdint>
#include <random>

namespace cda {

// Identifies one reproducible random stream: a master seed plus a replicate
// index. Distinct stream_index values give statistically independent streams,
// so replicate batches can run in any order or in parallel.
struct RngSpec {
  std::uint64_t master_seed = 0;
  std::uint64_t stream_index = 0;
};

namespace detail {
inline std::uint64_t splitmix64(std::uint64_t z) {
  z += 0x9e3779b97f4a7c15ULL;
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}
}  // namespace detail

// mt19937_64 wrapper with the samplers used by the simulator. Distributions
// are implemented here rather than via std::*_distribution so that results
// are identical across standard libraries.
class Rng {
 public:
  explicit Rng(RngSpec spec)
      : gen_(detail::splitmix64(spec.master_seed ^
                                detail::splitmix64(spec.stream_index + 1))) {}

  std::uint64_t next_u64() { return gen_(); }

  // uniform on [0, 1), 53-bit resolution
  double uniform01() { return static_cast<double>(gen_() >> 11) * 0x1.0p-53; }

  // uniform integer on [lo, hi], unbiased (Lemire)
  int uniform_int(int lo, int hi) {
    const std::uint64_t range = static_cast<std::uint64_t>(hi - lo) + 1;
    unsigned __int128 m = static_cast<unsigned __int128>(gen_()) * range;
    auto low = static_cast<std::uint64_t>(m);
    if (low < range) {
      const std::uint64_t cutoff = (0 - range) % range;
      while (low < cutoff) {
        m = static_cast<unsigned __int128>(gen_()) * range;
        low = static_cast<std::uint64_t>(m);
      }
    }
    return lo + static_cast<int>(m >> 64);
  }

  double exponential(double rate) { return -std::log1p(-uniform01()) / rate; }

  double normal01() {
    const double u1 = 1.0 - uniform01();  // (0, 1]
    const double u2 = uniform01();
    return std::sqrt(-2.0 * std::log(u1)) *
           std::cos(6.283185307179586476925286766559 * u2);
  }

  // number of Bernoulli(p) trials up to and including the first success
  long long geometric_trials(double p) {
    if (p >= 1.0) return 1;
    const double u = uniform01();
    return 1 + static_cast<long long>(std::floor(std::log1p(-u) / std::log1p(-p)));
  }

  // Marsaglia-Tsang; requires shape >= 1
  double gamma(double shape, double scale) {
    const double d = shape - 1.0 / 3.0;
    const double c = 1.0 / std::sqrt(9.0 * d);
    for (;;) {
      double x;
      double v;
      do {
        x = normal01();
        v = 1.0 + c * x;
      } while (v <= 0.0);
      v = v * v * v;
      const double u = uniform01();
      if (u < 1.0 - 0.0331 * x * x * x * x) return d * v * scale;
      if (u > 0.0 && std::log(u) < 0.5 * x * x + d * (1.0 - v + std::log(v)))
        return d * v * scale;
    }
  }

 private:
  std::mt19937_64 gen_;
};

}  // namespace cda
