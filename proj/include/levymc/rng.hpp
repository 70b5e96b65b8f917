#pragma once

#include <cstdint>
#include <random>

namespace levymc {

// splitmix64 step; used only to derive well-mixed substream seeds.
inline std::uint64_t splitmix64(std::uint64_t& state) {
  std::uint64_t z = (state += 0x9e3779b97f4a7c15ULL);
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

/// Seedable random stream. Every (time-step, node) pair owns its own derived
/// stream, so parallel schedules cannot change results. No global state.
class RngStream {
 public:
  explicit RngStream(std::uint64_t seed) : engine_(seed) {}

  /// Substream for work unit (a, b) under a master seed. Identical
  /// (seed, a, b) always yields an identical stream.
  static RngStream derived(std::uint64_t seed, std::uint64_t a, std::uint64_t b) {
    std::uint64_t s = seed;
    std::uint64_t h = splitmix64(s);
    s ^= a + 0x9e3779b97f4a7c15ULL;
    h ^= splitmix64(s);
    s ^= b + 0xbf58476d1ce4e5b9ULL;
    h ^= splitmix64(s);
    return RngStream(h);
  }

  /// Uniform draw in the open interval (0, 1); safe for inverse-CDF maps.
  double uniform_pos() {
    double u = (engine_() >> 11) * 0x1.0p-53;
    return u > 0.0 ? u : 0x1.0p-53;
  }

  double normal() { return normal_(engine_); }

  /// Poisson draw. Inversion below the threshold mean; larger means are
  /// split into independent sub-draws, which stays exact.
  int poisson(double mean) {
    if (mean <= 0.0) return 0;
    if (mean <= kPoissonInversionThreshold) return poisson_inversion(mean);
    int parts = static_cast<int>(mean / kPoissonInversionThreshold) + 1;
    double part_mean = mean / parts;
    int total = 0;
    for (int i = 0; i < parts; ++i) total += poisson_inversion(part_mean);
    return total;
  }

  std::uint64_t raw() { return engine_(); }

  static constexpr double kPoissonInversionThreshold = 10.0;

 private:
  int poisson_inversion(double mean) {
    double p = std::exp(-mean);
    double cum = p;
    double u = uniform_pos();
    int k = 0;
    while (u > cum && k < 1000) {
      ++k;
      p *= mean / k;
      cum += p;
    }
    return k;
  }

  std::mt19937_64 engine_;
  std::normal_distribution<double> normal_{0.0, 1.0};
};

}  // namespace levymc
