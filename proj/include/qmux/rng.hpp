#pragma once

#include <cstdint>
#include <random>
#include <span>
#include <stdexcept>

namespace qmux {

inline std::uint64_t splitmix64(std::uint64_t& state) {
  state += 0x9e3779b97f4a7c15ULL;
  std::uint64_t z = state;
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

// Deterministic child stream derived from (master, a, b, c). Two runs with the
// same tuple produce identical draws, independent of how other streams are
// scheduled, so parallel fan-out cannot change results.
class RngStream {
 public:
  static RngStream derive(std::uint64_t master, std::uint64_t a = 0,
                          std::uint64_t b = 0, std::uint64_t c = 0) {
    std::uint64_t s = master;
    (void)splitmix64(s);
    s ^= 0x6a09e667f3bcc909ULL + a;
    (void)splitmix64(s);
    s ^= 0xbb67ae8584caa73bULL + b;
    (void)splitmix64(s);
    s ^= 0x3c6ef372fe94f82bULL + c;
    return RngStream(splitmix64(s));
  }

  explicit RngStream(std::uint64_t seed) : engine_(seed) {}

  double uniform() { return std::uniform_real_distribution<double>(0.0, 1.0)(engine_); }

  int uniform_bit() { return static_cast<int>(engine_() & 1ULL); }

  long binomial(long trials, double p) {
    if (p < 0.0 || p > 1.0) throw std::invalid_argument("binomial: p outside [0,1]");
    if (trials <= 0 || p == 0.0) return 0;
    if (p == 1.0) return trials;
    return std::binomial_distribution<long>(trials, p)(engine_);
  }

  double normal(double mean, double stddev) {
    return std::normal_distribution<double>(mean, stddev)(engine_);
  }

  // Index sampled proportionally to the (not necessarily normalized) weights.
  std::size_t categorical(std::span<const double> weights) {
    double total = 0.0;
    for (double w : weights) total += w;
    double u = uniform() * total;
    double acc = 0.0;
    for (std::size_t i = 0; i + 1 < weights.size(); ++i) {
      acc += weights[i];
      if (u < acc) return i;
    }
    return weights.empty() ? 0 : weights.size() - 1;
  }

  std::mt19937_64& engine() { return engine_; }

 private:
  std::mt19937_64 engine_;
};

}  // namespace qmux
