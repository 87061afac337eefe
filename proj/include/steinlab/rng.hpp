#pragma once

#include <cmath>
#include <cstdint>
#include <numbers>

namespace steinlab {

// Stateless counter-based generator: every draw is a pure function of
// (seed, stream, counter), so parallel streams never depend on scheduling.
class CounterRng {
 public:
  CounterRng(std::uint64_t seed, std::uint64_t stream) : key_(mix(seed ^ mix(stream + 0x9e3779b97f4a7c15ULL))) {}

  std::uint64_t bits(std::uint64_t counter) const { return mix(key_ + mix(counter)); }

  // Uniform on the open interval (0, 1).
  double uniform(std::uint64_t counter) const {
    return (static_cast<double>(bits(counter) >> 11) + 0.5) * 0x1.0p-53;
  }

  // Standard normal pair from counters 2c, 2c+1 (Box-Muller).
  void normal_pair(std::uint64_t c, double& z0, double& z1) const {
    const double u1 = uniform(2 * c), u2 = uniform(2 * c + 1);
    const double r = std::sqrt(-2.0 * std::log(u1));
    z0 = r * std::cos(2.0 * std::numbers::pi * u2);
    z1 = r * std::sin(2.0 * std::numbers::pi * u2);
  }

 private:
  static std::uint64_t mix(std::uint64_t z) {
    z += 0x9e3779b97f4a7c15ULL;
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
  }
  std::uint64_t key_;
};

// Sequential normal stream over a CounterRng, caching the second Box-Muller value.
class NormalStream {
 public:
  NormalStream(std::uint64_t seed, std::uint64_t stream) : rng_(seed, stream) {}
  double next() {
    if (has_spare_) {
      has_spare_ = false;
      return spare_;
    }
    double z0, z1;
    rng_.normal_pair(counter_++, z0, z1);
    spare_ = z1;
    has_spare_ = true;
    return z0;
  }
  double uniform() { return rng_.uniform(0x8000000000000000ULL + counter_++); }

 private:
  CounterRng rng_;
  std::uint64_t counter_ = 0;
  double spare_ = 0.0;
  bool has_spare_ = false;
};

}  // namespace steinlab
