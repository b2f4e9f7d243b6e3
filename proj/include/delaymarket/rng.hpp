#pragma once

#include <cmath>
#include <cstdint>
#include <numbers>

namespace delaymarket {

/// Stateless counter-based Gaussian source. Every draw is a pure function
/// of (seed, run, step, component), so runs can be generated in any order
/// or in parallel and still reproduce bit-for-bit.
class CounterRng {
 public:
  explicit CounterRng(std::uint64_t seed) : seed_(seed) {}

  std::uint64_t seed() const { return seed_; }

  std::uint64_t bits(std::uint64_t run, std::uint64_t step, std::uint64_t component,
                     std::uint64_t lane) const {
    std::uint64_t z = mix(seed_ ^ 0x243f6a8885a308d3ULL);
    z = mix(z ^ (run * 0x9e3779b97f4a7c15ULL));
    z = mix(z ^ (step * 0xbf58476d1ce4e5b9ULL + 0x13198a2e03707344ULL));
    z = mix(z ^ (component * 0x94d049bb133111ebULL + 0xa4093822299f31d0ULL));
    return mix(z ^ (lane + 0x082efa98ec4e6c89ULL));
  }

  /// Uniform on the open interval (0, 1).
  double uniform(std::uint64_t run, std::uint64_t step, std::uint64_t component,
                 std::uint64_t lane) const {
    return (static_cast<double>(bits(run, step, component, lane) >> 11) + 0.5) *
           0x1.0p-53;
  }

  /// Standard normal via Box-Muller on two uniforms of the same counter.
  double normal(std::uint64_t run, std::uint64_t step, std::uint64_t component) const {
    const double u1 = uniform(run, step, component, 0);
    const double u2 = uniform(run, step, component, 1);
    return std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * std::numbers::pi * u2);
  }

 private:
  // splitmix64 finaliser
  static std::uint64_t mix(std::uint64_t z) {
    z += 0x9e3779b97f4a7c15ULL;
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
  }

  std::uint64_t seed_;
};

}  // namespace delaymarket
