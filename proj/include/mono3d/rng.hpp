#ifndef MONO3D_RNG_HPP_
#define MONO3D_RNG_HPP_

#include <cmath>
#include <cstdint>
#include <random>

namespace mono3d {

// Deterministic random source built on std::mt19937_64, whose raw output
// stream is fixed by the standard. Uniform and normal variates are derived
// from the raw 64-bit words directly (std::*_distribution is not portable
// across standard libraries), so a given seed reproduces the same stream
// everywhere.
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : gen_(seed) {}

  // Uniform in [0, 1): top 53 bits of one word.
  double uniform() {
    return static_cast<double>(gen_() >> 11) * 0x1.0p-53;
  }

  double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }

  // Uniform integer in [lo, hi], inclusive.
  int uniform_int(int lo, int hi) {
    const std::uint64_t span = static_cast<std::uint64_t>(hi - lo) + 1;
    return lo + static_cast<int>(gen_() % span);
  }

  bool bernoulli(double p) { return uniform() < p; }

  // Standard normal via Box-Muller. Consumes two words per call.
  double normal() {
    const double u1 = static_cast<double>((gen_() >> 11) + 1) * 0x1.0p-53;
    const double u2 = uniform();
    return std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * M_PI * u2);
  }

  double normal(double mean, double sigma) { return mean + sigma * normal(); }

  std::uint64_t next_word() { return gen_(); }

 private:
  std::mt19937_64 gen_;
};

}  // namespace mono3d

#endif  // MONO3D_RNG_HPP_
