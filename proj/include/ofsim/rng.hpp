#pragma once

#include <cmath>
#include <cstdint>
#include <numbers>
#include <random>
#include <span>

namespace ofsim {

// Deterministic draw helpers over std::mt19937_64. The raw engine output is
// standardized, so every distribution below reproduces bit-identically across
// platforms; the std::*_distribution adapters do not guarantee that.
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : engine_(seed) {}

  std::uint64_t next_u64() {
    ++draws_;
    return engine_();
  }

  // Uniform double in [0, 1) with 53-bit resolution.
  double uniform01() { return static_cast<double>(next_u64() >> 11) * 0x1.0p-53; }

  double uniform(double lo, double hi) { return lo + (hi - lo) * uniform01(); }

  // Uniform integer in [0, n), n small.
  int uniform_int(int n) { return static_cast<int>(uniform01() * n); }

  bool bernoulli(double p) { return uniform01() < p; }

  // Standard normal via Box-Muller.
  double gaussian() {
    if (have_spare_) {
      have_spare_ = false;
      return spare_;
    }
    double u1 = uniform01();
    while (u1 <= 0.0) u1 = uniform01();
    const double u2 = uniform01();
    const double r = std::sqrt(-2.0 * std::log(u1));
    const double a = 2.0 * std::numbers::pi * u2;
    spare_ = r * std::sin(a);
    have_spare_ = true;
    return r * std::cos(a);
  }

  // Index draw from proportions summing to 1; the last bucket absorbs the
  // rounding residue.
  int categorical(std::span<const double> proportions) {
    const double x = uniform01();
    double acc = 0.0;
    for (std::size_t i = 0; i + 1 < proportions.size(); ++i) {
      acc += proportions[i];
      if (x < acc) return static_cast<int>(i);
    }
    return static_cast<int>(proportions.size()) - 1;
  }

  std::uint64_t draw_count() const { return draws_; }

 private:
  std::mt19937_64 engine_;
  std::uint64_t draws_ = 0;
  bool have_spare_ = false;
  double spare_ = 0.0;
};

}  // namespace ofsim
