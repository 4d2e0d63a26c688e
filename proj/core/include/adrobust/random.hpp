#pragma once

#include <cstddef>
#include <cstdint>
#include <initializer_list>
#include <random>
#include <string_view>
#include <vector>

namespace adrobust {

std::uint64_t splitmix64(std::uint64_t x) noexcept;

/// Order-sensitive 64-bit combination of several words.
std::uint64_t mix_seed(std::initializer_list<std::uint64_t> words) noexcept;

/// FNV-1a, 64-bit.
std::uint64_t hash_string(std::string_view s) noexcept;

/// mt19937_64 with distribution code of our own, so that sampled values are
/// identical across standard library implementations.
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : engine_(seed) {}

  std::uint64_t next() { return engine_(); }
  /// Uniform integer in [lo, hi], inclusive.
  std::int64_t uniform_int(std::int64_t lo, std::int64_t hi);
  /// Uniform double in [lo, hi).
  double uniform_real(double lo, double hi);
  double unit() { return static_cast<double>(next() >> 11) * 0x1.0p-53; }
  bool bernoulli(double p) { return unit() < p; }
  /// Standard normal via Box-Muller.
  double normal();

 private:
  std::mt19937_64 engine_;
  bool has_spare_ = false;
  double spare_ = 0.0;
};

/// `count` distinct indices from [0, population), sorted ascending.
std::vector<std::size_t> sample_without_replacement(std::size_t population, std::size_t count,
                                                    Rng& rng);

}  // namespace adrobust
