#pragma once

#include <cstdint>
#include <string>
#include <string_view>
#include <vector>

namespace evostmt {

// Deterministic RNG with a fixed cross-platform stream (SplitMix64).
// std::mt19937 + standard distributions are implementation-defined, which
// would break byte-identical log reproduction.
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : state_(seed) {}

  std::uint64_t next_u64() {
    std::uint64_t z = (state_ += 0x9E3779B97F4A7C15ull);
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ull;
    z = (z ^ (z >> 27)) * 0x94D049BB133111EBull;
    return z ^ (z >> 31);
  }

  // Uniform in [0, n); n must be > 0. Rejection sampling keeps it unbiased.
  std::uint64_t uniform_index(std::uint64_t n) {
    const std::uint64_t limit = ~0ull - (~0ull % n + 1) % n;
    std::uint64_t x;
    do {
      x = next_u64();
    } while (x > limit);
    return x % n;
  }

  // Uniform double in [0, 1) with 53 bits of entropy.
  double uniform_real() { return static_cast<double>(next_u64() >> 11) * 0x1.0p-53; }

  bool bernoulli(double p) { return uniform_real() < p; }

  // Index drawn from a discrete distribution given nonnegative weights.
  std::size_t pick_weighted(const std::vector<double>& weights) {
    double total = 0.0;
    for (double w : weights) total += w;
    double r = uniform_real() * total;
    double acc = 0.0;
    for (std::size_t i = 0; i < weights.size(); ++i) {
      acc += weights[i];
      if (r < acc) return i;
    }
    return weights.size() - 1;
  }

  template <typename T>
  void shuffle(std::vector<T>& v) {
    for (std::size_t i = v.size(); i > 1; --i) {
      std::size_t j = uniform_index(i);
      std::swap(v[i - 1], v[j]);
    }
  }

  std::uint64_t fork_seed() { return next_u64(); }

 private:
  std::uint64_t state_;
};

inline std::uint64_t fnv1a64(std::string_view s, std::uint64_t h = 0xCBF29CE484222325ull) {
  for (unsigned char c : s) {
    h ^= c;
    h *= 0x100000001B3ull;
  }
  return h;
}

inline std::string hex64(std::uint64_t v) {
  static const char* digits = "0123456789abcdef";
  std::string out(16, '0');
  for (int i = 15; i >= 0; --i) {
    out[static_cast<std::size_t>(i)] = digits[v & 0xF];
    v >>= 4;
  }
  return out;
}

// Per-problem stream seed; independent of problem scheduling order.
inline std::uint64_t problem_seed(std::uint64_t run_seed, std::string_view problem_id) {
  std::uint64_t h = fnv1a64(problem_id);
  h ^= run_seed + 0x9E3779B97F4A7C15ull + (h << 6) + (h >> 2);
  return h;
}

}  // namespace evostmt
