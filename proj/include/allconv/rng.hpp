#pragma once

#include <cmath>
#include <cstdint>
#include <random>
#include <string_view>

namespace allconv {

namespace detail {

inline std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9E3779B97F4A7C15ull;
  x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ull;
  x = (x ^ (x >> 27)) * 0x94D049BB133111EBull;
  return x ^ (x >> 31);
}

inline std::uint64_t fnv1a64(std::string_view s) {
  std::uint64_t h = 0xCBF29CE484222325ull;
  for (unsigned char c : s) {
    h ^= c;
    h *= 0x100000001B3ull;
  }
  return h;
}

}  // namespace detail

// Named deterministic pseudorandom stream. All variates are derived from the
// raw 64-bit output of a seeded mt19937_64, so identical seed + identical
// call order yields bitwise-identical results on any platform.
class RngStream {
 public:
  explicit RngStream(std::uint64_t seed, std::string_view name = {})
      : base_seed_(detail::splitmix64(seed ^ detail::fnv1a64(name))), gen_(base_seed_) {}

  // Independent child stream; does not consume parent state.
  RngStream fork(std::string_view name) const {
    return RngStream(base_seed_, name);
  }
  RngStream fork(std::uint64_t salt) const {
    return RngStream(base_seed_ ^ detail::splitmix64(salt + 0x517CC1B727220A95ull));
  }

  std::uint64_t next_u64() { return gen_(); }

  // Uniform in [0, 1): 24 explicit mantissa bits.
  float uniform() {
    return static_cast<float>(next_u64() >> 40) * 0x1.0p-24f;
  }

  float uniform(float lo, float hi) { return lo + (hi - lo) * uniform(); }

  // Uniform in [0, 1) at double precision.
  double uniform_double() {
    return static_cast<double>(next_u64() >> 11) * 0x1.0p-53;
  }

  // Standard normal via Box-Muller; second variate of each pair is cached.
  double normal() {
    if (has_cached_) {
      has_cached_ = false;
      return cached_;
    }
    double u1 = uniform_double();
    double u2 = uniform_double();
    if (u1 < 1e-300) u1 = 1e-300;
    const double r = std::sqrt(-2.0 * std::log(u1));
    const double theta = 2.0 * 3.14159265358979323846 * u2;
    cached_ = r * std::sin(theta);
    has_cached_ = true;
    return r * std::cos(theta);
  }

  // Uniform integer in [0, n), n > 0.
  std::uint64_t below(std::uint64_t n) {
    return static_cast<std::uint64_t>(
        (static_cast<unsigned __int128>(next_u64()) * n) >> 64);
  }

  template <typename It>
  void shuffle(It first, It last) {
    const auto n = static_cast<std::uint64_t>(last - first);
    for (std::uint64_t i = n; i > 1; --i) {
      const std::uint64_t j = below(i);
      std::swap(first[i - 1], first[j]);
    }
  }

  std::uint64_t base_seed() const { return base_seed_; }

 private:
  std::uint64_t base_seed_;
  std::mt19937_64 gen_;
  bool has_cached_ = false;
  double cached_ = 0.0;
};

}  // namespace allconv
