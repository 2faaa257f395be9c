#pragma once

#include <array>
#include <cstdint>
#include <string_view>

namespace qgen {

// xoshiro256** (Blackman & Vigna), seeded by expanding a 64-bit seed through
// splitmix64. The algorithm is fixed so sampled contexts and mock outputs are
// identical across platforms and implementations.
class Xoshiro256StarStar {
 public:
  using result_type = std::uint64_t;

  static constexpr std::string_view kAlgorithmName = "xoshiro256**/splitmix64";

  explicit Xoshiro256StarStar(std::uint64_t seed);

  std::uint64_t next();
  std::uint64_t operator()() { return next(); }

  // Uniform in [0, bound) by rejection; bound must be non-zero.
  std::uint64_t bounded(std::uint64_t bound);

  static constexpr result_type min() { return 0; }
  static constexpr result_type max() { return ~result_type{0}; }

 private:
  std::array<std::uint64_t, 4> state_;
};

std::uint64_t splitmix64(std::uint64_t& state);

// 64-bit FNV-1a.
std::uint64_t fnv1a64(std::string_view bytes, std::uint64_t basis = 0xcbf29ce484222325ULL);

}  // namespace qgen
