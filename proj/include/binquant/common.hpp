#pragma once

#include <cmath>
#include <cstdint>
#include <numbers>
#include <random>
#include <span>
#include <stdexcept>
#include <string>

namespace binquant {

// Relative inflation used when a step size must strictly cross a sign kink;
// at the exact crossing the flip would depend on the sign convention.
inline constexpr double kEpsFlip = 0x1p-20;

// One sign convention everywhere: sgn(0) = +1.
inline double sgn(double x) { return x < 0.0 ? -1.0 : 1.0; }

// Bad user-facing configuration (CLI exit code 2).
struct ConfigError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

enum class IoCode {
  OpenFailed,
  WrongMagic,
  Truncated,
  DimMismatch,
  BadVersion,
  LengthMismatch,
};

// File / format trouble (CLI exit code 3). `code` tells the cases apart.
struct IoError : std::runtime_error {
  IoCode code;
  IoError(IoCode c, const std::string& msg) : std::runtime_error(msg), code(c) {}
};

// A runtime check failed: non-finite loss, property violations, ... (CLI exit code 1).
struct VerifyError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// Non-finite values produced inside a numeric pass.
struct NumericError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

inline std::mt19937_64 make_rng(std::uint64_t seed) { return std::mt19937_64(seed); }

// splitmix64 finalizer; used to derive independent streams from (seed, index).
inline std::uint64_t mix64(std::uint64_t z) {
  z += 0x9E3779B97F4A7C15ull;
  z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ull;
  z = (z ^ (z >> 27)) * 0x94D049BB133111EBull;
  return z ^ (z >> 31);
}

// Uniform in [0,1).  std::uniform_real_distribution produces implementation-defined
// sequences; this bit-twiddle is identical on every standard library.
inline double next_uniform(std::mt19937_64& rng) {
  return double(rng() >> 11) * 0x1p-53;
}

inline double next_uniform(std::mt19937_64& rng, double lo, double hi) {
  return lo + (hi - lo) * next_uniform(rng);
}

// Box-Muller standard normal, same portability rationale as next_uniform.
inline double next_normal(std::mt19937_64& rng) {
  double u1 = next_uniform(rng);
  while (u1 == 0.0) u1 = next_uniform(rng);
  double u2 = next_uniform(rng);
  return std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * std::numbers::pi * u2);
}

inline void check_finite(std::span<const double> v, const char* what) {
  for (std::size_t i = 0; i < v.size(); ++i) {
    if (!std::isfinite(v[i])) {
      throw std::invalid_argument(std::string(what) + ": non-finite element at index " +
                                  std::to_string(i));
    }
  }
}

}  // namespace binquant
