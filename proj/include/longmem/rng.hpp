#pragma once

#include <cmath>
#include <cstdint>
#include <numbers>
#include <random>

namespace longmem {

// splitmix64 finalizer; good avalanche, cheap, and stable across platforms.
inline std::uint64_t mix64(std::uint64_t z) {
  z += 0x9E3779B97F4A7C15ull;
  z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ull;
  z = (z ^ (z >> 27)) * 0x94D049BB133111EBull;
  return z ^ (z >> 31);
}

// Derives an independent stream seed from a master seed and one or two
// indices (e.g. N index and replication index). The derivation is a pure
// hash, so the resulting streams do not depend on scheduling order.
inline std::uint64_t derive_seed(std::uint64_t master, std::uint64_t a) {
  return mix64(mix64(master) ^ mix64(a ^ 0x7F4A7C159E3779B9ull));
}

inline std::uint64_t derive_seed(std::uint64_t master, std::uint64_t a, std::uint64_t b) {
  return mix64(derive_seed(master, a) ^ mix64(b ^ 0x94D049BB133111EBull));
}

// Sequential random stream with explicit, platform-independent draw
// algorithms. std::mt19937_64 supplies the raw bits; all real-valued
// transformations are written out here so that a seed pins the output
// exactly, independent of standard-library internals.
class RandomStream {
 public:
  explicit RandomStream(std::uint64_t seed) : eng_(seed) {}

  std::uint64_t bits() { return eng_(); }

  // Uniform on the open interval (0, 1); never returns 0 or 1.
  double uniform_open() { return (static_cast<double>(eng_() >> 11) + 0.5) * 0x1.0p-53; }

  // Standard normal via Box-Muller; consumes two uniforms per pair.
  double normal() {
    if (has_spare_) {
      has_spare_ = false;
      return spare_;
    }
    double u1 = uniform_open();
    double u2 = uniform_open();
    double r = std::sqrt(-2.0 * std::log(u1));
    double th = 2.0 * std::numbers::pi * u2;
    spare_ = r * std::sin(th);
    has_spare_ = true;
    return r * std::cos(th);
  }

  // Student t with nu degrees of freedom (Bailey's polar method).
  double student_t(double nu) {
    for (;;) {
      double u = 2.0 * uniform_open() - 1.0;
      double v = 2.0 * uniform_open() - 1.0;
      double w = u * u + v * v;
      if (w >= 1.0 || w == 0.0) continue;
      return u * std::sqrt(nu * (std::pow(w, -2.0 / nu) - 1.0) / w);
    }
  }

 private:
  std::mt19937_64 eng_;
  bool has_spare_ = false;
  double spare_ = 0.0;
};

}  // namespace longmem
