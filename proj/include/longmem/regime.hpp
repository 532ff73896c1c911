#pragma once

#include <optional>
#include <string>

namespace longmem {

enum class Regime { A, B, C, boundary };

// Which limit law applies, and at what rate gamma_hat - gamma shrinks.
// rate_exponent: r such that the estimation error is of order N^r
//   (A: -1/2; B: 2/alpha - 1; C: 2d - 1).
// normalization names the scaling factor used by scale_errors.
struct RegimeReport {
  Regime region = Regime::A;
  double rate_exponent = -0.5;
  std::string normalization = "sqrtN";  // sqrtN | N_over_aN2 | N_power_1_minus_2d
  std::string caveats;
  double d = 0.0;
  std::optional<double> alpha;
};

inline const char* regime_name(Regime r) {
  switch (r) {
    case Regime::A: return "A";
    case Regime::B: return "B";
    case Regime::C: return "C";
    default: return "boundary";
  }
}

}  // namespace longmem
