#pragma once

#include <Eigen/Dense>
#include <cstdint>

#include "longmem/coeff_model.hpp"
#include "longmem/innovations.hpp"

namespace longmem {

enum class SimMethod { direct, fft };

// One simulated stretch X_1..X_{N+H} of the truncated moving average
// X_t = sum_{j=0}^{M} psi(j) Z_{t-j}, with the innovations Z_{1-M}..Z_{N+H}
// retained for decomposition tests.
struct SeriesSample {
  Eigen::VectorXd values;       // X_1..X_{N+H}
  Eigen::VectorXd innovations;  // Z_{1-M}..Z_{N+H}; index i holds Z_{1-M+i}
  std::int64_t n = 0;
  int h = 0;
  std::int64_t m = 0;
  CoefficientModel coeff;
  InnovationModel innov;
  std::uint64_t seed = 0;
  SimMethod method = SimMethod::fft;
};

// Smallest power-of-two M whose residual variance sigma^2 * sum_{j>M} psi(j)^2
// is at most rel_tol * gamma_0, using the integral tail bound
// C_d^2 M^(2d-1) / (1-2d). Returned as a double because M can exceed the
// 64-bit range for d near 1/2. Explicit models return their support length.
double choose_truncation(const CoefficientModel& model, double rel_tol = 1e-4);

// Draws M+N+H innovations from one seeded stream and convolves with
// psi(0..M). The direct and fft methods agree to 1e-10 relative error.
SeriesSample simulate_linear(const CoefficientModel& coeff, const InnovationModel& innov,
                             std::int64_t N, int H, std::int64_t M, std::uint64_t seed,
                             SimMethod method = SimMethod::fft);

// Same convolution applied to caller-supplied innovations Z_{1-M}..Z_{N+H}
// (length must be M+N+H).
SeriesSample simulate_from_innovations(const CoefficientModel& coeff,
                                       const InnovationModel& innov,
                                       const Eigen::VectorXd& innovations, std::int64_t N,
                                       int H, std::int64_t M,
                                       SimMethod method = SimMethod::fft);

// Reusable FFT convolver: fixes the kernel spectrum once, then maps inputs x
// to the linear convolution (kernel * x). Used for repeated simulations with
// the same filter. P (the transform size) must be a power of two at least
// kernel_len + x_len - 1 for a fully linear result; the simulation path uses
// the smaller next_pow2(M+N+H) since only indices >= M are read (wrap-around
// lands strictly below M).
class FftConvolver {
 public:
  FftConvolver(const Eigen::VectorXd& kernel, std::int64_t fft_size);
  // Returns the first `out_len` entries of the circular convolution.
  Eigen::VectorXd apply(const Eigen::VectorXd& x, std::int64_t out_len) const;
  std::int64_t fft_size() const { return p_; }

 private:
  std::int64_t p_;
  Eigen::VectorXcd kernel_spectrum_;
};

std::int64_t next_pow2(std::int64_t n);

}  // namespace longmem
