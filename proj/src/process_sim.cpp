#include "longmem/process_sim.hpp"

#include <unsupported/Eigen/FFT>

#include <cmath>

#include "longmem/errors.hpp"

namespace longmem {

namespace {

// One FFT object per thread; plan tables are cached per transform size
// inside the instance, and instances are not shared across threads.
Eigen::FFT<double>& tls_fft() {
  thread_local Eigen::FFT<double> fft;
  return fft;
}

}  // namespace

std::int64_t next_pow2(std::int64_t n) {
  std::int64_t p = 1;
  while (p < n) p <<= 1;
  return p;
}

FftConvolver::FftConvolver(const Eigen::VectorXd& kernel, std::int64_t fft_size)
    : p_(fft_size) {
  if (p_ < kernel.size() || (p_ & (p_ - 1)) != 0)
    throw Error("fft size must be a power of two at least the kernel length");
  Eigen::VectorXd padded = Eigen::VectorXd::Zero(p_);
  padded.head(kernel.size()) = kernel;
  kernel_spectrum_.resize(p_);
  tls_fft().fwd(kernel_spectrum_.data(), padded.data(), p_);
}

Eigen::VectorXd FftConvolver::apply(const Eigen::VectorXd& x, std::int64_t out_len) const {
  if (x.size() > p_) throw Error("input longer than the transform size");
  if (out_len > p_) throw Error("requested output longer than the transform size");
  Eigen::VectorXd padded = Eigen::VectorXd::Zero(p_);
  padded.head(x.size()) = x;
  Eigen::VectorXcd spec(p_);
  auto& fft = tls_fft();
  fft.fwd(spec.data(), padded.data(), p_);
  spec.array() *= kernel_spectrum_.array();
  Eigen::VectorXd full(p_);
  fft.inv(full.data(), spec.data(), p_);
  return full.head(out_len);
}

double choose_truncation(const CoefficientModel& model, double rel_tol) {
  validate(model);
  if (!(rel_tol > 0.0)) throw Error("rel_tol must be positive");
  if (const auto* ex = std::get_if<ExplicitModel>(&model))
    return static_cast<double>(ex->coeffs.size());
  const auto& pl = std::get<PowerLawModel>(model);
  // residual variance bound: sigma^2 C_d^2 M^{2d-1} / (1-2d) <= rel_tol * gamma_0
  // (the damping factor only shrinks the tail, so the bound stays valid)
  double g0 = theoretical_acov(model, 1.0, 0, 1e-6).values[0];
  double c2 = pl.c_d * pl.c_d;
  double threshold = std::pow(c2 / ((1.0 - 2.0 * pl.d) * rel_tol * g0), 1.0 / (1.0 - 2.0 * pl.d));
  double e = std::max(0.0, std::ceil(std::log2(threshold)));
  // guard against a boundary rounding: exp2 must actually satisfy the bound
  double M = std::exp2(e);
  while (M >= 2.0 && c2 * std::pow(M / 2.0, 2.0 * pl.d - 1.0) / (1.0 - 2.0 * pl.d) <=
                         rel_tol * g0)
    M /= 2.0;
  while (c2 * std::pow(M, 2.0 * pl.d - 1.0) / (1.0 - 2.0 * pl.d) > rel_tol * g0) M *= 2.0;
  return M;
}

namespace {

SeriesSample convolve_series(const CoefficientModel& coeff, const InnovationModel& innov,
                             Eigen::VectorXd z, std::int64_t N, int H, std::int64_t M,
                             std::uint64_t seed, SimMethod method) {
  const std::int64_t total = M + N + H;
  Eigen::VectorXd psis = psi_block(coeff, 0, M + 1);
  SeriesSample s;
  s.values.resize(N + H);
  if (method == SimMethod::direct) {
    Eigen::VectorXd rev = psis.reverse();
    for (std::int64_t t = 1; t <= N + H; ++t)
      s.values[t - 1] = rev.dot(z.segment(t - 1, M + 1));
  } else {
    // Circular convolution on next_pow2(M+N+H): the linear result has length
    // 2M+N+H, and the folded excess lands at indices < M, strictly below the
    // first index we read (M).
    std::int64_t P = next_pow2(total);
    FftConvolver conv(psis, P);
    Eigen::VectorXd y = conv.apply(z, std::min(P, M + N + H));
    for (std::int64_t t = 1; t <= N + H; ++t) s.values[t - 1] = y[M + t - 1];
  }
  s.innovations = std::move(z);
  s.n = N;
  s.h = H;
  s.m = M;
  s.coeff = coeff;
  s.innov = innov;
  s.seed = seed;
  s.method = method;
  return s;
}

}  // namespace

SeriesSample simulate_linear(const CoefficientModel& coeff, const InnovationModel& innov,
                             std::int64_t N, int H, std::int64_t M, std::uint64_t seed,
                             SimMethod method) {
  validate(coeff);
  validate(innov);
  if (N < 1) throw Error("N must be positive");
  if (H < 0) throw Error("H must be nonnegative");
  if (M < 0) throw Error("M must be nonnegative");
  Eigen::VectorXd z = sample(innov, M + N + H, seed);
  return convolve_series(coeff, innov, std::move(z), N, H, M, seed, method);
}

SeriesSample simulate_from_innovations(const CoefficientModel& coeff,
                                       const InnovationModel& innov,
                                       const Eigen::VectorXd& innovations, std::int64_t N,
                                       int H, std::int64_t M, SimMethod method) {
  validate(coeff);
  validate(innov);
  if (N < 1) throw Error("N must be positive");
  if (H < 0) throw Error("H must be nonnegative");
  if (M < 0) throw Error("M must be nonnegative");
  if (innovations.size() != M + N + H)
    throw Error("innovation length must equal M+N+H");
  return convolve_series(coeff, innov, innovations, N, H, M, 0, method);
}

}  // namespace longmem
