#include "longmem/autocov.hpp"

#include <cmath>

#include "longmem/errors.hpp"
#include "longmem/innovations.hpp"

namespace longmem {

AcovEstimate sample_acov(const Eigen::VectorXd& x, std::int64_t N, int H, bool center) {
  if (N < 1) throw Error("N must be positive");
  if (H < 0) throw Error("H must be nonnegative");
  if (x.size() < N + H) throw Error("series too short for the requested N and H");
  AcovEstimate est;
  est.n = N;
  est.values.resize(H + 1);
  if (center) {
    Eigen::VectorXd xc = x.head(N + H).array() - x.head(N).mean();
    for (int h = 0; h <= H; ++h)
      est.values[h] = xc.head(N).dot(xc.segment(h, N)) / static_cast<double>(N);
    return est;
  }
  for (int h = 0; h <= H; ++h)
    est.values[h] = x.head(N).dot(x.segment(h, N)) / static_cast<double>(N);
  return est;
}

AcovEstimate sample_acov(const SeriesSample& series, int H, bool center) {
  if (H > series.h) throw Error("lag bound exceeds the simulated horizon");
  return sample_acov(series.values, series.n, H, center);
}

namespace {

// S_t(h) = sum_{i=0}^{m-h} psi(i) psi(i+h) zsq_{t-i} for t = 1..N, as the
// convolution read at index m+t-1. Direct evaluation for small problems, FFT
// otherwise (the circular fold lands strictly below index m).
Eigen::VectorXd diagonal_filter_sum(const Eigen::VectorXd& q, const Eigen::VectorXd& zsq,
                                    std::int64_t m, std::int64_t N) {
  Eigen::VectorXd out(N);
  if (m * N <= (std::int64_t(1) << 24)) {
    Eigen::VectorXd rev = q.reverse();
    const std::int64_t L = q.size();
    // zsq index of Z_{t-i} is t-i-1+m; the reversed kernel aligns the window
    for (std::int64_t t = 1; t <= N; ++t)
      out[t - 1] = rev.dot(zsq.segment(t + m - L, L));
    return out;
  }
  std::int64_t P = next_pow2(zsq.size());
  FftConvolver conv(q, P);
  Eigen::VectorXd y = conv.apply(zsq, std::min<std::int64_t>(P, m + N));
  for (std::int64_t t = 1; t <= N; ++t) out[t - 1] = y[m + t - 1];
  return out;
}

}  // namespace

Decomposition decompose(const SeriesSample& series, const CoefficientModel& coeff,
                        const Eigen::VectorXd& u, int H) {
  if (H < 0) throw Error("H must be nonnegative");
  if (H > series.h) throw Error("lag bound exceeds the simulated horizon");
  if (u.size() != H + 1) throw Error("weight vector length must be H+1");

  const std::int64_t m = series.m;
  const std::int64_t N = series.n;
  const Eigen::VectorXd& z = series.innovations;
  const double sigma2 = moments(series.innov).sigma2;

  // the simulated filter stops at m: indices beyond it contribute nothing
  Eigen::VectorXd psis = psi_block(coeff, 0, m + H + 1);
  psis.tail(H).setZero();

  Decomposition dec;
  dec.u = u;
  dec.gamma_trunc = truncated_acov(coeff, sigma2, H, m);
  dec.d_terms.resize(H + 1);
  dec.r_terms.resize(H + 1);

  // prefix sums of Z_t^2 - sigma^2 over the whole innovation window
  Eigen::VectorXd w(z.size() + 1);
  w[0] = 0.0;
  for (Eigen::Index i = 0; i < z.size(); ++i) w[i + 1] = w[i] + (z[i] * z[i] - sigma2);

  Eigen::VectorXd zsq = z.array().square();

  for (int h = 0; h <= H; ++h) {
    // diagonal part: sum over i of psi(i) psi(i+h) * sum_t (Z_{t-i}^2 - sigma^2)
    double dh = 0.0;
    for (std::int64_t i = 0; i <= m; ++i) {
      // Z_{t-i} occupies indices (m-i) .. (m-i+N-1)
      dh += psis[i] * psis[i + h] * (w[m - i + N] - w[m - i]);
    }
    dec.d_terms[h] = dh / static_cast<double>(N);

    // off-diagonal part, computed pointwise per t so the decomposition
    // identity checks two independent computations against each other
    Eigen::VectorXd q = psis.head(m + 1).cwiseProduct(psis.segment(h, m + 1));
    Eigen::VectorXd st = diagonal_filter_sum(q, zsq, m, N);
    double rh = 0.0;
    for (std::int64_t t = 1; t <= N; ++t)
      rh += series.values[t - 1] * series.values[t + h - 1] - st[t - 1];
    dec.r_terms[h] = rh / static_cast<double>(N);
  }

  dec.big_d = u.dot(dec.d_terms);
  dec.big_r = u.dot(dec.r_terms);
  return dec;
}

Eigen::VectorXd xi_series(const SeriesSample& series, const CoefficientModel& coeff) {
  const std::int64_t m = series.m;
  const std::int64_t N = series.n;
  Eigen::VectorXd psis = psi_block(coeff, 0, m + 1);
  Eigen::VectorXd q = psis.array().square();
  Eigen::VectorXd zsq = series.innovations.array().square();
  Eigen::VectorXd st = diagonal_filter_sum(q, zsq, m, N);
  Eigen::VectorXd xi(N);
  for (std::int64_t t = 0; t < N; ++t)
    xi[t] = series.values[t] * series.values[t] - st[t];
  return xi;
}

Eigen::VectorXd scale_errors(const AcovEstimate& est, const Eigen::VectorXd& gamma,
                             const RegimeReport& regime, std::optional<double> a_n) {
  if (est.values.size() != gamma.size())
    throw Error("estimate and autocovariance lengths differ");
  const double N = static_cast<double>(est.n);
  double factor = 0.0;
  switch (regime.region) {
    case Regime::A:
      factor = std::sqrt(N);
      break;
    case Regime::B:
      if (!a_n) throw Error("a_N required for region B scaling");
      factor = N / (*a_n * *a_n);
      break;
    case Regime::C:
      factor = std::pow(N, 1.0 - 2.0 * regime.d);
      break;
    case Regime::boundary:
      factor = std::pow(N, -regime.rate_exponent);
      break;
  }
  return factor * (est.values - gamma);
}

}  // namespace longmem
