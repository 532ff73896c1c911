#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <optional>

#include "longmem/coeff_model.hpp"
#include "longmem/process_sim.hpp"
#include "longmem/regime.hpp"

namespace longmem {

struct AcovEstimate {
  Eigen::VectorXd values;  // gamma_hat_h, h = 0..H
  std::int64_t n = 0;
};

// gamma_hat_h = (1/N) sum_{t=1}^{N} X_t X_{t+h}. No mean subtraction by
// default (the model is zero-mean); `center` subtracts the sample mean of
// X_1..X_N first.
AcovEstimate sample_acov(const Eigen::VectorXd& x, std::int64_t N, int H, bool center = false);
AcovEstimate sample_acov(const SeriesSample& series, int H, bool center = false);

// Split of the weighted estimation error sum_h u_h (gamma_hat_h - gamma_h)
// into the diagonal part D_N (squared innovations) and the off-diagonal part
// R_N (cross products Z_{t-i} Z_{t+h-j}, i != j+h). gamma_h is the exact
// autocovariance of the series' truncated filter, so the identity
// D_N + R_N = sum_h u_h (gamma_hat_h - gamma_h) is exact up to rounding.
struct Decomposition {
  Eigen::VectorXd d_terms;      // d_{N,h}
  Eigen::VectorXd r_terms;      // r_{N,h}
  Eigen::VectorXd gamma_trunc;  // gamma_h of the truncated filter
  Eigen::VectorXd u;
  double big_d = 0.0;  // D_N = sum_h u_h d_{N,h}
  double big_r = 0.0;  // R_N = sum_h u_h r_{N,h}
};

Decomposition decompose(const SeriesSample& series, const CoefficientModel& coeff,
                        const Eigen::VectorXd& u, int H);

// Off-diagonal summand xi_t = X_t^2 - sum_j psi(j)^2 Z_{t-j}^2 for
// t = 1..N. sum_t xi_t equals N * r_{N,0}.
Eigen::VectorXd xi_series(const SeriesSample& series, const CoefficientModel& coeff);

// (gamma_hat_h - gamma_h) scaled by the regime's normalization:
// sqrt(N) in region A, N / a_N^2 in region B (a_N required there),
// N^(1-2d) in region C. Boundary reports scale by N^(-rate_exponent).
Eigen::VectorXd scale_errors(const AcovEstimate& est, const Eigen::VectorXd& gamma,
                             const RegimeReport& regime,
                             std::optional<double> a_n = std::nullopt);

}  // namespace longmem
