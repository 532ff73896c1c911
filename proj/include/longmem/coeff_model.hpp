#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <variant>
#include <vector>

namespace longmem {

enum class SlowlyVarying { constant, log_damped };

// psi(j) = C_d * j^(d-1) * lambda(j) for j >= 1, psi(0) = psi0.
// lambda == 1 for the constant selector; the log-damped selector uses
// lambda(j) = 1 / (1 + 1/log(e + j)), which still tends to 1 at infinity.
struct PowerLawModel {
  double d = 0.3;
  double c_d = 1.0;
  SlowlyVarying l = SlowlyVarying::constant;
  double psi0 = 1.0;
};

struct ExplicitModel {
  std::vector<double> coeffs;  // coeffs[j] = psi(j); zero beyond the array
};

using CoefficientModel = std::variant<PowerLawModel, ExplicitModel>;

// Throws Error on out-of-range parameters ("d must lie in (0, 0.5)" etc.).
void validate(const CoefficientModel& model);

double psi(const CoefficientModel& model, std::int64_t j);

// psi(j0), psi(j0+1), ..., psi(j0+count-1) as a dense vector.
Eigen::VectorXd psi_block(const CoefficientModel& model, std::int64_t j0, std::int64_t count);

struct AcovSequence {
  Eigen::VectorXd values;  // gamma_h, h = 0..H
  double sigma2 = 1.0;
  double tail_bound = 0.0;  // bound on the truncation error of the infinite sums
  std::int64_t m_used = 0;  // direct-summation order
};

// gamma_h = sigma2 * sum_{j>=0} psi(j)psi(j+h), h = 0..H, with truncation
// error at most rel_tol * gamma_0. Direct summation to order M plus an
// integral tail estimate; throws if the tolerance cannot be met within the
// iteration cap, naming the achieved bound.
AcovSequence theoretical_acov(const CoefficientModel& model, double sigma2, int H,
                              double rel_tol);

// Exact finite-support autocovariance of the truncated filter psi(0..M):
// gamma_h^(M) = sigma2 * sum_{j=0}^{M-h} psi(j)psi(j+h). This is the true
// autocovariance of a series simulated with truncation order M.
Eigen::VectorXd truncated_acov(const CoefficientModel& model, double sigma2, int H,
                               std::int64_t M);

struct LagWeightTable {
  Eigen::MatrixXd per_lag;   // (H+1) x (J+1), entry (h, j) = c_j(h) = psi(j)psi(j+h)
  Eigen::VectorXd combined;  // c_j = sum_h u_h c_j(h)
  Eigen::VectorXd lag_sums;  // sum_{j>=0} psi(j)psi(j+h) = gamma_h / sigma2 (tail-corrected)
};

// Lag-product weight table c_j(h) for j = 0..J. lag_sums carries the same
// tail-correction contract as theoretical_acov (relative tolerance rel_tol).
LagWeightTable lag_product_weights(const CoefficientModel& model, int H,
                                   const Eigen::VectorXd& u, std::int64_t J,
                                   double rel_tol = 1e-9);

}  // namespace longmem
