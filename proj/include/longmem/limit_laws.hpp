#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <map>
#include <string>

#include "longmem/coeff_model.hpp"
#include "longmem/innovations.hpp"
#include "longmem/regime.hpp"

namespace longmem {

struct MomentClass {
  bool finite_fourth = true;
  double alpha = 0.0;  // tail index, meaningful when finite_fourth is false
};

MomentClass moment_class_of(const InnovationModel& model);

// Region A for (finite fourth moment, d < 1/4); B for (heavy alpha, d < 1/alpha);
// C for (heavy, d > 1/alpha) or (finite fourth, d > 1/4). At d = 1/alpha or
// d = 1/4 the report flags the boundary, with the caveat quoting the extra
// condition a_N^{-4} N ln N -> 0 under which the faster rate still applies.
RegimeReport classify_regime(const MomentClass& mc, double d);

// Convenience: regime for a concrete model pair. Explicit coefficient models
// have summable covariances, so they classify as A or B by moment class alone.
RegimeReport classify_for(const CoefficientModel& coeff, const InnovationModel& innov);

// Limit covariance of sqrt(N) (gamma_hat - gamma) in region A:
// Sigma(h,h') = (eta - 3) gamma_h gamma_h' + sum_k [gamma_k gamma_{k-h+h'} +
// gamma_{k+h'} gamma_{k-h}], k over all integers, truncated with tail bound
// <= tol (absolute). Throws "covariance series diverges" for PowerLaw d >= 1/4.
Eigen::MatrixXd gaussian_limit_cov(const CoefficientModel& coeff, double sigma2, double eta,
                                   int H, double tol);

// Definition-based sampler for the alpha/2-stable limit of the diagonal part:
// each draw is a_{N_big}^{-2} sum_{t=1}^{N_big} (Z_t^2 - b_{N_big}). The
// centering uses the truncated second moment of the centered variable (it
// coincides with truncated_b for symmetric models), which keeps the draw law
// independent of N_big.
Eigen::VectorXd sample_stable_S(const InnovationModel& model, std::int64_t n,
                                std::uint64_t seed, std::int64_t n_big = 100000);

struct RosenblattSample {
  Eigen::VectorXd draws;
  double d = 0.0;
  std::int64_t grid = 0;        // N_g
  double span = 0.0;            // K
  double discarded_mass = 0.0;  // L2 kernel mass outside the truncated domain
};

// Discretized Rosenblatt marginal with C_d = 1: each draw is the off-diagonal
// Gaussian quadratic form sum_{k != k'} C_{N_g,0}(k,k') (g_k/sqrt(N_g)) (g_k'/sqrt(N_g)),
// k, k' in [-K*N_g, N_g], with the pure kernel psi(j) = j^(d-1) (psi(j<=0)=0).
// Requires 1/4 < d < 1/2, N_g >= 100, K >= 1.
RosenblattSample sample_rosenblatt(double d, std::int64_t grid, double span, std::int64_t n,
                                   std::uint64_t seed);

struct LimitOptions {
  std::int64_t stable_n_big = 100000;
  std::int64_t rosenblatt_grid = 1000;
  double rosenblatt_span = 5.0;
  double cov_tol = 1e-3;  // absolute tail tolerance for gaussian_limit_cov
};

struct LimitSample {
  Eigen::MatrixXd draws;  // n x (H+1)
  std::string law;        // GaussianVector | StableShifted | RosenblattScaled
  std::map<std::string, double> params;
};

// Region A: i.i.d. Gaussian vectors with covariance gaussian_limit_cov.
// Region B: (S - alpha/(alpha-2)) times the per-lag vector (sum_j psi(j)psi(j+h))_h.
// Region C: sigma^2 C_d^2 U_d(1), the same draw in every lag column.
LimitSample sample_limit(const RegimeReport& regime, const CoefficientModel& coeff,
                         const InnovationModel& innov, int H, std::int64_t n,
                         std::uint64_t seed, const LimitOptions& opts = {});

// --- kernel diagnostics for the Rosenblatt discretization ---

// Var U_d(1) = 2 * integral of f^2 over the full domain, in closed form:
// 4 B(d, 1-2d)^2 / (4d (4d-1)).
double rosenblatt_variance_full(double d);

// 2 * integral of f^2 over the truncated domain [-K, 1]^2, by quadrature.
double rosenblatt_variance_truncated(double d, double span);

// Exact second moment of the discretized off-diagonal form:
// 2 * sum_{k != k'} C_{N,0}(k,k')^2 / N^2, by an FFT autocorrelation identity
// (independent of the sampler's per-draw convolution path).
double rosenblatt_variance_discrete(double d, std::int64_t grid, double span);

// L2 distance of the discretized kernel from the continuum kernel over the
// truncated domain: integral of (f_{N,0} - f)^2 over [-K, 1] x [-K, 1].
double kernel_l2_gap(double d, std::int64_t grid, double span);

// integral of (f_{N,h} - f_{N,0})^2, h >= 1, over the same domain.
double kernel_lag_gap(double d, std::int64_t grid, double span, int h);

}  // namespace longmem
