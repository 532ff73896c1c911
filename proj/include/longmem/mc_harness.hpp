#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "longmem/autocov.hpp"
#include "longmem/coeff_model.hpp"
#include "longmem/innovations.hpp"
#include "longmem/limit_laws.hpp"

namespace longmem {

// How the truncation order M is chosen per series length N.
//  automatic: choose_truncation(model, rel_tol), capped at `cap`
//  fixed:     M = value for every N
//  scaled:    M = value * N (self-similar truncation; keeps power-law rates exact)
struct TruncationPolicy {
  enum class Kind { automatic, fixed, scaled };
  Kind kind = Kind::automatic;
  double value = 4.0;
  double rel_tol = 1e-4;
  std::int64_t cap = std::int64_t(1) << 21;

  std::int64_t order_for(const CoefficientModel& model, std::int64_t n) const;
};

struct ComparisonSettings {
  std::int64_t limit_draws = 100000;
  double band_lo = 0.05;
  double band_hi = 0.95;
  int band_points = 19;
  double ks_threshold = 0.1;
  double qdist_threshold = 0.1;
  LimitOptions limit_opts;
};

struct ExperimentConfig {
  CoefficientModel coeff;
  InnovationModel innov;
  std::vector<std::int64_t> n_grid;  // strictly increasing
  std::int64_t reps = 1000;          // >= 100
  int h = 2;
  std::uint64_t master_seed = 0;
  std::optional<Regime> regime_override;
  ComparisonSettings cmp;
  TruncationPolicy trunc;
  int workers = 1;
};

void validate(const ExperimentConfig& config);

struct NResult {
  std::int64_t n = 0;
  std::int64_t m = 0;                // truncation order used
  Eigen::MatrixXd scaled_errors;     // R x (H+1)
  Eigen::VectorXd ks_per_lag;        // distance to the limit marginal
  Eigen::VectorXd qdist_per_lag;
};

struct ExperimentResult {
  RegimeReport regime;
  std::vector<NResult> per_n;
  LimitSample limit;
  // per lag: "improving" | "not-improving" | "inconclusive"
  std::vector<std::string> lag_verdicts;
  std::string verdict;  // worst lag verdict
  std::vector<std::string> notes;
};

// For each N: R replications of simulate -> sample_acov -> scale_errors
// (centered at the truncated-filter autocovariance), then KS and central-
// quantile distances against draws of the regime's limit law. The verdict is
// trend-based: distances non-increasing along the N grid and final KS below
// threshold. Refuses boundary regimes unless regime_override is set.
ExperimentResult run_convergence(const ExperimentConfig& config);

struct VarianceRatePoint {
  std::int64_t n = 0;
  std::int64_t m = 0;
  double variance = 0.0;  // MC variance of sum_{t<=N} xi_t(0)
};

struct VarianceRateResult {
  double slope = 0.0;
  double intercept = 0.0;
  std::vector<VarianceRatePoint> points;
  std::string note;
};

// MC variance of the off-diagonal sum N * r_{N,0} (via decompose) at each N,
// and its log-log slope. Expected: about 1 for d < 1/4 and 4d for d > 1/4.
// At d = 1/4 the note reports an N log N comparison alongside the power fit.
VarianceRateResult variance_rate_slope(const CoefficientModel& coeff,
                                       const InnovationModel& innov,
                                       const std::vector<std::int64_t>& n_grid,
                                       std::int64_t reps, std::uint64_t seed,
                                       const TruncationPolicy& trunc = {.kind = TruncationPolicy::Kind::scaled,
                                                                        .value = 3.0},
                                       int workers = 1);

struct LagInvarianceReport {
  bool trivial = false;           // H = 0
  Eigen::MatrixXd pairwise_ks;    // (H+1)^2, scaled errors at the largest N
  Eigen::MatrixXd correlations;   // cross-lag Pearson correlations
  double max_pairwise_ks = 0.0;
  double min_correlation = 1.0;
  bool pass = true;
  double ks_threshold = 0.1;
  double corr_threshold = 0.9;
};

// Region C only: scaled errors at different lags must share one limit draw,
// so pairwise KS distances are small and cross-lag correlations near 1.
LagInvarianceReport lag_invariance_check(const ExperimentConfig& config);

struct PhaseCell {
  InnovationModel innov;
  double d = 0.1;
};

struct PhaseCellResult {
  PhaseCell cell;
  RegimeReport regime;
  double slope = 0.0;      // fitted exponent of IQR(gamma_hat_0 - gamma_0) vs N
  double expected = 0.0;   // regime rate exponent
  double deviation = 0.0;  // slope - expected
  std::vector<std::int64_t> n_grid;
  std::vector<double> iqrs;
};

// Empirical rate map: per cell, regress log IQR of the unscaled lag-0 error
// on log N and compare with the classified exponent. Cells must avoid the
// regime boundaries by at least 0.02 in d.
std::vector<PhaseCellResult> phase_diagram(const std::vector<PhaseCell>& cells,
                                           const std::vector<std::int64_t>& n_grid,
                                           std::int64_t reps, std::uint64_t seed,
                                           const TruncationPolicy& trunc = {.kind = TruncationPolicy::Kind::scaled,
                                                                            .value = 4.0},
                                           int workers = 1);

}  // namespace longmem
