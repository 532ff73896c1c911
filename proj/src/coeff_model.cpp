#include "longmem/coeff_model.hpp"

#include <cmath>
#include <cstdio>
#include <string>

#include "longmem/errors.hpp"
#include "quadrature.hpp"

namespace longmem {

namespace {

// Compensated accumulator for the long direct sums.
struct Kahan {
  double s = 0.0, c = 0.0;
  void add(double v) {
    double y = v - c;
    double t = s + y;
    c = (t - s) - y;
    s = t;
  }
};

const PowerLawModel* as_power_law(const CoefficientModel& model) {
  return std::get_if<PowerLawModel>(&model);
}

}  // namespace

void validate(const CoefficientModel& model) {
  if (const auto* pl = as_power_law(model)) {
    if (!(pl->d > 0.0 && pl->d < 0.5)) throw Error("d must lie in (0, 0.5)");
    if (!(pl->c_d > 0.0)) throw Error("C_d must be positive");
    if (!std::isfinite(pl->psi0)) throw Error("psi0 must be finite");
  } else {
    const auto& ex = std::get<ExplicitModel>(model);
    if (ex.coeffs.empty()) throw Error("explicit coefficient list must be nonempty");
    for (double c : ex.coeffs)
      if (!std::isfinite(c)) throw Error("explicit coefficients must be finite");
  }
}

double psi(const CoefficientModel& model, std::int64_t j) {
  if (j < 0) return 0.0;
  if (const auto* pl = as_power_law(model)) {
    if (j == 0) return pl->psi0;
    double v = pl->c_d * std::pow(static_cast<double>(j), pl->d - 1.0);
    if (pl->l == SlowlyVarying::log_damped) v *= detail::lambda_log_damped(static_cast<double>(j));
    return v;
  }
  const auto& ex = std::get<ExplicitModel>(model);
  return j < static_cast<std::int64_t>(ex.coeffs.size()) ? ex.coeffs[static_cast<std::size_t>(j)]
                                                         : 0.0;
}

Eigen::VectorXd psi_block(const CoefficientModel& model, std::int64_t j0, std::int64_t count) {
  Eigen::VectorXd out(count);
  if (const auto* pl = as_power_law(model)) {
    const bool damped = pl->l == SlowlyVarying::log_damped;
    for (std::int64_t i = 0; i < count; ++i) {
      std::int64_t j = j0 + i;
      if (j < 0) {
        out[i] = 0.0;
      } else if (j == 0) {
        out[i] = pl->psi0;
      } else {
        double x = static_cast<double>(j);
        double v = pl->c_d * std::pow(x, pl->d - 1.0);
        if (damped) v *= detail::lambda_log_damped(x);
        out[i] = v;
      }
    }
    return out;
  }
  for (std::int64_t i = 0; i < count; ++i) out[i] = psi(model, j0 + i);
  return out;
}

namespace {

// gamma_h / sigma2 for a power-law model: psi0 cross term, direct sum to M,
// Euler-Maclaurin completion of the remainder. Returns the per-lag values and
// the worst-case absolute bound on the completion error.
struct PowerLawAcov {
  Eigen::VectorXd values;  // sum_{j>=0} psi(j) psi(j+h)
  double bound = 0.0;
};

PowerLawAcov power_law_acov(const PowerLawModel& pl, int H, std::int64_t M) {
  const bool damped = pl.l == SlowlyVarying::log_damped;
  Eigen::VectorXd psis(M + H + 1);
  psis[0] = 0.0;  // j = 0 handled separately through psi0
  for (std::int64_t j = 1; j <= M + H; ++j) {
    double x = static_cast<double>(j);
    double v = std::pow(x, pl.d - 1.0);
    if (damped) v *= detail::lambda_log_damped(x);
    psis[j] = v;
  }
  PowerLawAcov out;
  out.values.resize(H + 1);
  const double c2 = pl.c_d * pl.c_d;
  for (int h = 0; h <= H; ++h) {
    Kahan acc;
    for (std::int64_t j = 1; j <= M; ++j) acc.add(psis[j] * psis[j + h]);
    double head = pl.psi0 * (h == 0 ? pl.psi0 : pl.c_d * psis[h]);
    auto tail = detail::power_pair_tail(pl.d - 1.0, pl.d - 1.0, static_cast<double>(h),
                                        static_cast<double>(M + 1), damped);
    out.values[h] = head + c2 * (acc.s + tail.value);
    out.bound = std::max(out.bound, c2 * tail.bound);
  }
  return out;
}

}  // namespace

AcovSequence theoretical_acov(const CoefficientModel& model, double sigma2, int H,
                              double rel_tol) {
  validate(model);
  if (!(sigma2 > 0.0)) throw Error("sigma2 must be positive");
  if (H < 0) throw Error("H must be nonnegative");
  if (!(rel_tol > 0.0)) throw Error("rel_tol must be positive");

  AcovSequence seq;
  seq.sigma2 = sigma2;

  if (const auto* ex = std::get_if<ExplicitModel>(&model)) {
    const auto L = static_cast<std::int64_t>(ex->coeffs.size());
    seq.values.resize(H + 1);
    for (int h = 0; h <= H; ++h) {
      Kahan acc;
      for (std::int64_t j = 0; j + h < L; ++j) acc.add(ex->coeffs[j] * ex->coeffs[j + h]);
      seq.values[h] = sigma2 * acc.s;
    }
    seq.tail_bound = 0.0;
    seq.m_used = L - 1;
    return seq;
  }

  const auto& pl = std::get<PowerLawModel>(model);
  const std::int64_t cap = std::int64_t(1) << 22;
  for (std::int64_t M = std::int64_t(1) << 16;; M *= 2) {
    PowerLawAcov pa = power_law_acov(pl, H, M);
    double bound = sigma2 * pa.bound;
    if (bound <= rel_tol * sigma2 * pa.values[0] || M >= cap) {
      if (bound > rel_tol * sigma2 * pa.values[0]) {
        char msg[160];
        std::snprintf(msg, sizeof(msg),
                      "autocovariance tolerance unattainable within the iteration cap; "
                      "achieved relative bound %.3e",
                      bound / (sigma2 * pa.values[0]));
        throw Error(msg);
      }
      seq.values = sigma2 * pa.values;
      seq.tail_bound = bound;
      seq.m_used = M;
      return seq;
    }
  }
}

Eigen::VectorXd truncated_acov(const CoefficientModel& model, double sigma2, int H,
                               std::int64_t M) {
  validate(model);
  if (M < 0) throw Error("M must be nonnegative");
  Eigen::VectorXd psis = psi_block(model, 0, M + H + 1);
  Eigen::VectorXd out(H + 1);
  for (int h = 0; h <= H; ++h) {
    std::int64_t len = M + 1 - h;  // both factors inside the support 0..M
    out[h] = len > 0 ? sigma2 * psis.head(len).dot(psis.segment(h, len)) : 0.0;
  }
  return out;
}

LagWeightTable lag_product_weights(const CoefficientModel& model, int H,
                                   const Eigen::VectorXd& u, std::int64_t J,
                                   double rel_tol) {
  validate(model);
  if (u.size() != H + 1) throw Error("weight vector length must be H+1");
  if (J < 0) throw Error("J must be nonnegative");
  Eigen::VectorXd psis = psi_block(model, 0, J + H + 1);
  LagWeightTable table;
  table.per_lag.resize(H + 1, J + 1);
  for (int h = 0; h <= H; ++h)
    table.per_lag.row(h) =
        psis.head(J + 1).cwiseProduct(psis.segment(h, J + 1)).transpose();
  table.combined = table.per_lag.transpose() * u;
  table.lag_sums = theoretical_acov(model, 1.0, H, rel_tol).values;
  return table;
}

}  // namespace longmem
