#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <numbers>

#include "longmem/coeff_model.hpp"
#include "longmem/errors.hpp"

using namespace longmem;

namespace {

// gamma_0 = psi0^2 + zeta(2-2d) for C_d = 1, constant damping, sigma2 = 1.
// Independently frozen from a 25-digit zeta evaluation.
struct Gamma0Golden {
  double d;
  double value;
};
constexpr Gamma0Golden kGamma0[] = {
    {0.10, 2.8822296181028220467}, {0.15, 3.0542887568377512393},
    {0.20, 3.2857656656801298766}, {0.25, 3.6123753486854883433},
    {0.30, 4.1055472779775803998}, {0.35, 4.9319492118095442270},
    {0.40, 6.5915824411777507765}, {0.45, 11.584448464950809826},
};

// Lag 1 and 2 values frozen from an exact series oracle (binomial expansion
// of (j+h)^(d-1) against Hurwitz zetas, 30-digit arithmetic).
constexpr double kGamma1_d03 = 3.5128779556083669;
constexpr double kGamma2_d03 = 2.8386904383535961;
constexpr double kGamma1_d04 = 6.0163379025901479;
constexpr double kGamma2_d04 = 5.3704499452547955;

// Log-damped goldens at d = 0.3 (direct 30-digit summation + tail integral).
constexpr double kDampedGamma0_d03 = 2.4417971870779142;
constexpr double kDampedGamma1_d03 = 1.8241554853078380;

}  // namespace

TEST_CASE("psi evaluates power-law coefficients") {
  PowerLawModel pl{0.3, 1.0, SlowlyVarying::constant, 1.0};
  CHECK(psi(pl, 1) == 1.0);
  CHECK(psi(pl, 0) == 1.0);

  PowerLawModel scaled{0.25, 2.0, SlowlyVarying::constant, 1.0};
  CHECK(psi(scaled, 16) == doctest::Approx(0.25).epsilon(1e-15));

  PowerLawModel head{0.3, 1.0, SlowlyVarying::constant, -2.5};
  CHECK(psi(head, 0) == -2.5);
  CHECK(psi(head, -3) == 0.0);
}

TEST_CASE("psi evaluates explicit coefficients and zero beyond support") {
  ExplicitModel ex{{1.0, 0.5}};
  CHECK(psi(ex, 0) == 1.0);
  CHECK(psi(ex, 1) == 0.5);
  CHECK(psi(ex, 5) == 0.0);
}

TEST_CASE("log damping multiplies tail coefficients but not psi0") {
  PowerLawModel dm{0.3, 1.0, SlowlyVarying::log_damped, 1.0};
  const double lam1 = 1.0 / (1.0 + 1.0 / std::log(std::numbers::e + 1.0));
  CHECK(psi(dm, 1) == doctest::Approx(lam1).epsilon(1e-15));
  CHECK(psi(dm, 0) == 1.0);
  // damping < 1 everywhere, increasing toward 1
  CHECK(psi(dm, 1) < 1.0);
  double r10 = psi(dm, 10) / std::pow(10.0, dm.d - 1.0);
  double r1000 = psi(dm, 1000) / std::pow(1000.0, dm.d - 1.0);
  CHECK(r10 < r1000);
  CHECK(r1000 < 1.0);
}

TEST_CASE("psi_block matches pointwise psi including negative indices") {
  PowerLawModel pl{0.35, 1.7, SlowlyVarying::log_damped, 0.25};
  CoefficientModel m = pl;
  Eigen::VectorXd b = psi_block(m, -2, 8);
  for (int i = 0; i < 8; ++i) CHECK(b[i] == psi(m, -2 + i));

  CoefficientModel ex = ExplicitModel{{1.0, 0.5, 0.25}};
  Eigen::VectorXd be = psi_block(ex, 1, 4);
  CHECK(be[0] == 0.5);
  CHECK(be[1] == 0.25);
  CHECK(be[2] == 0.0);
  CHECK(be[3] == 0.0);
}

TEST_CASE("validate rejects out-of-range parameters") {
  CHECK_THROWS_WITH(validate(CoefficientModel{PowerLawModel{0.0, 1.0}}),
                    "d must lie in (0, 0.5)");
  CHECK_THROWS_WITH(validate(CoefficientModel{PowerLawModel{0.5, 1.0}}),
                    "d must lie in (0, 0.5)");
  CHECK_THROWS_WITH(validate(CoefficientModel{PowerLawModel{-0.1, 1.0}}),
                    "d must lie in (0, 0.5)");
  CHECK_THROWS_WITH(validate(CoefficientModel{PowerLawModel{0.3, 0.0}}),
                    "C_d must be positive");
  CHECK_THROWS_WITH(validate(CoefficientModel{ExplicitModel{{}}}),
                    "explicit coefficient list must be nonempty");
  CHECK_NOTHROW(validate(CoefficientModel{PowerLawModel{0.49, 2.0}}));
}

TEST_CASE("theoretical_acov handles finite-support filters exactly") {
  AcovSequence iid = theoretical_acov(ExplicitModel{{1.0}}, 2.0, 1, 1e-9);
  CHECK(iid.values[0] == 2.0);
  CHECK(iid.values[1] == 0.0);
  CHECK(iid.tail_bound == 0.0);

  // geometric filter 0.5^j truncated at j = 60: gamma_0 = 4/3, gamma_1 = 2/3
  std::vector<double> geo(61);
  for (int j = 0; j <= 60; ++j) geo[j] = std::pow(0.5, j);
  AcovSequence g = theoretical_acov(ExplicitModel{geo}, 1.0, 1, 1e-9);
  CHECK(g.values[0] == doctest::Approx(4.0 / 3.0).epsilon(1e-12));
  CHECK(g.values[1] == doctest::Approx(2.0 / 3.0).epsilon(1e-12));
}

TEST_CASE("theoretical_acov gamma_0 matches the zeta closed form") {
  for (const auto& [d, golden] : kGamma0) {
    PowerLawModel pl{d, 1.0, SlowlyVarying::constant, 1.0};
    AcovSequence seq = theoretical_acov(pl, 1.0, 0, 1e-9);
    CHECK(seq.values[0] == doctest::Approx(golden).epsilon(1e-10));
    CHECK(seq.tail_bound <= 1e-9 * seq.values[0] * (1 + 1e-12));
    CHECK(seq.m_used >= (std::int64_t(1) << 16));
  }
}

TEST_CASE("theoretical_acov matches frozen lag goldens") {
  AcovSequence a3 = theoretical_acov(PowerLawModel{0.3, 1.0}, 1.0, 2, 1e-9);
  CHECK(a3.values[1] == doctest::Approx(kGamma1_d03).epsilon(1e-10));
  CHECK(a3.values[2] == doctest::Approx(kGamma2_d03).epsilon(1e-10));

  AcovSequence a4 = theoretical_acov(PowerLawModel{0.4, 1.0}, 1.0, 2, 1e-9);
  CHECK(a4.values[1] == doctest::Approx(kGamma1_d04).epsilon(1e-10));
  CHECK(a4.values[2] == doctest::Approx(kGamma2_d04).epsilon(1e-10));

  PowerLawModel dm{0.3, 1.0, SlowlyVarying::log_damped, 1.0};
  AcovSequence ad = theoretical_acov(dm, 1.0, 1, 1e-9);
  CHECK(ad.values[0] == doctest::Approx(kDampedGamma0_d03).epsilon(1e-9));
  CHECK(ad.values[1] == doctest::Approx(kDampedGamma1_d03).epsilon(1e-9));
}

TEST_CASE("theoretical_acov scales linearly in sigma2 and shifts with psi0") {
  PowerLawModel pl{0.3, 1.0, SlowlyVarying::constant, 1.0};
  AcovSequence one = theoretical_acov(pl, 1.0, 2, 1e-8);
  AcovSequence two = theoretical_acov(pl, 2.0, 2, 1e-8);
  for (int h = 0; h <= 2; ++h)
    CHECK(two.values[h] == doctest::Approx(2.0 * one.values[h]).epsilon(1e-14));

  // psi0 enters only through the head term psi0 * psi(h)
  PowerLawModel zero_head = pl;
  zero_head.psi0 = 0.0;
  AcovSequence nohead = theoretical_acov(zero_head, 1.0, 2, 1e-8);
  CHECK(one.values[0] - nohead.values[0] == doctest::Approx(1.0).epsilon(1e-12));
  CHECK(one.values[1] - nohead.values[1] ==
        doctest::Approx(psi(CoefficientModel{pl}, 1)).epsilon(1e-12));
  CHECK(one.values[2] - nohead.values[2] ==
        doctest::Approx(psi(CoefficientModel{pl}, 2)).epsilon(1e-12));
}

TEST_CASE("autocovariances are positive and decreasing for constant damping") {
  for (double d : {0.1, 0.3, 0.45}) {
    AcovSequence seq = theoretical_acov(PowerLawModel{d, 1.0}, 1.0, 4, 1e-8);
    CHECK(seq.values[0] > 0.0);
    for (int h = 1; h <= 4; ++h) {
      CHECK(seq.values[h] > 0.0);
      CHECK(seq.values[h] < seq.values[h - 1]);
      CHECK(std::abs(seq.values[h]) <= seq.values[0]);
    }
  }
}

TEST_CASE("theoretical_acov reports an unattainable tolerance") {
  CHECK_THROWS_WITH_AS(theoretical_acov(PowerLawModel{0.45, 1.0}, 1.0, 0, 1e-300),
                       doctest::Contains("achieved relative bound"), Error);
  CHECK_THROWS_WITH(theoretical_acov(PowerLawModel{0.3, 1.0}, 0.0, 0, 1e-6),
                    "sigma2 must be positive");
  CHECK_THROWS_WITH(theoretical_acov(PowerLawModel{0.3, 1.0}, 1.0, 0, 0.0),
                    "rel_tol must be positive");
}

TEST_CASE("truncated_acov is the exact finite-filter autocovariance") {
  // explicit filter fully covered by M: equals the untruncated value
  std::vector<double> geo(61);
  for (int j = 0; j <= 60; ++j) geo[j] = std::pow(0.5, j);
  Eigen::VectorXd t = truncated_acov(ExplicitModel{geo}, 1.0, 1, 60);
  CHECK(t[0] == doctest::Approx(4.0 / 3.0).epsilon(1e-12));
  CHECK(t[1] == doctest::Approx(2.0 / 3.0).epsilon(1e-12));

  // power-law at small M: matches a direct double loop
  PowerLawModel pl{0.4, 1.3, SlowlyVarying::constant, 0.7};
  CoefficientModel m = pl;
  const std::int64_t M = 16;
  Eigen::VectorXd got = truncated_acov(m, 1.5, 2, M);
  for (int h = 0; h <= 2; ++h) {
    double acc = 0.0;
    for (std::int64_t j = 0; j + h <= M; ++j) acc += psi(m, j) * psi(m, j + h);
    CHECK(got[h] == doctest::Approx(1.5 * acc).epsilon(1e-14));
  }

  // positive terms: strictly increasing in M, below the infinite-sum value
  Eigen::VectorXd t10 = truncated_acov(PowerLawModel{0.4, 1.0}, 1.0, 0, 1 << 10);
  Eigen::VectorXd t12 = truncated_acov(PowerLawModel{0.4, 1.0}, 1.0, 0, 1 << 12);
  double full = theoretical_acov(PowerLawModel{0.4, 1.0}, 1.0, 0, 1e-8).values[0];
  CHECK(t10[0] < t12[0]);
  CHECK(t12[0] < full);
}

TEST_CASE("lag_product_weights tabulates psi products and weighted sums") {
  PowerLawModel pl{0.3, 1.0, SlowlyVarying::constant, 1.0};
  Eigen::VectorXd u(2);
  u << 1.0, 0.0;
  LagWeightTable t = lag_product_weights(pl, 1, u, 64, 1e-9);

  CHECK(t.per_lag(0, 2) == doctest::Approx(std::pow(2.0, 2 * (0.3 - 1.0))).epsilon(1e-15));
  CHECK(t.per_lag(1, 3) ==
        doctest::Approx(std::pow(3.0, 0.3 - 1.0) * std::pow(4.0, 0.3 - 1.0)).epsilon(1e-15));
  // u = (1, 0) selects the lag-0 row
  for (int j = 0; j <= 64; ++j) CHECK(t.combined[j] == t.per_lag(0, j));

  // weighted combination with both lags active
  Eigen::VectorXd u2(2);
  u2 << 0.5, -2.0;
  LagWeightTable t2 = lag_product_weights(pl, 1, u2, 16, 1e-9);
  for (int j = 0; j <= 16; ++j)
    CHECK(t2.combined[j] ==
          doctest::Approx(0.5 * t2.per_lag(0, j) - 2.0 * t2.per_lag(1, j)).epsilon(1e-14));

  // per-lag sums equal theoretical_acov / sigma2 (same summation path)
  AcovSequence seq = theoretical_acov(pl, 1.0, 1, 1e-9);
  CHECK(t.lag_sums[0] == doctest::Approx(seq.values[0]).epsilon(1e-12));
  CHECK(t.lag_sums[1] == doctest::Approx(seq.values[1]).epsilon(1e-12));
}

TEST_CASE("explicit identity filter has no positive-lag products") {
  Eigen::VectorXd u(3);
  u << 1.0, 1.0, 1.0;
  LagWeightTable t = lag_product_weights(ExplicitModel{{1.0}}, 2, u, 8, 1e-9);
  for (int h = 1; h <= 2; ++h)
    for (int j = 0; j <= 8; ++j) CHECK(t.per_lag(h, j) == 0.0);
  CHECK(t.lag_sums[0] == 1.0);
  CHECK(t.lag_sums[1] == 0.0);
}

TEST_CASE("lag products approach the squared power law at large index") {
  PowerLawModel pl{0.3, 1.4, SlowlyVarying::constant, 1.0};
  CoefficientModel m = pl;
  const double j = 1e6;
  for (int h = 0; h <= 2; ++h) {
    double cj = psi(m, static_cast<std::int64_t>(j)) * psi(m, static_cast<std::int64_t>(j) + h);
    double ratio = cj / (pl.c_d * pl.c_d * std::pow(j, 2 * pl.d - 2.0));
    CHECK(ratio == doctest::Approx(1.0).epsilon(0.01));
  }
}
