#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>

#include "longmem/autocov.hpp"
#include "longmem/errors.hpp"
#include "longmem/rng.hpp"
#include "longmem/stats.hpp"

using namespace longmem;

TEST_CASE("sample_acov worked example") {
  Eigen::VectorXd x(3);
  x << 1.0, 2.0, 3.0;
  AcovEstimate est = sample_acov(x, 2, 1);
  CHECK(est.n == 2);
  CHECK(est.values[0] == doctest::Approx(2.5).epsilon(1e-15));
  CHECK(est.values[1] == doctest::Approx(4.0).epsilon(1e-15));

  Eigen::VectorXd zeros = Eigen::VectorXd::Zero(10);
  AcovEstimate z = sample_acov(zeros, 7, 3);
  for (int h = 0; h <= 3; ++h) CHECK(z.values[h] == 0.0);
}

TEST_CASE("sample_acov matches the brute-force double loop") {
  const std::int64_t N = 777;
  const int H = 5;
  RandomStream rs(42);
  Eigen::VectorXd x(N + H);
  for (auto& v : x) v = rs.normal() + 0.2;

  AcovEstimate est = sample_acov(x, N, H);
  for (int h = 0; h <= H; ++h) {
    double acc = 0.0;
    for (std::int64_t t = 0; t < N; ++t) acc += x[t] * x[t + h];
    CHECK(est.values[h] == doctest::Approx(acc / N).epsilon(1e-12));
  }

  // centering subtracts the mean of the first N points from the whole window
  AcovEstimate cen = sample_acov(x, N, H, true);
  double mu = x.head(N).mean();
  for (int h = 0; h <= H; ++h) {
    double acc = 0.0;
    for (std::int64_t t = 0; t < N; ++t) acc += (x[t] - mu) * (x[t + h] - mu);
    CHECK(cen.values[h] == doctest::Approx(acc / N).epsilon(1e-12));
  }
  CHECK(cen.values[0] < est.values[0]);
}

TEST_CASE("sample_acov argument checks") {
  Eigen::VectorXd x(4);
  x.setOnes();
  CHECK_THROWS_WITH(sample_acov(x, 0, 1), "N must be positive");
  CHECK_THROWS_WITH(sample_acov(x, 2, -1), "H must be nonnegative");
  CHECK_THROWS_WITH(sample_acov(x, 4, 1), "series too short for the requested N and H");

  SeriesSample s = simulate_linear(ExplicitModel{{1.0}}, GaussianModel{1.0}, 16, 1, 0, 3);
  CHECK_THROWS_WITH(sample_acov(s, 2), "lag bound exceeds the simulated horizon");
  AcovEstimate a = sample_acov(s, 1);
  AcovEstimate b = sample_acov(s.values, s.n, 1);
  CHECK(a.values == b.values);
}

TEST_CASE("decomposition of an iid series is purely diagonal at lag zero") {
  SeriesSample s = simulate_linear(ExplicitModel{{1.0}}, GaussianModel{1.0}, 64, 2, 0, 9,
                                   SimMethod::direct);
  Eigen::VectorXd u(3);
  u << 1.0, 0.0, 0.0;
  Decomposition dec = decompose(s, s.coeff, u, 2);
  AcovEstimate est = sample_acov(s, 2);

  CHECK(dec.gamma_trunc[0] == 1.0);
  CHECK(dec.gamma_trunc[1] == 0.0);
  CHECK(dec.r_terms[0] == 0.0);  // X_t = Z_t exactly, so the cross part vanishes
  CHECK(dec.d_terms[0] == doctest::Approx(est.values[0] - 1.0).epsilon(1e-14));
  // at positive lags every product is off-diagonal
  CHECK(dec.d_terms[1] == 0.0);
  CHECK(dec.r_terms[1] == doctest::Approx(est.values[1]).epsilon(1e-14));
  CHECK(dec.big_d == dec.d_terms[0]);
}

TEST_CASE("decomposition identity: D + R recovers the weighted estimation error") {
  struct Case {
    CoefficientModel coeff;
    InnovationModel innov;
    std::int64_t m;
  };
  const Case cases[] = {
      {ExplicitModel{{1.0, 0.5, 0.25}}, TwoSidedParetoModel{3.0, 0.8, 1.0}, 4},
      {PowerLawModel{0.35, 1.0, SlowlyVarying::constant, 1.0}, StudentTypeModel{6.0, 1.0}, 256},
      {PowerLawModel{0.25, 0.7, SlowlyVarying::log_damped, 1.2}, GaussianModel{1.5}, 128},
  };
  Eigen::VectorXd u(3);
  u << 1.0, -0.5, 2.0;
  for (const auto& c : cases) {
    SeriesSample s = simulate_linear(c.coeff, c.innov, 512, 2, c.m, 31);
    Decomposition dec = decompose(s, c.coeff, u, 2);
    AcovEstimate est = sample_acov(s, 2);
    double scale = est.values.cwiseAbs().maxCoeff();
    for (int h = 0; h <= 2; ++h) {
      double lhs = dec.d_terms[h] + dec.r_terms[h];
      double rhs = est.values[h] - dec.gamma_trunc[h];
      CHECK(std::abs(lhs - rhs) < 1e-12 * scale);
    }
    double werr = u.dot((est.values - dec.gamma_trunc).eval());
    CHECK(dec.big_d + dec.big_r == doctest::Approx(werr).epsilon(1e-10));
    CHECK(dec.big_d == doctest::Approx(u.dot(dec.d_terms)).epsilon(1e-14));
    CHECK(dec.big_r == doctest::Approx(u.dot(dec.r_terms)).epsilon(1e-14));
  }
}

TEST_CASE("decomposition matches exhaustive enumeration on a tiny series") {
  const std::int64_t m = 3, N = 5;
  const int H = 2;
  Eigen::VectorXd coeffs(4);
  coeffs << 1.0, -0.7, 0.4, 0.2;
  ExplicitModel em{std::vector<double>(coeffs.data(), coeffs.data() + 4)};
  GaussianModel gm{1.5};
  const double sigma2 = 1.5 * 1.5;

  Eigen::VectorXd z(m + N + H);
  for (int i = 0; i < z.size(); ++i) z[i] = std::sin(static_cast<double>(i)) + 0.3;
  SeriesSample s = simulate_from_innovations(em, gm, z, N, H, m, SimMethod::direct);

  Eigen::VectorXd u(H + 1);
  u << 0.3, 1.0, -2.0;
  Decomposition dec = decompose(s, em, u, H);

  auto psi_at = [&](std::int64_t j) { return (j >= 0 && j < 4) ? coeffs[j] : 0.0; };
  // innovation index of Z_{t-i} is m + t - 1 - i
  auto z_at = [&](std::int64_t t, std::int64_t i) { return z[m + t - 1 - i]; };

  for (int h = 0; h <= H; ++h) {
    double d_brute = 0.0, r_brute = 0.0, g_brute = 0.0;
    for (std::int64_t i = 0; i <= m; ++i)
      g_brute += sigma2 * psi_at(i) * psi_at(i + h);
    for (std::int64_t t = 1; t <= N; ++t) {
      for (std::int64_t i = 0; i <= m; ++i)
        for (std::int64_t j = 0; j <= m; ++j) {
          if (j == i + h)  // Z_{t-i} meets itself: X_{t+h} picks Z_{t+h-j} = Z_{t-i}
            d_brute += psi_at(i) * psi_at(i + h) * (z_at(t, i) * z_at(t, i) - sigma2);
          else
            r_brute += psi_at(i) * psi_at(j) * z_at(t, i) * z_at(t + h, j);
        }
    }
    CHECK(dec.gamma_trunc[h] == doctest::Approx(g_brute).epsilon(1e-13));
    CHECK(dec.d_terms[h] == doctest::Approx(d_brute / N).epsilon(1e-13));
    CHECK(dec.r_terms[h] == doctest::Approx(r_brute / N).epsilon(1e-13));
  }
}

TEST_CASE("decompose argument checks") {
  SeriesSample s = simulate_linear(PowerLawModel{0.3, 1.0}, GaussianModel{1.0}, 32, 1, 16, 2);
  Eigen::VectorXd u(2);
  u.setOnes();
  CHECK_THROWS_WITH(decompose(s, s.coeff, u, 2), "lag bound exceeds the simulated horizon");
  CHECK_THROWS_WITH(decompose(s, s.coeff, u, 0), "weight vector length must be H+1");
}

TEST_CASE("xi_series sums to N times the lag-zero cross term") {
  SeriesSample s = simulate_linear(PowerLawModel{0.4, 1.0}, StudentTypeModel{8.0, 1.0}, 300,
                                   0, 64, 17);
  Eigen::VectorXd xi = xi_series(s, s.coeff);
  CHECK(xi.size() == 300);
  Eigen::VectorXd u(1);
  u << 1.0;
  Decomposition dec = decompose(s, s.coeff, u, 0);
  CHECK(xi.sum() / 300.0 == doctest::Approx(dec.r_terms[0]).epsilon(1e-11));

  SeriesSample iid = simulate_linear(ExplicitModel{{1.0}}, GaussianModel{1.0}, 50, 0, 0, 3,
                                     SimMethod::direct);
  Eigen::VectorXd xi0 = xi_series(iid, iid.coeff);
  CHECK(xi0.cwiseAbs().maxCoeff() == 0.0);
}

TEST_CASE("cross-term covariance follows the squared autocovariance") {
  // E[xi_0 xi_n] = 2 gamma_n^2 - 2 sigma^4 sum_i psi_i^2 psi_{i+n}^2 for any
  // iid innovations with finite fourth moment: excluding the diagonal removes
  // every Z^4 factor, so the fourth-moment constant drops out.
  const double d = 0.35;
  PowerLawModel pl{d, 1.0, SlowlyVarying::constant, 1.0};
  const std::int64_t n_len = 8192, m = 8192;
  const int reps = 100;
  const int lags[] = {4, 16};

  Eigen::VectorXd acc = Eigen::VectorXd::Zero(17);
  for (int r = 0; r < reps; ++r) {
    SeriesSample s = simulate_linear(pl, GaussianModel{1.0}, n_len, 0, m,
                                     derive_seed(909, static_cast<std::uint64_t>(r)));
    Eigen::VectorXd xi = xi_series(s, pl);
    acc += sample_acov(xi, n_len - 16, 16).values;
  }
  acc /= static_cast<double>(reps);

  Eigen::VectorXd psis = psi_block(pl, 0, m + 17);
  Eigen::VectorXd gamma = truncated_acov(pl, 1.0, 16, m);
  for (int n : lags) {
    double diag4 = psis.head(m + 1).array().square().matrix().dot(
        psis.segment(n, m + 1).array().square().matrix());
    double predicted = 2.0 * gamma[n] * gamma[n] - 2.0 * diag4;
    CHECK(acc[n] == doctest::Approx(predicted).epsilon(0.15));
  }

  // the predicted decay exponent of the cross-term covariance is 4d - 2
  Eigen::VectorXd gl = truncated_acov(pl, 1.0, 512, m);
  Eigen::VectorXd ns(4), vals(4);
  int k = 0;
  for (int n : {64, 128, 256, 512}) {
    ns[k] = static_cast<double>(n);
    vals[k] = 2.0 * gl[n] * gl[n];
    ++k;
  }
  LineFit fit = fit_loglog(ns, vals);
  CHECK(fit.slope == doctest::Approx(4.0 * d - 2.0).epsilon(0.1));
}

TEST_CASE("scale_errors applies the regime normalization") {
  AcovEstimate est;
  est.n = 100;
  est.values.resize(2);
  est.values << 1.2, 0.8;
  Eigen::VectorXd gamma(2);
  gamma << 1.0, 0.8;

  RegimeReport a;
  a.region = Regime::A;
  Eigen::VectorXd ea = scale_errors(est, gamma, a);
  CHECK(ea[0] == doctest::Approx(2.0).epsilon(1e-14));  // sqrt(100) * 0.2
  CHECK(ea[1] == 0.0);

  RegimeReport c;
  c.region = Regime::C;
  c.d = 0.3;
  Eigen::VectorXd gc(2);
  gc << 1.15, 0.8;
  Eigen::VectorXd ec = scale_errors(est, gc, c);
  CHECK(ec[0] == doctest::Approx(std::pow(100.0, 0.4) * 0.05).epsilon(1e-12));

  RegimeReport b;
  b.region = Regime::B;
  est.n = 1000;
  Eigen::VectorXd gb(2);
  gb << 0.2, 0.8;
  Eigen::VectorXd eb = scale_errors(est, gb, b, 100.0);
  CHECK(eb[0] == doctest::Approx(0.1).epsilon(1e-14));  // 1000/100^2 * 1.0
  CHECK_THROWS_WITH(scale_errors(est, gb, b), "a_N required for region B scaling");

  RegimeReport bd;
  bd.region = Regime::boundary;
  bd.rate_exponent = -0.4;
  Eigen::VectorXd ebd = scale_errors(est, gb, bd);
  CHECK(ebd[0] == doctest::Approx(std::pow(1000.0, 0.4)).epsilon(1e-12));

  Eigen::VectorXd bad(3);
  bad.setZero();
  CHECK_THROWS_WITH(scale_errors(est, bad, a), "estimate and autocovariance lengths differ");
}
