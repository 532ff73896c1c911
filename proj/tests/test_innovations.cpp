#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>

#include "longmem/errors.hpp"
#include "longmem/innovations.hpp"

using namespace longmem;

TEST_CASE("validate rejects out-of-range innovation parameters") {
  CHECK_THROWS_WITH(validate(InnovationModel{GaussianModel{0.0}}), "sigma must be positive");
  CHECK_THROWS_WITH(validate(InnovationModel{StudentTypeModel{4.0, 1.0}}), "nu must exceed 4");
  CHECK_THROWS_WITH(validate(InnovationModel{StudentTypeModel{6.0, 0.0}}),
                    "scale must be positive");
  CHECK_THROWS_WITH(validate(InnovationModel{TwoSidedParetoModel{2.0, 0.5, 1.0}}),
                    "alpha must lie in (2, 4)");
  CHECK_THROWS_WITH(validate(InnovationModel{TwoSidedParetoModel{4.0, 0.5, 1.0}}),
                    "alpha must lie in (2, 4)");
  CHECK_THROWS_WITH(validate(InnovationModel{TwoSidedParetoModel{3.0, 1.5, 1.0}}),
                    "p must lie in [0, 1]");
  CHECK_THROWS_WITH(validate(InnovationModel{TwoSidedParetoModel{3.0, 0.5, 0.0}}),
                    "x0 must be positive");
  CHECK_NOTHROW(validate(InnovationModel{TwoSidedParetoModel{2.5, 1.0, 2.0}}));
}

TEST_CASE("moments returns exact closed forms") {
  MomentReport g = moments(GaussianModel{1.0});
  CHECK(g.sigma2 == 1.0);
  CHECK(*g.eta == 3.0);
  CHECK_FALSE(g.alpha.has_value());

  MomentReport g2 = moments(GaussianModel{2.0});
  CHECK(g2.sigma2 == 4.0);

  // unit-variance Student scaling: scale^2 = (nu-2)/nu
  MomentReport s6 = moments(StudentTypeModel{6.0, std::sqrt(4.0 / 6.0)});
  CHECK(s6.sigma2 == doctest::Approx(1.0).epsilon(1e-15));
  CHECK(*s6.eta == doctest::Approx(6.0).epsilon(1e-15));
  CHECK(*moments(StudentTypeModel{5.0, 1.0}).eta == doctest::Approx(9.0).epsilon(1e-15));
  CHECK(*moments(StudentTypeModel{8.0, 1.0}).eta == doctest::Approx(4.5).epsilon(1e-15));
  CHECK(moments(StudentTypeModel{6.0, 2.0}).sigma2 == doctest::Approx(6.0).epsilon(1e-15));

  MomentReport p = moments(TwoSidedParetoModel{3.0, 0.5, 1.0});
  CHECK(p.sigma2 == doctest::Approx(3.0).epsilon(1e-15));
  CHECK_FALSE(p.eta.has_value());
  CHECK(*p.alpha == 3.0);

  // asymmetric centering: sigma2 = alpha/(alpha-2) - mu^2, mu = (2p-1)alpha/(alpha-1)
  CHECK(moments(TwoSidedParetoModel{3.0, 0.8, 1.0}).sigma2 ==
        doctest::Approx(2.19).epsilon(1e-15));
  CHECK(moments(TwoSidedParetoModel{2.5, 0.8, 1.0}).sigma2 ==
        doctest::Approx(4.0).epsilon(1e-15));
  CHECK(moments(TwoSidedParetoModel{3.5, 0.8, 1.0}).sigma2 ==
        doctest::Approx(7.0 / 3.0 - 0.7056).epsilon(1e-15));

  // x0 scales the raw variable linearly
  CHECK(moments(TwoSidedParetoModel{3.0, 0.5, 2.0}).sigma2 ==
        doctest::Approx(12.0).epsilon(1e-15));
}

TEST_CASE("mean_shift is the raw Pareto mean and zero for symmetric models") {
  CHECK(mean_shift(GaussianModel{}) == 0.0);
  CHECK(mean_shift(StudentTypeModel{}) == 0.0);
  CHECK(mean_shift(TwoSidedParetoModel{3.0, 0.5, 1.0}) == 0.0);
  CHECK(mean_shift(TwoSidedParetoModel{3.0, 0.8, 1.0}) == doctest::Approx(0.9).epsilon(1e-15));
  CHECK(mean_shift(TwoSidedParetoModel{3.0, 0.0, 1.0}) == doctest::Approx(-1.5).epsilon(1e-15));
}

TEST_CASE("sample is deterministic and matches the sequential sampler") {
  InnovationModel m = TwoSidedParetoModel{3.0, 0.7, 1.0};
  Eigen::VectorXd a = sample(m, 64, 42);
  Eigen::VectorXd b = sample(m, 64, 42);
  CHECK((a - b).cwiseAbs().maxCoeff() == 0.0);

  Eigen::VectorXd c = sample(m, 64, 43);
  CHECK((a - c).cwiseAbs().maxCoeff() > 0.0);

  InnovationSampler s(m, 42);
  for (int i = 0; i < 64; ++i) CHECK(s.next() == a[i]);
}

TEST_CASE("gaussian sample mean sits in the CLT band") {
  Eigen::VectorXd z = sample(GaussianModel{1.0}, 1000000, 7);
  CHECK(std::abs(z.mean()) < 4.0 / 1000.0);
  double v = z.squaredNorm() / static_cast<double>(z.size());
  CHECK(v == doctest::Approx(1.0).epsilon(0.01));
}

TEST_CASE("pareto tails match the exact survival function") {
  const std::int64_t n = 1000000;
  Eigen::VectorXd z = sample(TwoSidedParetoModel{3.0, 0.5, 1.0}, n, 11);
  for (double x : {2.0, 5.0, 10.0}) {
    double emp = (z.cwiseAbs().array() > x).count() / static_cast<double>(n);
    double q = std::pow(x, -3.0);
    double se = std::sqrt(q * (1.0 - q) / static_cast<double>(n));
    CHECK(std::abs(emp - q) < 3.0 * se);
  }
}

TEST_CASE("pareto tail balance puts the configured mass on the positive side") {
  const std::int64_t n = 1000000;
  InnovationModel m = TwoSidedParetoModel{3.0, 0.8, 1.0};
  Eigen::VectorXd z = sample(m, n, 13);
  double shift = mean_shift(m);
  std::int64_t big = 0, pos = 0;
  for (std::int64_t i = 0; i < n; ++i) {
    double raw = z[i] + shift;
    if (std::abs(raw) > 10.0) {
      ++big;
      if (raw > 0.0) ++pos;
    }
  }
  CHECK(big > 500);
  CHECK(static_cast<double>(pos) / static_cast<double>(big) ==
        doctest::Approx(0.8).epsilon(0.08));
}

TEST_CASE("pareto MC second moment matches the closed form") {
  // alpha = 3.5 keeps the variance of Z^2 manageable at this sample size
  InnovationModel m = TwoSidedParetoModel{3.5, 0.8, 1.0};
  const std::int64_t n = 10000000;
  Eigen::VectorXd z = sample(m, n, 17);
  double m2 = z.squaredNorm() / static_cast<double>(n);
  CHECK(m2 == doctest::Approx(moments(m).sigma2).epsilon(0.05));
  CHECK(std::abs(z.mean()) < 0.01);  // analytic centering holds in MC
}

TEST_CASE("student samples realize the scaled t moments") {
  InnovationModel m = StudentTypeModel{6.0, std::sqrt(4.0 / 6.0)};
  Eigen::VectorXd z = sample(m, 1000000, 19);
  CHECK(z.squaredNorm() / 1e6 == doctest::Approx(1.0).epsilon(0.02));
  CHECK(std::abs(z.mean()) < 0.005);

  // eta needs a finite eighth moment to estimate stably: use nu = 10
  InnovationModel m10 = StudentTypeModel{10.0, 1.0};
  Eigen::VectorXd z10 = sample(m10, 1000000, 23);
  double s2 = z10.squaredNorm() / 1e6;
  double m4 = z10.array().pow(4).mean();
  CHECK(m4 / (s2 * s2) == doctest::Approx(*moments(m10).eta).epsilon(0.1));
}

TEST_CASE("norming_a solves the tail equation exactly") {
  CHECK(norming_a(TwoSidedParetoModel{3.0, 0.5, 1.0}, 1000.0) ==
        doctest::Approx(10.0).epsilon(1e-15));
  CHECK(norming_a(TwoSidedParetoModel{2.5, 0.5, 1.0}, 32.0) ==
        doctest::Approx(4.0).epsilon(1e-15));
  CHECK(norming_a(TwoSidedParetoModel{3.0, 0.5, 2.0}, 1000.0) ==
        doctest::Approx(20.0).epsilon(1e-15));
  CHECK_THROWS_WITH(norming_a(GaussianModel{}, 100.0), "no tail index");
  CHECK_THROWS_WITH(norming_a(StudentTypeModel{6.0, 1.0}, 100.0), "no tail index");

  // N * P[|Z_raw| > a_N] = 1 to 1e-12 across scales
  TwoSidedParetoModel p{2.7, 0.3, 1.5};
  for (double N : {10.0, 1e3, 1e6}) {
    double a = norming_a(p, N);
    CHECK(std::abs(N * std::pow(a / p.x0, -p.alpha) - 1.0) < 1e-12);
  }
}

TEST_CASE("truncated_b evaluates the exact truncated raw second moment") {
  CHECK(truncated_b(TwoSidedParetoModel{3.0, 0.5, 1.0}, 1000.0) ==
        doctest::Approx(2.7).epsilon(1e-15));
  CHECK(truncated_b(TwoSidedParetoModel{2.5, 0.5, 1.0}, 1024.0) ==
        doctest::Approx(3.75).epsilon(1e-15));
  CHECK(truncated_b(TwoSidedParetoModel{3.5, 0.5, 1.0}, 1e6) ==
        doctest::Approx(2.32707370981101).epsilon(1e-12));

  // the raw magnitude law does not depend on the balance p
  CHECK(truncated_b(TwoSidedParetoModel{3.0, 0.8, 1.0}, 1000.0) ==
        doctest::Approx(2.7).epsilon(1e-15));

  // monotone limit toward the raw second moment
  double b12 = truncated_b(TwoSidedParetoModel{3.0, 0.5, 1.0}, 1e12);
  CHECK(b12 > truncated_b(TwoSidedParetoModel{3.0, 0.5, 1.0}, 1e6));
  CHECK(b12 == doctest::Approx(3.0).epsilon(1e-3));
  CHECK_THROWS_WITH(truncated_b(GaussianModel{}, 100.0), "no tail index");
}

TEST_CASE("truncated_second_moment centers before truncating") {
  // symmetric case coincides with truncated_b at a = a_N
  InnovationModel sym = TwoSidedParetoModel{3.0, 0.5, 1.0};
  double a = norming_a(sym, 1000.0);
  CHECK(truncated_second_moment(sym, a) == doctest::Approx(2.7).epsilon(1e-13));

  // grows to sigma2 as the window widens
  InnovationModel asym = TwoSidedParetoModel{3.0, 0.8, 1.0};
  double lo = truncated_second_moment(asym, 5.0);
  double hi = truncated_second_moment(asym, 50.0);
  CHECK(lo < hi);
  CHECK(hi < moments(asym).sigma2);
  // residual tail mass at a = 1e9 is ~3e-9 for alpha = 3
  CHECK(truncated_second_moment(asym, 1e9) ==
        doctest::Approx(moments(asym).sigma2).epsilon(1e-8));

  // MC cross-check of the closed form on the centered variable
  const std::int64_t n = 2000000;
  Eigen::VectorXd z = sample(asym, n, 29);
  double t = 4.0;
  double acc = 0.0;
  for (std::int64_t i = 0; i < n; ++i)
    if (std::abs(z[i]) <= t) acc += z[i] * z[i];
  CHECK(acc / static_cast<double>(n) ==
        doctest::Approx(truncated_second_moment(asym, t)).epsilon(0.01));
}

TEST_CASE("tail_centering equals its analytic limit for the pure power tail") {
  for (double alpha : {2.5, 3.0, 3.5}) {
    for (double N : {1e3, 1e6}) {
      TailCentering tc = tail_centering(TwoSidedParetoModel{alpha, 0.5, 1.0}, N);
      CHECK(tc.limit == doctest::Approx(alpha / (alpha - 2.0)).epsilon(1e-15));
      CHECK(std::abs(tc.value - tc.limit) < 1e-9);
    }
  }
  // the identity is scale-invariant in x0 and independent of p
  TailCentering tc = tail_centering(TwoSidedParetoModel{2.5, 0.9, 2.0}, 1e4);
  CHECK(std::abs(tc.value - 5.0) < 1e-9);
}

TEST_CASE("truncation_spec reports the exact truncated mean and bound") {
  TruncationSpec g = truncation_spec(GaussianModel{1.0}, 2.0);
  CHECK(g.mu_t == 0.0);
  CHECK(g.bound == 2.0);
  CHECK(truncation_spec(TwoSidedParetoModel{3.0, 0.5, 1.0}, 8.0).mu_t == 0.0);

  InnovationModel asym = TwoSidedParetoModel{3.0, 0.8, 1.0};
  TruncationSpec s = truncation_spec(asym, 6.0);
  CHECK(s.bound == doctest::Approx(6.0 + 2.0 * std::abs(s.mu_t)).epsilon(1e-15));
  CHECK(s.mu_t != 0.0);

  // mu(T) -> 0 as the window widens (the centered variable has mean zero)
  double wide = std::abs(truncation_spec(asym, 1e6).mu_t);
  CHECK(wide < std::abs(s.mu_t));
  CHECK(wide < 1e-9);

  // MC cross-check: empirical truncated mean matches mu(T)
  const std::int64_t n = 2000000;
  Eigen::VectorXd z = sample(asym, n, 31);
  double t = 4.0, acc = 0.0;
  for (std::int64_t i = 0; i < n; ++i)
    if (std::abs(z[i]) <= t) acc += z[i];
  double mu_t = truncation_spec(asym, t).mu_t;
  CHECK(acc / static_cast<double>(n) == doctest::Approx(mu_t).epsilon(0.02));

  CHECK_THROWS_WITH(truncation_spec(asym, 0.0), "truncation level must be positive");
}

TEST_CASE("truncate_sample is plain truncation for symmetric models") {
  InnovationModel m = TwoSidedParetoModel{3.0, 0.5, 1.0};
  Eigen::VectorXd z = sample(m, 1000, 37);
  Eigen::VectorXd zt = truncate_sample(z, m, 2.0, 99);
  for (int i = 0; i < 1000; ++i)
    CHECK(zt[i] == (std::abs(z[i]) <= 2.0 ? z[i] : 0.0));
}

TEST_CASE("truncate_sample is mean-zero and bounded for asymmetric models") {
  InnovationModel m = TwoSidedParetoModel{3.0, 0.8, 1.0};
  const std::int64_t n = 1000000;
  Eigen::VectorXd z = sample(m, n, 41);
  double t = 8.0;
  Eigen::VectorXd zt = truncate_sample(z, m, t, 43);

  TruncationSpec spec = truncation_spec(m, t);
  CHECK(zt.cwiseAbs().maxCoeff() <= spec.bound + 1e-12);

  double sd = std::sqrt(zt.squaredNorm() / static_cast<double>(n));
  CHECK(std::abs(zt.mean()) < 4.0 * sd / 1000.0);

  // determinism in both the source draws and the auxiliary stream
  Eigen::VectorXd zt2 = truncate_sample(z, m, t, 43);
  CHECK((zt - zt2).cwiseAbs().maxCoeff() == 0.0);
}

TEST_CASE("truncation error shrinks and the variance recovers as T grows") {
  // the Student tail must be heavy enough that draws land beyond every
  // truncation level at this sample size; nu = 4.5 gives ~7 draws in (32, 128]
  for (auto [m, n] : {std::pair<InnovationModel, std::int64_t>{
                          TwoSidedParetoModel{3.0, 0.8, 1.0}, 200000},
                      {StudentTypeModel{4.5, 1.0}, 4000000}}) {
    Eigen::VectorXd z = sample(m, n, 47);
    double prev = 1e300;
    for (double t : {2.0, 8.0, 32.0, 128.0}) {
      Eigen::VectorXd zt = truncate_sample(z, m, t, 53);
      double err = (zt - z).squaredNorm() / static_cast<double>(n);
      CHECK(err < prev);
      prev = err;
    }
    Eigen::VectorXd z128 = truncate_sample(z, m, 128.0, 53);
    double v = z128.squaredNorm() / static_cast<double>(n);
    double sigma2 = moments(m).sigma2;
    CHECK(v == doctest::Approx(sigma2).epsilon(0.03));
  }
}
