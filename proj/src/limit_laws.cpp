#include "longmem/limit_laws.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <vector>

#include "longmem/errors.hpp"
#include "longmem/process_sim.hpp"
#include "longmem/rng.hpp"
#include "quadrature.hpp"

namespace longmem {

MomentClass moment_class_of(const InnovationModel& model) {
  validate(model);
  MomentClass mc;
  if (const auto* p = std::get_if<TwoSidedParetoModel>(&model)) {
    mc.finite_fourth = false;
    mc.alpha = p->alpha;
  }
  return mc;
}

namespace {

constexpr const char* kBoundaryCondition = "a_N^{−4}N ln N → 0";

}  // namespace

RegimeReport classify_regime(const MomentClass& mc, double d) {
  if (!(d > 0.0 && d < 0.5)) throw Error("d must lie in (0, 0.5)");
  RegimeReport r;
  r.d = d;
  if (mc.finite_fourth) {
    if (d < 0.25) {
      r.region = Regime::A;
      r.rate_exponent = -0.5;
      r.normalization = "sqrtN";
    } else if (d > 0.25) {
      r.region = Regime::C;
      r.rate_exponent = 2.0 * d - 1.0;
      r.normalization = "N_power_1_minus_2d";
    } else {
      r.region = Regime::boundary;
      r.rate_exponent = -0.5;
      r.normalization = "sqrtN";
      r.caveats = std::string("boundary d = 1/4: the sqrt(N) rate carries an extra ln N "
                              "factor, and the faster normalization applies only under ") +
                  kBoundaryCondition;
    }
    return r;
  }
  r.alpha = mc.alpha;
  const double split = 1.0 / mc.alpha;
  if (d < split) {
    r.region = Regime::B;
    r.rate_exponent = 2.0 / mc.alpha - 1.0;
    r.normalization = "N_over_aN2";
  } else if (d > split) {
    r.region = Regime::C;
    r.rate_exponent = 2.0 * d - 1.0;
    r.normalization = "N_power_1_minus_2d";
  } else {
    r.region = Regime::boundary;
    r.rate_exponent = 2.0 * d - 1.0;
    r.normalization = "N_over_aN2";
    r.caveats = std::string("boundary d = 1/alpha: the heavy-tailed and long-memory rates "
                            "coincide; the stable limit applies only under ") +
                kBoundaryCondition;
  }
  return r;
}

RegimeReport classify_for(const CoefficientModel& coeff, const InnovationModel& innov) {
  validate(coeff);
  MomentClass mc = moment_class_of(innov);
  if (const auto* pl = std::get_if<PowerLawModel>(&coeff))
    return classify_regime(mc, pl->d);
  // explicit filters have summable covariances: moment class decides alone
  RegimeReport r;
  r.d = 0.0;
  if (mc.finite_fourth) {
    r.region = Regime::A;
    r.rate_exponent = -0.5;
    r.normalization = "sqrtN";
  } else {
    r.region = Regime::B;
    r.alpha = mc.alpha;
    r.rate_exponent = 2.0 / mc.alpha - 1.0;
    r.normalization = "N_over_aN2";
  }
  return r;
}

// ---------------------------------------------------------------------------
// gaussian_limit_cov
// ---------------------------------------------------------------------------

namespace {

// Autocovariance table gamma_k, k = 0..kb, of the power-law filter, each
// entry completed by the analytic remainder of its j-sum beyond mb.
// The pure power table (c_d and sigma2 applied by the caller's wrapper).
struct GammaTable {
  Eigen::VectorXd gamma;  // k = 0..kb
  double table_err = 0.0; // absolute per-entry error estimate
};

GammaTable power_law_gamma_table(const PowerLawModel& pl, double sigma2, std::int64_t kb,
                                 std::int64_t mb) {
  const bool damped = pl.l == SlowlyVarying::log_damped;
  const double d = pl.d;
  const std::int64_t len = mb + kb;  // pure psi(1..len)
  Eigen::VectorXd ar(len);
  for (std::int64_t j = 1; j <= len; ++j) {
    double v = std::pow(static_cast<double>(j), d - 1.0);
    if (damped) v *= detail::lambda_log_damped(static_cast<double>(j));
    ar[j - 1] = v;
  }
  // corr[k] = sum_{j=1..mb} psi(j) psi(j+k) via one convolution with the
  // reversed head; the circular fold lands strictly below the read window.
  std::int64_t P = next_pow2(len + 1);
  Eigen::VectorXd rev = ar.head(mb).reverse();
  FftConvolver conv(rev, P);
  Eigen::VectorXd out = conv.apply(ar, std::min(P, len));
  // j-tail beyond mb by the binomial expansion (1 + k/j)^{d-1}:
  // sum_{j>mb} j^{2d-2-i} terms, damped variants use lambda(j)^2 which is
  // exact at k = 0 and drifts by O(k/(j log^2 j)) across the window.
  constexpr int kTerms = 18;
  double S[kTerms];
  for (int i = 0; i < kTerms; ++i)
    S[i] = detail::power_pair_tail(2.0 * d - 2.0 - i, 0.0, 0.0,
                                   static_cast<double>(mb + 1), damped)
               .value;
  const double c2 = pl.c_d * pl.c_d;
  GammaTable t;
  t.gamma.resize(kb + 1);
  for (std::int64_t k = 0; k <= kb; ++k) {
    double corr = out[mb - 1 + k];
    double tail = 0.0, binom = 1.0, kpow = 1.0;
    for (int i = 0; i < kTerms; ++i) {
      if (i > 0) {
        binom *= (d - i) / static_cast<double>(i);
        kpow *= static_cast<double>(k);
      }
      tail += binom * kpow * S[i];
    }
    double head = pl.psi0 * (k == 0 ? pl.psi0 : pl.c_d * ar[k - 1]);
    t.gamma[k] = sigma2 * (head + c2 * (corr + tail));
  }
  // per-entry error: binomial truncation ((1/4)^18) and, for the damped
  // selector, the lambda drift across the tail window
  double tail0 = std::abs(S[0]);
  t.table_err = sigma2 * c2 * tail0 * (damped ? 2e-3 : 1e-9);
  return t;
}

}  // namespace

Eigen::MatrixXd gaussian_limit_cov(const CoefficientModel& coeff, double sigma2, double eta,
                                   int H, double tol) {
  validate(coeff);
  if (!(sigma2 > 0.0)) throw Error("sigma2 must be positive");
  if (H < 0) throw Error("H must be nonnegative");
  if (!(tol > 0.0)) throw Error("tol must be positive");

  Eigen::MatrixXd sig(H + 1, H + 1);

  if (const auto* ex = std::get_if<ExplicitModel>(&coeff)) {
    const auto L = static_cast<std::int64_t>(ex->coeffs.size());
    Eigen::VectorXd gamma = truncated_acov(coeff, sigma2, static_cast<int>(L - 1) + 2 * H,
                                           L - 1);
    auto gam = [&](std::int64_t k) {
      k = std::llabs(k);
      return k < gamma.size() ? gamma[k] : 0.0;
    };
    auto acorr = [&](std::int64_t delta) {
      double s = 0.0;
      for (std::int64_t k = -(L - 1); k <= L - 1; ++k) s += gam(k) * gam(k + delta);
      return s;
    };
    for (int h = 0; h <= H; ++h)
      for (int hp = h; hp <= H; ++hp) {
        double v = (eta - 3.0) * gam(h) * gam(hp) + acorr(hp - h) + acorr(hp + h);
        sig(h, hp) = v;
        sig(hp, h) = v;
      }
    return sig;
  }

  const auto& pl = std::get<PowerLawModel>(coeff);
  if (pl.d >= 0.25) throw Error("covariance series diverges");
  const double d = pl.d;

  const std::int64_t kb = std::int64_t(1) << 18;
  const std::int64_t mb = std::int64_t(1) << 20;
  GammaTable tab = power_law_gamma_table(pl, sigma2, kb + 2 * H, mb);
  auto gam = [&](std::int64_t k) { return tab.gamma[std::llabs(k)]; };

  // asymptote gamma_k ~ c1 k^{2d-1} + c2 k^{d-1} + c3 k^{d-2}; the first two
  // coefficients are exact, c3 enters only the error bound
  const double c2d = pl.c_d * pl.c_d;
  const double beta_d = std::exp(std::lgamma(d) + std::lgamma(1.0 - 2.0 * d) -
                                 std::lgamma(1.0 - d));
  const double zeta1d = std::riemann_zeta(1.0 - d);
  const double c1 = sigma2 * c2d * beta_d;
  const double c2 = sigma2 * pl.c_d * (pl.c_d * zeta1d + pl.psi0);
  const double c3_bound = sigma2 * c2d * 1.0;

  const bool damped = pl.l == SlowlyVarying::log_damped;
  const double lam2 = damped ? [&] {
    double l = detail::lambda_log_damped(static_cast<double>(kb));
    return l * l;
  }() : 1.0;

  auto ppt = [&](double a, double b, double h, double j0) {
    return detail::power_pair_tail(a, b, h, j0, false).value;
  };

  const std::int64_t dmax = 2 * H;
  std::vector<double> acorr(dmax + 1), abound(dmax + 1);
  for (std::int64_t delta = 0; delta <= dmax; ++delta) {
    double table = 0.0;
    for (std::int64_t k = -kb; k <= kb - delta; ++k) table += gam(k) * gam(k + delta);
    double j0 = static_cast<double>(kb - delta + 1);
    double dd = static_cast<double>(delta);
    double t_main = c1 * c1 * ppt(2 * d - 1, 2 * d - 1, dd, j0) +
                    c1 * c2 * (ppt(2 * d - 1, d - 1, dd, j0) + ppt(d - 1, 2 * d - 1, dd, j0)) +
                    c2 * c2 * ppt(d - 1, d - 1, dd, j0);
    t_main *= lam2;
    acorr[delta] = table + 2.0 * t_main;
    double resid = c3_bound * (std::abs(c1) * (ppt(2 * d - 1, d - 2, dd, j0) +
                                               ppt(d - 2, 2 * d - 1, dd, j0)) +
                               2.0 * std::abs(c2) * ppt(d - 1, d - 2, dd, j0) +
                               c3_bound * ppt(d - 2, d - 2, dd, j0));
    double lam_resid = damped ? std::abs(t_main) * (1.0 / lam2 - 1.0) * 2.0 : 0.0;
    double table_resid = tab.table_err * 2.0 *
                         (tab.gamma.head(kb).array().abs().sum() * 2.0 + std::abs(tab.gamma[0]));
    abound[delta] = 2.0 * resid + lam_resid + table_resid;
  }

  double achieved = 0.0;
  for (int h = 0; h <= H; ++h)
    for (int hp = h; hp <= H; ++hp) {
      double v = (eta - 3.0) * gam(h) * gam(hp) + acorr[hp - h] + acorr[hp + h];
      sig(h, hp) = v;
      sig(hp, h) = v;
      achieved = std::max(achieved, abound[hp - h] + abound[hp + h]);
    }
  if (achieved > tol) {
    char msg[160];
    std::snprintf(msg, sizeof(msg),
                  "covariance tail tolerance unattainable; achieved bound %.3e", achieved);
    throw Error(msg);
  }
  return sig;
}

// ---------------------------------------------------------------------------
// limit samplers
// ---------------------------------------------------------------------------

Eigen::VectorXd sample_stable_S(const InnovationModel& model, std::int64_t n,
                                std::uint64_t seed, std::int64_t n_big) {
  if (n < 1) throw Error("n must be positive");
  if (n_big < 100000) throw Error("N_big must be at least 100000");
  const double a = norming_a(model, static_cast<double>(n_big));
  const double bc = truncated_second_moment(model, a);
  const double inv = 1.0 / (a * a);
  Eigen::VectorXd draws(n);
  for (std::int64_t i = 0; i < n; ++i) {
    InnovationSampler s(model, derive_seed(seed, static_cast<std::uint64_t>(i)));
    double acc = 0.0;
    for (std::int64_t t = 0; t < n_big; ++t) {
      double z = s.next();
      acc += z * z;
    }
    draws[i] = (acc - static_cast<double>(n_big) * bc) * inv;
  }
  return draws;
}

RosenblattSample sample_rosenblatt(double d, std::int64_t grid, double span, std::int64_t n,
                                   std::uint64_t seed) {
  if (!(d > 0.25 && d < 0.5)) throw Error("d must lie in (1/4, 1/2)");
  if (grid < 100) throw Error("grid must be at least 100");
  if (!(span >= 1.0)) throw Error("span must be at least 1");
  if (n < 1) throw Error("n must be positive");

  const std::int64_t N = grid;
  const std::int64_t KN = std::llround(span * static_cast<double>(grid));
  const std::int64_t T = N + KN + 1;      // g_k, k = -KN..N
  const std::int64_t jmax = N + KN;       // largest psi argument
  const double scale = std::pow(static_cast<double>(N), 1.0 - 2.0 * d);

  Eigen::VectorXd psi(jmax + 1);
  psi[0] = 0.0;
  for (std::int64_t j = 1; j <= jmax; ++j)
    psi[j] = std::pow(static_cast<double>(j), d - 1.0);

  Eigen::VectorXd Q(jmax + 1);  // Q[m] = sum_{j<=m} psi_j^2
  Q[0] = 0.0;
  for (std::int64_t m = 1; m <= jmax; ++m) Q[m] = Q[m - 1] + psi[m] * psi[m];

  Eigen::VectorXd S(T);  // diagonal weights per g index
  for (std::int64_t i = 0; i < T; ++i) {
    std::int64_t k = i - KN;
    std::int64_t hi = std::clamp<std::int64_t>(N - k, 0, jmax);
    std::int64_t lo = std::clamp<std::int64_t>(-k, 0, jmax);
    S[i] = scale * (Q[hi] - Q[lo]);
  }

  const std::int64_t P = next_pow2(T + jmax + 1);  // fully linear convolution
  FftConvolver conv(psi, P);

  RosenblattSample out;
  out.d = d;
  out.grid = grid;
  out.span = span;
  out.discarded_mass =
      0.5 * (rosenblatt_variance_full(d) - rosenblatt_variance_truncated(d, span));
  out.draws.resize(n);
  for (std::int64_t r = 0; r < n; ++r) {
    RandomStream rs(derive_seed(seed, static_cast<std::uint64_t>(r)));
    Eigen::VectorXd g(T);
    for (std::int64_t i = 0; i < T; ++i) g[i] = rs.normal();
    Eigen::VectorXd y = conv.apply(g, KN + N + 1);
    double ssum = 0.0;
    for (std::int64_t t = 1; t <= N; ++t) ssum += y[KN + t] * y[KN + t];
    double gsum = S.dot(g.cwiseProduct(g));
    out.draws[r] = (scale * ssum - gsum) / static_cast<double>(N);
  }
  return out;
}

LimitSample sample_limit(const RegimeReport& regime, const CoefficientModel& coeff,
                         const InnovationModel& innov, int H, std::int64_t n,
                         std::uint64_t seed, const LimitOptions& opts) {
  validate(coeff);
  validate(innov);
  if (H < 0) throw Error("H must be nonnegative");
  if (n < 1) throw Error("n must be positive");
  MomentClass mc = moment_class_of(innov);
  MomentReport mom = moments(innov);

  LimitSample out;
  out.draws.resize(n, H + 1);

  switch (regime.region) {
    case Regime::A: {
      if (!mc.finite_fourth)
        throw Error("regime/model mismatch: region A requires a finite fourth moment");
      Eigen::MatrixXd sig =
          gaussian_limit_cov(coeff, mom.sigma2, *mom.eta, H, opts.cov_tol);
      Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(sig);
      Eigen::VectorXd ev = es.eigenvalues().cwiseMax(0.0).cwiseSqrt();
      Eigen::MatrixXd L = es.eigenvectors() * ev.asDiagonal();
      RandomStream rs(derive_seed(seed, 0xAu));
      Eigen::VectorXd z(H + 1);
      for (std::int64_t r = 0; r < n; ++r) {
        for (int j = 0; j <= H; ++j) z[j] = rs.normal();
        out.draws.row(r) = (L * z).transpose();
      }
      out.law = "GaussianVector";
      out.params = {{"eta", *mom.eta}, {"sigma2", mom.sigma2}};
      return out;
    }
    case Regime::B: {
      if (mc.finite_fourth)
        throw Error("regime/model mismatch: region B requires heavy-tailed innovations");
      Eigen::VectorXd w = theoretical_acov(coeff, 1.0, H, 1e-9).values;
      Eigen::VectorXd S =
          sample_stable_S(innov, n, derive_seed(seed, 0xBu), opts.stable_n_big);
      const double shift = mc.alpha / (mc.alpha - 2.0);
      for (int h = 0; h <= H; ++h) out.draws.col(h) = (S.array() - shift) * w[h];
      out.law = "StableShifted";
      out.params = {{"alpha", mc.alpha},
                    {"shift", shift},
                    {"n_big", static_cast<double>(opts.stable_n_big)}};
      return out;
    }
    case Regime::C: {
      const auto* pl = std::get_if<PowerLawModel>(&coeff);
      if (!pl) throw Error("regime/model mismatch: region C requires a power-law model");
      RosenblattSample rb = sample_rosenblatt(pl->d, opts.rosenblatt_grid,
                                              opts.rosenblatt_span, n,
                                              derive_seed(seed, 0xCu));
      const double factor = mom.sigma2 * pl->c_d * pl->c_d;
      for (int h = 0; h <= H; ++h) out.draws.col(h) = factor * rb.draws;
      out.law = "RosenblattScaled";
      out.params = {{"d", pl->d},
                    {"grid", static_cast<double>(rb.grid)},
                    {"span", rb.span},
                    {"factor", factor},
                    {"discarded_mass", rb.discarded_mass}};
      return out;
    }
    default:
      throw Error("boundary regime has no pinned limit law; override the region to sample");
  }
}

// ---------------------------------------------------------------------------
// kernel diagnostics
// ---------------------------------------------------------------------------

namespace {

// J(z) = int_0^z w^{d-1} (1+w)^{d-1} dw
struct JEval {
  double d;
  double beta;  // B(d, 1-2d) = J(inf)

  explicit JEval(double d_) : d(d_) {
    beta = std::exp(std::lgamma(d) + std::lgamma(1.0 - 2.0 * d) - std::lgamma(1.0 - d));
  }

  double operator()(double z) const {
    if (z <= 0.0) return 0.0;
    if (z <= 2.0) {
      // substitution w = tau^{1/d} flattens the endpoint singularity
      const auto& gl = detail::gauss_legendre(64);
      double zd = std::pow(z, d);
      double s = 0.0;
      for (std::size_t i = 0; i < gl.x.size(); ++i) {
        double tau = zd * gl.x[i];
        s += gl.w[i] * std::pow(1.0 + std::pow(tau, 1.0 / d), d - 1.0);
      }
      return s * zd / d;
    }
    // J(z) = B - int_z^inf w^{2d-2} (1+1/w)^{d-1} dw, expanded binomially
    double tail = 0.0, c = 1.0;
    for (int k = 0; k < 80; ++k) {
      if (k > 0) c *= (d - k) / static_cast<double>(k);
      double term = c * std::pow(z, 2.0 * d - 1.0 - k) / (k + 1.0 - 2.0 * d);
      tail += term;
      if (std::abs(term) < 1e-18) break;
    }
    return beta - tail;
  }
};

}  // namespace

double rosenblatt_variance_full(double d) {
  if (!(d > 0.25 && d < 0.5)) throw Error("d must lie in (1/4, 1/2)");
  double beta = std::exp(std::lgamma(d) + std::lgamma(1.0 - 2.0 * d) - std::lgamma(1.0 - d));
  return 4.0 * beta * beta / (4.0 * d * (4.0 * d - 1.0));
}

double rosenblatt_variance_truncated(double d, double span) {
  if (!(d > 0.25 && d < 0.5)) throw Error("d must lie in (1/4, 1/2)");
  if (!(span >= 1.0)) throw Error("span must be at least 1");
  JEval J(d);
  const double q = 4.0 * d - 1.0;  // substitution s = sigma^{1/q}
  const auto& inner = detail::gauss_legendre(32);
  auto psi_inner = [&](double s) {
    // int_0^{1-s} J((v+K)/s)^2 dv
    double len = 1.0 - s;
    if (len <= 0.0) return 0.0;
    double acc = 0.0;
    for (std::size_t i = 0; i < inner.x.size(); ++i) {
      double v = len * inner.x[i];
      double j = J((v + span) / s);
      acc += inner.w[i] * j * j;
    }
    return acc * len;
  };
  // dyadic panels in sigma tame the residual endpoint cusp at 0
  const auto& outer = detail::gauss_legendre(16);
  double total = 0.0;
  double hi = 1.0;
  for (int panel = 0; panel < 40; ++panel) {
    double lo = hi * 0.5;
    double acc = 0.0;
    for (std::size_t i = 0; i < outer.x.size(); ++i) {
      double sigma = lo + (hi - lo) * outer.x[i];
      acc += outer.w[i] * psi_inner(std::pow(sigma, 1.0 / q));
    }
    total += acc * (hi - lo);
    hi = lo;
  }
  // remaining [0, 2^-40] stub: J is at its limit there
  total += hi * J.beta * J.beta;
  return 4.0 * total / q;
}

double rosenblatt_variance_discrete(double d, std::int64_t grid, double span) {
  if (!(d > 0.25 && d < 0.5)) throw Error("d must lie in (1/4, 1/2)");
  if (grid < 2) throw Error("grid must be at least 2");
  if (!(span >= 1.0)) throw Error("span must be at least 1");
  const std::int64_t N = grid;
  const std::int64_t KN = std::llround(span * static_cast<double>(grid));
  const std::int64_t M2 = N + KN;
  Eigen::VectorXd psi(M2 + 1);
  psi[0] = 0.0;
  for (std::int64_t j = 1; j <= M2; ++j)
    psi[j] = std::pow(static_cast<double>(j), d - 1.0);

  // sum over ordered pairs (t,t') of R_s(min(t,t')+KN)^2,
  // R_s(m) = sum_{j=1..m} psi_j psi_{j+s}
  double total = 0.0;
  for (std::int64_t s = 0; s < N; ++s) {
    const std::int64_t upper = N - s;
    double run = 0.0;
    for (std::int64_t j = 1; j + s <= M2 && j <= KN; ++j) run += psi[j] * psi[j + s];
    double ssq = 0.0;
    for (std::int64_t step = 1; step <= upper; ++step) {
      std::int64_t j = KN + step;  // j + s <= KN + N = M2
      run += psi[j] * psi[j + s];
      ssq += run * run;
    }
    total += (s == 0 ? 1.0 : 2.0) * ssq;
  }

  // diagonal P(k,k)^2
  Eigen::VectorXd W(M2 + 1);
  W[0] = 0.0;
  for (std::int64_t m = 1; m <= M2; ++m) W[m] = W[m - 1] + psi[m] * psi[m];
  double sdiag = 0.0;
  for (std::int64_t k = -KN; k <= N; ++k) {
    std::int64_t hi = std::clamp<std::int64_t>(N - k, 0, M2);
    std::int64_t lo = std::clamp<std::int64_t>(-k, 0, M2);
    double p = W[hi] - W[lo];
    sdiag += p * p;
  }
  const double nn = static_cast<double>(N);
  return 2.0 * std::pow(nn, 2.0 - 4.0 * d) / (nn * nn) * (total - sdiag);
}

namespace {

struct ExactSums {
  double sum_h2 = 0.0;  // sum_{k != k'} C_h^2
  double sum_d2 = 0.0;  // sum_{k != k'} (C_h - C_0)^2
};

// Diagonal-walk evaluation of the discrete kernel sums. s = k - k' + h indexes
// the diagonals; s == h is the excluded k = k' diagonal.
ExactSums kernel_exact_sums(double d, std::int64_t N, std::int64_t KN, int h) {
  const std::int64_t T = N + KN;
  const std::int64_t hi = N + KN;
  const std::int64_t MX = 2 * T + h + 8;
  std::vector<double> psi(MX + 1, 0.0);
  for (std::int64_t j = 1; j <= MX; ++j)
    psi[j] = std::pow(static_cast<double>(j), d - 1.0);
  const double scale = std::pow(static_cast<double>(N), 1.0 - 2.0 * d);

  std::vector<double> F(hi + 1), F0(hi + 1);
  ExactSums out;
  for (std::int64_t s = -T - h - 1; s <= T + h + 1; ++s) {
    if (s == h) continue;
    std::int64_t kmin = std::max(-KN, -KN + s - h);
    std::int64_t kmax = std::min(N, N + s - h);
    if (kmin > kmax) continue;
    std::int64_t lo = std::max<std::int64_t>(1, 1 - s);
    if (lo > hi) continue;
    std::fill(F.begin(), F.end(), 0.0);
    {
      double run = 0.0;
      for (std::int64_t j = lo; j <= hi; ++j) {
        run += psi[j] * psi[j + s];
        F[j] = run;
      }
    }
    std::int64_t lo0 = 0;
    if (h > 0) {
      std::int64_t s0 = s - h;
      lo0 = std::max<std::int64_t>(1, 1 - s0);
      std::fill(F0.begin(), F0.end(), 0.0);
      double run = 0.0;
      for (std::int64_t j = lo0; j <= hi; ++j) {
        run += psi[j] * psi[j + s0];
        F0[j] = run;
      }
    }
    for (std::int64_t k = kmin; k <= kmax; ++k) {
      std::int64_t up = N - k;  // within [0, hi] by construction
      std::int64_t lw = std::max(-k, lo - 1);
      double ch = scale * (F[up] - F[lw]);
      out.sum_h2 += ch * ch;
      if (h > 0) {
        std::int64_t lw0 = std::max(-k, lo0 - 1);
        double c0 = scale * (F0[up] - F0[lw0]);
        double diff = ch - c0;
        out.sum_d2 += diff * diff;
      }
    }
  }
  return out;
}

// integral over the truncated domain of f_{N,h} * f, via per-cell Gauss nodes
// in the kernel variable v and one convolution per node.
double kernel_cross_term(double d, std::int64_t N, std::int64_t KN, int h) {
  const std::int64_t T = N + KN;  // psi support used by the cell kernel
  const double scale = std::pow(static_cast<double>(N), 1.0 - 2.0 * d);
  Eigen::VectorXd psi(T);
  for (std::int64_t j = 1; j <= T; ++j)
    psi[j - 1] = std::pow(static_cast<double>(j), d - 1.0);

  const std::int64_t W = N + KN + h + 1;  // phi over k = -KN-h .. N
  const std::int64_t P = next_pow2(T + W);
  FftConvolver conv(psi, P);

  // prefix sums for the diagonal subtraction g_h(k)
  const std::int64_t plen = T - h;
  Eigen::VectorXd cum(plen + 1);
  cum[0] = 0.0;
  for (std::int64_t j = 1; j <= plen; ++j) cum[j] = cum[j - 1] + psi[j - 1] * psi[j - 1 + h];
  Eigen::VectorXd gh(W);
  for (std::int64_t i = 0; i < W; ++i) {
    std::int64_t k = i - KN - h;
    std::int64_t up = std::clamp<std::int64_t>(N - k, 0, plen);
    std::int64_t lo = std::clamp<std::int64_t>(-k, 0, plen);
    gh[i] = cum[up] - cum[lo];
  }

  const auto& gl = detail::gauss_legendre(6);
  const double invd = 1.0 / d;
  Eigen::VectorXd phi(W);
  double total = 0.0;
  for (std::int64_t cell = 1; cell <= N; ++cell) {
    for (std::size_t gidx = 0; gidx < gl.x.size(); ++gidx) {
      double v = (static_cast<double>(cell - 1) + gl.x[gidx]) / static_cast<double>(N);
      for (std::int64_t i = 0; i < W; ++i) {
        std::int64_t k = i - KN - h;
        double t1 = v - static_cast<double>(k - 1) / static_cast<double>(N);
        double t2 = v - static_cast<double>(k) / static_cast<double>(N);
        double a = t1 > 0.0 ? std::pow(t1, d) : 0.0;
        double b = t2 > 0.0 ? std::pow(t2, d) : 0.0;
        phi[i] = (a - b) * invd;
      }
      Eigen::VectorXd A = conv.apply(phi, N + 2 * h + KN + 1);
      double s_off = 0.0;
      for (std::int64_t t = 1; t <= N; ++t)
        s_off += A[t + KN + h - 1] * A[t + 2 * h + KN - 1];
      double diag = phi.cwiseProduct(phi).dot(gh);
      total += (s_off - diag) * gl.w[gidx] / static_cast<double>(N);
    }
  }
  return scale * total;
}

}  // namespace

double kernel_l2_gap(double d, std::int64_t grid, double span) {
  if (!(d > 0.25 && d < 0.5)) throw Error("d must lie in (1/4, 1/2)");
  const std::int64_t KN = std::llround(span * static_cast<double>(grid));
  double iff2 = 0.5 * rosenblatt_variance_truncated(d, span);
  ExactSums s = kernel_exact_sums(d, grid, KN, 0);
  double cross = kernel_cross_term(d, grid, KN, 0);
  double nn = static_cast<double>(grid);
  return iff2 - 2.0 * cross + s.sum_h2 / (nn * nn);
}

double kernel_lag_gap(double d, std::int64_t grid, double span, int h) {
  if (!(d > 0.25 && d < 0.5)) throw Error("d must lie in (1/4, 1/2)");
  if (h < 1) throw Error("h must be positive");
  const std::int64_t KN = std::llround(span * static_cast<double>(grid));
  ExactSums s = kernel_exact_sums(d, grid, KN, h);
  double nn = static_cast<double>(grid);
  return s.sum_d2 / (nn * nn);
}

}  // namespace longmem
