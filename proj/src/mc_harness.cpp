#include "longmem/mc_harness.hpp"

#include <atomic>
#include <cmath>
#include <cstdio>
#include <exception>
#include <mutex>
#include <thread>

#include "longmem/errors.hpp"
#include "longmem/rng.hpp"
#include "longmem/stats.hpp"

namespace longmem {

namespace {

// Seed-indexed work loop: replication seeds derive from (master, indices), so
// the output is identical for any worker count or interleaving.
template <typename Fn>
void parallel_for(std::int64_t count, int workers, Fn&& fn) {
  if (workers <= 1 || count <= 1) {
    for (std::int64_t i = 0; i < count; ++i) fn(i);
    return;
  }
  std::atomic<std::int64_t> next{0};
  std::exception_ptr err;
  std::mutex err_mu;
  auto body = [&] {
    for (;;) {
      std::int64_t i = next.fetch_add(1);
      if (i >= count) return;
      try {
        fn(i);
      } catch (...) {
        std::lock_guard<std::mutex> lock(err_mu);
        if (!err) err = std::current_exception();
        next.store(count);
        return;
      }
    }
  };
  std::vector<std::thread> pool;
  int k = static_cast<int>(std::min<std::int64_t>(workers, count));
  pool.reserve(k);
  for (int w = 0; w < k; ++w) pool.emplace_back(body);
  for (auto& t : pool) t.join();
  if (err) std::rethrow_exception(err);
}

void check_grid(const std::vector<std::int64_t>& grid) {
  if (grid.empty()) throw Error("N grid must be nonempty");
  if (grid.front() <= 0) throw Error("N must be positive");
  for (std::size_t i = 1; i < grid.size(); ++i)
    if (grid[i] <= grid[i - 1]) throw Error("N grid must be strictly increasing");
}

// Rewrites the report for a caller-forced region, keeping the model-derived
// quantities (d, alpha) intact.
void apply_override(RegimeReport& r, Regime region, const MomentClass& mc) {
  r.region = region;
  r.caveats.clear();
  switch (region) {
    case Regime::A:
      r.rate_exponent = -0.5;
      r.normalization = "sqrtN";
      break;
    case Regime::B:
      if (mc.finite_fourth)
        throw Error("regime/model mismatch: region B requires heavy-tailed innovations");
      r.rate_exponent = 2.0 / mc.alpha - 1.0;
      r.normalization = "N_over_aN2";
      break;
    case Regime::C:
      r.rate_exponent = 2.0 * r.d - 1.0;
      r.normalization = "N_power_1_minus_2d";
      break;
    default:
      throw Error("cannot override to the boundary regime");
  }
}

SimMethod pick_method(std::int64_t m) {
  return m <= 64 ? SimMethod::direct : SimMethod::fft;
}

}  // namespace

std::int64_t TruncationPolicy::order_for(const CoefficientModel& model, std::int64_t n) const {
  double m = 0.0;
  switch (kind) {
    case Kind::automatic:
      m = std::min(choose_truncation(model, rel_tol), static_cast<double>(cap));
      break;
    case Kind::fixed:
      m = value;
      break;
    case Kind::scaled:
      m = value * static_cast<double>(n);
      break;
  }
  auto order = static_cast<std::int64_t>(std::llround(m));
  if (order < 0) throw Error("truncation order must be nonnegative");
  return order;
}

void validate(const ExperimentConfig& config) {
  validate(config.coeff);
  validate(config.innov);
  check_grid(config.n_grid);
  if (config.reps < 1) throw Error("reps must be positive");
  if (config.h < 0) throw Error("H must be nonnegative");
  if (config.workers < 1) throw Error("workers must be positive");
  const ComparisonSettings& c = config.cmp;
  if (c.limit_draws < 2) throw Error("need at least two limit draws");
  if (!(c.band_lo > 0.0 && c.band_lo < c.band_hi && c.band_hi < 1.0))
    throw Error("invalid quantile band");
  if (c.band_points < 2) throw Error("at least two band points required");
  if (!(c.ks_threshold > 0.0) || !(c.qdist_threshold > 0.0))
    throw Error("thresholds must be positive");
  if (!(config.trunc.value > 0.0)) throw Error("truncation value must be positive");
  if (!(config.trunc.rel_tol > 0.0)) throw Error("rel_tol must be positive");
  if (config.trunc.cap < 1) throw Error("truncation cap must be positive");
}

ExperimentResult run_convergence(const ExperimentConfig& config) {
  validate(config);
  const int H = config.h;
  const MomentClass mc = moment_class_of(config.innov);
  RegimeReport regime = classify_for(config.coeff, config.innov);
  bool overridden = false;
  if (config.regime_override) {
    apply_override(regime, *config.regime_override, mc);
    overridden = true;
  } else if (regime.region == Regime::boundary) {
    throw Error("boundary regime: set a regime override to pick the comparison law");
  }

  ExperimentResult out;
  out.regime = regime;
  if (!regime.caveats.empty()) out.notes.push_back(regime.caveats);
  if (overridden) out.notes.push_back("regime override applied");

  out.limit = sample_limit(regime, config.coeff, config.innov, H, config.cmp.limit_draws,
                           derive_seed(config.master_seed, 0x4C494D4954ull),
                           config.cmp.limit_opts);

  const double sigma2 = moments(config.innov).sigma2;
  for (std::size_t ni = 0; ni < config.n_grid.size(); ++ni) {
    const std::int64_t n = config.n_grid[ni];
    NResult nr;
    nr.n = n;
    nr.m = config.trunc.order_for(config.coeff, n);
    Eigen::VectorXd gamma = truncated_acov(config.coeff, sigma2, H, nr.m);
    std::optional<double> a_n;
    if (!mc.finite_fourth) a_n = norming_a(config.innov, static_cast<double>(n));
    const SimMethod method = pick_method(nr.m);
    nr.scaled_errors.resize(config.reps, H + 1);
    parallel_for(config.reps, config.workers, [&](std::int64_t r) {
      SeriesSample series =
          simulate_linear(config.coeff, config.innov, n, H, nr.m,
                          derive_seed(config.master_seed, ni, static_cast<std::uint64_t>(r)),
                          method);
      AcovEstimate est = sample_acov(series, H);
      nr.scaled_errors.row(r) = scale_errors(est, gamma, regime, a_n).transpose();
    });
    nr.ks_per_lag.resize(H + 1);
    nr.qdist_per_lag.resize(H + 1);
    for (int h = 0; h <= H; ++h) {
      nr.ks_per_lag[h] = ks_two_sample(nr.scaled_errors.col(h), out.limit.draws.col(h));
      nr.qdist_per_lag[h] =
          quantile_distance(out.limit.draws.col(h), nr.scaled_errors.col(h),
                            config.cmp.band_lo, config.cmp.band_hi, config.cmp.band_points);
    }
    out.per_n.push_back(std::move(nr));
  }

  out.lag_verdicts.assign(H + 1, "inconclusive");
  if (config.reps <= 100) {
    out.verdict = "inconclusive";
    out.notes.push_back("too few replications for a trend verdict");
    return out;
  }
  bool any_bad = false;
  for (int h = 0; h <= H; ++h) {
    bool monotone = true;
    for (std::size_t i = 1; i < out.per_n.size(); ++i)
      if (out.per_n[i].ks_per_lag[h] > out.per_n[i - 1].ks_per_lag[h] + 1e-12)
        monotone = false;
    bool close = out.per_n.back().ks_per_lag[h] <= config.cmp.ks_threshold;
    out.lag_verdicts[h] = (monotone && close) ? "improving" : "not-improving";
    if (!(monotone && close)) any_bad = true;
  }
  out.verdict = any_bad ? "not-improving" : "improving";
  return out;
}

VarianceRateResult variance_rate_slope(const CoefficientModel& coeff,
                                       const InnovationModel& innov,
                                       const std::vector<std::int64_t>& n_grid,
                                       std::int64_t reps, std::uint64_t seed,
                                       const TruncationPolicy& trunc, int workers) {
  const auto* pl = std::get_if<PowerLawModel>(&coeff);
  if (!pl) throw Error("power-law coefficients required");
  validate(coeff);
  validate(innov);
  check_grid(n_grid);
  if (n_grid.size() < 2) throw Error("need at least two grid points");
  if (reps < 2) throw Error("need at least two replications");
  if (workers < 1) throw Error("workers must be positive");

  VarianceRateResult out;
  for (std::size_t ni = 0; ni < n_grid.size(); ++ni) {
    const std::int64_t n = n_grid[ni];
    const std::int64_t m = trunc.order_for(coeff, n);
    Eigen::VectorXd q = psi_block(coeff, 0, m + 1).array().square();
    Eigen::VectorXd sums(reps);
    const SimMethod method = pick_method(m);
    parallel_for(reps, workers, [&](std::int64_t r) {
      SeriesSample series = simulate_linear(coeff, innov, n, 0, m,
                                            derive_seed(seed, ni, static_cast<std::uint64_t>(r)),
                                            method);
      const Eigen::VectorXd& z = series.innovations;  // Z_{1-m}..Z_n
      Eigen::VectorXd p2(z.size() + 1);
      p2[0] = 0.0;
      for (Eigen::Index i = 0; i < z.size(); ++i) p2[i + 1] = p2[i] + z[i] * z[i];
      double acc = series.values.squaredNorm();
      double sub = 0.0;
      for (std::int64_t j = 0; j <= m; ++j) sub += q[j] * (p2[n + m - j] - p2[m - j]);
      sums[r] = acc - sub;  // sum_t xi_t = N * r_{N,0}
    });
    out.points.push_back({n, m, sample_variance(sums)});
  }

  Eigen::VectorXd xs(out.points.size()), ys(out.points.size());
  for (std::size_t i = 0; i < out.points.size(); ++i) {
    xs[i] = static_cast<double>(out.points[i].n);
    ys[i] = out.points[i].variance;
  }
  LineFit fit = fit_loglog(xs, ys);
  out.slope = fit.slope;
  out.intercept = fit.intercept;
  if (std::abs(pl->d - 0.25) < 1e-9) {
    std::string note = "d = 1/4: the off-diagonal variance grows like N ln N; Var/(N ln N) =";
    char buf[40];
    for (const auto& p : out.points) {
      double ratio = p.variance / (static_cast<double>(p.n) * std::log(static_cast<double>(p.n)));
      std::snprintf(buf, sizeof(buf), " %.6g", ratio);
      note += buf;
    }
    note += " (near-constant when the fit is honest)";
    out.note = note;
  }
  return out;
}

LagInvarianceReport lag_invariance_check(const ExperimentConfig& config) {
  validate(config);
  const MomentClass mc = moment_class_of(config.innov);
  RegimeReport regime = classify_for(config.coeff, config.innov);
  if (config.regime_override) apply_override(regime, *config.regime_override, mc);
  if (regime.region != Regime::C)
    throw Error("lag invariance requires region C");

  LagInvarianceReport rep;
  rep.ks_threshold = config.cmp.ks_threshold;
  const int H = config.h;
  rep.pairwise_ks = Eigen::MatrixXd::Zero(H + 1, H + 1);
  rep.correlations = Eigen::MatrixXd::Identity(H + 1, H + 1);
  if (H == 0) {
    rep.trivial = true;
    rep.pass = true;
    return rep;
  }

  const std::size_t ni = config.n_grid.size() - 1;
  const std::int64_t n = config.n_grid[ni];
  const std::int64_t m = config.trunc.order_for(config.coeff, n);
  const double sigma2 = moments(config.innov).sigma2;
  Eigen::VectorXd gamma = truncated_acov(config.coeff, sigma2, H, m);
  std::optional<double> a_n;
  if (!mc.finite_fourth) a_n = norming_a(config.innov, static_cast<double>(n));
  const SimMethod method = pick_method(m);
  Eigen::MatrixXd scaled(config.reps, H + 1);
  parallel_for(config.reps, config.workers, [&](std::int64_t r) {
    SeriesSample series =
        simulate_linear(config.coeff, config.innov, n, H, m,
                        derive_seed(config.master_seed, ni, static_cast<std::uint64_t>(r)),
                        method);
    AcovEstimate est = sample_acov(series, H);
    scaled.row(r) = scale_errors(est, gamma, regime, a_n).transpose();
  });

  rep.min_correlation = 1.0;
  rep.max_pairwise_ks = 0.0;
  for (int i = 0; i <= H; ++i)
    for (int j = i + 1; j <= H; ++j) {
      double ks = ks_two_sample(scaled.col(i), scaled.col(j));
      double corr = pearson_corr(scaled.col(i), scaled.col(j));
      rep.pairwise_ks(i, j) = ks;
      rep.pairwise_ks(j, i) = ks;
      rep.correlations(i, j) = corr;
      rep.correlations(j, i) = corr;
      rep.max_pairwise_ks = std::max(rep.max_pairwise_ks, ks);
      rep.min_correlation = std::min(rep.min_correlation, corr);
    }
  rep.pass = rep.max_pairwise_ks <= rep.ks_threshold &&
             rep.min_correlation >= rep.corr_threshold;
  return rep;
}

std::vector<PhaseCellResult> phase_diagram(const std::vector<PhaseCell>& cells,
                                           const std::vector<std::int64_t>& n_grid,
                                           std::int64_t reps, std::uint64_t seed,
                                           const TruncationPolicy& trunc, int workers) {
  if (cells.empty()) throw Error("cells must be nonempty");
  check_grid(n_grid);
  if (n_grid.size() < 2) throw Error("need at least two grid points");
  if (reps < 2) throw Error("need at least two replications");
  if (workers < 1) throw Error("workers must be positive");

  std::vector<PhaseCellResult> results;
  results.reserve(cells.size());
  for (std::size_t ci = 0; ci < cells.size(); ++ci) {
    const PhaseCell& cell = cells[ci];
    validate(cell.innov);
    MomentClass mc = moment_class_of(cell.innov);
    RegimeReport regime = classify_regime(mc, cell.d);
    const double split = mc.finite_fourth ? 0.25 : 1.0 / mc.alpha;
    if (std::abs(cell.d - split) < 0.02)
      throw Error("cell too close to a regime boundary");

    CoefficientModel coeff = PowerLawModel{cell.d, 1.0, SlowlyVarying::constant, 1.0};
    const double sigma2 = moments(cell.innov).sigma2;
    const std::uint64_t cell_seed = derive_seed(seed, 0x6365ull, static_cast<std::uint64_t>(ci));

    PhaseCellResult res;
    res.cell = cell;
    res.regime = regime;
    res.n_grid = n_grid;
    res.iqrs.resize(n_grid.size());
    for (std::size_t ni = 0; ni < n_grid.size(); ++ni) {
      const std::int64_t n = n_grid[ni];
      const std::int64_t m = trunc.order_for(coeff, n);
      const double gamma0 = truncated_acov(coeff, sigma2, 0, m)[0];
      const SimMethod method = pick_method(m);
      Eigen::VectorXd errs(reps);
      parallel_for(reps, workers, [&](std::int64_t r) {
        SeriesSample series =
            simulate_linear(coeff, cell.innov, n, 0, m,
                            derive_seed(cell_seed, ni, static_cast<std::uint64_t>(r)), method);
        errs[r] = sample_acov(series, 0).values[0] - gamma0;
      });
      res.iqrs[ni] = iqr(errs);
    }
    Eigen::VectorXd xs(n_grid.size()), ys(n_grid.size());
    for (std::size_t i = 0; i < n_grid.size(); ++i) {
      xs[i] = static_cast<double>(n_grid[i]);
      ys[i] = res.iqrs[i];
    }
    LineFit fit = fit_loglog(xs, ys);
    res.slope = fit.slope;
    res.expected = regime.rate_exponent;
    res.deviation = fit.slope - regime.rate_exponent;
    results.push_back(std::move(res));
  }
  return results;
}

}  // namespace longmem
