// Command-line driver: simulate series, estimate autocovariances, classify
// rate regimes, draw from the limit laws, and run the Monte Carlo harness.
// Exit codes: 0 success, 1 usage/validation error, 2 failed convergence
// verdict from mc-run.

#include <chrono>
#include <cstdint>
#include <cstdio>
#include <filesystem>
#include <iostream>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "longmem/autocov.hpp"
#include "longmem/coeff_model.hpp"
#include "longmem/errors.hpp"
#include "longmem/innovations.hpp"
#include "longmem/limit_laws.hpp"
#include "longmem/mc_harness.hpp"
#include "longmem/process_sim.hpp"
#include "longmem/rng.hpp"
#include "longmem/run_io.hpp"
#include "longmem/stats.hpp"

namespace {

using longmem::CsvTable;
using longmem::fmt_double;
using nlohmann::json;

struct CommonFlags {
  std::string config_path;
  std::string out_dir = "out";
  std::string format = "csv";
  bool allow_boundary = false;
  std::optional<std::uint64_t> seed;
  std::optional<int> workers;
};

// Writes files under out_dir and keeps their digests for the manifest.
class OutputCollector {
 public:
  explicit OutputCollector(const std::filesystem::path& dir) : dir_(dir) {
    std::filesystem::create_directories(dir_);
  }

  void add(const std::string& name, const std::string& content) {
    longmem::write_text_file(dir_ / name, content);
    digests_.emplace_back(name, longmem::fnv1a64_hex(content));
  }

  void add_table(const std::string& basename, const CsvTable& table,
                 const std::string& format) {
    if (format == "csv") {
      add(basename + ".csv", table.to_string());
      return;
    }
    json doc;
    doc["columns"] = table.header();
    json rows = json::array();
    for (const auto& row : table.rows()) rows.push_back(row);
    doc["rows"] = rows;
    add(basename + ".json", doc.dump(2) + "\n");
  }

  void finish(const json& echo, std::uint64_t seed, std::int64_t wall_ms, int workers) {
    longmem::write_manifest(dir_, echo, seed, digests_, wall_ms, workers);
  }

 private:
  std::filesystem::path dir_;
  std::vector<std::pair<std::string, std::string>> digests_;
};

longmem::CliConfig load_config(const CommonFlags& flags) {
  if (flags.config_path.empty()) throw longmem::Error("a config file is required (--config)");
  longmem::CliConfig cli = longmem::parse_config_file(flags.config_path);
  if (flags.seed) {
    cli.experiment.master_seed = *flags.seed;
    cli.echo["seed"] = *flags.seed;
  }
  if (flags.workers) {
    if (*flags.workers < 1) throw longmem::Error("workers must be positive");
    cli.experiment.workers = *flags.workers;
    cli.echo["workers"] = *flags.workers;
  }
  if (flags.format != "csv" && flags.format != "json")
    throw longmem::Error("format must be \"csv\" or \"json\"");
  return cli;
}

// Boundary classifications carry no pinned law; --allow-boundary compares
// against the adjoining region whose normalization the report already names.
void resolve_boundary(longmem::CliConfig& cli, bool allow_boundary) {
  longmem::RegimeReport r = longmem::classify_for(cli.experiment.coeff, cli.experiment.innov);
  if (r.region != longmem::Regime::boundary) return;
  if (!allow_boundary)
    throw longmem::Error(
        "boundary regime: pass --allow-boundary to compare against the adjoining region");
  longmem::MomentClass mc = longmem::moment_class_of(cli.experiment.innov);
  cli.experiment.regime_override =
      mc.finite_fourth ? longmem::Regime::A : longmem::Regime::B;
}

json regime_to_json(const longmem::RegimeReport& r) {
  json j;
  j["region"] = longmem::regime_name(r.region);
  j["rate_exponent"] = r.rate_exponent;
  j["normalization"] = r.normalization;
  j["d"] = r.d;
  if (r.alpha) j["alpha"] = *r.alpha;
  if (!r.caveats.empty()) j["caveats"] = r.caveats;
  return j;
}

struct Timer {
  std::chrono::steady_clock::time_point start = std::chrono::steady_clock::now();
  std::int64_t ms() const {
    return std::chrono::duration_cast<std::chrono::milliseconds>(
               std::chrono::steady_clock::now() - start)
        .count();
  }
};

int cmd_simulate(const CommonFlags& flags) {
  Timer timer;
  longmem::CliConfig cli = load_config(flags);
  const auto& xc = cli.experiment;
  const std::int64_t n = xc.n_grid.front();
  const std::int64_t m =
      cli.sim_m ? *cli.sim_m : xc.trunc.order_for(xc.coeff, n);
  longmem::SeriesSample series = longmem::simulate_linear(
      xc.coeff, xc.innov, n, xc.h, m, xc.master_seed, cli.method);

  OutputCollector out(flags.out_dir);
  CsvTable table({"t", "x"});
  for (std::int64_t t = 1; t <= n + xc.h; ++t)
    table.add_row({std::to_string(t), fmt_double(series.values[t - 1])});
  out.add_table("series", table, flags.format);

  json metrics = {{"n", n}, {"m", m}, {"h", xc.h}};
  out.add("summary.json",
          longmem::make_summary("simulate", cli.echo, metrics, json::object(),
                                xc.master_seed)
                  .dump(2) +
              "\n");
  out.finish(cli.echo, xc.master_seed, timer.ms(), xc.workers);
  std::printf("simulate: N=%lld M=%lld -> %s\n", static_cast<long long>(n),
              static_cast<long long>(m), flags.out_dir.c_str());
  return 0;
}

int cmd_acov(const CommonFlags& flags) {
  Timer timer;
  longmem::CliConfig cli = load_config(flags);
  const auto& xc = cli.experiment;
  const std::int64_t n = xc.n_grid.front();
  const std::int64_t m =
      cli.sim_m ? *cli.sim_m : xc.trunc.order_for(xc.coeff, n);
  const double sigma2 = longmem::moments(xc.innov).sigma2;

  longmem::AcovSequence theo =
      longmem::theoretical_acov(xc.coeff, sigma2, xc.h, cli.acov_rel_tol);
  Eigen::VectorXd trunc = longmem::truncated_acov(xc.coeff, sigma2, xc.h, m);
  longmem::SeriesSample series = longmem::simulate_linear(
      xc.coeff, xc.innov, n, xc.h, m, xc.master_seed, cli.method);
  longmem::AcovEstimate est = longmem::sample_acov(series, xc.h);

  OutputCollector out(flags.out_dir);
  CsvTable table({"h", "gamma", "gamma_truncated", "gamma_hat"});
  for (int h = 0; h <= xc.h; ++h)
    table.add_row({std::to_string(h), fmt_double(theo.values[h]), fmt_double(trunc[h]),
                   fmt_double(est.values[h])});
  out.add_table("acov", table, flags.format);

  json metrics = {{"n", n},
                  {"m", m},
                  {"tail_bound", theo.tail_bound},
                  {"acov_rel_tol", cli.acov_rel_tol}};
  out.add("summary.json",
          longmem::make_summary("acov", cli.echo, metrics, json::object(), xc.master_seed)
                  .dump(2) +
              "\n");
  out.finish(cli.echo, xc.master_seed, timer.ms(), xc.workers);
  std::printf("acov: N=%lld M=%lld H=%d -> %s\n", static_cast<long long>(n),
              static_cast<long long>(m), xc.h, flags.out_dir.c_str());
  return 0;
}

int cmd_regime(double d, std::optional<double> alpha, std::optional<double> nu) {
  longmem::MomentClass mc;
  if (alpha) {
    mc.finite_fourth = false;
    mc.alpha = *alpha;
    if (!(*alpha > 2.0 && *alpha < 4.0)) throw longmem::Error("alpha must lie in (2, 4)");
  }
  if (nu && !(*nu > 4.0)) throw longmem::Error("nu must exceed 4");
  longmem::RegimeReport r = longmem::classify_regime(mc, d);
  std::cout << regime_to_json(r).dump(2) << "\n";
  return 0;
}

int cmd_limit_sample(const CommonFlags& flags) {
  Timer timer;
  longmem::CliConfig cli = load_config(flags);
  resolve_boundary(cli, flags.allow_boundary);
  const auto& xc = cli.experiment;
  longmem::RegimeReport regime = longmem::classify_for(xc.coeff, xc.innov);
  if (xc.regime_override) {
    // boundary resolved: sample from the adjoining region's law
    longmem::MomentClass mc = longmem::moment_class_of(xc.innov);
    regime.region = *xc.regime_override;
    if (regime.region == longmem::Regime::A) {
      regime.rate_exponent = -0.5;
      regime.normalization = "sqrtN";
    } else if (regime.region == longmem::Regime::B) {
      regime.rate_exponent = 2.0 / mc.alpha - 1.0;
      regime.normalization = "N_over_aN2";
    }
  }
  longmem::LimitSample sample =
      longmem::sample_limit(regime, xc.coeff, xc.innov, xc.h, cli.limit_n,
                            longmem::derive_seed(xc.master_seed, 0x4C494D4954ull),
                            xc.cmp.limit_opts);

  OutputCollector out(flags.out_dir);
  std::vector<std::string> header = {"draw"};
  for (int h = 0; h <= xc.h; ++h) header.push_back("lag" + std::to_string(h));
  CsvTable table(header);
  for (std::int64_t r = 0; r < sample.draws.rows(); ++r) {
    std::vector<std::string> row = {std::to_string(r)};
    for (int h = 0; h <= xc.h; ++h) row.push_back(fmt_double(sample.draws(r, h)));
    table.add_row(std::move(row));
  }
  out.add_table("limit_sample", table, flags.format);

  json params = json::object();
  for (const auto& [k, v] : sample.params) params[k] = v;
  json metrics = {{"law", sample.law}, {"draws", sample.draws.rows()}};
  metrics["law_params"] = params;
  metrics["regime"] = regime_to_json(regime);
  out.add("summary.json",
          longmem::make_summary("limit-sample", cli.echo, metrics, json::object(),
                                xc.master_seed)
                  .dump(2) +
              "\n");
  out.finish(cli.echo, xc.master_seed, timer.ms(), xc.workers);
  std::printf("limit-sample: law=%s draws=%lld -> %s\n", sample.law.c_str(),
              static_cast<long long>(sample.draws.rows()), flags.out_dir.c_str());
  return 0;
}

int cmd_mc_run(const CommonFlags& flags) {
  Timer timer;
  longmem::CliConfig cli = load_config(flags);
  resolve_boundary(cli, flags.allow_boundary);
  longmem::ExperimentResult res = longmem::run_convergence(cli.experiment);
  const auto& xc = cli.experiment;

  OutputCollector out(flags.out_dir);
  std::vector<std::string> header = {"n", "m"};
  for (int h = 0; h <= xc.h; ++h) header.push_back("ks_lag" + std::to_string(h));
  for (int h = 0; h <= xc.h; ++h) header.push_back("qdist_lag" + std::to_string(h));
  CsvTable table(header);
  for (const auto& nr : res.per_n) {
    std::vector<std::string> row = {std::to_string(nr.n), std::to_string(nr.m)};
    for (int h = 0; h <= xc.h; ++h) row.push_back(fmt_double(nr.ks_per_lag[h]));
    for (int h = 0; h <= xc.h; ++h) row.push_back(fmt_double(nr.qdist_per_lag[h]));
    table.add_row(std::move(row));
  }
  out.add_table("convergence", table, flags.format);

  json verdicts;
  verdicts["overall"] = res.verdict;
  verdicts["per_lag"] = res.lag_verdicts;
  json metrics;
  metrics["regime"] = regime_to_json(res.regime);
  metrics["limit_law"] = res.limit.law;
  metrics["notes"] = res.notes;
  out.add("summary.json",
          longmem::make_summary("mc-run", cli.echo, metrics, verdicts, xc.master_seed)
                  .dump(2) +
              "\n");
  out.finish(cli.echo, xc.master_seed, timer.ms(), xc.workers);
  std::printf("mc-run: verdict=%s -> %s\n", res.verdict.c_str(), flags.out_dir.c_str());
  return res.verdict == "not-improving" ? 2 : 0;
}

int cmd_variance_rate(const CommonFlags& flags) {
  Timer timer;
  longmem::CliConfig cli = load_config(flags);
  const auto& xc = cli.experiment;
  longmem::TruncationPolicy pol;
  if (cli.sim_m) {
    pol = xc.trunc;  // fixed order from the config's M
  } else {
    pol.kind = longmem::TruncationPolicy::Kind::scaled;
    pol.value = 3.0;
  }
  longmem::VarianceRateResult res = longmem::variance_rate_slope(
      xc.coeff, xc.innov, xc.n_grid, xc.reps, xc.master_seed, pol, xc.workers);

  OutputCollector out(flags.out_dir);
  CsvTable table({"n", "m", "variance"});
  for (const auto& p : res.points)
    table.add_row({std::to_string(p.n), std::to_string(p.m), fmt_double(p.variance)});
  out.add_table("variance_rate", table, flags.format);

  json metrics = {{"slope", res.slope}, {"intercept", res.intercept}};
  if (!res.note.empty()) metrics["note"] = res.note;
  out.add("summary.json",
          longmem::make_summary("variance-rate", cli.echo, metrics, json::object(),
                                xc.master_seed)
                  .dump(2) +
              "\n");
  out.finish(cli.echo, xc.master_seed, timer.ms(), xc.workers);
  std::printf("variance-rate: slope=%.4f -> %s\n", res.slope, flags.out_dir.c_str());
  return 0;
}

int cmd_phase_diagram(const CommonFlags& flags) {
  Timer timer;
  longmem::CliConfig cli = load_config(flags);
  const auto& xc = cli.experiment;
  longmem::TruncationPolicy pol;
  if (cli.sim_m) {
    pol = xc.trunc;
  } else {
    pol.kind = longmem::TruncationPolicy::Kind::scaled;
    pol.value = 4.0;
  }
  std::vector<longmem::PhaseCellResult> res = longmem::phase_diagram(
      cli.cells, xc.n_grid, xc.reps, xc.master_seed, pol, xc.workers);

  OutputCollector out(flags.out_dir);
  CsvTable table({"cell", "innov", "d", "region", "slope", "expected", "deviation"});
  json cells_json = json::array();
  for (std::size_t i = 0; i < res.size(); ++i) {
    const auto& r = res[i];
    json innov = longmem::innov_to_json(r.cell.innov);
    table.add_row({std::to_string(i), innov.at("kind").get<std::string>(),
                   fmt_double(r.cell.d), longmem::regime_name(r.regime.region),
                   fmt_double(r.slope), fmt_double(r.expected), fmt_double(r.deviation)});
    json cj;
    cj["innov"] = innov;
    cj["d"] = r.cell.d;
    cj["region"] = longmem::regime_name(r.regime.region);
    cj["slope"] = r.slope;
    cj["expected"] = r.expected;
    cj["deviation"] = r.deviation;
    cells_json.push_back(cj);
  }
  out.add_table("phase_diagram", table, flags.format);

  json metrics;
  metrics["cells"] = cells_json;
  out.add("summary.json",
          longmem::make_summary("phase-diagram", cli.echo, metrics, json::object(),
                                xc.master_seed)
                  .dump(2) +
              "\n");
  out.finish(cli.echo, xc.master_seed, timer.ms(), xc.workers);
  std::printf("phase-diagram: %zu cells -> %s\n", res.size(), flags.out_dir.c_str());
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"long-memory sample autocovariance toolkit"};
  app.require_subcommand(1);

  CommonFlags flags;
  std::uint64_t seed_value = 0;
  int workers_value = 0;

  auto add_common = [&](CLI::App* cmd, bool needs_config) {
    auto* c = cmd->add_option("--config", flags.config_path, "JSON experiment config");
    if (needs_config) c->required();
    cmd->add_option("--out-dir", flags.out_dir, "output directory (default: out)");
    cmd->add_option("--format", flags.format, "table format: csv or json");
    cmd->add_option("--seed", seed_value, "override the master seed");
    cmd->add_option("--workers", workers_value, "override the worker count");
    cmd->add_flag("--allow-boundary", flags.allow_boundary,
                  "compare boundary regimes against the adjoining region");
  };

  CLI::App* sim = app.add_subcommand("simulate", "simulate one series");
  add_common(sim, true);
  CLI::App* acov = app.add_subcommand("acov", "theoretical and sample autocovariances");
  add_common(acov, true);

  CLI::App* reg = app.add_subcommand("regime", "classify the convergence regime");
  double reg_d = 0.0;
  std::optional<double> reg_alpha, reg_nu;
  double reg_alpha_val = 0.0, reg_nu_val = 0.0;
  reg->add_option("--d", reg_d, "memory parameter in (0, 0.5)")->required();
  reg->add_option("--alpha", reg_alpha_val, "innovation tail index in (2, 4)");
  reg->add_option("--nu", reg_nu_val, "Student degrees of freedom (> 4)");

  CLI::App* lim = app.add_subcommand("limit-sample", "draw from the limit law");
  add_common(lim, true);
  CLI::App* mc = app.add_subcommand("mc-run", "Monte Carlo convergence experiment");
  add_common(mc, true);
  CLI::App* vr = app.add_subcommand("variance-rate", "off-diagonal variance growth rate");
  add_common(vr, true);
  CLI::App* pd = app.add_subcommand("phase-diagram", "empirical rate map over cells");
  add_common(pd, true);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    // fold CLI11's many parse-error codes into the documented exit code 1;
    // --help still exits 0
    int code = app.exit(e);
    return code == 0 ? 0 : 1;
  }

  // bound option variables are only assigned during parse, so resolve the
  // optional overrides from the parsed subcommand afterwards
  for (CLI::App* sub : app.get_subcommands()) {
    if (CLI::Option* o = sub->get_option_no_throw("--seed"); o && o->count())
      flags.seed = seed_value;
    if (CLI::Option* o = sub->get_option_no_throw("--workers"); o && o->count())
      flags.workers = workers_value;
  }
  if (reg->count("--alpha")) reg_alpha = reg_alpha_val;
  if (reg->count("--nu")) reg_nu = reg_nu_val;

  try {
    if (sim->parsed()) return cmd_simulate(flags);
    if (acov->parsed()) return cmd_acov(flags);
    if (reg->parsed()) return cmd_regime(reg_d, reg_alpha, reg_nu);
    if (lim->parsed()) return cmd_limit_sample(flags);
    if (mc->parsed()) return cmd_mc_run(flags);
    if (vr->parsed()) return cmd_variance_rate(flags);
    if (pd->parsed()) return cmd_phase_diagram(flags);
    std::fprintf(stderr, "error: no command\n");
    return 1;
  } catch (const longmem::Error& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return 1;
  } catch (const std::exception& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return 1;
  }
}
