#include "longmem/run_io.hpp"

#include <cstdio>
#include <fstream>
#include <sstream>

#include "longmem/errors.hpp"
#include "longmem/version.hpp"

namespace longmem {

namespace {

using nlohmann::json;

[[noreturn]] void fail(const std::string& msg) { throw Error(msg); }

void check_known(const json& obj, const std::string& prefix,
                 std::initializer_list<const char*> allowed) {
  for (auto it = obj.begin(); it != obj.end(); ++it) {
    bool ok = false;
    for (const char* a : allowed)
      if (it.key() == a) {
        ok = true;
        break;
      }
    if (!ok) fail("unknown field: " + prefix + it.key());
  }
}

double need_number(const json& j, const std::string& name) {
  if (!j.is_number()) fail(name + " must be a number");
  return j.get<double>();
}

std::int64_t need_integer(const json& j, const std::string& name) {
  if (!j.is_number_integer()) fail(name + " must be an integer");
  return j.get<std::int64_t>();
}

std::string need_string(const json& j, const std::string& name) {
  if (!j.is_string()) fail(name + " must be a string");
  return j.get<std::string>();
}

CoefficientModel parse_coeff(const json& j) {
  if (!j.is_object()) fail("coeff must be an object");
  std::string kind = j.contains("kind") ? need_string(j.at("kind"), "coeff.kind") : "power_law";
  if (kind == "power_law") {
    check_known(j, "coeff.", {"kind", "d", "C_d", "l", "psi0"});
    if (!j.contains("d")) fail("missing field: coeff.d");
    PowerLawModel pl;
    pl.d = need_number(j.at("d"), "coeff.d");
    if (j.contains("C_d")) pl.c_d = need_number(j.at("C_d"), "coeff.C_d");
    if (j.contains("psi0")) pl.psi0 = need_number(j.at("psi0"), "coeff.psi0");
    if (j.contains("l")) {
      std::string l = need_string(j.at("l"), "coeff.l");
      if (l == "constant")
        pl.l = SlowlyVarying::constant;
      else if (l == "log_damped")
        pl.l = SlowlyVarying::log_damped;
      else
        fail("coeff.l must be \"constant\" or \"log_damped\"");
    }
    return pl;
  }
  if (kind == "explicit") {
    check_known(j, "coeff.", {"kind", "coeffs"});
    if (!j.contains("coeffs") || !j.at("coeffs").is_array())
      fail("coeff.coeffs must be an array");
    ExplicitModel ex;
    for (const auto& v : j.at("coeffs"))
      ex.coeffs.push_back(need_number(v, "coeff.coeffs entry"));
    return ex;
  }
  fail("coeff.kind must be \"power_law\" or \"explicit\"");
}

InnovationModel parse_innov(const json& j) {
  if (!j.is_object()) fail("innov must be an object");
  std::string kind = j.contains("kind") ? need_string(j.at("kind"), "innov.kind") : "gaussian";
  if (kind == "gaussian") {
    check_known(j, "innov.", {"kind", "sigma"});
    GaussianModel g;
    if (j.contains("sigma")) g.sigma = need_number(j.at("sigma"), "innov.sigma");
    return g;
  }
  if (kind == "student") {
    check_known(j, "innov.", {"kind", "nu", "scale"});
    if (!j.contains("nu")) fail("missing field: innov.nu");
    StudentTypeModel s;
    s.nu = need_number(j.at("nu"), "innov.nu");
    if (j.contains("scale")) s.scale = need_number(j.at("scale"), "innov.scale");
    return s;
  }
  if (kind == "pareto") {
    check_known(j, "innov.", {"kind", "alpha", "p", "x0"});
    if (!j.contains("alpha")) fail("missing field: innov.alpha");
    TwoSidedParetoModel p;
    p.alpha = need_number(j.at("alpha"), "innov.alpha");
    if (j.contains("p")) p.p = need_number(j.at("p"), "innov.p");
    if (j.contains("x0")) p.x0 = need_number(j.at("x0"), "innov.x0");
    return p;
  }
  fail("innov.kind must be \"gaussian\", \"student\", or \"pareto\"");
}

}  // namespace

CliConfig parse_config(const nlohmann::json& doc) {
  if (!doc.is_object()) fail("config must be a JSON object");
  check_known(doc, "",
              {"coeff", "innov", "N", "R", "H", "seed", "tolerances", "workers", "cells",
               "method", "M", "limit_n"});

  CliConfig cli;
  ExperimentConfig& xc = cli.experiment;

  if (doc.contains("coeff")) xc.coeff = parse_coeff(doc.at("coeff"));
  if (doc.contains("innov")) xc.innov = parse_innov(doc.at("innov"));

  if (doc.contains("N")) {
    const json& ns = doc.at("N");
    if (!ns.is_array() || ns.empty()) fail("N must be a nonempty array of integers");
    xc.n_grid.clear();
    for (const auto& v : ns) xc.n_grid.push_back(need_integer(v, "N entry"));
  } else {
    xc.n_grid = {1024, 4096, 16384};
  }
  if (doc.contains("R")) xc.reps = need_integer(doc.at("R"), "R");
  if (doc.contains("H")) xc.h = static_cast<int>(need_integer(doc.at("H"), "H"));
  if (doc.contains("seed")) {
    const json& s = doc.at("seed");
    if (!s.is_number_integer() || (s.is_number_integer() && !s.is_number_unsigned() &&
                                   s.get<std::int64_t>() < 0))
      fail("seed must be a nonnegative integer");
    xc.master_seed = s.get<std::uint64_t>();
  }
  if (doc.contains("workers"))
    xc.workers = static_cast<int>(need_integer(doc.at("workers"), "workers"));

  if (doc.contains("tolerances")) {
    const json& t = doc.at("tolerances");
    if (!t.is_object()) fail("tolerances must be an object");
    check_known(t, "tolerances.",
                {"sim_rel_tol", "acov_rel_tol", "ks_threshold", "qdist_threshold", "cov_tol"});
    if (t.contains("sim_rel_tol"))
      xc.trunc.rel_tol = need_number(t.at("sim_rel_tol"), "tolerances.sim_rel_tol");
    if (t.contains("acov_rel_tol"))
      cli.acov_rel_tol = need_number(t.at("acov_rel_tol"), "tolerances.acov_rel_tol");
    if (t.contains("ks_threshold"))
      xc.cmp.ks_threshold = need_number(t.at("ks_threshold"), "tolerances.ks_threshold");
    if (t.contains("qdist_threshold"))
      xc.cmp.qdist_threshold = need_number(t.at("qdist_threshold"), "tolerances.qdist_threshold");
    if (t.contains("cov_tol"))
      xc.cmp.limit_opts.cov_tol = need_number(t.at("cov_tol"), "tolerances.cov_tol");
  }

  if (doc.contains("method")) {
    std::string m = need_string(doc.at("method"), "method");
    if (m == "fft")
      cli.method = SimMethod::fft;
    else if (m == "direct")
      cli.method = SimMethod::direct;
    else
      fail("method must be \"fft\" or \"direct\"");
  }
  if (doc.contains("M")) {
    std::int64_t m = need_integer(doc.at("M"), "M");
    if (m < 0) fail("M must be nonnegative");
    cli.sim_m = m;
    xc.trunc.kind = TruncationPolicy::Kind::fixed;
    xc.trunc.value = static_cast<double>(m);
  }
  if (doc.contains("limit_n")) {
    cli.limit_n = need_integer(doc.at("limit_n"), "limit_n");
    if (cli.limit_n < 2) fail("limit_n must be at least 2");
  }

  if (doc.contains("cells")) {
    const json& cs = doc.at("cells");
    if (!cs.is_array() || cs.empty()) fail("cells must be a nonempty array");
    for (const auto& c : cs) {
      if (!c.is_object()) fail("cells entries must be objects");
      check_known(c, "cells.", {"innov", "d"});
      PhaseCell cell;
      if (c.contains("innov")) cell.innov = parse_innov(c.at("innov"));
      if (!c.contains("d")) fail("missing field: cells.d");
      cell.d = need_number(c.at("d"), "cells.d");
      cli.cells.push_back(cell);
    }
  } else {
    cli.cells = {{GaussianModel{}, 0.1},
                 {TwoSidedParetoModel{3.0, 0.5, 1.0}, 0.2},
                 {TwoSidedParetoModel{3.0, 0.5, 1.0}, 0.4}};
  }

  validate(xc);
  if (!(cli.acov_rel_tol > 0.0)) fail("acov_rel_tol must be positive");

  json echo;
  echo["coeff"] = coeff_to_json(xc.coeff);
  echo["innov"] = innov_to_json(xc.innov);
  echo["N"] = xc.n_grid;
  echo["R"] = xc.reps;
  echo["H"] = xc.h;
  echo["seed"] = xc.master_seed;
  echo["workers"] = xc.workers;
  echo["method"] = cli.method == SimMethod::fft ? "fft" : "direct";
  echo["tolerances"] = {{"sim_rel_tol", xc.trunc.rel_tol},
                        {"acov_rel_tol", cli.acov_rel_tol},
                        {"ks_threshold", xc.cmp.ks_threshold},
                        {"qdist_threshold", xc.cmp.qdist_threshold},
                        {"cov_tol", xc.cmp.limit_opts.cov_tol}};
  if (cli.sim_m) echo["M"] = *cli.sim_m;
  echo["limit_n"] = cli.limit_n;
  {
    json cells = json::array();
    for (const auto& c : cli.cells)
      cells.push_back({{"innov", innov_to_json(c.innov)}, {"d", c.d}});
    echo["cells"] = cells;
  }
  cli.echo = echo;
  return cli;
}

CliConfig parse_config_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) fail("cannot open config file: " + path);
  json doc;
  try {
    doc = json::parse(in);
  } catch (const json::parse_error& e) {
    fail(std::string("invalid JSON: ") + e.what());
  }
  return parse_config(doc);
}

nlohmann::json coeff_to_json(const CoefficientModel& model) {
  json j;
  if (const auto* pl = std::get_if<PowerLawModel>(&model)) {
    j["kind"] = "power_law";
    j["d"] = pl->d;
    j["C_d"] = pl->c_d;
    j["l"] = pl->l == SlowlyVarying::constant ? "constant" : "log_damped";
    j["psi0"] = pl->psi0;
  } else {
    const auto& ex = std::get<ExplicitModel>(model);
    j["kind"] = "explicit";
    j["coeffs"] = ex.coeffs;
  }
  return j;
}

nlohmann::json innov_to_json(const InnovationModel& model) {
  json j;
  if (const auto* g = std::get_if<GaussianModel>(&model)) {
    j["kind"] = "gaussian";
    j["sigma"] = g->sigma;
  } else if (const auto* s = std::get_if<StudentTypeModel>(&model)) {
    j["kind"] = "student";
    j["nu"] = s->nu;
    j["scale"] = s->scale;
  } else {
    const auto& p = std::get<TwoSidedParetoModel>(model);
    j["kind"] = "pareto";
    j["alpha"] = p.alpha;
    j["p"] = p.p;
    j["x0"] = p.x0;
  }
  return j;
}

std::string fmt_double(double v) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

std::uint64_t fnv1a64(const std::string& bytes) {
  std::uint64_t h = 14695981039346656037ull;
  for (unsigned char c : bytes) {
    h ^= c;
    h *= 1099511628211ull;
  }
  return h;
}

std::string fnv1a64_hex(const std::string& bytes) {
  char buf[20];
  std::snprintf(buf, sizeof(buf), "%016llx",
                static_cast<unsigned long long>(fnv1a64(bytes)));
  return buf;
}

void write_text_file(const std::filesystem::path& path, const std::string& content) {
  std::ofstream out(path, std::ios::binary);
  if (!out) fail("cannot write file: " + path.string());
  out.write(content.data(), static_cast<std::streamsize>(content.size()));
  if (!out) fail("cannot write file: " + path.string());
}

CsvTable::CsvTable(std::vector<std::string> header) : header_(std::move(header)) {}

void CsvTable::add_row(std::vector<std::string> cells) {
  if (cells.size() != header_.size()) throw Error("row width mismatch");
  rows_.push_back(std::move(cells));
}

std::string CsvTable::to_string() const {
  std::ostringstream out;
  for (std::size_t i = 0; i < header_.size(); ++i) {
    if (i) out << ',';
    out << header_[i];
  }
  out << '\n';
  for (const auto& row : rows_) {
    for (std::size_t i = 0; i < row.size(); ++i) {
      if (i) out << ',';
      out << row[i];
    }
    out << '\n';
  }
  return out.str();
}

std::string write_table(const std::filesystem::path& out_dir, const std::string& basename,
                        const CsvTable& table, const std::string& format) {
  if (format == "csv") {
    std::string name = basename + ".csv";
    write_text_file(out_dir / name, table.to_string());
    return name;
  }
  if (format == "json") {
    std::string name = basename + ".json";
    json doc;
    doc["columns"] = table.header();
    json rows = json::array();
    for (const auto& row : table.rows()) rows.push_back(row);
    doc["rows"] = rows;
    write_text_file(out_dir / name, doc.dump(2) + "\n");
    return name;
  }
  throw Error("format must be \"csv\" or \"json\"");
}

nlohmann::json make_summary(const std::string& command, const nlohmann::json& params,
                            const nlohmann::json& metrics, const nlohmann::json& verdicts,
                            std::uint64_t seed) {
  json j;
  j["command"] = command;
  j["params"] = params;
  j["metrics"] = metrics;
  j["verdicts"] = verdicts;
  j["seed"] = seed;
  return j;
}

void write_manifest(const std::filesystem::path& out_dir, const nlohmann::json& config_echo,
                    std::uint64_t master_seed,
                    const std::vector<std::pair<std::string, std::string>>& file_digests,
                    std::int64_t wall_clock_ms, int workers) {
  json files = json::object();
  for (const auto& [name, digest] : file_digests) files[name] = digest;
  json j;
  j["artifact_version"] = kVersion;
  j["config"] = config_echo;
  j["master_seed"] = master_seed;
  j["files"] = files;
  j["wall_clock_ms"] = wall_clock_ms;
  j["workers"] = workers;
  write_text_file(out_dir / "manifest.json", j.dump(2) + "\n");
}

}  // namespace longmem
