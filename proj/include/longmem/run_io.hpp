#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include <json.hpp>

#include "longmem/mc_harness.hpp"
#include "longmem/process_sim.hpp"

namespace longmem {

// Parsed and validated experiment description shared by all CLI commands.
// Defaults: R = 1000, H = 2, seed = 0, Gaussian innovations.
struct CliConfig {
  ExperimentConfig experiment;
  std::optional<std::int64_t> sim_m;  // explicit truncation order for `simulate`
  SimMethod method = SimMethod::fft;
  double acov_rel_tol = 1e-6;         // tolerance for theoretical autocovariances
  std::vector<PhaseCell> cells;       // phase-diagram cells
  std::int64_t limit_n = 10000;       // draw count for `limit-sample`
  nlohmann::json echo;                // the effective config, for the manifest
};

// Throws Error naming the offending field ("d must lie in (0, 0.5)",
// "alpha must lie in (2, 4)", "unknown field: ...", non-increasing N grid).
CliConfig parse_config(const nlohmann::json& doc);
CliConfig parse_config_file(const std::string& path);

nlohmann::json coeff_to_json(const CoefficientModel& model);
nlohmann::json innov_to_json(const InnovationModel& model);

// Full round-trip precision decimal rendering (%.17g).
std::string fmt_double(double v);

std::uint64_t fnv1a64(const std::string& bytes);
std::string fnv1a64_hex(const std::string& bytes);

void write_text_file(const std::filesystem::path& path, const std::string& content);

// CSV table with a header row; cells are preformatted strings, rows written
// in insertion order.
class CsvTable {
 public:
  explicit CsvTable(std::vector<std::string> header);
  void add_row(std::vector<std::string> cells);
  std::string to_string() const;
  const std::vector<std::string>& header() const { return header_; }
  const std::vector<std::vector<std::string>>& rows() const { return rows_; }

 private:
  std::vector<std::string> header_;
  std::vector<std::vector<std::string>> rows_;
};

// Serializes a table as CSV or as a JSON document {"columns": [...],
// "rows": [[...]]} depending on `format` ("csv" | "json"); returns the
// filename actually written (extension follows the format).
std::string write_table(const std::filesystem::path& out_dir, const std::string& basename,
                        const CsvTable& table, const std::string& format);

// Stable summary schema across commands:
// {command, params, metrics, verdicts, seed}.
nlohmann::json make_summary(const std::string& command, const nlohmann::json& params,
                            const nlohmann::json& metrics, const nlohmann::json& verdicts,
                            std::uint64_t seed);

// Writes manifest.json: config echo, master seed, artifact version, digest of
// every output file, wall-clock and worker count. Data files are
// byte-deterministic for a fixed seed; wall_clock_ms and workers describe the
// particular run.
void write_manifest(const std::filesystem::path& out_dir, const nlohmann::json& config_echo,
                    std::uint64_t master_seed,
                    const std::vector<std::pair<std::string, std::string>>& file_digests,
                    std::int64_t wall_clock_ms, int workers);

}  // namespace longmem
