#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include <json.hpp>

namespace mixgel {

inline constexpr const char* kVersion = "0.1.0";

/// Exit codes of dispatch().
enum ExitCode : int {
  kOk = 0,
  kRuntimeError = 1,
  kConfigError = 2,
  kVerifyMismatch = 3,
};

/// One batch run: a subcommand plus its schema-validated parameter block.
struct RunConfig {
  std::string subcommand;
  nlohmann::json params;
  std::uint64_t seed = 0;
  std::string out_path;
  std::string format = "csv";  // csv | json
  int threads = 1;
  std::string plot_path;  // optional long-format (series,x,y) companion CSV
};

/// FNV-1a hash of the canonical parameter serialization and the seed;
/// echoed into every output file for reproducibility checks.
std::string config_hash(const RunConfig& config);

/// Loads the JSON config file and folds in CLI overrides. Throws
/// std::invalid_argument on malformed or unknown content.
RunConfig load_config(const std::string& config_path, const std::string& out,
                      const std::string& format, long long seed_override,
                      int threads, const std::string& plot_path = "");

/// Runs exactly one module pipeline and writes its outputs atomically
/// (temp file + rename). Returns an ExitCode; diagnostics go to stderr.
int dispatch(const RunConfig& config);

/// Re-derives the config hash and checks it against the reproducibility
/// header of the existing output file at config.out_path.
int verify_output(const RunConfig& config);

struct PlotSeriesPoint {
  std::string series;
  double x = 0.0;
  double y = 0.0;
};

/// Long-format (series, x, y) CSV for external plotting tools.
std::string emit_plot_data(const std::vector<PlotSeriesPoint>& table,
                           const std::string& x_name = "x",
                           const std::string& y_name = "y");

/// Stable numeric formatting used in all emitted tables.
std::string format_double(double v);

}  // namespace mixgel
