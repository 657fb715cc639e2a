#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <ostream>
#include <string>
#include <vector>

#include <json.hpp>

#include "ckp/analysis.hpp"
#include "ckp/params.hpp"
#include "ckp/potentials.hpp"
#include "ckp/state.hpp"

namespace ckp {

enum class Mode { Simulate, Sweep, Drift, OracleValidate, Urn };

std::string_view to_string(Mode mode) noexcept;
Mode parse_mode(std::string_view text);

/// Cartesian grid of parameter cells, each run with the same trials/t_max.
struct SweepGrid {
  std::vector<Probability> epsilon;
  std::vector<Probability> p;
  std::vector<CheckDepth> k;
  std::uint64_t trials = 100;
  std::uint64_t t_max = 1000;

  std::size_t cells() const noexcept { return epsilon.size() * p.size() * k.size(); }
};

struct RunConfig {
  Mode mode = Mode::Simulate;
  ModelParams params;
  InitKind init = SimpleRootCF{};
  std::uint64_t t_max = 1000;
  std::uint64_t trials = 100;
  std::uint64_t seed = 1;
  /// Empty means geometric times 0, 1, 2, 4, ..., t_max.
  std::vector<std::uint64_t> metrics_times;
  std::filesystem::path output_dir = "ckp-out";
  unsigned threads = 1;
  Tracking tracking = Tracking::Whole;
  bool events = false;

  // drift
  PotentialKind potential = PotentialKind::Exp;
  std::uint64_t states = 1000;
  bool extremal = true;
  std::optional<std::string> bound;  // rational; defaults per potential

  // oracle-validate
  std::uint64_t horizon = 6;
  std::uint64_t budget = 100'000'000;

  // urn
  std::uint64_t urn_t0 = 10;
  std::uint64_t urn_t = 90;

  std::optional<SweepGrid> grid;

  /// Rejects out-of-range values with ConfigError.
  void validate() const;
};

nlohmann::ordered_json to_json(const RunConfig& config);
/// Accepts either a bare config object or a manifest with a "config" key.
RunConfig config_from_json(const nlohmann::json& j);
SweepGrid grid_from_json(const nlohmann::json& j);
nlohmann::ordered_json to_json(const SweepGrid& grid);

bool operator==(const RunConfig& a, const RunConfig& b);

/// Default drift bound and relation for a potential.
std::pair<mpq_class, Relation> default_bound(PotentialKind kind, const ModelParams& params);

/// Column header of series.csv.
extern const char* const kSeriesHeader;

/// One CSV row per (trial, plan time); potentials as exact strings.
void write_series_row(std::ostream& out, std::uint64_t trial, const MetricsRecord& m);

struct ModeResult {
  int exit_code = 0;
  std::vector<std::string> files;  // written, relative to output_dir
};

/// Runs one mode and writes its files under config.output_dir.  Throws
/// ConfigError, BudgetExceeded or Error.
ModeResult execute(const RunConfig& config);

/// Parses argv, applies CKP_THREADS, runs, and maps failures to exit codes:
/// 0 ok, 1 a certificate or comparison failed, 2 configuration error,
/// 3 enumeration budget refused.
int cli_main(int argc, const char* const* argv, std::ostream& out, std::ostream& err);

extern const char* const kVersion;

}  // namespace ckp
