#pragma once

#include <filesystem>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "json.hpp"

#include "twc/kernels.hpp"
#include "twc/simulator.hpp"

namespace twc {

/// Everything needed to reproduce one simulation.
struct RunConfig {
  KernelKind kernel = KernelKind::Matrix;
  KernelParams params;
  Mode mode = Mode::Strict;
  std::optional<std::uint32_t> window;  // twc only; kUnboundedWindow is "inf"
  Topology topology;
  CacheConfig cache;
  TwcLimits limits;
  int input_ports = 4;
  int output_ports = 4;
  std::uint64_t max_cycles = 100'000'000;
  std::uint64_t seed = 0;  // reserved, nothing is random

  void validate() const;
  SimConfig sim_config() const;
};

struct Metrics {
  std::string kernel;
  Mode mode = Mode::Strict;
  std::optional<std::uint32_t> window;
  std::uint64_t cycles = 0;
  std::uint64_t raw = 0;
  std::uint64_t war = 0;
  std::uint64_t waw = 0;
  std::uint64_t commits = 0;
  std::uint64_t aborts = 0;
  std::uint64_t requests_executed = 0;
  std::uint64_t stale_drops = 0;
  std::uint64_t firings = 0;
  double speedup_pct = 0;

  bool operator==(const Metrics&) const = default;
};

struct RunOptions {
  bool verify = false;
  std::ostream* event_log = nullptr;
};

struct RunOutput {
  Metrics metrics;
  MemoryImage memory;
  std::vector<MemoryDiff> diffs;  // against the oracle, filled when verifying
  bool verified = false;
};

std::string window_name(std::optional<std::uint32_t> window);
/// "inf" or a positive integer.
std::optional<std::uint32_t> parse_window(std::string_view s);
/// Comma-separated windows, e.g. "2,3,5,inf".
std::vector<std::uint32_t> parse_window_list(std::string_view s);

inline const std::vector<std::uint32_t> kDefaultWindows = {2, 3, 5, 10, 20, 30, kUnboundedWindow};

RunOutput run(const RunConfig& config, const RunOptions& options = {});

/// (baseline / variant - 1) * 100.
double speedup_pct(std::uint64_t baseline_cycles, std::uint64_t variant_cycles);

/// Strict and decoupled baselines plus one twc run per window, with speedups
/// against the strict row. Runs execute in parallel.
std::vector<Metrics> sweep(const RunConfig& base, const std::vector<std::uint32_t>& windows);

std::string report_csv(const std::vector<Metrics>& rows);
/// Per kernel, one "window speedup" line per twc row; blank line between kernels.
std::string report_plot_data(const std::vector<Metrics>& rows);
/// Writes sweep.csv and sweep.dat into `dir`.
void emit_report(const std::vector<Metrics>& rows, const std::filesystem::path& dir);

nlohmann::json config_to_json(const RunConfig& c);
/// Fields missing from `j` keep the values already in `base`.
RunConfig config_from_json(const nlohmann::json& j, RunConfig base = {});
RunConfig load_config(const std::filesystem::path& path, RunConfig base = {});

}  // namespace twc
