#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "fabricnet/config.hpp"
#include "fabricnet/locate.hpp"
#include "fabricnet/monitor.hpp"
#include "fabricnet/offload.hpp"
#include "fabricnet/slicing.hpp"

namespace fabricnet::experiments {

inline constexpr const char* kArtifactVersion = "0.1.0";

// CLI-level overrides applied on top of the config file.
struct RunOverrides {
  std::optional<std::uint64_t> seed;
  std::optional<int> seeds;
  std::optional<int> episodes;
  std::vector<std::string> policies;
};

std::vector<std::uint64_t> seed_list(std::uint64_t master_seed, int n);

offload::OffloadScenario make_offload_scenario(const config::ScenarioConfig& cfg);
slicing::SlicingScenario make_slicing_scenario(const config::ScenarioConfig& cfg,
                                               bool transfer_target, std::uint64_t env_seed);
locate::LocateScenario make_locate_scenario(const config::ScenarioConfig& cfg);

// Each runner writes its CSV artifacts into out_dir and returns the file
// names it produced, in write order.
std::vector<std::string> run_offload(const config::ScenarioConfig& cfg,
                                     const std::string& out_dir, const RunOverrides& ov);
std::vector<std::string> run_slicing(const config::ScenarioConfig& cfg,
                                     const std::string& out_dir, const RunOverrides& ov);
std::vector<std::string> run_locate(const config::ScenarioConfig& cfg,
                                    const std::string& out_dir, const RunOverrides& ov);
std::vector<std::string> run_monitor(const config::ScenarioConfig& cfg,
                                     const std::string& out_dir, const RunOverrides& ov);

void write_manifest(const std::string& out_dir, const config::ScenarioConfig& cfg,
                    const std::string& command, std::span<const std::uint64_t> seeds,
                    std::span<const std::string> files, const std::string& error = "");

// Runs one command end to end, manifest included; the manifest is written
// even when the pipeline throws (with the error recorded). Returns the
// process exit code (0 ok, 3 runtime failure).
int execute(const config::ScenarioConfig& cfg, const std::string& command,
            const RunOverrides& ov, const std::string& out_dir);

struct CompareGroup {
  std::string name;
  std::map<std::string, std::pair<double, double>> metrics;  // column -> (mean, std)
  int rows = 0;
};

struct CompareResult {
  std::string group_by;
  std::vector<std::string> metric_columns;
  std::vector<CompareGroup> groups;  // ordered by group name
};

// Aggregates CSV metrics files with identical schemas: population mean/std
// of every numeric column, grouped by the values of group_by. Throws on
// schema mismatch or a missing group column.
CompareResult compare_metrics(std::span<const std::string> files, const std::string& group_by);

std::string compare_table(const CompareResult& res);
std::string compare_json(const CompareResult& res);

}  // namespace fabricnet::experiments
