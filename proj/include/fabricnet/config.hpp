#pragma once

#include <cstdint>
#include <map>
#include <string>
#include <string_view>
#include <vector>

#include "fabricnet/factory.hpp"
#include "fabricnet/geometry.hpp"
#include "fabricnet/net.hpp"
#include "fabricnet/offload.hpp"
#include "fabricnet/radio.hpp"

namespace fabricnet::config {

struct Diagnostic {
  std::string path;  // section or section.key
  std::string message;
  int line = 0;  // 1-based, 0 when not tied to a location
  int col = 0;

  std::string to_string() const;
};

struct CellDef {
  std::string id;
  geom::Vec2 position;
  int total_prbs = 24;
};

struct SlicingParams {
  int granularity = 4;
  double window_s = 0.1;
  double lambda = 4.0;
  int demand_levels = 4;
  std::vector<double> level_thresholds{0.25, 0.5, 0.75};
  double alpha = 0.25;
  double gamma = 0.3;
  double eps_start = 1.0;
  double eps_end = 0.05;
  double eps_decay_fraction = 0.6;
  int episodes = 500;
  std::vector<double> transfer_scale;  // per-slice target demand multiplier, empty = no transfer study
  std::vector<int> static_alloc;       // optional static baseline allocation
};

struct OffloadParams {
  offload::OffloadPolicyConfig policy;
  double horizon_s = 3.0;
  double epoch_s = 1.0;
  double trace_dt_s = 0.1;
  double recovery_s = 0.0;
  double train_length_s = 400.0;
  std::uint64_t train_seed = 9001;
  int knn_k = 12;
  double knn_margin_z = 1.0;
  int forest_trees = 30;
  int forest_max_depth = 8;
  double forest_margin_z = 1.0;
  int ar_order = 5;
  double ar_margin_z = 1.0;
  std::vector<std::string> policies{"oracle", "reactive", "knn", "forest"};
};

struct LocateParams {
  int stride = 1;
  double noise_sigma_db = 2.0;
  int queries = 500;
  std::vector<int> ks{1, 4, 8};
  bool trilateration = true;
  int probe_count = 400;
  double holdout_fraction = 0.3;
  double probe_noise_db = 1.0;
  double idw_power = 2.0;
  double fusion_bandwidth_m = 6.0;
  double bias_sigma_db = 4.0;
  int bias_bumps = 12;
  double bias_radius_m = 6.0;
};

struct MonitorParams {
  std::vector<std::string> monitored;
  std::string hidden;
  int segment_windows = 10;
  int train_cycles = 30;
  int test_cycles = 10;
  int k = 5;
};

struct ExperimentParams {
  std::string kind;  // offload | slicing | locate | monitor
  std::uint64_t master_seed = 1;
  int seeds = 1;
  double run_length_s = 300.0;
};

struct ScenarioConfig {
  factory::FactorySpec factory;
  radio::PropagationParams prop;
  radio::ShadowingParams shadowing;
  double cell_size_m = 1.0;
  net::NetParams net;
  std::vector<CellDef> cells;
  std::vector<net::SliceSpec> slices;
  std::vector<net::TrafficFlow> flows;
  std::map<std::string, geom::Vec2> devices;
  SlicingParams slicing;
  OffloadParams offload;
  LocateParams locate;
  MonitorParams monitor;
  ExperimentParams experiment;

  std::string raw_text;  // exact file content, hashed into the manifest
};

struct LoadResult {
  ScenarioConfig config;
  std::vector<Diagnostic> diagnostics;

  bool ok() const { return diagnostics.empty(); }
};

// Parses and schema-validates sectioned key-value text. All diagnostics are
// collected; the config is only meaningful when ok().
LoadResult parse_scenario(std::string_view text);

LoadResult load_scenario_file(const std::string& path);

// FNV-1a 64-bit hex digest of the raw config text.
std::string config_hash(std::string_view text);

}  // namespace fabricnet::config
