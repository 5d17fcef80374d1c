#include "fabricnet/experiments.hpp"

#include <algorithm>
#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <set>
#include <stdexcept>
#include <utility>

#include "json.hpp"

#include "fabricnet/csv.hpp"
#include "fabricnet/net.hpp"

namespace fabricnet::experiments {
namespace {

namespace fs = std::filesystem;

std::string join_path(const std::string& dir, const std::string& name) {
  return (fs::path(dir) / name).string();
}

void ensure_dir(const std::string& dir) { fs::create_directories(dir); }

double round9(double v) {
  return std::strtod(io::CsvTable::format(v).c_str(), nullptr);
}

}  // namespace

std::vector<std::uint64_t> seed_list(std::uint64_t master_seed, int n) {
  std::vector<std::uint64_t> out;
  out.reserve(static_cast<std::size_t>(n));
  for (int i = 0; i < n; ++i) out.push_back(master_seed + static_cast<std::uint64_t>(i));
  return out;
}

offload::OffloadScenario make_offload_scenario(const config::ScenarioConfig& cfg) {
  if (cfg.cells.empty()) throw std::invalid_argument("offload scenario needs a cell");
  offload::OffloadScenario sc;
  sc.factory = cfg.factory;
  sc.ap_position = cfg.cells[0].position;
  sc.prop = cfg.prop;
  sc.shadowing = cfg.shadowing;
  sc.total_prbs = cfg.cells[0].total_prbs;
  sc.prb_bandwidth_hz = cfg.net.prb_bandwidth_hz;
  sc.cap_se = cfg.net.cap_spectral_efficiency;
  sc.trace_dt_s = cfg.offload.trace_dt_s;
  sc.epoch_s = cfg.offload.epoch_s;
  sc.horizon_s = cfg.offload.horizon_s;
  sc.run_length_s = cfg.experiment.run_length_s;
  sc.train_length_s = cfg.offload.train_length_s;
  sc.train_seed = cfg.offload.train_seed;
  sc.recovery_s = cfg.offload.recovery_s;
  sc.policy = cfg.offload.policy;
  sc.knn_k = cfg.offload.knn_k;
  sc.knn_margin_z = cfg.offload.knn_margin_z;
  sc.forest_trees = cfg.offload.forest_trees;
  sc.forest_max_depth = cfg.offload.forest_max_depth;
  sc.forest_margin_z = cfg.offload.forest_margin_z;
  sc.ar_order = cfg.offload.ar_order;
  sc.ar_margin_z = cfg.offload.ar_margin_z;
  return sc;
}

slicing::SlicingScenario make_slicing_scenario(const config::ScenarioConfig& cfg,
                                               bool transfer_target, std::uint64_t env_seed) {
  if (cfg.cells.empty()) throw std::invalid_argument("slicing scenario needs a cell");
  slicing::SlicingScenario sc;
  sc.factory = cfg.factory;
  sc.cell.id = cfg.cells[0].id;
  sc.cell.position = cfg.cells[0].position;
  sc.cell.total_prbs = cfg.cells[0].total_prbs;
  sc.cell.prop = cfg.prop;
  sc.net = cfg.net;
  sc.slices = cfg.slices;
  sc.flows = cfg.flows;
  sc.device_positions = cfg.devices;
  if (transfer_target) {
    if (cfg.slicing.transfer_scale.empty())
      throw std::invalid_argument("transfer target requested without transfer_scale");
    sc.demand_scale = cfg.slicing.transfer_scale;
  }
  sc.granularity = cfg.slicing.granularity;
  sc.window_s = cfg.slicing.window_s;
  sc.demand_levels = cfg.slicing.demand_levels;
  sc.level_thresholds = cfg.slicing.level_thresholds;
  sc.lambda = cfg.slicing.lambda;
  sc.env_seed = env_seed;
  return sc;
}

locate::LocateScenario make_locate_scenario(const config::ScenarioConfig& cfg) {
  locate::LocateScenario sc;
  sc.layout = cfg.factory.layout;
  for (const config::CellDef& c : cfg.cells) sc.tx_positions.push_back(c.position);
  sc.prop = cfg.prop;
  sc.cell_size_m = cfg.cell_size_m;
  sc.db_stride = cfg.locate.stride;
  return sc;
}

std::vector<std::string> run_offload(const config::ScenarioConfig& cfg,
                                     const std::string& out_dir, const RunOverrides& ov) {
  ensure_dir(out_dir);
  offload::OffloadScenario sc = make_offload_scenario(cfg);

  const std::vector<std::string>& names =
      ov.policies.empty() ? cfg.offload.policies : ov.policies;
  std::vector<offload::OffloadPolicy> policies;
  for (const std::string& name : names) {
    offload::OffloadPolicy p;
    if (!offload::parse_offload_policy(name, p))
      throw std::invalid_argument("unknown offload policy '" + name + "'");
    policies.push_back(p);
  }

  const std::uint64_t master = ov.seed.value_or(cfg.experiment.master_seed);
  const std::vector<std::uint64_t> seeds =
      seed_list(master, ov.seeds.value_or(cfg.experiment.seeds));

  io::CsvTable table("offload_metrics", 1,
                     {"policy", "seed", "offload_time_pct", "local_time_pct",
                      "transfer_time_pct", "replacements", "failures"});
  for (std::size_t pi = 0; pi < policies.size(); ++pi) {
    for (std::uint64_t seed : seeds) {
      const offload::OffloadRunResult res = offload::run_offload_experiment(sc, policies[pi], seed);
      table.cell(names[pi])
          .cell(seed)
          .cell(res.metrics.offload_time_pct)
          .cell(res.metrics.local_time_pct)
          .cell(res.metrics.transfer_time_pct)
          .cell(res.metrics.replacements)
          .cell(res.metrics.failures);
    }
  }
  table.write_file(join_path(out_dir, "offload_metrics.csv"));
  return {"offload_metrics.csv"};
}

namespace {

std::map<std::string, std::vector<slicing::SliceWindowQos>> greedy_rollout(
    slicing::SlicingEnv& env, const slicing::QTable& q, bool use_status) {
  env.reset();
  std::map<std::string, std::vector<slicing::SliceWindowQos>> by_slice;
  for (int w = 0; w < env.windows_per_cycle(); ++w) {
    const slicing::SlicingEnv::WindowResult res =
        env.step(q.greedy_action(env.observation_key(use_status)));
    for (const slicing::SliceWindowQos& qos : res.qos) by_slice[qos.slice_id].push_back(qos);
  }
  return by_slice;
}

std::map<std::string, std::vector<slicing::SliceWindowQos>> fixed_rollout(
    slicing::SlicingEnv& env, int action_index) {
  env.reset();
  std::map<std::string, std::vector<slicing::SliceWindowQos>> by_slice;
  for (int w = 0; w < env.windows_per_cycle(); ++w) {
    const slicing::SlicingEnv::WindowResult res = env.step(action_index);
    for (const slicing::SliceWindowQos& qos : res.qos) by_slice[qos.slice_id].push_back(qos);
  }
  return by_slice;
}

void reliability_rows(io::CsvTable& table, const config::ScenarioConfig& cfg,
                      const std::string& variant, std::uint64_t seed,
                      const std::map<std::string, std::vector<slicing::SliceWindowQos>>& qos) {
  for (const net::SliceSpec& spec : cfg.slices) {
    const auto it = qos.find(spec.id);
    const double rel =
        it == qos.end() ? 1.0 : slicing::reliability(it->second, spec);
    table.cell(variant).cell(seed).cell(spec.id).cell(rel);
  }
}

}  // namespace

std::vector<std::string> run_slicing(const config::ScenarioConfig& cfg,
                                     const std::string& out_dir, const RunOverrides& ov) {
  ensure_dir(out_dir);
  const std::uint64_t master = ov.seed.value_or(cfg.experiment.master_seed);
  const std::vector<std::uint64_t> seeds =
      seed_list(master, ov.seeds.value_or(cfg.experiment.seeds));
  const int episodes = ov.episodes.value_or(cfg.slicing.episodes);
  const slicing::EpsSchedule eps{cfg.slicing.eps_start, cfg.slicing.eps_end,
                                 cfg.slicing.eps_decay_fraction};

  io::CsvTable rel_table("slicing_reliability", 1, {"variant", "seed", "slice", "reliability"});
  io::CsvTable curve_table("slicing_curves", 1, {"variant", "seed", "episode", "mean_reward"});
  io::CsvTable transfer_curves("transfer_curves", 1,
                               {"start", "seed", "episode", "mean_reward"});
  io::CsvTable transfer_summary("transfer_summary", 1, {"start", "seed", "episodes_to_90pct"});
  const bool do_transfer = !cfg.slicing.transfer_scale.empty();

  for (std::uint64_t seed : seeds) {
    slicing::SlicingEnv env(make_slicing_scenario(cfg, false, seed));

    const slicing::TrainResult without = slicing::train(
        env, false, episodes, cfg.slicing.alpha, cfg.slicing.gamma, eps, seed, nullptr);
    const slicing::TrainResult with = slicing::train(env, true, episodes, cfg.slicing.alpha,
                                                     cfg.slicing.gamma, eps, seed, nullptr);

    reliability_rows(rel_table, cfg, "without_status", seed,
                     greedy_rollout(env, without.q, false));
    reliability_rows(rel_table, cfg, "with_status", seed, greedy_rollout(env, with.q, true));
    if (!cfg.slicing.static_alloc.empty()) {
      slicing::Allocation want(cfg.slicing.static_alloc.begin(),
                               cfg.slicing.static_alloc.end());
      const auto& actions = env.actions();
      const auto it = std::find(actions.begin(), actions.end(), want);
      if (it == actions.end())
        throw std::runtime_error("static_alloc is not representable in the action space");
      reliability_rows(rel_table, cfg, "static", seed,
                       fixed_rollout(env, static_cast<int>(it - actions.begin())));
    }

    for (std::size_t e = 0; e < without.learning_curve.size(); ++e)
      curve_table.cell("without_status").cell(seed).cell(static_cast<int>(e)).cell(
          without.learning_curve[e]);
    for (std::size_t e = 0; e < with.learning_curve.size(); ++e)
      curve_table.cell("with_status").cell(seed).cell(static_cast<int>(e)).cell(
          with.learning_curve[e]);

    if (do_transfer) {
      slicing::SlicingEnv target(make_slicing_scenario(cfg, true, seed));
      const slicing::TrainResult cold = slicing::train(
          target, true, episodes, cfg.slicing.alpha, cfg.slicing.gamma, eps, seed, nullptr);
      const slicing::QTable warm_init =
          slicing::transfer_init(with.q, target.encoding_signature(true));
      const slicing::TrainResult warm =
          slicing::train(target, true, episodes, cfg.slicing.alpha, cfg.slicing.gamma, eps,
                         seed, &warm_init);

      for (std::size_t e = 0; e < cold.learning_curve.size(); ++e)
        transfer_curves.cell("cold").cell(seed).cell(static_cast<int>(e)).cell(
            cold.learning_curve[e]);
      for (std::size_t e = 0; e < warm.learning_curve.size(); ++e)
        transfer_curves.cell("warm").cell(seed).cell(static_cast<int>(e)).cell(
            warm.learning_curve[e]);
      transfer_summary.cell("cold").cell(seed).cell(
          slicing::episodes_to_fraction_of_asymptote(cold.learning_curve, 0.9));
      transfer_summary.cell("warm").cell(seed).cell(
          slicing::episodes_to_fraction_of_asymptote(warm.learning_curve, 0.9));
    }
  }

  std::vector<std::string> files;
  rel_table.write_file(join_path(out_dir, "slicing_reliability.csv"));
  files.push_back("slicing_reliability.csv");
  curve_table.write_file(join_path(out_dir, "slicing_curves.csv"));
  files.push_back("slicing_curves.csv");
  if (do_transfer) {
    transfer_curves.write_file(join_path(out_dir, "transfer_curves.csv"));
    files.push_back("transfer_curves.csv");
    transfer_summary.write_file(join_path(out_dir, "transfer_summary.csv"));
    files.push_back("transfer_summary.csv");
  }
  return files;
}

namespace {

// Deterministic smooth model-mismatch field: a fixed set of Gaussian bumps.
struct BiasField {
  struct Bump {
    geom::Vec2 center;
    double amp_db;
  };
  std::vector<Bump> bumps;
  double radius_m = 1.0;

  double at(const geom::Vec2& p) const {
    double v = 0.0;
    for (const Bump& b : bumps) {
      const double d2 = (p.x - b.center.x) * (p.x - b.center.x) +
                        (p.y - b.center.y) * (p.y - b.center.y);
      v += b.amp_db * std::exp(-d2 / (2.0 * radius_m * radius_m));
    }
    return v;
  }
};

BiasField make_bias_field(const config::ScenarioConfig& cfg, std::uint64_t master) {
  BiasField f;
  f.radius_m = cfg.locate.bias_radius_m;
  sim::RngStream rng(master, "locate/bias");
  const geom::Rect& b = cfg.factory.layout.bounds;
  for (int i = 0; i < cfg.locate.bias_bumps; ++i) {
    BiasField::Bump bump;
    bump.center = {b.lo.x + rng.uniform01() * b.width(), b.lo.y + rng.uniform01() * b.height()};
    bump.amp_db = rng.gaussian(0.0, cfg.locate.bias_sigma_db);
    f.bumps.push_back(bump);
  }
  return f;
}

double rmse_at_holdout(const radio::Rem& rem, const radio::RssSampleSet& holdout) {
  double sse = 0.0;
  for (const radio::RssSample& s : holdout) {
    const double e = rem.bilinear(s.position) - s.rss_dbm;
    sse += e * e;
  }
  return std::sqrt(sse / static_cast<double>(holdout.size()));
}

}  // namespace

std::vector<std::string> run_locate(const config::ScenarioConfig& cfg,
                                    const std::string& out_dir, const RunOverrides& ov) {
  ensure_dir(out_dir);
  const std::uint64_t master = ov.seed.value_or(cfg.experiment.master_seed);
  const locate::LocateScenario sc = make_locate_scenario(cfg);

  std::vector<locate::MethodSpec> methods;
  for (int k : cfg.locate.ks)
    methods.push_back({locate::MethodKind::fingerprint_knn, k, ""});
  if (cfg.locate.trilateration)
    methods.push_back({locate::MethodKind::trilateration, 0, ""});

  const locate::PositioningResult res = locate::evaluate_positioning(
      sc, methods, cfg.locate.queries, cfg.locate.noise_sigma_db, master);

  io::CsvTable errors("locate_errors", 1,
                      {"method", "true_x", "true_y", "est_x", "est_y", "error_m"});
  for (const locate::ErrorSample& s : res.samples)
    errors.cell(s.method)
        .cell(s.truth.x)
        .cell(s.truth.y)
        .cell(s.estimate.x)
        .cell(s.estimate.y)
        .cell(s.error_m);
  io::CsvTable summary("locate_summary", 1, {"method", "mean_m", "median_m", "p90_m"});
  for (const locate::MethodSummary& m : res.summary)
    summary.cell(m.method).cell(m.mean_m).cell(m.median_m).cell(m.p90_m);

  // REM fusion study on the first transmitter: the realized field is the
  // model plus a smooth bias, probed with noisy measurements; maps are
  // scored on the held-out probes.
  const BiasField bias = make_bias_field(cfg, master);
  auto truth_at = [&](const geom::Vec2& p) {
    return cfg.prop.tx_power_dbm -
           radio::path_loss_motley_keenan(sc.tx_positions[0], p, cfg.factory.layout, cfg.prop) +
           bias.at(p);
  };

  sim::RngStream probe_rng(master, "locate/probes");
  const geom::Rect& b = cfg.factory.layout.bounds;
  radio::RssSampleSet train_samples;
  radio::RssSampleSet holdout_samples;
  const int n_holdout = std::max(
      1, static_cast<int>(std::llround(cfg.locate.holdout_fraction * cfg.locate.probe_count)));
  for (int i = 0; i < cfg.locate.probe_count; ++i) {
    sim::RngStream rng = probe_rng.substream(static_cast<std::uint64_t>(i));
    radio::RssSample s;
    s.position = {b.lo.x + rng.uniform01() * b.width(), b.lo.y + rng.uniform01() * b.height()};
    s.transmitter_id = "tx0";
    s.rss_dbm = truth_at(s.position) +
                (cfg.locate.probe_noise_db > 0.0 ? rng.gaussian(0.0, cfg.locate.probe_noise_db)
                                                 : 0.0);
    s.t = 0.0;
    if (i < cfg.locate.probe_count - n_holdout) {
      train_samples.push_back(std::move(s));
    } else {
      holdout_samples.push_back(std::move(s));
    }
  }

  const radio::Rem model = radio::build_model_rem(cfg.factory.layout, "tx0", sc.tx_positions[0],
                                                  cfg.prop, cfg.cell_size_m);
  const radio::Rem measured = radio::build_measured_rem(
      train_samples, "tx0", cfg.factory.layout, cfg.cell_size_m, cfg.locate.idw_power);
  const radio::Rem fused =
      radio::fuse_rem(model, measured, train_samples, cfg.locate.fusion_bandwidth_m);

  io::CsvTable rmse("rem_rmse", 1, {"map", "rmse_db"});
  rmse.cell("model").cell(rmse_at_holdout(model, holdout_samples));
  rmse.cell("measured").cell(rmse_at_holdout(measured, holdout_samples));
  rmse.cell("fused").cell(rmse_at_holdout(fused, holdout_samples));

  errors.write_file(join_path(out_dir, "locate_errors.csv"));
  summary.write_file(join_path(out_dir, "locate_summary.csv"));
  rmse.write_file(join_path(out_dir, "rem_rmse.csv"));
  return {"locate_errors.csv", "locate_summary.csv", "rem_rmse.csv"};
}

std::vector<std::string> run_monitor(const config::ScenarioConfig& cfg,
                                     const std::string& out_dir, const RunOverrides& ov) {
  ensure_dir(out_dir);
  const std::uint64_t master = ov.seed.value_or(cfg.experiment.master_seed);

  const int wpc = static_cast<int>(std::llround(cfg.factory.cycle_length_s / cfg.slicing.window_s));
  const int spw = static_cast<int>(std::llround(cfg.slicing.window_s / cfg.net.slot_s));
  const int train_windows = cfg.monitor.train_cycles * wpc;
  const int total_windows = (cfg.monitor.train_cycles + cfg.monitor.test_cycles) * wpc;
  const int L = cfg.monitor.segment_windows;

  auto slice_index = [&](const std::string& id) {
    for (std::size_t i = 0; i < cfg.slices.size(); ++i) {
      if (cfg.slices[i].id == id) return i;
    }
    throw std::invalid_argument("monitor: unknown region '" + id + "'");
  };

  std::vector<std::vector<double>> loads(cfg.slices.size(),
                                         std::vector<double>(total_windows, 0.0));
  const sim::RngStream traffic(master, "monitor/traffic");
  for (int w = 0; w < total_windows; ++w) {
    for (int s = 0; s < spw; ++s) {
      const double t = (static_cast<double>(w) * spw + s) * cfg.net.slot_s;
      for (const auto& [key, bytes] :
           net::generate_offered_load(cfg.flows, cfg.factory, t, cfg.net.slot_s, traffic)) {
        loads[slice_index(key.second)][w] += static_cast<double>(bytes);
      }
    }
  }

  std::vector<std::size_t> monitored_idx;
  for (const std::string& id : cfg.monitor.monitored) monitored_idx.push_back(slice_index(id));
  const std::size_t hidden_idx = slice_index(cfg.monitor.hidden);

  auto segment = [&](int start) {
    monitor::WindowSeries ws;
    for (std::size_t r : monitored_idx) {
      ws.emplace_back(loads[r].begin() + start, loads[r].begin() + start + L);
    }
    return ws;
  };

  std::vector<monitor::HistoryEntry> history;
  for (int s = 0; s + L <= train_windows; ++s)
    history.push_back({segment(s), loads[hidden_idx][static_cast<std::size_t>(s + L - 1)]});
  if (history.empty()) throw std::runtime_error("monitor: no training segments");

  double baseline = 0.0;
  for (const monitor::HistoryEntry& h : history) baseline += h.remote_load;
  baseline /= static_cast<double>(history.size());

  io::CsvTable estimates("monitor_estimates", 1,
                         {"segment_start_window", "truth", "gaf_knn", "global_mean"});
  double mae_knn = 0.0;
  double mae_base = 0.0;
  int n_queries = 0;
  for (int s = train_windows; s + L <= total_windows; ++s) {
    const double truth = loads[hidden_idx][static_cast<std::size_t>(s + L - 1)];
    const double est = monitor::estimate_remote_region(history, segment(s), cfg.monitor.k);
    estimates.cell(s).cell(truth).cell(est).cell(baseline);
    mae_knn += std::fabs(est - truth);
    mae_base += std::fabs(baseline - truth);
    ++n_queries;
  }
  if (n_queries == 0) throw std::runtime_error("monitor: no test segments");
  mae_knn /= n_queries;
  mae_base /= n_queries;

  io::CsvTable mae("monitor_mae", 1, {"estimator", "mae"});
  mae.cell("gaf_knn").cell(mae_knn);
  mae.cell("global_mean").cell(mae_base);

  estimates.write_file(join_path(out_dir, "monitor_estimates.csv"));
  mae.write_file(join_path(out_dir, "monitor_mae.csv"));
  return {"monitor_estimates.csv", "monitor_mae.csv"};
}

void write_manifest(const std::string& out_dir, const config::ScenarioConfig& cfg,
                    const std::string& command, std::span<const std::uint64_t> seeds,
                    std::span<const std::string> files, const std::string& error) {
  ensure_dir(out_dir);
  nlohmann::json j;
  j["artifact_version"] = kArtifactVersion;
  j["command"] = command;
  j["config_hash"] = config::config_hash(cfg.raw_text);
  j["master_seed"] = seeds.empty() ? cfg.experiment.master_seed : seeds[0];
  j["seeds"] = std::vector<std::uint64_t>(seeds.begin(), seeds.end());

  std::vector<std::string> names(files.begin(), files.end());
  std::sort(names.begin(), names.end());
  nlohmann::json inventory = nlohmann::json::array();
  for (const std::string& name : names) {
    nlohmann::json f;
    f["name"] = name;
    std::error_code ec;
    const auto size = fs::file_size(fs::path(out_dir) / name, ec);
    f["bytes"] = ec ? 0 : static_cast<std::uint64_t>(size);
    inventory.push_back(f);
  }
  j["files"] = inventory;
  if (!error.empty()) j["error"] = error;

  std::ofstream out(join_path(out_dir, "manifest.json"), std::ios::binary);
  if (!out) throw std::runtime_error("cannot write manifest in " + out_dir);
  out << j.dump(2) << '\n';
}

int execute(const config::ScenarioConfig& cfg, const std::string& command,
            const RunOverrides& ov, const std::string& out_dir) {
  const std::uint64_t master = ov.seed.value_or(cfg.experiment.master_seed);
  const std::vector<std::uint64_t> seeds =
      seed_list(master, ov.seeds.value_or(cfg.experiment.seeds));
  try {
    std::vector<std::string> files;
    if (command == "offload") {
      files = run_offload(cfg, out_dir, ov);
    } else if (command == "slicing") {
      files = run_slicing(cfg, out_dir, ov);
    } else if (command == "locate") {
      files = run_locate(cfg, out_dir, ov);
    } else if (command == "monitor") {
      files = run_monitor(cfg, out_dir, ov);
    } else {
      throw std::invalid_argument("unknown command '" + command + "'");
    }
    write_manifest(out_dir, cfg, command, seeds, files);
    return 0;
  } catch (const std::exception& e) {
    write_manifest(out_dir, cfg, command, seeds, {}, e.what());
    std::fprintf(stderr, "error: %s\n", e.what());
    return 3;
  }
}

CompareResult compare_metrics(std::span<const std::string> files,
                              const std::string& group_by) {
  if (files.empty()) throw std::invalid_argument("compare: no input files");
  std::vector<io::CsvFile> tables;
  for (const std::string& f : files) tables.push_back(io::read_csv_file(f));
  for (const io::CsvFile& t : tables) {
    if (t.columns != tables[0].columns || t.schema != tables[0].schema)
      throw std::invalid_argument("compare: schema mismatch across input files");
  }

  const auto group_it =
      std::find(tables[0].columns.begin(), tables[0].columns.end(), group_by);
  if (group_it == tables[0].columns.end())
    throw std::invalid_argument("compare: no column '" + group_by + "'");
  const std::size_t group_col =
      static_cast<std::size_t>(group_it - tables[0].columns.begin());

  std::vector<std::vector<std::string>> rows;
  for (const io::CsvFile& t : tables) {
    for (const std::vector<std::string>& r : t.rows) {
      if (r.size() != tables[0].columns.size())
        throw std::invalid_argument("compare: ragged row in input");
      rows.push_back(r);
    }
  }

  std::vector<std::size_t> numeric_cols;
  for (std::size_t c = 0; c < tables[0].columns.size(); ++c) {
    if (c == group_col) continue;
    bool numeric = !rows.empty();
    for (const std::vector<std::string>& r : rows) {
      char* end = nullptr;
      std::strtod(r[c].c_str(), &end);
      if (r[c].empty() || end != r[c].c_str() + r[c].size()) {
        numeric = false;
        break;
      }
    }
    if (numeric) numeric_cols.push_back(c);
  }

  CompareResult res;
  res.group_by = group_by;
  for (std::size_t c : numeric_cols) res.metric_columns.push_back(tables[0].columns[c]);

  std::map<std::string, std::vector<const std::vector<std::string>*>> grouped;
  for (const std::vector<std::string>& r : rows) grouped[r[group_col]].push_back(&r);

  for (const auto& [name, members] : grouped) {
    CompareGroup g;
    g.name = name;
    g.rows = static_cast<int>(members.size());
    for (std::size_t c : numeric_cols) {
      double mean = 0.0;
      for (const auto* r : members) mean += std::strtod((*r)[c].c_str(), nullptr);
      mean /= static_cast<double>(members.size());
      double var = 0.0;
      for (const auto* r : members) {
        const double d = std::strtod((*r)[c].c_str(), nullptr) - mean;
        var += d * d;
      }
      var /= static_cast<double>(members.size());
      g.metrics[tables[0].columns[c]] = {mean, std::sqrt(var)};
    }
    res.groups.push_back(std::move(g));
  }
  return res;
}

std::string compare_table(const CompareResult& res) {
  std::vector<std::string> headers{res.group_by, "rows"};
  for (const std::string& c : res.metric_columns) {
    headers.push_back(c + ".mean");
    headers.push_back(c + ".std");
  }
  std::vector<std::vector<std::string>> lines;
  for (const CompareGroup& g : res.groups) {
    std::vector<std::string> line{g.name, std::to_string(g.rows)};
    for (const std::string& c : res.metric_columns) {
      const auto it = g.metrics.find(c);
      line.push_back(io::CsvTable::format(it->second.first));
      line.push_back(io::CsvTable::format(it->second.second));
    }
    lines.push_back(std::move(line));
  }
  std::vector<std::size_t> widths(headers.size());
  for (std::size_t i = 0; i < headers.size(); ++i) widths[i] = headers[i].size();
  for (const auto& line : lines) {
    for (std::size_t i = 0; i < line.size(); ++i) widths[i] = std::max(widths[i], line[i].size());
  }
  auto emit = [&](const std::vector<std::string>& line) {
    std::string out;
    for (std::size_t i = 0; i < line.size(); ++i) {
      out += line[i];
      if (i + 1 < line.size()) out.append(widths[i] - line[i].size() + 2, ' ');
    }
    out += '\n';
    return out;
  };
  std::string out = emit(headers);
  for (const auto& line : lines) out += emit(line);
  return out;
}

std::string compare_json(const CompareResult& res) {
  nlohmann::json j;
  j["group_by"] = res.group_by;
  nlohmann::json groups = nlohmann::json::array();
  for (const CompareGroup& g : res.groups) {
    nlohmann::json jg;
    jg["name"] = g.name;
    jg["rows"] = g.rows;
    nlohmann::json metrics;
    for (const auto& [col, ms] : g.metrics) {
      metrics[col] = {{"mean", round9(ms.first)}, {"std", round9(ms.second)}};
    }
    jg["metrics"] = metrics;
    groups.push_back(jg);
  }
  j["groups"] = groups;
  return j.dump(2) + "\n";
}

}  // namespace fabricnet::experiments
