#include "fabricnet/config.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <limits>
#include <set>
#include <sstream>
#include <utility>

namespace fabricnet::config {
namespace {

struct IniEntry {
  std::string key;
  std::string value;
  int line = 0;
  int col = 0;
};

struct IniSection {
  std::string name;
  int line = 0;
  std::vector<IniEntry> entries;
};

std::string_view trim(std::string_view s) {
  while (!s.empty() && std::isspace(static_cast<unsigned char>(s.front()))) s.remove_prefix(1);
  while (!s.empty() && std::isspace(static_cast<unsigned char>(s.back()))) s.remove_suffix(1);
  return s;
}

std::vector<std::string> split_ws(std::string_view s) {
  std::vector<std::string> out;
  std::stringstream ss{std::string(s)};
  std::string tok;
  while (ss >> tok) out.push_back(tok);
  return out;
}

bool parse_double(std::string_view s, double& out) {
  const std::string str(trim(s));
  if (str.empty()) return false;
  char* end = nullptr;
  out = std::strtod(str.c_str(), &end);
  return end == str.c_str() + str.size() && std::isfinite(out);
}

bool parse_int(std::string_view s, long long& out) {
  const std::string str(trim(s));
  if (str.empty()) return false;
  char* end = nullptr;
  out = std::strtoll(str.c_str(), &end, 10);
  return end == str.c_str() + str.size();
}

bool parse_u64(std::string_view s, std::uint64_t& out) {
  const std::string str(trim(s));
  if (str.empty() || str[0] == '-') return false;
  char* end = nullptr;
  out = std::strtoull(str.c_str(), &end, 10);
  return end == str.c_str() + str.size();
}

std::vector<IniSection> parse_ini(std::string_view text, std::vector<Diagnostic>& diags) {
  std::vector<IniSection> sections;
  int line_no = 0;
  std::size_t pos = 0;
  while (pos <= text.size()) {
    const std::size_t eol = text.find('\n', pos);
    std::string_view raw =
        text.substr(pos, eol == std::string_view::npos ? std::string_view::npos : eol - pos);
    pos = eol == std::string_view::npos ? text.size() + 1 : eol + 1;
    ++line_no;
    if (!raw.empty() && raw.back() == '\r') raw.remove_suffix(1);

    std::string_view line = trim(raw);
    if (line.empty() || line[0] == '#' || line[0] == ';') continue;

    const int col = static_cast<int>(raw.find_first_not_of(" \t")) + 1;
    if (line.front() == '[') {
      if (line.back() != ']') {
        diags.push_back({"parse", "unterminated section header", line_no, col});
        continue;
      }
      const std::string name(trim(line.substr(1, line.size() - 2)));
      if (name.empty()) {
        diags.push_back({"parse", "empty section name", line_no, col});
        continue;
      }
      sections.push_back({name, line_no, {}});
      continue;
    }

    const std::size_t eq = line.find('=');
    if (eq == std::string_view::npos) {
      diags.push_back({"parse", "expected 'key = value'", line_no, col});
      continue;
    }
    if (sections.empty()) {
      diags.push_back({"parse", "key before any section header", line_no, col});
      continue;
    }
    const std::string key(trim(line.substr(0, eq)));
    const std::string value(trim(line.substr(eq + 1)));
    if (key.empty()) {
      diags.push_back({"parse", "empty key", line_no, col});
      continue;
    }
    sections.back().entries.push_back({key, value, line_no, col});
  }
  return sections;
}

// Typed, consumption-tracked view of one section. Every key read is marked;
// finish() rejects whatever is left.
class SectionReader {
 public:
  SectionReader(const IniSection& section, std::vector<Diagnostic>& diags)
      : s_(section), diags_(diags) {}

  const IniEntry* find(const std::string& key, bool required) {
    const IniEntry* hit = nullptr;
    int count = 0;
    for (const IniEntry& e : s_.entries) {
      if (e.key != key) continue;
      ++count;
      if (!hit) hit = &e;
    }
    consumed_.insert(key);
    if (count > 1)
      diags_.push_back({path(key), "duplicate key", hit->line, hit->col});
    if (!hit && required)
      diags_.push_back({path(key), "missing required key", s_.line, 1});
    return hit;
  }

  std::vector<const IniEntry*> find_all(const std::string& key) {
    consumed_.insert(key);
    std::vector<const IniEntry*> out;
    for (const IniEntry& e : s_.entries) {
      if (e.key == key) out.push_back(&e);
    }
    return out;
  }

  std::string get_string(const std::string& key, const std::string& def = "",
                         bool required = false) {
    const IniEntry* e = find(key, required);
    return e ? e->value : def;
  }

  double get_double(const std::string& key, double def, bool required = false) {
    const IniEntry* e = find(key, required);
    if (!e) return def;
    double v;
    if (!parse_double(e->value, v)) {
      diags_.push_back({path(key), "not a number: '" + e->value + "'", e->line, e->col});
      return def;
    }
    return v;
  }

  int get_int(const std::string& key, int def, bool required = false) {
    const IniEntry* e = find(key, required);
    if (!e) return def;
    long long v;
    if (!parse_int(e->value, v) || v < std::numeric_limits<int>::min() ||
        v > std::numeric_limits<int>::max()) {
      diags_.push_back({path(key), "not an integer: '" + e->value + "'", e->line, e->col});
      return def;
    }
    return static_cast<int>(v);
  }

  std::uint64_t get_u64(const std::string& key, std::uint64_t def, bool required = false) {
    const IniEntry* e = find(key, required);
    if (!e) return def;
    std::uint64_t v;
    if (!parse_u64(e->value, v)) {
      diags_.push_back(
          {path(key), "not a non-negative integer: '" + e->value + "'", e->line, e->col});
      return def;
    }
    return v;
  }

  bool get_bool(const std::string& key, bool def) {
    const IniEntry* e = find(key, false);
    if (!e) return def;
    if (e->value == "true" || e->value == "1") return true;
    if (e->value == "false" || e->value == "0") return false;
    diags_.push_back({path(key), "not a boolean: '" + e->value + "'", e->line, e->col});
    return def;
  }

  bool get_vec2(const std::string& key, geom::Vec2& out, bool required) {
    const IniEntry* e = find(key, required);
    if (!e) return false;
    const std::vector<std::string> toks = split_ws(e->value);
    double x, y;
    if (toks.size() != 2 || !parse_double(toks[0], x) || !parse_double(toks[1], y)) {
      diags_.push_back({path(key), "expected 'x y': '" + e->value + "'", e->line, e->col});
      return false;
    }
    out = {x, y};
    return true;
  }

  bool get_rect(const std::string& key, geom::Rect& out, bool required) {
    const IniEntry* e = find(key, required);
    if (!e) return false;
    const std::vector<std::string> toks = split_ws(e->value);
    double v[4];
    if (toks.size() != 4 || !parse_double(toks[0], v[0]) || !parse_double(toks[1], v[1]) ||
        !parse_double(toks[2], v[2]) || !parse_double(toks[3], v[3])) {
      diags_.push_back(
          {path(key), "expected 'x0 y0 x1 y1': '" + e->value + "'", e->line, e->col});
      return false;
    }
    out = {{v[0], v[1]}, {v[2], v[3]}};
    if (out.hi.x <= out.lo.x || out.hi.y <= out.lo.y) {
      diags_.push_back({path(key), "degenerate rectangle", e->line, e->col});
      return false;
    }
    return true;
  }

  std::vector<double> get_doubles(const std::string& key, std::vector<double> def,
                                  bool required = false) {
    const IniEntry* e = find(key, required);
    if (!e) return def;
    std::vector<double> out;
    for (const std::string& tok : split_ws(e->value)) {
      double v;
      if (!parse_double(tok, v)) {
        diags_.push_back({path(key), "not a number list: '" + e->value + "'", e->line, e->col});
        return def;
      }
      out.push_back(v);
    }
    return out;
  }

  std::vector<int> get_ints(const std::string& key, std::vector<int> def,
                            bool required = false) {
    const IniEntry* e = find(key, required);
    if (!e) return def;
    std::vector<int> out;
    for (const std::string& tok : split_ws(e->value)) {
      long long v;
      if (!parse_int(tok, v)) {
        diags_.push_back(
            {path(key), "not an integer list: '" + e->value + "'", e->line, e->col});
        return def;
      }
      out.push_back(static_cast<int>(v));
    }
    return out;
  }

  std::vector<std::string> get_strings(const std::string& key, std::vector<std::string> def,
                                       bool required = false) {
    const IniEntry* e = find(key, required);
    if (!e) return def;
    const std::vector<std::string> out = split_ws(e->value);
    if (out.empty()) {
      diags_.push_back({path(key), "empty list", e->line, e->col});
      return def;
    }
    return out;
  }

  void diag(const std::string& key, const std::string& message) {
    const IniEntry* e = nullptr;
    for (const IniEntry& entry : s_.entries) {
      if (entry.key == key) {
        e = &entry;
        break;
      }
    }
    diags_.push_back({path(key), message, e ? e->line : s_.line, e ? e->col : 1});
  }

  void finish() {
    for (const IniEntry& e : s_.entries) {
      if (!consumed_.count(e.key))
        diags_.push_back({path(e.key), "unknown key", e.line, e.col});
    }
  }

  std::string path(const std::string& key) const { return s_.name + "." + key; }

 private:
  const IniSection& s_;
  std::vector<Diagnostic>& diags_;
  std::set<std::string> consumed_;
};

const std::set<std::string> kKnownSections = {
    "factory", "factory.wall", "factory.machine", "factory.agv",
    "radio",   "cell",         "net",             "slice",
    "device",  "flow",         "slicing",         "offload",
    "locate",  "monitor",      "experiment"};

void read_factory(const IniSection& s, ScenarioConfig& cfg, std::vector<Diagnostic>& d) {
  SectionReader r(s, d);
  r.get_rect("bounds", cfg.factory.layout.bounds, true);
  cfg.factory.cycle_length_s = r.get_double("cycle_length_s", 100.0);
  cfg.factory.phase_count = r.get_int("phase_count", 20);
  if (cfg.factory.cycle_length_s <= 0.0) r.diag("cycle_length_s", "must be > 0");
  if (cfg.factory.phase_count < 1) r.diag("phase_count", "must be >= 1");
  r.finish();
}

void read_wall(const IniSection& s, ScenarioConfig& cfg, std::vector<Diagnostic>& d) {
  SectionReader r(s, d);
  factory::Wall w;
  const bool has_a = r.get_vec2("a", w.a, true);
  const bool has_b = r.get_vec2("b", w.b, true);
  w.penetration_loss_db = r.get_double("loss_db", 0.0);
  if (w.penetration_loss_db < 0.0) r.diag("loss_db", "must be >= 0");
  if (has_a && has_b && w.a == w.b) r.diag("b", "wall endpoints coincide");
  cfg.factory.layout.walls.push_back(w);
  r.finish();
}

void read_machine(const IniSection& s, ScenarioConfig& cfg, std::vector<Diagnostic>& d) {
  SectionReader r(s, d);
  factory::Machine m;
  m.id = r.get_string("id", "", true);
  r.get_vec2("position", m.position, true);
  for (const IniEntry* e : r.find_all("mode")) {
    const std::vector<std::string> toks = split_ws(e->value);
    double dur;
    if ((toks.size() != 2 && toks.size() != 3) || !parse_double(toks[1], dur)) {
      d.push_back({r.path("mode"), "expected 'name duration [profile]': '" + e->value + "'",
                   e->line, e->col});
      continue;
    }
    if (dur <= 0.0) {
      d.push_back({r.path("mode"), "mode duration must be > 0", e->line, e->col});
      continue;
    }
    m.modes.push_back({toks[0], dur, toks.size() == 3 ? toks[2] : ""});
  }
  m.schedule = r.get_ints("schedule", {}, true);
  if (m.modes.empty()) r.diag("mode", "machine needs at least one mode");
  if (m.schedule.empty()) r.diag("schedule", "machine needs a schedule");
  for (int idx : m.schedule) {
    if (idx < 0 || idx >= static_cast<int>(m.modes.size())) {
      r.diag("schedule", "mode index " + std::to_string(idx) + " out of range");
      break;
    }
  }
  cfg.factory.machines.push_back(std::move(m));
  r.finish();
}

void read_agv(const IniSection& s, ScenarioConfig& cfg, std::vector<Diagnostic>& d) {
  SectionReader r(s, d);
  factory::Agv a;
  a.id = r.get_string("id", "", true);
  const std::vector<double> wp = r.get_doubles("waypoints", {}, true);
  if (wp.size() < 4 || wp.size() % 2 != 0) {
    r.diag("waypoints", "need an even list of >= 4 coordinates");
  } else {
    for (std::size_t i = 0; i + 1 < wp.size(); i += 2) a.waypoints.push_back({wp[i], wp[i + 1]});
  }
  a.speed_mps = r.get_double("speed", 1.0);
  if (a.speed_mps <= 0.0) r.diag("speed", "must be > 0");
  a.loop = r.get_bool("loop", true);
  a.start_t = r.get_double("start_t", 0.0);
  const double stop = r.get_double("stop_t", -1.0);
  if (stop >= 0.0) a.stop_t = stop;
  cfg.factory.agvs.push_back(std::move(a));
  r.finish();
}

void read_radio(const IniSection& s, ScenarioConfig& cfg, std::vector<Diagnostic>& d) {
  SectionReader r(s, d);
  cfg.prop.pl0_db = r.get_double("pl0_db", 40.0);
  cfg.prop.d0_m = r.get_double("d0_m", 1.0);
  cfg.prop.exponent = r.get_double("exponent", 2.0);
  cfg.prop.tx_power_dbm = r.get_double("tx_power_dbm", 23.0);
  cfg.prop.noise_floor_dbm = r.get_double("noise_floor_dbm", -96.0);
  cfg.prop.d_min_m = r.get_double("d_min_m", 0.1);
  cfg.shadowing.sigma_db = r.get_double("shadowing_sigma_db", 0.0);
  cfg.shadowing.decorrelation_distance_m = r.get_double("decorrelation_m", 5.0);
  cfg.shadowing.fast_fading_sigma_db = r.get_double("fast_fading_sigma_db", 0.0);
  cfg.prop.shadowing_sigma_db = cfg.shadowing.sigma_db;
  cfg.cell_size_m = r.get_double("cell_size_m", 1.0);
  if (cfg.prop.d0_m <= 0.0) r.diag("d0_m", "must be > 0");
  if (cfg.prop.exponent <= 0.0) r.diag("exponent", "must be > 0");
  if (cfg.shadowing.sigma_db < 0.0) r.diag("shadowing_sigma_db", "must be >= 0");
  if (cfg.shadowing.decorrelation_distance_m <= 0.0) r.diag("decorrelation_m", "must be > 0");
  if (cfg.shadowing.fast_fading_sigma_db < 0.0) r.diag("fast_fading_sigma_db", "must be >= 0");
  if (cfg.cell_size_m <= 0.0) r.diag("cell_size_m", "must be > 0");
  r.finish();
}

void read_cell(const IniSection& s, ScenarioConfig& cfg, std::vector<Diagnostic>& d) {
  SectionReader r(s, d);
  CellDef c;
  c.id = r.get_string("id", "cell" + std::to_string(cfg.cells.size()));
  r.get_vec2("position", c.position, true);
  c.total_prbs = r.get_int("total_prbs", 24);
  if (c.total_prbs < 1) r.diag("total_prbs", "must be >= 1");
  cfg.cells.push_back(std::move(c));
  r.finish();
}

void read_net(const IniSection& s, ScenarioConfig& cfg, std::vector<Diagnostic>& d) {
  SectionReader r(s, d);
  cfg.net.slot_s = r.get_double("slot_s", 0.010);
  cfg.net.prb_bandwidth_hz = r.get_double("prb_bandwidth_hz", 360e3);
  cfg.net.cap_spectral_efficiency = r.get_double("cap_se", 7.4);
  cfg.net.ref_spectral_efficiency = r.get_double("ref_se", 4.0);
  cfg.net.queue_cap_bytes = r.get_u64("queue_cap_bytes", 1'000'000);
  cfg.net.handover_hysteresis_db = r.get_double("handover_hysteresis_db", 3.0);
  if (cfg.net.slot_s <= 0.0) r.diag("slot_s", "must be > 0");
  if (cfg.net.prb_bandwidth_hz <= 0.0) r.diag("prb_bandwidth_hz", "must be > 0");
  if (cfg.net.cap_spectral_efficiency <= 0.0) r.diag("cap_se", "must be > 0");
  if (cfg.net.ref_spectral_efficiency <= 0.0) r.diag("ref_se", "must be > 0");
  if (cfg.net.queue_cap_bytes == 0) r.diag("queue_cap_bytes", "must be > 0");
  r.finish();
}

void read_slice(const IniSection& s, ScenarioConfig& cfg, std::vector<Diagnostic>& d) {
  SectionReader r(s, d);
  net::SliceSpec sp;
  sp.id = r.get_string("id", "", true);
  sp.latency_bound_ms = r.get_double("latency_bound_ms", 10.0);
  sp.throughput_floor_bps = r.get_double("throughput_floor_bps", 0.0);
  sp.weight = r.get_double("weight", 1.0);
  if (sp.latency_bound_ms <= 0.0) r.diag("latency_bound_ms", "must be > 0");
  if (sp.throughput_floor_bps < 0.0) r.diag("throughput_floor_bps", "must be >= 0");
  cfg.slices.push_back(std::move(sp));
  r.finish();
}

void read_device(const IniSection& s, ScenarioConfig& cfg, std::vector<Diagnostic>& d) {
  SectionReader r(s, d);
  const std::string id = r.get_string("id", "", true);
  geom::Vec2 pos;
  r.get_vec2("position", pos, true);
  if (!id.empty()) {
    if (cfg.devices.count(id))
      r.diag("id", "duplicate device id '" + id + "'");
    else
      cfg.devices[id] = pos;
  }
  r.finish();
}

void read_flow(const IniSection& s, ScenarioConfig& cfg, std::vector<Diagnostic>& d) {
  SectionReader r(s, d);
  net::TrafficFlow f;
  f.id = r.get_string("id", "flow" + std::to_string(cfg.flows.size()));
  f.device_id = r.get_string("device", "", true);
  f.slice_id = r.get_string("slice", "", true);
  f.period_ms = r.get_double("period_ms", 10.0);
  f.payload_bytes = r.get_u64("payload_bytes", 100);
  f.jitter_sigma_ms = r.get_double("jitter_sigma_ms", 0.0);
  f.burst_alpha = r.get_double("burst_alpha", 0.0);
  if (f.period_ms <= 0.0) r.diag("period_ms", "must be > 0");
  if (f.payload_bytes == 0) r.diag("payload_bytes", "must be >= 1");
  if (f.jitter_sigma_ms < 0.0) r.diag("jitter_sigma_ms", "must be >= 0");
  const std::string gate = r.get_string("gate", "");
  if (!gate.empty()) {
    const std::vector<std::string> toks = split_ws(gate);
    long long idx;
    if (toks.size() != 2 || !parse_int(toks[1], idx)) {
      r.diag("gate", "expected 'machine_id mode_index'");
    } else {
      f.mode_gate = net::ModeGate{toks[0], static_cast<int>(idx)};
    }
  }
  cfg.flows.push_back(std::move(f));
  r.finish();
}

void read_slicing(const IniSection& s, ScenarioConfig& cfg, std::vector<Diagnostic>& d) {
  SectionReader r(s, d);
  SlicingParams& p = cfg.slicing;
  p.granularity = r.get_int("granularity", p.granularity);
  p.window_s = r.get_double("window_s", p.window_s);
  p.lambda = r.get_double("lambda", p.lambda);
  p.demand_levels = r.get_int("demand_levels", p.demand_levels);
  p.level_thresholds = r.get_doubles("level_thresholds", p.level_thresholds);
  p.alpha = r.get_double("alpha", p.alpha);
  p.gamma = r.get_double("gamma", p.gamma);
  p.eps_start = r.get_double("eps_start", p.eps_start);
  p.eps_end = r.get_double("eps_end", p.eps_end);
  p.eps_decay_fraction = r.get_double("eps_decay_fraction", p.eps_decay_fraction);
  p.episodes = r.get_int("episodes", p.episodes);
  p.transfer_scale = r.get_doubles("transfer_scale", {});
  p.static_alloc = r.get_ints("static_alloc", {});
  if (p.granularity < 1) r.diag("granularity", "must be >= 1");
  if (p.window_s <= 0.0) r.diag("window_s", "must be > 0");
  if (p.lambda < 0.0) r.diag("lambda", "must be >= 0");
  if (p.demand_levels < 1) r.diag("demand_levels", "must be >= 1");
  if (!(p.alpha > 0.0 && p.alpha <= 1.0)) r.diag("alpha", "must be in (0, 1]");
  if (!(p.gamma >= 0.0 && p.gamma < 1.0)) r.diag("gamma", "must be in [0, 1)");
  if (p.episodes < 1) r.diag("episodes", "must be >= 1");
  if (static_cast<int>(p.level_thresholds.size()) != p.demand_levels - 1)
    r.diag("level_thresholds", "need demand_levels - 1 thresholds");
  for (std::size_t i = 0; i < p.level_thresholds.size(); ++i) {
    const double v = p.level_thresholds[i];
    if (v <= 0.0 || v >= 1.0 || (i > 0 && v <= p.level_thresholds[i - 1])) {
      r.diag("level_thresholds", "thresholds must be ascending inside (0, 1)");
      break;
    }
  }
  r.finish();
}

void read_offload(const IniSection& s, ScenarioConfig& cfg, std::vector<Diagnostic>& d) {
  SectionReader r(s, d);
  OffloadParams& p = cfg.offload;
  p.policy.required_bps = r.get_double("required_bps", 0.0, true);
  p.policy.threshold_up_bps = r.get_double("threshold_up_bps", 0.0, true);
  p.policy.threshold_down_bps = r.get_double("threshold_down_bps", 0.0, true);
  p.policy.t_offload_s = r.get_double("t_offload_s", 1.0);
  p.policy.t_onboard_s = r.get_double("t_onboard_s", 2.0);
  p.policy.fail_grace_s = r.get_double("fail_grace_s", 0.5);
  p.horizon_s = r.get_double("horizon_s", p.horizon_s);
  p.epoch_s = r.get_double("epoch_s", p.epoch_s);
  p.trace_dt_s = r.get_double("trace_dt_s", p.trace_dt_s);
  p.recovery_s = r.get_double("recovery_s", p.recovery_s);
  p.train_length_s = r.get_double("train_length_s", p.train_length_s);
  p.train_seed = r.get_u64("train_seed", p.train_seed);
  p.knn_k = r.get_int("knn_k", p.knn_k);
  p.knn_margin_z = r.get_double("knn_margin_z", p.knn_margin_z);
  p.forest_trees = r.get_int("forest_trees", p.forest_trees);
  p.forest_max_depth = r.get_int("forest_max_depth", p.forest_max_depth);
  p.forest_margin_z = r.get_double("forest_margin_z", p.forest_margin_z);
  p.ar_order = r.get_int("ar_order", p.ar_order);
  p.ar_margin_z = r.get_double("ar_margin_z", p.ar_margin_z);
  p.policies = r.get_strings("policies", p.policies);
  if (p.policy.required_bps <= 0.0) r.diag("required_bps", "must be > 0");
  if (p.policy.threshold_up_bps < p.policy.threshold_down_bps)
    r.diag("threshold_down_bps", "must be <= threshold_up_bps");
  if (p.policy.t_offload_s < 0.0) r.diag("t_offload_s", "must be >= 0");
  if (p.policy.t_onboard_s < 0.0) r.diag("t_onboard_s", "must be >= 0");
  if (p.policy.fail_grace_s < 0.0) r.diag("fail_grace_s", "must be >= 0");
  if (p.horizon_s <= 0.0) r.diag("horizon_s", "must be > 0");
  if (p.epoch_s <= 0.0) r.diag("epoch_s", "must be > 0");
  if (p.trace_dt_s <= 0.0) r.diag("trace_dt_s", "must be > 0");
  if (p.recovery_s < 0.0) r.diag("recovery_s", "must be >= 0");
  if (p.train_length_s <= 0.0) r.diag("train_length_s", "must be > 0");
  if (p.knn_k < 1) r.diag("knn_k", "must be >= 1");
  if (p.forest_trees < 1) r.diag("forest_trees", "must be >= 1");
  if (p.ar_order < 1) r.diag("ar_order", "must be >= 1");
  for (const std::string& name : p.policies) {
    offload::OffloadPolicy parsed;
    if (!offload::parse_offload_policy(name, parsed))
      r.diag("policies", "unknown policy '" + name + "'");
  }
  r.finish();
}

void read_locate(const IniSection& s, ScenarioConfig& cfg, std::vector<Diagnostic>& d) {
  SectionReader r(s, d);
  LocateParams& p = cfg.locate;
  p.stride = r.get_int("stride", p.stride);
  p.noise_sigma_db = r.get_double("noise_sigma_db", p.noise_sigma_db);
  p.queries = r.get_int("queries", p.queries);
  p.ks = r.get_ints("ks", p.ks);
  p.trilateration = r.get_bool("trilateration", p.trilateration);
  p.probe_count = r.get_int("probe_count", p.probe_count);
  p.holdout_fraction = r.get_double("holdout_fraction", p.holdout_fraction);
  p.probe_noise_db = r.get_double("probe_noise_db", p.probe_noise_db);
  p.idw_power = r.get_double("idw_power", p.idw_power);
  p.fusion_bandwidth_m = r.get_double("fusion_bandwidth_m", p.fusion_bandwidth_m);
  p.bias_sigma_db = r.get_double("bias_sigma_db", p.bias_sigma_db);
  p.bias_bumps = r.get_int("bias_bumps", p.bias_bumps);
  p.bias_radius_m = r.get_double("bias_radius_m", p.bias_radius_m);
  if (p.stride < 1) r.diag("stride", "must be >= 1");
  if (p.noise_sigma_db < 0.0) r.diag("noise_sigma_db", "must be >= 0");
  if (p.queries < 1) r.diag("queries", "must be >= 1");
  if (p.ks.empty()) r.diag("ks", "need at least one k");
  for (int k : p.ks) {
    if (k < 1) {
      r.diag("ks", "k values must be >= 1");
      break;
    }
  }
  if (p.probe_count < 10) r.diag("probe_count", "must be >= 10");
  if (!(p.holdout_fraction > 0.0 && p.holdout_fraction < 1.0))
    r.diag("holdout_fraction", "must be in (0, 1)");
  if (p.probe_noise_db < 0.0) r.diag("probe_noise_db", "must be >= 0");
  if (p.idw_power <= 0.0) r.diag("idw_power", "must be > 0");
  if (p.fusion_bandwidth_m <= 0.0) r.diag("fusion_bandwidth_m", "must be > 0");
  if (p.bias_sigma_db < 0.0) r.diag("bias_sigma_db", "must be >= 0");
  if (p.bias_bumps < 0) r.diag("bias_bumps", "must be >= 0");
  if (p.bias_radius_m <= 0.0) r.diag("bias_radius_m", "must be > 0");
  r.finish();
}

void read_monitor(const IniSection& s, ScenarioConfig& cfg, std::vector<Diagnostic>& d) {
  SectionReader r(s, d);
  MonitorParams& p = cfg.monitor;
  p.monitored = r.get_strings("monitored", {}, true);
  p.hidden = r.get_string("hidden", "", true);
  p.segment_windows = r.get_int("segment_windows", p.segment_windows);
  p.train_cycles = r.get_int("train_cycles", p.train_cycles);
  p.test_cycles = r.get_int("test_cycles", p.test_cycles);
  p.k = r.get_int("k", p.k);
  if (p.segment_windows < 2) r.diag("segment_windows", "must be >= 2");
  if (p.train_cycles < 1) r.diag("train_cycles", "must be >= 1");
  if (p.test_cycles < 1) r.diag("test_cycles", "must be >= 1");
  if (p.k < 1) r.diag("k", "must be >= 1");
  r.finish();
}

void read_experiment(const IniSection& s, ScenarioConfig& cfg, std::vector<Diagnostic>& d) {
  SectionReader r(s, d);
  ExperimentParams& p = cfg.experiment;
  p.kind = r.get_string("kind", "", true);
  p.master_seed = r.get_u64("master_seed", 1);
  p.seeds = r.get_int("seeds", 1);
  p.run_length_s = r.get_double("run_length_s", 300.0);
  if (p.kind != "offload" && p.kind != "slicing" && p.kind != "locate" && p.kind != "monitor")
    r.diag("kind", "must be one of offload, slicing, locate, monitor");
  if (p.seeds < 1) r.diag("seeds", "must be >= 1");
  if (p.run_length_s <= 0.0) r.diag("run_length_s", "must be > 0");
  r.finish();
}

void cross_validate(ScenarioConfig& cfg, std::vector<Diagnostic>& d) {
  const geom::Rect& bounds = cfg.factory.layout.bounds;
  auto in_bounds = [&](const geom::Vec2& p) { return bounds.contains(p); };

  for (const factory::Machine& m : cfg.factory.machines) {
    if (!in_bounds(m.position))
      d.push_back({"factory.machine.position",
                   "machine '" + m.id + "' lies outside factory bounds", 0, 0});
  }
  for (const factory::Agv& a : cfg.factory.agvs) {
    for (const geom::Vec2& w : a.waypoints) {
      if (!in_bounds(w)) {
        d.push_back({"factory.agv.waypoints",
                     "AGV '" + a.id + "' waypoint outside factory bounds", 0, 0});
        break;
      }
    }
  }
  for (const CellDef& c : cfg.cells) {
    if (!in_bounds(c.position))
      d.push_back({"cell.position", "cell '" + c.id + "' lies outside factory bounds", 0, 0});
  }

  std::set<std::string> slice_ids;
  for (const net::SliceSpec& s : cfg.slices) {
    if (!slice_ids.insert(s.id).second)
      d.push_back({"slice.id", "duplicate slice id '" + s.id + "'", 0, 0});
  }
  std::set<std::string> machine_ids;
  for (const factory::Machine& m : cfg.factory.machines) {
    if (!machine_ids.insert(m.id).second)
      d.push_back({"factory.machine.id", "duplicate machine id '" + m.id + "'", 0, 0});
  }

  for (const net::TrafficFlow& f : cfg.flows) {
    if (!slice_ids.count(f.slice_id))
      d.push_back({"flow.slice", "flow '" + f.id + "' references unknown slice '" + f.slice_id +
                                     "'",
                   0, 0});
    if (!cfg.devices.count(f.device_id))
      d.push_back({"flow.device",
                   "flow '" + f.id + "' references unknown device '" + f.device_id + "'", 0, 0});
    if (f.mode_gate) {
      bool ok = false;
      for (const factory::Machine& m : cfg.factory.machines) {
        if (m.id != f.mode_gate->machine_id) continue;
        ok = f.mode_gate->mode_index >= 0 &&
             f.mode_gate->mode_index < static_cast<int>(m.modes.size());
      }
      if (!ok)
        d.push_back({"flow.gate", "flow '" + f.id + "' gate references an unknown machine mode",
                     0, 0});
    }
  }

  const std::string& kind = cfg.experiment.kind;
  auto require = [&](bool present, const std::string& section) {
    if (!present)
      d.push_back({section, "missing required section for kind '" + kind + "'", 0, 0});
  };

  if (kind == "offload") {
    require(!cfg.cells.empty(), "cell");
    require(!cfg.factory.agvs.empty(), "factory.agv");
  } else if (kind == "slicing" || kind == "monitor") {
    require(cfg.cells.size() == 1, "cell");
    require(!cfg.slices.empty(), "slice");
    require(!cfg.flows.empty(), "flow");
    if (!cfg.cells.empty() && cfg.slicing.granularity >= 1 &&
        cfg.cells[0].total_prbs % cfg.slicing.granularity != 0)
      d.push_back(
          {"slicing.granularity", "granularity does not divide the cell's total_prbs", 0, 0});
    if (!cfg.slicing.transfer_scale.empty() &&
        cfg.slicing.transfer_scale.size() != cfg.slices.size())
      d.push_back({"slicing.transfer_scale", "need one multiplier per slice", 0, 0});
    for (double v : cfg.slicing.transfer_scale) {
      if (v <= 0.0) {
        d.push_back({"slicing.transfer_scale", "multipliers must be > 0", 0, 0});
        break;
      }
    }
    if (!cfg.slicing.static_alloc.empty()) {
      if (cfg.slicing.static_alloc.size() != cfg.slices.size()) {
        d.push_back({"slicing.static_alloc", "need one allocation per slice", 0, 0});
      } else {
        int total = 0;
        for (int v : cfg.slicing.static_alloc) {
          if (v < 0) d.push_back({"slicing.static_alloc", "allocations must be >= 0", 0, 0});
          if (cfg.slicing.granularity >= 1 && v >= 0 && v % cfg.slicing.granularity != 0)
            d.push_back(
                {"slicing.static_alloc", "allocations must be multiples of the granularity", 0,
                 0});
          total += std::max(v, 0);
        }
        if (!cfg.cells.empty() && total > cfg.cells[0].total_prbs)
          d.push_back({"slicing.static_alloc",
                       "static policy allocates " + std::to_string(total) +
                           " PRBs, exceeding the cell's total of " +
                           std::to_string(cfg.cells[0].total_prbs),
                       0, 0});
        else if (!cfg.cells.empty() && total < cfg.cells[0].total_prbs)
          d.push_back({"slicing.static_alloc",
                       "static policy must allocate all " +
                           std::to_string(cfg.cells[0].total_prbs) + " PRBs",
                       0, 0});
      }
    }
    const double slots = cfg.slicing.window_s / cfg.net.slot_s;
    if (cfg.net.slot_s > 0.0 && std::abs(slots - std::llround(slots)) > 1e-9)
      d.push_back({"slicing.window_s", "window must be a whole number of slots", 0, 0});
    const double windows = cfg.factory.cycle_length_s / cfg.slicing.window_s;
    if (cfg.slicing.window_s > 0.0 && std::abs(windows - std::llround(windows)) > 1e-9)
      d.push_back({"slicing.window_s", "cycle must be a whole number of windows", 0, 0});
    if (kind == "monitor") {
      if (cfg.monitor.monitored.empty())
        d.push_back({"monitor", "missing required section for kind 'monitor'", 0, 0});
      for (const std::string& id : cfg.monitor.monitored) {
        if (!slice_ids.count(id))
          d.push_back({"monitor.monitored", "unknown region '" + id + "'", 0, 0});
      }
      if (!slice_ids.count(cfg.monitor.hidden))
        d.push_back({"monitor.hidden", "unknown region '" + cfg.monitor.hidden + "'", 0, 0});
      for (const std::string& id : cfg.monitor.monitored) {
        if (id == cfg.monitor.hidden)
          d.push_back({"monitor.hidden", "hidden region is also monitored", 0, 0});
      }
    }
  } else if (kind == "locate") {
    require(!cfg.cells.empty(), "cell");
    if (cfg.locate.trilateration && cfg.cells.size() < 3)
      d.push_back({"locate.trilateration", "trilateration needs >= 3 cells", 0, 0});
  }
}

}  // namespace

std::string Diagnostic::to_string() const {
  std::string out = path + ": " + message;
  if (line > 0) out += " (line " + std::to_string(line) + ", col " + std::to_string(col) + ")";
  return out;
}

LoadResult parse_scenario(std::string_view text) {
  LoadResult res;
  res.config.raw_text = std::string(text);
  std::vector<IniSection> sections = parse_ini(text, res.diagnostics);
  if (!res.diagnostics.empty()) return res;

  bool factory_seen = false;
  bool experiment_seen = false;
  for (const IniSection& s : sections) {
    if (!kKnownSections.count(s.name)) {
      res.diagnostics.push_back({s.name, "unknown section", s.line, 1});
      continue;
    }
    if (s.name == "factory") {
      if (factory_seen) {
        res.diagnostics.push_back({s.name, "duplicate section", s.line, 1});
        continue;
      }
      factory_seen = true;
      read_factory(s, res.config, res.diagnostics);
    } else if (s.name == "factory.wall") {
      read_wall(s, res.config, res.diagnostics);
    } else if (s.name == "factory.machine") {
      read_machine(s, res.config, res.diagnostics);
    } else if (s.name == "factory.agv") {
      read_agv(s, res.config, res.diagnostics);
    } else if (s.name == "radio") {
      read_radio(s, res.config, res.diagnostics);
    } else if (s.name == "cell") {
      read_cell(s, res.config, res.diagnostics);
    } else if (s.name == "net") {
      read_net(s, res.config, res.diagnostics);
    } else if (s.name == "slice") {
      read_slice(s, res.config, res.diagnostics);
    } else if (s.name == "device") {
      read_device(s, res.config, res.diagnostics);
    } else if (s.name == "flow") {
      read_flow(s, res.config, res.diagnostics);
    } else if (s.name == "slicing") {
      read_slicing(s, res.config, res.diagnostics);
    } else if (s.name == "offload") {
      read_offload(s, res.config, res.diagnostics);
    } else if (s.name == "locate") {
      read_locate(s, res.config, res.diagnostics);
    } else if (s.name == "monitor") {
      read_monitor(s, res.config, res.diagnostics);
    } else if (s.name == "experiment") {
      if (experiment_seen) {
        res.diagnostics.push_back({s.name, "duplicate section", s.line, 1});
        continue;
      }
      experiment_seen = true;
      read_experiment(s, res.config, res.diagnostics);
    }
  }
  if (!factory_seen) res.diagnostics.push_back({"factory", "missing required section", 0, 0});
  if (!experiment_seen)
    res.diagnostics.push_back({"experiment", "missing required section", 0, 0});

  if (res.diagnostics.empty()) cross_validate(res.config, res.diagnostics);
  return res;
}

LoadResult load_scenario_file(const std::string& path) {
  std::ifstream f(path, std::ios::binary);
  if (!f) {
    LoadResult res;
    res.diagnostics.push_back({"file", "cannot open '" + path + "'", 0, 0});
    return res;
  }
  std::stringstream ss;
  ss << f.rdbuf();
  return parse_scenario(ss.str());
}

std::string config_hash(std::string_view text) {
  std::uint64_t h = 1469598103934665603ull;
  for (unsigned char c : text) {
    h ^= c;
    h *= 1099511628211ull;
  }
  char buf[17];
  std::snprintf(buf, sizeof(buf), "%016llx", static_cast<unsigned long long>(h));
  return buf;
}

}  // namespace fabricnet::config
