#include "fabricnet/slicing.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <limits>
#include <stdexcept>
#include <utility>

#include "fabricnet/radio.hpp"

namespace fabricnet::slicing {
namespace {

void compose(int remaining, int slots, std::vector<int>& prefix, int granularity,
             std::vector<Allocation>& out) {
  if (slots == 1) {
    prefix.push_back(remaining * granularity);
    out.push_back(prefix);
    prefix.pop_back();
    return;
  }
  for (int u = 0; u <= remaining; ++u) {
    prefix.push_back(u * granularity);
    compose(remaining - u, slots - 1, prefix, granularity, out);
    prefix.pop_back();
  }
}

}  // namespace

std::vector<Allocation> enumerate_actions(int total_prbs, int n_slices, int granularity) {
  if (n_slices < 1) throw std::invalid_argument("enumerate_actions: need at least 1 slice");
  if (granularity < 1) throw std::invalid_argument("enumerate_actions: granularity must be >= 1");
  if (total_prbs < 0) throw std::invalid_argument("enumerate_actions: total_prbs must be >= 0");
  if (total_prbs % granularity != 0)
    throw std::invalid_argument("enumerate_actions: granularity does not divide total_prbs");
  std::vector<Allocation> out;
  std::vector<int> prefix;
  compose(total_prbs / granularity, n_slices, prefix, granularity, out);
  return out;
}

double SliceWindowQos::mean_latency_ms() const {
  return completed_packets > 0 ? latency_sum_s / static_cast<double>(completed_packets) * 1000.0
                               : 0.0;
}

double SliceWindowQos::throughput_bps() const {
  return static_cast<double>(served_bytes) * 8.0 / window_s;
}

double SliceWindowQos::offered_bps() const {
  return static_cast<double>(offered_bytes) * 8.0 / window_s;
}

bool window_violated(const SliceWindowQos& qos, const net::SliceSpec& spec) {
  if (!qos.non_empty()) return false;
  if (qos.mean_latency_ms() > spec.latency_bound_ms + 1e-9) return true;
  if (qos.backlog_age_ms > spec.latency_bound_ms + 1e-9) return true;
  // Backlog younger than the latency bound is still in flight, not a
  // shortfall; it reduces what this window can be required to carry.
  const double offered_eff =
      std::max(0.0, static_cast<double>(qos.offered_bytes) -
                        static_cast<double>(qos.backlog_bytes)) *
      8.0 / qos.window_s;
  const double required_bps = std::min(spec.throughput_floor_bps, offered_eff);
  return qos.throughput_bps() + 1e-6 < required_bps;
}

double reward(std::span<const SliceWindowQos> qos_per_slice, const Allocation& action,
              std::span<const net::SliceSpec> specs, double lambda, int total_prbs,
              const net::NetParams& params) {
  if (qos_per_slice.size() != specs.size())
    throw std::invalid_argument("reward: one QoS summary per slice required");
  if (!action.empty() && action.size() != specs.size())
    throw std::invalid_argument("reward: action arity mismatch");

  double served_bits = 0.0;
  double window_s = 0.0;
  int violations = 0;
  for (std::size_t i = 0; i < qos_per_slice.size(); ++i) {
    served_bits += static_cast<double>(qos_per_slice[i].served_bytes) * 8.0;
    window_s = qos_per_slice[i].window_s;
    if (window_violated(qos_per_slice[i], specs[i])) ++violations;
  }
  double efficiency = 0.0;
  if (window_s > 0.0) {
    const double capacity_bits =
        total_prbs * params.prb_bandwidth_hz * params.ref_spectral_efficiency * window_s;
    efficiency = capacity_bits > 0.0 ? served_bits / capacity_bits : 0.0;
  }
  efficiency = std::clamp(efficiency, 0.0, 1.0);
  return efficiency - lambda * violations;
}

std::vector<double>& QTable::row(const std::string& key) {
  auto it = values.find(key);
  if (it != values.end()) return it->second;
  if (values.size() >= max_keys)
    throw std::runtime_error("QTable: distinct observation key budget exceeded");
  return values.emplace(key, std::vector<double>(static_cast<std::size_t>(n_actions), 0.0))
      .first->second;
}

double QTable::max_value(const std::string& key) const {
  auto it = values.find(key);
  if (it == values.end()) return 0.0;
  double best = it->second.empty() ? 0.0 : it->second[0];
  for (double v : it->second) best = std::max(best, v);
  return best;
}

int QTable::greedy_action(const std::string& key) const {
  auto it = values.find(key);
  if (it == values.end() || it->second.empty()) return 0;
  int best = 0;
  for (int a = 1; a < static_cast<int>(it->second.size()); ++a) {
    if (it->second[static_cast<std::size_t>(a)] > it->second[static_cast<std::size_t>(best)])
      best = a;
  }
  return best;
}

void q_update(QTable& q, const std::string& s, int action, double r, const std::string& s_next,
              double alpha, double gamma, bool terminal) {
  if (!(alpha > 0.0 && alpha <= 1.0)) throw std::invalid_argument("q_update: alpha out of (0,1]");
  if (!(gamma >= 0.0 && gamma < 1.0)) throw std::invalid_argument("q_update: gamma out of [0,1)");
  std::vector<double>& row_s = q.row(s);
  if (action < 0 || action >= static_cast<int>(row_s.size()))
    throw std::invalid_argument("q_update: action index out of range");
  const double bootstrap = terminal ? 0.0 : gamma * q.max_value(s_next);
  double& cell = row_s[static_cast<std::size_t>(action)];
  cell += alpha * (r + bootstrap - cell);
}

QTable transfer_init(const QTable& source, const std::string& target_signature) {
  if (source.signature != target_signature)
    throw std::invalid_argument("transfer_init: incompatible observation encodings");
  QTable out;
  out.n_actions = source.n_actions;
  out.signature = source.signature;
  out.max_keys = source.max_keys;
  out.values = source.values;
  return out;
}

SlicingEnv::SlicingEnv(SlicingScenario sc)
    : sc_(std::move(sc)), traffic_stream_(sc_.env_seed, "slicing/traffic") {
  if (sc_.slices.empty()) throw std::invalid_argument("SlicingEnv: no slices");
  if (sc_.window_s <= 0.0) throw std::invalid_argument("SlicingEnv: window must be > 0");
  if (sc_.demand_levels < 1) throw std::invalid_argument("SlicingEnv: demand_levels must be >= 1");
  if (static_cast<int>(sc_.level_thresholds.size()) != sc_.demand_levels - 1)
    throw std::invalid_argument("SlicingEnv: need demand_levels - 1 thresholds");

  actions_ = enumerate_actions(sc_.cell.total_prbs, static_cast<int>(sc_.slices.size()),
                               sc_.granularity);

  slots_per_window_ = static_cast<int>(std::llround(sc_.window_s / sc_.net.slot_s));
  if (slots_per_window_ < 1 ||
      std::abs(slots_per_window_ * sc_.net.slot_s - sc_.window_s) > 1e-9)
    throw std::invalid_argument("SlicingEnv: window must be a whole number of slots");
  windows_per_cycle_ =
      static_cast<int>(std::llround(sc_.factory.cycle_length_s / sc_.window_s));
  if (windows_per_cycle_ < 1 ||
      std::abs(windows_per_cycle_ * sc_.window_s - sc_.factory.cycle_length_s) > 1e-9)
    throw std::invalid_argument("SlicingEnv: cycle must be a whole number of windows");

  if (sc_.demand_scale.empty()) {
    sc_.demand_scale.assign(sc_.slices.size(), 1.0);
  } else if (sc_.demand_scale.size() != sc_.slices.size()) {
    throw std::invalid_argument("SlicingEnv: demand_scale arity mismatch");
  }

  auto slice_index = [&](const std::string& id) {
    for (std::size_t i = 0; i < sc_.slices.size(); ++i) {
      if (sc_.slices[i].id == id) return i;
    }
    throw std::invalid_argument("SlicingEnv: flow references unknown slice " + id);
  };

  for (net::TrafficFlow& f : sc_.flows) {
    const std::size_t si = slice_index(f.slice_id);
    const double scale = sc_.demand_scale[si];
    if (scale <= 0.0) throw std::invalid_argument("SlicingEnv: demand_scale must be > 0");
    f.payload_bytes = static_cast<std::uint64_t>(
        std::max<long long>(1, std::llround(static_cast<double>(f.payload_bytes) * scale)));
    if (!sc_.device_positions.count(f.device_id))
      throw std::invalid_argument("SlicingEnv: no position for device " + f.device_id);
    if (f.mode_gate) {
      bool found = false;
      for (const factory::Machine& m : sc_.factory.machines) {
        if (m.id != f.mode_gate->machine_id) continue;
        found = true;
        if (f.mode_gate->mode_index < 0 ||
            f.mode_gate->mode_index >= static_cast<int>(m.modes.size()))
          throw std::invalid_argument("SlicingEnv: mode gate index out of range");
      }
      if (!found)
        throw std::invalid_argument("SlicingEnv: mode gate references unknown machine " +
                                    f.mode_gate->machine_id);
    }
  }

  for (const auto& [device, pos] : sc_.device_positions) {
    const double rss = sc_.cell.prop.tx_power_dbm -
                       radio::path_loss_motley_keenan(sc_.cell.position, pos,
                                                      sc_.factory.layout, sc_.cell.prop);
    device_sinr_db_[device] = net::sinr_db(rss, {}, sc_.cell.prop.noise_floor_dbm);
  }

  // One queue per distinct (device, slice), ordered for determinism.
  std::vector<std::pair<std::string, std::string>> pairs;
  for (const net::TrafficFlow& f : sc_.flows) pairs.emplace_back(f.device_id, f.slice_id);
  std::sort(pairs.begin(), pairs.end());
  pairs.erase(std::unique(pairs.begin(), pairs.end()), pairs.end());
  for (auto& [device, slice] : pairs) {
    net::DeviceQueue q;
    q.device_id = device;
    q.slice_id = slice;
    queues_.push_back(std::move(q));
  }

  // Per-slice peak offered bytes per window over one cycle, after demand
  // scaling; the observation quantizer is anchored to these peaks.
  peaks_.assign(sc_.slices.size(), 0.0);
  for (int w = 0; w < windows_per_cycle_; ++w) {
    std::vector<double> offered(sc_.slices.size(), 0.0);
    for (int s = 0; s < slots_per_window_; ++s) {
      const double t = (static_cast<double>(w) * slots_per_window_ + s) * sc_.net.slot_s;
      for (const auto& [key, bytes] :
           net::generate_offered_load(sc_.flows, sc_.factory, t, sc_.net.slot_s,
                                      traffic_stream_)) {
        offered[slice_index(key.second)] += static_cast<double>(bytes);
      }
    }
    for (std::size_t i = 0; i < offered.size(); ++i) peaks_[i] = std::max(peaks_[i], offered[i]);
  }

  last_offered_bytes_.assign(sc_.slices.size(), 0.0);
}

std::string SlicingEnv::encoding_signature(bool use_production_status) const {
  std::string sig = "slices=";
  for (const net::SliceSpec& s : sc_.slices) {
    sig += s.id;
    sig += ',';
  }
  sig += ";L=" + std::to_string(sc_.demand_levels);
  sig += ";actions=" + std::to_string(actions_.size());
  sig += ";g=" + std::to_string(sc_.granularity);
  if (use_production_status) {
    sig += ";status=P" + std::to_string(sc_.factory.phase_count) + ";machines=";
    std::vector<std::string> ids;
    for (const factory::Machine& m : sc_.factory.machines) ids.push_back(m.id);
    std::sort(ids.begin(), ids.end());
    for (const std::string& id : ids) {
      sig += id;
      sig += ',';
    }
  } else {
    sig += ";status=off";
  }
  return sig;
}

void SlicingEnv::reset() {
  for (net::DeviceQueue& q : queues_) {
    q.packets.clear();
    q.backlog_bytes = 0;
    q.arrived_bytes = 0;
    q.dropped_bytes = 0;
    q.served_bytes = 0;
    q.completed_packets = 0;
    q.latency_sum_s = 0.0;
  }
  window_index_ = 0;
  std::fill(last_offered_bytes_.begin(), last_offered_bytes_.end(), 0.0);
}

int SlicingEnv::demand_level(std::size_t slice_index, double offered_bytes) const {
  const double peak = peaks_[slice_index];
  int level = 0;
  for (double frac : sc_.level_thresholds) {
    if (peak > 0.0 && offered_bytes > frac * peak) ++level;
  }
  return level;
}

std::string SlicingEnv::observation_key(bool use_production_status) const {
  std::string key = "d:";
  for (std::size_t i = 0; i < sc_.slices.size(); ++i) {
    if (i) key += ',';
    key += std::to_string(demand_level(i, last_offered_bytes_[i]));
  }
  if (use_production_status) {
    const factory::ProductionStatus st = factory::production_status(sc_.factory, now());
    key += "|p:" + std::to_string(st.cycle_phase);
    key += "|m:";
    for (const auto& [id, mode] : st.machine_modes) {
      key += std::to_string(mode);
      key += ',';
    }
    key += "|a:" + std::to_string(st.active_agvs.size());
  }
  return key;
}

SlicingEnv::WindowResult SlicingEnv::run_window(int window_index, int action_index,
                                                std::vector<net::DeviceQueue>& queues) const {
  if (action_index < 0 || action_index >= n_actions())
    throw std::invalid_argument("SlicingEnv: action index out of range");
  const Allocation& action = actions_[static_cast<std::size_t>(action_index)];
  std::map<std::string, int> alloc;
  for (std::size_t i = 0; i < sc_.slices.size(); ++i) alloc[sc_.slices[i].id] = action[i];

  WindowResult res;
  res.qos.resize(sc_.slices.size());
  for (std::size_t i = 0; i < sc_.slices.size(); ++i) {
    res.qos[i].slice_id = sc_.slices[i].id;
    res.qos[i].window_s = sc_.window_s;
  }
  auto slice_of = [&](const std::string& id) {
    for (std::size_t i = 0; i < sc_.slices.size(); ++i) {
      if (sc_.slices[i].id == id) return i;
    }
    throw std::logic_error("SlicingEnv: unknown slice in window accounting");
  };

  for (int s = 0; s < slots_per_window_; ++s) {
    const double t =
        (static_cast<double>(window_index) * slots_per_window_ + s) * sc_.net.slot_s;
    for (const net::Arrival& a :
         net::generate_arrivals(sc_.flows, sc_.factory, t, sc_.net.slot_s, traffic_stream_)) {
      const net::TrafficFlow& f = sc_.flows[a.flow_index];
      for (net::DeviceQueue& q : queues) {
        if (q.device_id == f.device_id && q.slice_id == f.slice_id) {
          q.push(net::Packet{a.t, a.bytes, 0}, sc_.net.queue_cap_bytes);
          break;
        }
      }
    }
    const net::ServeSlotResult slot = net::serve_slot(sc_.cell, alloc, queues, device_sinr_db_,
                                                      sc_.device_positions, t, sc_.net);
    for (const auto& [slice_id, st] : slot.per_slice) {
      SliceWindowQos& q = res.qos[slice_of(slice_id)];
      q.offered_bytes += st.arrived_bytes;
      q.served_bytes += st.served_bytes;
      q.dropped_bytes += st.dropped_bytes;
      q.completed_packets += st.completed_packets;
      q.latency_sum_s += st.latency_sum_s;
      q.backlog_bytes = st.backlog_bytes;  // end-of-window value wins
    }
  }

  const double window_end =
      static_cast<double>(window_index + 1) * slots_per_window_ * sc_.net.slot_s;
  for (const net::DeviceQueue& q : queues) {
    if (q.packets.empty()) continue;
    SliceWindowQos& sq = res.qos[slice_of(q.slice_id)];
    const double age_ms = (window_end - q.packets.front().arrival_t) * 1e3;
    sq.backlog_age_ms = std::max(sq.backlog_age_ms, age_ms);
  }

  res.reward = reward(res.qos, action, sc_.slices, sc_.lambda, sc_.cell.total_prbs, sc_.net);
  return res;
}

SlicingEnv::WindowResult SlicingEnv::step(int action_index) {
  WindowResult res = run_window(window_index_, action_index, queues_);
  for (std::size_t i = 0; i < res.qos.size(); ++i)
    last_offered_bytes_[i] = static_cast<double>(res.qos[i].offered_bytes);
  ++window_index_;
  return res;
}

SlicingEnv::WindowResult SlicingEnv::probe_window(int window_index, int action_index) const {
  std::vector<net::DeviceQueue> fresh;
  fresh.reserve(queues_.size());
  for (const net::DeviceQueue& q : queues_) {
    net::DeviceQueue e;
    e.device_id = q.device_id;
    e.slice_id = q.slice_id;
    fresh.push_back(std::move(e));
  }
  return run_window(window_index, action_index, fresh);
}

double EpsSchedule::at(int episode, int episodes) const {
  const double decay = std::max(1.0, decay_fraction * episodes);
  const double frac = std::min(1.0, episode / decay);
  return start + (end - start) * frac;
}

TrainResult train(SlicingEnv& env, bool use_production_status, int episodes, double alpha,
                  double gamma, const EpsSchedule& eps, std::uint64_t seed,
                  const QTable* warm_start) {
  if (episodes < 1) throw std::invalid_argument("train: episodes must be >= 1");
  const std::string signature = env.encoding_signature(use_production_status);

  TrainResult out;
  if (warm_start) {
    if (warm_start->signature != signature)
      throw std::invalid_argument("train: warm start has incompatible encoding");
    out.q = *warm_start;
  } else {
    out.q.signature = signature;
  }
  out.q.n_actions = env.n_actions();
  out.q.max_keys = env.scenario().max_q_keys;

  sim::RngStream rng(seed, "slicing/train");
  const int windows = env.windows_per_cycle();
  out.learning_curve.reserve(static_cast<std::size_t>(episodes));

  for (int e = 0; e < episodes; ++e) {
    env.reset();
    std::string s = env.observation_key(use_production_status);
    const double epsilon = eps.at(e, episodes);
    for (int w = 0; w < windows; ++w) {
      int a;
      if (rng.uniform01() < epsilon) {
        a = static_cast<int>(rng.uniform_int(static_cast<std::uint64_t>(env.n_actions())));
      } else {
        a = out.q.greedy_action(s);
      }
      const SlicingEnv::WindowResult res = env.step(a);
      const std::string s_next = env.observation_key(use_production_status);
      q_update(out.q, s, a, res.reward, s_next, alpha, gamma, w + 1 == windows);
      auto& visits = out.q.visits[s];
      if (visits.empty()) visits.assign(static_cast<std::size_t>(env.n_actions()), 0);
      visits[static_cast<std::size_t>(a)] += 1;
      s = s_next;
    }

    env.reset();
    double total = 0.0;
    for (int w = 0; w < windows; ++w) {
      const std::string key = env.observation_key(use_production_status);
      total += env.step(out.q.greedy_action(key)).reward;
    }
    out.learning_curve.push_back(total / windows);
  }
  return out;
}

double reliability(std::span<const SliceWindowQos> windows, const net::SliceSpec& spec) {
  int non_empty = 0;
  int compliant = 0;
  for (const SliceWindowQos& w : windows) {
    if (!w.non_empty()) continue;
    ++non_empty;
    if (!window_violated(w, spec)) ++compliant;
  }
  if (non_empty == 0) throw std::invalid_argument("reliability: no non-empty windows");
  return static_cast<double>(compliant) / non_empty;
}

int episodes_to_fraction_of_asymptote(std::span<const double> curve, double fraction) {
  if (curve.empty()) throw std::invalid_argument("episodes_to_fraction_of_asymptote: empty curve");
  const std::size_t tail = std::max<std::size_t>(1, curve.size() / 4);
  double asym = 0.0;
  for (std::size_t i = curve.size() - tail; i < curve.size(); ++i) asym += curve[i];
  asym /= static_cast<double>(tail);
  const double threshold = asym - (1.0 - fraction) * std::fabs(asym);
  for (std::size_t i = 0; i < curve.size(); ++i) {
    if (curve[i] >= threshold) return static_cast<int>(i);
  }
  return static_cast<int>(curve.size());
}

BruteForceResult brute_force_per_phase(const SlicingEnv& env) {
  BruteForceResult out;
  double total = 0.0;
  for (int w = 0; w < env.windows_per_cycle(); ++w) {
    double best = -std::numeric_limits<double>::infinity();
    int best_a = 0;
    for (int a = 0; a < env.n_actions(); ++a) {
      const double r = env.probe_window(w, a).reward;
      if (r > best) {
        best = r;
        best_a = a;
      }
    }
    out.best_action.push_back(best_a);
    total += best;
  }
  out.mean_reward = total / env.windows_per_cycle();
  return out;
}

}  // namespace fabricnet::slicing
