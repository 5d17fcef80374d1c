#pragma once

#include <cstdint>
#include <map>
#include <span>
#include <string>
#include <vector>

#include "fabricnet/factory.hpp"
#include "fabricnet/net.hpp"
#include "fabricnet/rng.hpp"

namespace fabricnet::slicing {

// PRBs per slice, each a multiple of the granularity, summing to total_prbs.
using Allocation = std::vector<int>;

// All compositions of total_prbs/g granularity units into n_slices slots,
// ordered lexicographically.
std::vector<Allocation> enumerate_actions(int total_prbs, int n_slices, int granularity);

// Per-slice QoS summary over one decision window.
struct SliceWindowQos {
  std::string slice_id;
  std::uint64_t offered_bytes = 0;
  std::uint64_t served_bytes = 0;
  std::uint64_t dropped_bytes = 0;
  std::uint64_t backlog_bytes = 0;  // at window end
  std::uint64_t completed_packets = 0;
  double latency_sum_s = 0.0;
  double backlog_age_ms = 0.0;  // age of the oldest queued packet at window end
  double window_s = 0.1;

  double mean_latency_ms() const;
  double throughput_bps() const;
  double offered_bps() const;
  bool non_empty() const { return offered_bytes > 0 || served_bytes > 0; }
};

// A non-empty window violates when mean latency exceeds the bound, when the
// oldest packet still queued at window end is already past the bound (a
// starved slice completes nothing and must not pass vacuously), or when
// served throughput falls short of min(floor, offered minus the still-young
// backlog): a slice is never required to carry more than it offered, and a
// packet still inside its latency budget at window end is in flight, not a
// shortfall. Empty windows are vacuously compliant.
bool window_violated(const SliceWindowQos& qos, const net::SliceSpec& spec);

// efficiency - lambda * violations, efficiency = served bits over the
// capacity of total_prbs at the reference spectral efficiency, clamped to
// [0, 1].
double reward(std::span<const SliceWindowQos> qos_per_slice, const Allocation& action,
              std::span<const net::SliceSpec> specs, double lambda, int total_prbs,
              const net::NetParams& params);

// Tabular action-value store keyed by observation string. Unseen keys read
// as all-zero rows.
struct QTable {
  int n_actions = 0;
  std::string signature;  // observation encoding + action space id
  std::size_t max_keys = 1'000'000;
  std::map<std::string, std::vector<double>> values;
  std::map<std::string, std::vector<int>> visits;

  std::vector<double>& row(const std::string& key);  // inserts zeros, guards max_keys
  double max_value(const std::string& key) const;    // 0 for unseen keys
  int greedy_action(const std::string& key) const;   // argmax, ties to lowest index
};

// Q(s,a) += alpha * (r + gamma * max_a' Q(s',a') - Q(s,a)); terminal states
// contribute no bootstrap term.
void q_update(QTable& q, const std::string& s, int action, double r, const std::string& s_next,
              double alpha, double gamma, bool terminal = false);

// Copies source values for matching observation keys (same encoding, so all
// of them) into a fresh table with zeroed visit counts.
QTable transfer_init(const QTable& source, const std::string& target_signature);

struct SlicingScenario {
  factory::FactorySpec factory;
  net::Cell cell;
  net::NetParams net;
  std::vector<net::SliceSpec> slices;
  std::vector<net::TrafficFlow> flows;
  std::map<std::string, geom::Vec2> device_positions;
  std::vector<double> demand_scale;  // per-slice payload multiplier, empty = all 1
  int granularity = 4;
  double window_s = 0.1;
  int demand_levels = 4;
  std::vector<double> level_thresholds = {0.25, 0.5, 0.75};  // fractions of per-slice peak
  double lambda = 4.0;
  std::uint64_t env_seed = 1;
  std::size_t max_q_keys = 1'000'000;
};

// Deterministic cyclic slicing environment: the slotted cell wrapped with
// decision windows. One episode is one production cycle.
class SlicingEnv {
 public:
  explicit SlicingEnv(SlicingScenario sc);

  const SlicingScenario& scenario() const { return sc_; }
  const std::vector<Allocation>& actions() const { return actions_; }
  int n_actions() const { return static_cast<int>(actions_.size()); }
  int windows_per_cycle() const { return windows_per_cycle_; }
  std::span<const double> slice_peaks_bytes() const { return peaks_; }

  std::string encoding_signature(bool use_production_status) const;

  void reset();
  double now() const { return static_cast<double>(window_index_) * sc_.window_s; }

  // Quantized demand levels of the last completed window, optionally
  // followed by the production status at the current time.
  std::string observation_key(bool use_production_status) const;

  struct WindowResult {
    double reward = 0.0;
    std::vector<SliceWindowQos> qos;
  };

  WindowResult step(int action_index);

  // Fresh-queue replay of one window position within the cycle; the
  // brute-force per-phase oracle is built from this.
  WindowResult probe_window(int window_index, int action_index) const;

 private:
  WindowResult run_window(int window_index, int action_index,
                          std::vector<net::DeviceQueue>& queues) const;
  int demand_level(std::size_t slice_index, double offered_bytes) const;

  SlicingScenario sc_;
  std::vector<Allocation> actions_;
  int windows_per_cycle_ = 0;
  int slots_per_window_ = 0;
  std::vector<double> peaks_;  // per-slice peak offered bytes per window
  std::map<std::string, double> device_sinr_db_;
  sim::RngStream traffic_stream_;
  std::vector<net::DeviceQueue> queues_;
  int window_index_ = 0;
  std::vector<double> last_offered_bytes_;
};

struct EpsSchedule {
  double start = 1.0;
  double end = 0.05;
  double decay_fraction = 0.6;  // of total episodes

  double at(int episode, int episodes) const;
};

struct TrainResult {
  QTable q;
  std::vector<double> learning_curve;  // per-episode greedy-policy mean window reward
};

// Epsilon-greedy tabular Q-learning; one episode per production cycle. The
// learning curve is a fresh greedy evaluation after each episode.
// Deterministic per seed.
TrainResult train(SlicingEnv& env, bool use_production_status, int episodes, double alpha,
                  double gamma, const EpsSchedule& eps, std::uint64_t seed,
                  const QTable* warm_start = nullptr);

// Fraction of non-empty windows meeting both the latency bound and the
// throughput floor. Throws if every window is empty.
double reliability(std::span<const SliceWindowQos> windows, const net::SliceSpec& spec);

// First episode whose curve value reaches fraction * asymptote, where the
// asymptote is the mean of the final quarter; curve.size() if never reached.
int episodes_to_fraction_of_asymptote(std::span<const double> curve, double fraction = 0.9);

// Best fresh-state action per window position and the mean of their rewards.
struct BruteForceResult {
  std::vector<int> best_action;
  double mean_reward = 0.0;
};

BruteForceResult brute_force_per_phase(const SlicingEnv& env);

}  // namespace fabricnet::slicing
