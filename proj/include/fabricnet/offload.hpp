#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "fabricnet/factory.hpp"
#include "fabricnet/geometry.hpp"
#include "fabricnet/predict.hpp"
#include "fabricnet/radio.hpp"

namespace fabricnet::offload {

struct OffloadPolicyConfig {
  double threshold_up_bps = 0.0;    // Local -> offload when score >= up (inclusive)
  double threshold_down_bps = 0.0;  // Edge -> onboard when score < down (strict)
  double t_offload_s = 0.0;         // device -> edge transfer duration
  double t_onboard_s = 0.0;         // edge -> device transfer duration
  double fail_grace_s = 0.0;
  double required_bps = 0.0;
};

enum class State { Local, ToEdge, Edge, ToDevice };
enum class Action { Stay, StartOffload, StartOnboard };

const char* state_name(State s);

struct OffloadEvent {
  double t = 0.0;
  State entered = State::Local;
  bool failure = false;  // entry is a failure abort back to Local
};

// Per-device placement state machine. The deficit clock accrues only while
// transferring to edge or offloaded; crossing fail_grace aborts to Local and
// logs a failure event.
struct OffloadSession {
  std::string device_id;
  State state = State::Local;
  double remaining_s = 0.0;
  double deficit_clock_s = 0.0;
  double clock_s = 0.0;
  std::vector<OffloadEvent> event_log;
};

OffloadSession make_session(std::string device_id, double t0 = 0.0);

// Only valid in a stable state (Local or Edge); transfers are never
// pre-empted. Consumes mean - margin as the decision score.
Action decide(const OffloadSession& session, const predict::Prediction& p,
              const OffloadPolicyConfig& cfg);

// Starts the transfer an action requests at the session clock. Zero-duration
// transfers complete immediately. Starting a transfer resets the deficit.
void apply_action(OffloadSession& session, Action action, const OffloadPolicyConfig& cfg);

// Advances the session by dt under a constant measured uplink throughput.
// Transfers complete mid-step at their exact end; the deficit check runs
// after each accrual piece, so a violation is detected at the end of the
// piece in which it crosses fail_grace.
void step(OffloadSession& session, double measured_ul_bps, double dt,
          const OffloadPolicyConfig& cfg);

struct OffloadMetrics {
  double offload_time_pct = 0.0;
  double local_time_pct = 0.0;
  double transfer_time_pct = 0.0;
  int replacements = 0;  // initiated transfers, both directions
  int failures = 0;
};

// Aggregates timestamped state intervals over [first event, run_length].
OffloadMetrics offload_metrics(std::span<const OffloadEvent> log, double run_length_s);

enum class OffloadPolicy { Oracle, Reactive, Knn, Forest, Ar };

const char* offload_policy_name(OffloadPolicy p);
bool parse_offload_policy(std::string_view name, OffloadPolicy& out);

// Single-AP reference scenario for the offloading experiment. QoS is the
// truncated-Shannon uplink rate of the first AGV over the full band, sampled
// every trace_dt_s with correlated shadowing plus fast fading.
struct OffloadScenario {
  factory::FactorySpec factory;
  geom::Vec2 ap_position;
  radio::PropagationParams prop;
  radio::ShadowingParams shadowing;
  int total_prbs = 20;
  double prb_bandwidth_hz = 360e3;
  double cap_se = 7.4;
  double trace_dt_s = 0.1;
  double epoch_s = 1.0;    // decision cadence
  double horizon_s = 3.0;  // prediction/label horizon, default t_offload + 2
  double run_length_s = 300.0;
  double train_length_s = 400.0;
  std::uint64_t train_seed = 9001;
  // Post-failure hold: after a failure abort the device stays Local for this
  // long before offload decisions resume, modeling recovery of the lost task
  // state. 0 disables the hold.
  double recovery_s = 0.0;
  OffloadPolicyConfig policy;
  int knn_k = 12;
  double knn_margin_z = 1.0;
  int forest_trees = 30;
  int forest_max_depth = 8;
  double forest_margin_z = 1.0;
  int ar_order = 5;
  double ar_margin_z = 1.0;
};

// Realized QoS trace for one seed, covering [0, length_s + horizon_s] so the
// oracle and label windows stay inside the trace. Policy-independent.
std::vector<predict::TraceSample> generate_qos_trace(const OffloadScenario& sc,
                                                     std::uint64_t seed, double length_s,
                                                     std::string_view stream_id);

// One training point per trace sample whose full label window fits in the
// trace: label = minimum throughput over [t, t + horizon_s].
predict::TrainingSet build_offload_training_set(const OffloadScenario& sc,
                                                std::span<const predict::TraceSample> trace);

struct OffloadRunResult {
  OffloadMetrics metrics;
  std::vector<OffloadEvent> events;
  std::vector<predict::TraceSample> qos_trace;
};

// End-to-end episode: the AGV drives, QoS is sampled each trace step, the
// predictor is queried at every decision epoch, and the state machine steps
// in between. Deterministic per (policy, seed).
OffloadRunResult run_offload_experiment(const OffloadScenario& sc, OffloadPolicy policy,
                                        std::uint64_t seed);

}  // namespace fabricnet::offload
