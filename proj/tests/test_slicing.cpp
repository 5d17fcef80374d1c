#include <cmath>
#include <stdexcept>
#include <string>
#include <vector>

#include "doctest.h"
#include "fabricnet/model_io.hpp"
#include "fabricnet/slicing.hpp"

using namespace fabricnet;
using namespace fabricnet::slicing;

namespace {

SliceWindowQos window(const std::string& slice, std::uint64_t offered, std::uint64_t served,
                      double latency_ms_per_pkt, std::uint64_t packets) {
  SliceWindowQos q;
  q.slice_id = slice;
  q.offered_bytes = offered;
  q.served_bytes = served;
  q.completed_packets = packets;
  q.latency_sum_s = latency_ms_per_pkt / 1000.0 * static_cast<double>(packets);
  q.window_s = 0.1;
  return q;
}

net::SliceSpec spec_of(const std::string& id, double bound_ms, double floor_bps) {
  net::SliceSpec s;
  s.id = id;
  s.latency_bound_ms = bound_ms;
  s.throughput_floor_bps = floor_bps;
  return s;
}

SlicingScenario mini_scenario() {
  SlicingScenario sc;
  sc.factory.layout.bounds = {{0.0, 0.0}, {20.0, 20.0}};
  factory::Machine press;
  press.id = "press";
  press.position = {5.0, 5.0};
  press.modes = {{"idle", 1.0, "sparse"}, {"active", 1.0, "dense"}};
  press.schedule = {0, 1};
  sc.factory.machines.push_back(press);
  sc.factory.cycle_length_s = 2.0;
  sc.factory.phase_count = 4;

  sc.cell.id = "cell";
  sc.cell.position = {10.0, 10.0};
  sc.cell.total_prbs = 8;

  sc.slices = {spec_of("control", 10.0, 2e5), spec_of("video", 50.0, 1e6)};

  net::TrafficFlow control;
  control.id = "f_control";
  control.device_id = "plc";
  control.slice_id = "control";
  control.period_ms = 10.0;
  control.payload_bytes = 100;
  sc.flows.push_back(control);

  net::TrafficFlow video;
  video.id = "f_video";
  video.device_id = "cam";
  video.slice_id = "video";
  video.period_ms = 10.0;
  video.payload_bytes = 4000;
  video.mode_gate = net::ModeGate{"press", 1};
  sc.flows.push_back(video);

  sc.device_positions = {{"plc", {9.0, 10.0}}, {"cam", {11.0, 10.0}}};
  sc.granularity = 4;
  sc.window_s = 0.1;
  sc.lambda = 4.0;
  sc.env_seed = 3;
  return sc;
}

}  // namespace

TEST_CASE("two units over two slices enumerate lexicographically") {
  const auto actions = enumerate_actions(2, 2, 1);
  REQUIRE(actions.size() == 3);
  CHECK(actions[0] == Allocation{0, 2});
  CHECK(actions[1] == Allocation{1, 1});
  CHECK(actions[2] == Allocation{2, 0});
}

TEST_CASE("the action count follows stars and bars") {
  CHECK(enumerate_actions(12, 3, 4).size() == 10);
  CHECK(enumerate_actions(24, 3, 4).size() == 28);
}

TEST_CASE("one slice gets everything") {
  const auto actions = enumerate_actions(12, 1, 4);
  REQUIRE(actions.size() == 1);
  CHECK(actions[0] == Allocation{12});
}

TEST_CASE("every action allocates the full budget in granularity steps") {
  for (const Allocation& a : enumerate_actions(20, 4, 5)) {
    int sum = 0;
    for (int v : a) {
      CHECK(v % 5 == 0);
      CHECK(v >= 0);
      sum += v;
    }
    CHECK(sum == 20);
  }
}

TEST_CASE("a granularity that does not divide the budget is rejected") {
  CHECK_THROWS_AS(enumerate_actions(10, 2, 4), std::invalid_argument);
}

TEST_CASE("an empty compliant window is worth zero reward") {
  const std::vector<SliceWindowQos> qos = {window("control", 0, 0, 0.0, 0)};
  const std::vector<net::SliceSpec> specs = {spec_of("control", 10.0, 0.0)};
  const net::NetParams params;
  CHECK(reward(qos, {8}, specs, 1.0, 8, params) == doctest::Approx(0.0));
}

TEST_CASE("serving at reference capacity is worth one") {
  net::NetParams params;
  const std::uint64_t cap_bytes = static_cast<std::uint64_t>(
      8 * params.prb_bandwidth_hz * params.ref_spectral_efficiency * 0.1 / 8.0);
  const std::vector<SliceWindowQos> qos = {window("control", cap_bytes, cap_bytes, 1.0, 10)};
  const std::vector<net::SliceSpec> specs = {spec_of("control", 10.0, 0.0)};
  CHECK(reward(qos, {8}, specs, 4.0, 8, params) == doctest::Approx(1.0));
}

TEST_CASE("one starved slice at lambda one is worth minus one") {
  SliceWindowQos starved = window("video", 50000, 0, 0.0, 0);
  starved.backlog_bytes = 50000;
  starved.backlog_age_ms = 80.0;
  const std::vector<SliceWindowQos> qos = {starved};
  const std::vector<net::SliceSpec> specs = {spec_of("video", 50.0, 1e6)};
  const net::NetParams params;
  CHECK(reward(qos, {8}, specs, 1.0, 8, params) == doctest::Approx(-1.0));
}

TEST_CASE("a starved slice with old backlog violates even without completions") {
  SliceWindowQos starved = window("video", 50000, 0, 0.0, 0);
  starved.backlog_bytes = 50000;
  starved.backlog_age_ms = 80.0;
  CHECK(window_violated(starved, spec_of("video", 50.0, 1e6)));
}

TEST_CASE("young in-flight backlog is not a throughput shortfall") {
  SliceWindowQos tail = window("telemetry", 11000, 10303, 5.0, 14);
  tail.backlog_bytes = 697;
  tail.backlog_age_ms = 3.0;
  CHECK_FALSE(window_violated(tail, spec_of("telemetry", 20.0, 5e6)));
}

TEST_CASE("an empty window is vacuously compliant") {
  CHECK_FALSE(window_violated(window("x", 0, 0, 0.0, 0), spec_of("x", 1.0, 1e9)));
}

TEST_CASE("mean latency beyond the bound violates") {
  CHECK(window_violated(window("x", 1000, 1000, 12.0, 10), spec_of("x", 10.0, 0.0)));
  CHECK_FALSE(window_violated(window("x", 1000, 1000, 9.0, 10), spec_of("x", 10.0, 0.0)));
}

TEST_CASE("a one-step update with full rate and no bootstrap stores the reward") {
  QTable q;
  q.n_actions = 3;
  q.signature = "sig";
  q_update(q, "s", 1, 5.0, "s2", 1.0, 0.0);
  CHECK(q.values.at("s")[1] == doctest::Approx(5.0));
}

TEST_CASE("a half-rate decay halves the stored value") {
  QTable q;
  q.n_actions = 2;
  q.signature = "sig";
  q.row("s")[0] = 4.0;
  q_update(q, "s", 0, 0.0, "t", 0.5, 0.0);
  CHECK(q.values.at("s")[0] == doctest::Approx(2.0));
}

TEST_CASE("repeated terminal updates converge to the reward") {
  QTable q;
  q.n_actions = 2;
  q.signature = "sig";
  for (int i = 0; i < 200; ++i) q_update(q, "s", 0, 3.0, "ignored", 0.2, 0.9, true);
  CHECK(q.values.at("s")[0] == doctest::Approx(3.0).epsilon(1e-9));
}

TEST_CASE("the bootstrap pulls toward reward plus discounted next value") {
  QTable q;
  q.n_actions = 2;
  q.signature = "sig";
  q.row("next")[1] = 10.0;
  q_update(q, "s", 0, 1.0, "next", 1.0, 0.5);
  CHECK(q.values.at("s")[0] == doctest::Approx(1.0 + 0.5 * 10.0));
}

TEST_CASE("alpha and gamma are range-checked") {
  QTable q;
  q.n_actions = 2;
  q.signature = "sig";
  CHECK_THROWS_AS(q_update(q, "s", 0, 0.0, "t", 0.0, 0.5), std::invalid_argument);
  CHECK_THROWS_AS(q_update(q, "s", 0, 0.0, "t", 0.5, 1.0), std::invalid_argument);
}

TEST_CASE("greedy lookups on unseen keys take the lowest action") {
  QTable q;
  q.n_actions = 4;
  q.signature = "sig";
  CHECK(q.greedy_action("never-seen") == 0);
  CHECK(q.max_value("never-seen") == 0.0);
  q.row("s")[2] = 1.0;
  q.row("s")[3] = 1.0;
  CHECK(q.greedy_action("s") == 2);
}

TEST_CASE("the key budget guard trips on overflow") {
  QTable q;
  q.n_actions = 1;
  q.signature = "sig";
  q.max_keys = 2;
  q.row("a");
  q.row("b");
  CHECK_THROWS_AS(q.row("c"), std::runtime_error);
}

TEST_CASE("identity transfer copies values and resets visits") {
  QTable source;
  source.n_actions = 2;
  source.signature = "enc";
  source.row("s1")[0] = 3.0;
  source.row("s1")[1] = -1.0;
  source.visits["s1"] = {4, 7};
  const QTable target = transfer_init(source, "enc");
  CHECK(target.signature == "enc");
  CHECK(target.values.at("s1")[0] == 3.0);
  CHECK(target.values.at("s1")[1] == -1.0);
  CHECK(target.visits.empty());
}

TEST_CASE("an empty source transfers to a cold start") {
  QTable source;
  source.n_actions = 2;
  source.signature = "enc";
  const QTable target = transfer_init(source, "enc");
  CHECK(target.values.empty());
}

TEST_CASE("incompatible encodings refuse to transfer") {
  QTable source;
  source.n_actions = 2;
  source.signature = "enc-a";
  CHECK_THROWS_AS(transfer_init(source, "enc-b"), std::invalid_argument);
}

TEST_CASE("reliability counts compliant non-empty windows") {
  const net::SliceSpec spec = spec_of("control", 10.0, 0.0);
  std::vector<SliceWindowQos> log;
  for (int i = 0; i < 4; ++i) log.push_back(window("control", 1000, 1000, 5.0, 10));
  CHECK(reliability(log, spec) == doctest::Approx(1.0));
  log[1].latency_sum_s = 0.5;
  log[3].latency_sum_s = 0.5;
  CHECK(reliability(log, spec) == doctest::Approx(0.5));
}

TEST_CASE("a vacuous spec is always met") {
  const net::SliceSpec spec = spec_of("x", 1e18, 0.0);
  std::vector<SliceWindowQos> log = {window("x", 100, 1, 9000.0, 1)};
  CHECK(reliability(log, spec) == doctest::Approx(1.0));
}

TEST_CASE("empty windows are excluded and all-empty logs rejected") {
  const net::SliceSpec spec = spec_of("x", 10.0, 0.0);
  std::vector<SliceWindowQos> log = {window("x", 0, 0, 0.0, 0), window("x", 100, 100, 5.0, 1)};
  CHECK(reliability(log, spec) == doctest::Approx(1.0));
  std::vector<SliceWindowQos> empty_log = {window("x", 0, 0, 0.0, 0)};
  CHECK_THROWS_AS(reliability(empty_log, spec), std::invalid_argument);
}

TEST_CASE("the convergence index finds the first near-asymptotic episode") {
  const std::vector<double> curve = {0.0, 0.2, 0.5, 0.8, 1.0, 1.0, 1.0, 1.0};
  CHECK(episodes_to_fraction_of_asymptote(curve, 0.9) == 4);
  const std::vector<double> flat = {1.0, 1.0};
  CHECK(episodes_to_fraction_of_asymptote(flat, 0.9) == 0);
  // The tolerance band is sign safe: the target sits below the asymptote by
  // (1 - fraction) times its magnitude, so negative curves converge too.
  // Here the asymptote is -1, the target -1.1, first reached at index 1.
  const std::vector<double> negative = {-10.0, -1.05, -1.0, -1.0};
  CHECK(episodes_to_fraction_of_asymptote(negative, 0.9) == 1);
}

TEST_CASE("the environment enumerates full-budget actions and cyclic windows") {
  SlicingEnv env(mini_scenario());
  CHECK(env.windows_per_cycle() == 20);
  CHECK(env.n_actions() == 3);
  for (const Allocation& a : env.actions()) {
    CHECK(a.size() == 2);
    CHECK(a[0] + a[1] == 8);
  }
}

TEST_CASE("environment steps are reproducible after reset") {
  SlicingEnv env(mini_scenario());
  std::vector<double> first;
  for (int i = 0; i < 20; ++i) first.push_back(env.step(1).reward);
  env.reset();
  for (int i = 0; i < 20; ++i) CHECK(env.step(1).reward == first[i]);
}

TEST_CASE("probe windows replay the cycle from fresh queues") {
  SlicingEnv env(mini_scenario());
  const auto probe_a = env.probe_window(3, 1);
  const auto probe_b = env.probe_window(3, 1);
  CHECK(probe_a.reward == probe_b.reward);
  REQUIRE(probe_a.qos.size() == 2);
}

TEST_CASE("training is deterministic per seed") {
  SlicingEnv env_a(mini_scenario());
  SlicingEnv env_b(mini_scenario());
  const TrainResult a = train(env_a, true, 12, 0.3, 0.6, EpsSchedule{}, 7);
  const TrainResult b = train(env_b, true, 12, 0.3, 0.6, EpsSchedule{}, 7);
  REQUIRE(a.learning_curve.size() == b.learning_curve.size());
  for (std::size_t i = 0; i < a.learning_curve.size(); ++i) {
    CHECK(a.learning_curve[i] == b.learning_curve[i]);
  }
}

TEST_CASE("with one phase and no machines both encodings coincide") {
  SlicingScenario sc = mini_scenario();
  sc.factory.machines.clear();
  sc.factory.phase_count = 1;
  sc.flows[1].mode_gate.reset();
  SlicingEnv env(sc);
  // The status-aware key carries a production suffix, but with one phase and
  // no machines that suffix never changes, so both encodings induce the same
  // state partition: the plain key is a prefix and the remainder is constant.
  const std::string key0 = env.observation_key(false);
  const std::string full0 = env.observation_key(true);
  REQUIRE(full0.size() > key0.size());
  CHECK(full0.substr(0, key0.size()) == key0);
  const std::string suffix0 = full0.substr(key0.size());
  env.step(1);
  env.step(2);
  const std::string key2 = env.observation_key(false);
  const std::string full2 = env.observation_key(true);
  CHECK(full2.substr(0, key2.size()) == key2);
  CHECK(full2.substr(key2.size()) == suffix0);

  SlicingEnv env_a(sc);
  SlicingEnv env_b(sc);
  const TrainResult without = train(env_a, false, 10, 0.3, 0.6, EpsSchedule{}, 5);
  const TrainResult with_status = train(env_b, true, 10, 0.3, 0.6, EpsSchedule{}, 5);
  REQUIRE(without.learning_curve.size() == with_status.learning_curve.size());
  for (std::size_t i = 0; i < without.learning_curve.size(); ++i) {
    CHECK(without.learning_curve[i] == with_status.learning_curve[i]);
  }
}

TEST_CASE("trained slicing approaches the per-phase brute force optimum") {
  SlicingEnv env(mini_scenario());
  const BruteForceResult brute = brute_force_per_phase(env);
  for (int a = 0; a < env.n_actions(); ++a) {
    double fixed_mean = 0.0;
    for (int w = 0; w < env.windows_per_cycle(); ++w) fixed_mean += env.probe_window(w, a).reward;
    fixed_mean /= env.windows_per_cycle();
    CHECK(brute.mean_reward >= fixed_mean - 1e-12);
  }
  const TrainResult trained = train(env, true, 80, 0.4, 0.5, EpsSchedule{}, 11);
  CHECK(trained.learning_curve.back() >= 0.95 * brute.mean_reward);
}

TEST_CASE("a q table survives the record-file round trip") {
  QTable q;
  q.n_actions = 3;
  q.signature = "d:3,0,3|p:1|m:0,0,|a:0";
  q.max_keys = 500;
  q.row("d:1,0,2|p:1|m:0,0,|a:0")[0] = 1.25;
  q.row("d:1,0,2|p:1|m:0,0,|a:0")[2] = -0.5;
  q.row("d:3,3,3|p:2|m:1,0,|a:1")[1] = 7.0;
  q.visits["d:1,0,2|p:1|m:0,0,|a:0"] = {3, 0, 1};
  const io::RecordFile rf = io::parse_record_file(io::record_file_to_string(io::pack_model(q)));
  const QTable back = io::unpack_qtable(rf);
  CHECK(back.n_actions == q.n_actions);
  CHECK(back.signature == q.signature);
  REQUIRE(back.values.size() == q.values.size());
  for (const auto& [key, row] : q.values) {
    REQUIRE(back.values.count(key) == 1);
    const auto& brow = back.values.at(key);
    REQUIRE(brow.size() == row.size());
    for (std::size_t i = 0; i < row.size(); ++i) CHECK(brow[i] == row[i]);
  }
  REQUIRE(back.visits.count("d:1,0,2|p:1|m:0,0,|a:0") == 1);
  CHECK(back.visits.at("d:1,0,2|p:1|m:0,0,|a:0") == std::vector<int>{3, 0, 1});
}
