#include <cmath>
#include <map>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "doctest.h"
#include "fabricnet/factory.hpp"
#include "fabricnet/net.hpp"
#include "fabricnet/rng.hpp"

using namespace fabricnet;
using namespace fabricnet::net;
using fabricnet::geom::Vec2;

namespace {

factory::FactorySpec press_spec() {
  factory::FactorySpec spec;
  spec.layout.bounds = {{0.0, 0.0}, {50.0, 40.0}};
  factory::Machine press;
  press.id = "press";
  press.position = {10.0, 10.0};
  press.modes = {{"idle", 60.0, "sparse"}, {"active", 40.0, "dense"}};
  press.schedule = {0, 1};
  spec.machines.push_back(press);
  spec.cycle_length_s = 100.0;
  return spec;
}

TrafficFlow plain_flow() {
  TrafficFlow f;
  f.id = "f0";
  f.device_id = "d0";
  f.slice_id = "urllc";
  f.period_ms = 10.0;
  f.payload_bytes = 100;
  return f;
}

Cell test_cell() {
  Cell c;
  c.id = "c0";
  c.position = {25.0, 20.0};
  c.total_prbs = 24;
  return c;
}

radio::Rem constant_rem(const std::string& id, double value) {
  radio::Rem rem;
  rem.transmitter_id = id;
  rem.origin = {0.0, 0.0};
  rem.cell_size = 1.0;
  rem.nx = 2;
  rem.ny = 2;
  rem.values.assign(4, value);
  return rem;
}

}  // namespace

TEST_CASE("sinr without interference is signal over noise") {
  CHECK(sinr_db(-70.0, {}, -100.0) == doctest::Approx(30.0).epsilon(1e-12));
}

TEST_CASE("an interferer at serving power drives sinr to zero") {
  const std::vector<double> interferers = {-60.0};
  CHECK(sinr_db(-60.0, interferers, -300.0) == doctest::Approx(0.0).scale(1.0).epsilon(1e-6));
}

TEST_CASE("adding an interferer never raises sinr") {
  std::vector<double> interferers;
  double prev = sinr_db(-60.0, interferers, -96.0);
  for (double i_dbm : {-90.0, -85.0, -80.0, -75.0}) {
    interferers.push_back(i_dbm);
    const double cur = sinr_db(-60.0, interferers, -96.0);
    CHECK(cur < prev);
    prev = cur;
  }
}

TEST_CASE("unit bandwidth at zero dB carries one bit per second") {
  CHECK(rate_from_sinr(0.0, 1.0) == doctest::Approx(1.0).epsilon(1e-12));
}

TEST_CASE("zero bandwidth carries nothing and negative bandwidth throws") {
  CHECK(rate_from_sinr(20.0, 0.0) == 0.0);
  CHECK_THROWS_AS(rate_from_sinr(20.0, -1.0), std::invalid_argument);
}

TEST_CASE("the spectral-efficiency cap binds at high sinr") {
  const double uncapped = std::log2(1.0 + 1e4);
  CHECK(uncapped == doctest::Approx(13.2877).epsilon(1e-4));
  CHECK(rate_from_sinr(40.0, 360e3) == doctest::Approx(360e3 * 7.4).epsilon(1e-12));
  CHECK(rate_from_sinr(40.0, 360e3, 100.0) == doctest::Approx(360e3 * uncapped).epsilon(1e-12));
}

TEST_CASE("a jitter-free flow emits one payload per period") {
  const std::vector<TrafficFlow> flows = {plain_flow()};
  sim::RngStream stream(5, "traffic");
  const auto arrivals = generate_arrivals(flows, press_spec(), 0.0, 0.1, stream);
  REQUIRE(arrivals.size() == 10);
  for (std::size_t k = 0; k < arrivals.size(); ++k) {
    CHECK(arrivals[k].t == doctest::Approx(0.01 * k));
    CHECK(arrivals[k].bytes == 100);
    CHECK(arrivals[k].flow_index == 0);
  }
}

TEST_CASE("a gated flow is silent outside its machine mode") {
  TrafficFlow gated = plain_flow();
  gated.mode_gate = ModeGate{"press", 1};
  const std::vector<TrafficFlow> flows = {gated};
  sim::RngStream stream(5, "traffic");
  CHECK(generate_arrivals(flows, press_spec(), 0.0, 0.1, stream).empty());
  CHECK(generate_arrivals(flows, press_spec(), 60.005, 0.1, stream).size() == 10);
}

TEST_CASE("gated offered load repeats with the production cycle") {
  // Window edges sit between packet departures so the byte count is not
  // sensitive to floating-point rounding at the bin boundary.
  TrafficFlow gated = plain_flow();
  gated.mode_gate = ModeGate{"press", 1};
  const std::vector<TrafficFlow> flows = {gated};
  sim::RngStream stream(5, "traffic");
  const auto first = generate_offered_load(flows, press_spec(), 60.005, 0.1, stream);
  const auto later = generate_offered_load(flows, press_spec(), 160.005, 0.1, stream);
  REQUIRE(first.size() == 1);
  CHECK(first.at({"d0", "urllc"}) == 1000);
  CHECK(later.at({"d0", "urllc"}) == 1000);
}

TEST_CASE("a gate referencing an unknown machine throws") {
  TrafficFlow gated = plain_flow();
  gated.mode_gate = ModeGate{"mill", 0};
  const std::vector<TrafficFlow> flows = {gated};
  sim::RngStream stream(5, "traffic");
  CHECK_THROWS_AS(generate_arrivals(flows, press_spec(), 0.0, 0.1, stream),
                  std::invalid_argument);
}

TEST_CASE("burst scaling never shrinks a payload") {
  TrafficFlow bursty = plain_flow();
  bursty.burst_alpha = 1.5;
  const std::vector<TrafficFlow> flows = {bursty};
  sim::RngStream stream(11, "traffic");
  const auto arrivals = generate_arrivals(flows, press_spec(), 0.0, 1.0, stream);
  REQUIRE(arrivals.size() == 100);
  for (const Arrival& a : arrivals) CHECK(a.bytes >= 100);
}

TEST_CASE("splitting a window does not change the jittered arrival set") {
  TrafficFlow noisy = plain_flow();
  noisy.jitter_sigma_ms = 1.0;
  const std::vector<TrafficFlow> flows = {noisy};
  sim::RngStream stream(7, "traffic");
  const auto whole = generate_arrivals(flows, press_spec(), 0.0, 0.1, stream);
  auto first = generate_arrivals(flows, press_spec(), 0.0, 0.05, stream);
  const auto second = generate_arrivals(flows, press_spec(), 0.05, 0.05, stream);
  first.insert(first.end(), second.begin(), second.end());
  REQUIRE(first.size() == whole.size());
  for (std::size_t i = 0; i < whole.size(); ++i) {
    CHECK(first[i].t == whole[i].t);
    CHECK(first[i].bytes == whole[i].bytes);
  }
  for (std::size_t i = 1; i < whole.size(); ++i) CHECK(whole[i - 1].t <= whole[i].t);
}

TEST_CASE("a queue drops what would overflow its cap") {
  DeviceQueue q;
  q.device_id = "d0";
  q.slice_id = "urllc";
  q.push({0.0, 600, 0}, 1000);
  q.push({0.001, 600, 0}, 1000);
  CHECK(q.backlog_bytes == 600);
  CHECK(q.arrived_bytes == 1200);
  CHECK(q.dropped_bytes == 600);
  CHECK(q.packets.size() == 1);
}

TEST_CASE("serving an empty cell yields no samples") {
  std::vector<DeviceQueue> queues;
  const auto result = serve_slot(test_cell(), {{"urllc", 4}}, queues, {}, {}, 0.0, NetParams{});
  CHECK(result.samples.empty());
  CHECK(result.per_slice.empty());
}

TEST_CASE("an allocation above the cell total is rejected") {
  std::vector<DeviceQueue> queues;
  CHECK_THROWS_AS(
      serve_slot(test_cell(), {{"urllc", 20}, {"video", 5}}, queues, {}, {}, 0.0, NetParams{}),
      std::invalid_argument);
  CHECK_THROWS_AS(serve_slot(test_cell(), {{"urllc", -1}}, queues, {}, {}, 0.0, NetParams{}),
                  std::invalid_argument);
}

TEST_CASE("capacity matched to the backlog drains the queue within the slot") {
  NetParams params;
  std::vector<DeviceQueue> queues(1);
  queues[0].device_id = "d0";
  queues[0].slice_id = "urllc";
  queues[0].push({0.0, 450, 0}, params.queue_cap_bytes);
  const std::map<std::string, double> sinr = {{"d0", 0.0}};
  const std::map<std::string, Vec2> pos = {{"d0", {1.0, 1.0}}};
  const auto result = serve_slot(test_cell(), {{"urllc", 1}}, queues, sinr, pos, 0.0, params);
  CHECK(queues[0].packets.empty());
  CHECK(queues[0].backlog_bytes == 0);
  const SliceSlotStats& st = result.per_slice.at("urllc");
  CHECK(st.served_bytes == 450);
  CHECK(st.completed_packets == 1);
  CHECK(st.latency_sum_s == doctest::Approx(0.010));
  REQUIRE(result.samples.size() == 1);
  CHECK(result.samples[0].ul_throughput_bps == doctest::Approx(450.0 * 8.0 / 0.010));
  CHECK(result.samples[0].latency_ms == doctest::Approx(10.0));
  CHECK(result.samples[0].serving_cell == "c0");
}

TEST_CASE("a zero allocation leaves the backlog untouched") {
  NetParams params;
  std::vector<DeviceQueue> queues(1);
  queues[0].device_id = "d0";
  queues[0].slice_id = "urllc";
  queues[0].push({0.0, 300, 0}, params.queue_cap_bytes);
  queues[0].push({0.002, 200, 0}, params.queue_cap_bytes);
  const std::map<std::string, double> sinr = {{"d0", 20.0}};
  const auto result = serve_slot(test_cell(), {{"urllc", 0}}, queues, sinr, {}, 0.0, params);
  const SliceSlotStats& st = result.per_slice.at("urllc");
  CHECK(st.arrived_bytes == 500);
  CHECK(st.served_bytes == 0);
  CHECK(st.backlog_bytes == 500);
  CHECK(queues[0].backlog_bytes == 500);
}

TEST_CASE("bytes are conserved slice by slice") {
  NetParams params;
  params.queue_cap_bytes = 2000;
  sim::RngStream rng(13, "conservation");
  std::vector<DeviceQueue> queues(4);
  const std::vector<std::string> slices = {"urllc", "urllc", "video", "telemetry"};
  std::map<std::string, double> sinr;
  std::map<std::string, std::uint64_t> pushed;
  for (std::size_t i = 0; i < queues.size(); ++i) {
    queues[i].device_id = "d" + std::to_string(i);
    queues[i].slice_id = slices[i];
    sinr[queues[i].device_id] = rng.uniform(-5.0, 25.0);
    const int n = 1 + static_cast<int>(rng.uniform_int(5));
    for (int k = 0; k < n; ++k) {
      const std::uint64_t bytes = 50 + rng.uniform_int(851);
      queues[i].push({0.001 * k, bytes, 0}, params.queue_cap_bytes);
      pushed[slices[i]] += bytes;
    }
  }
  const std::map<std::string, int> alloc = {{"urllc", 2}, {"video", 1}, {"telemetry", 0}};
  const auto result = serve_slot(test_cell(), alloc, queues, sinr, {}, 0.0, params);
  REQUIRE(result.samples.size() == queues.size());
  for (const auto& [slice, st] : result.per_slice) {
    CHECK(st.arrived_bytes == pushed[slice]);
    CHECK(st.arrived_bytes == st.served_bytes + st.dropped_bytes + st.backlog_bytes);
  }
}

TEST_CASE("served throughput never exceeds the allocated capacity") {
  NetParams params;
  std::vector<DeviceQueue> queues(1);
  queues[0].device_id = "d0";
  queues[0].slice_id = "urllc";
  for (int k = 0; k < 40; ++k) queues[0].push({0.0, 900, 0}, params.queue_cap_bytes);
  const std::map<std::string, double> sinr = {{"d0", 18.0}};
  const auto result = serve_slot(test_cell(), {{"urllc", 3}}, queues, sinr, {}, 0.0, params);
  const double cap_bps =
      rate_from_sinr(18.0, 3 * params.prb_bandwidth_hz, params.cap_spectral_efficiency);
  CHECK(result.samples[0].ul_throughput_bps <= cap_bps + 1e-9);
  CHECK(result.per_slice.at("urllc").served_bytes > 0);
}

TEST_CASE("slot time is split equally among a slice's backlogged devices") {
  NetParams params;
  std::vector<DeviceQueue> queues(2);
  for (int i = 0; i < 2; ++i) {
    queues[i].device_id = "d" + std::to_string(i);
    queues[i].slice_id = "urllc";
    for (int k = 0; k < 30; ++k) queues[i].push({0.0, 900, 0}, params.queue_cap_bytes);
  }
  const std::map<std::string, double> sinr = {{"d0", 10.0}, {"d1", 10.0}};
  const auto result = serve_slot(test_cell(), {{"urllc", 2}}, queues, sinr, {}, 0.0, params);
  const double full_rate =
      rate_from_sinr(10.0, 2 * params.prb_bandwidth_hz, params.cap_spectral_efficiency);
  const auto expected =
      static_cast<std::uint64_t>(std::floor(full_rate / 8.0 * 0.5 * params.slot_s));
  CHECK(queues[0].served_bytes == expected);
  CHECK(queues[1].served_bytes == expected);
}

TEST_CASE("attachment picks the strongest map absent a current cell") {
  const std::vector<radio::Rem> rems = {constant_rem("c0", -60.0), constant_rem("c1", -55.0)};
  CHECK(select_serving_cell(rems, {1.0, 1.0}, std::nullopt, 3.0) == 1);
}

TEST_CASE("hysteresis holds the current cell against small gains") {
  const std::vector<radio::Rem> stay = {constant_rem("c0", -60.0), constant_rem("c1", -58.0)};
  CHECK(select_serving_cell(stay, {1.0, 1.0}, std::size_t{0}, 3.0) == 0);
  const std::vector<radio::Rem> go = {constant_rem("c0", -60.0), constant_rem("c1", -56.5)};
  CHECK(select_serving_cell(go, {1.0, 1.0}, std::size_t{0}, 3.0) == 1);
}

TEST_CASE("attachment with no cells throws") {
  CHECK_THROWS_AS(select_serving_cell({}, {1.0, 1.0}, std::nullopt, 3.0), std::invalid_argument);
}
