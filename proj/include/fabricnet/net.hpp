#pragma once

#include <cstdint>
#include <deque>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "fabricnet/factory.hpp"
#include "fabricnet/radio.hpp"
#include "fabricnet/rng.hpp"

namespace fabricnet::net {

struct Cell {
  std::string id;
  geom::Vec2 position;
  int total_prbs = 24;
  radio::PropagationParams prop;
};

struct SliceSpec {
  std::string id;
  double latency_bound_ms = 10.0;
  double throughput_floor_bps = 0.0;
  double weight = 1.0;
};

struct ModeGate {
  std::string machine_id;
  int mode_index = 0;
};

struct TrafficFlow {
  std::string id;
  std::string device_id;
  std::string slice_id;
  double period_ms = 10.0;
  std::uint64_t payload_bytes = 100;
  double jitter_sigma_ms = 0.0;
  std::optional<ModeGate> mode_gate;  // flow emits only while that machine is in that mode
  double burst_alpha = 0.0;           // > 0 scales payloads by Pareto(alpha) draws
};

struct QoSSample {
  double t = 0.0;
  std::string device_id;
  geom::Vec2 position;
  std::string slice_id;
  double ul_throughput_bps = 0.0;
  double latency_ms = 0.0;
  double loss_ratio = 0.0;
  std::string serving_cell;
};

struct NetParams {
  double slot_s = 0.010;
  double prb_bandwidth_hz = 360e3;
  double cap_spectral_efficiency = 7.4;
  double ref_spectral_efficiency = 4.0;  // efficiency denominator in slicing reward
  std::uint64_t queue_cap_bytes = 1'000'000;
  double handover_hysteresis_db = 3.0;
};

// Serving power over noise plus interference, all in dB(m).
double sinr_db(double serving_rss_dbm, std::span<const double> interferer_rss_dbm,
               double noise_floor_dbm);

// Truncated Shannon rate: min(B*log2(1+sinr), B*cap_se).
double rate_from_sinr(double sinr_db, double bandwidth_hz, double cap_se = 7.4);

struct Arrival {
  double t = 0.0;
  std::size_t flow_index = 0;
  std::uint64_t bytes = 0;
};

// All packet arrivals of the flow set landing in [slot_begin, slot_begin+slot_s).
// Packet k of a flow nominally departs at k*period; its jitter (and any burst
// payload scaling) is drawn from a substream keyed on (flow, k), so arrivals
// are reproducible regardless of slot evaluation order. The mode gate is
// evaluated at the nominal departure time. Results are sorted by
// (t, flow_index, k).
std::vector<Arrival> generate_arrivals(std::span<const TrafficFlow> flows,
                                       const factory::FactorySpec& factory_spec,
                                       double slot_begin, double slot_s,
                                       const sim::RngStream& traffic_stream);

// Spec-level aggregation of generate_arrivals: (device, slice) -> bytes.
std::map<std::pair<std::string, std::string>, std::uint64_t> generate_offered_load(
    std::span<const TrafficFlow> flows, const factory::FactorySpec& factory_spec,
    double slot_begin, double slot_s, const sim::RngStream& traffic_stream);

struct Packet {
  double arrival_t = 0.0;
  std::uint64_t bytes = 0;
  std::uint64_t served = 0;
};

// FIFO uplink queue of one (device, slice) pair at its serving cell.
struct DeviceQueue {
  std::string device_id;
  std::string slice_id;
  std::deque<Packet> packets;
  std::uint64_t backlog_bytes = 0;  // unserved bytes across queued packets

  // Slot accounting, reset by serve_slot.
  std::uint64_t arrived_bytes = 0;
  std::uint64_t dropped_bytes = 0;
  std::uint64_t served_bytes = 0;
  std::uint64_t completed_packets = 0;
  double latency_sum_s = 0.0;

  void push(const Packet& pkt, std::uint64_t queue_cap_bytes);
};

struct SliceSlotStats {
  std::uint64_t arrived_bytes = 0;
  std::uint64_t served_bytes = 0;
  std::uint64_t dropped_bytes = 0;
  std::uint64_t backlog_bytes = 0;  // at slot end
  std::uint64_t completed_packets = 0;
  double latency_sum_s = 0.0;
};

// Drains the cell's queues for one slot. Each slice owns
// allocations[slice]*prb_bandwidth of spectrum; the slot time is split
// equally among the slice's backlogged devices and each device is served
// FIFO at its own rate. Packet latency = completion time - arrival time;
// partially served heads carry over. Throws if the allocation exceeds
// total_prbs. Emits one QoSSample per queue.
struct ServeSlotResult {
  std::vector<QoSSample> samples;
  std::map<std::string, SliceSlotStats> per_slice;
};

ServeSlotResult serve_slot(const Cell& cell, const std::map<std::string, int>& allocations,
                           std::vector<DeviceQueue>& queues,
                           const std::map<std::string, double>& device_sinr_db,
                           const std::map<std::string, geom::Vec2>& device_pos,
                           double slot_begin, const NetParams& params);

// Strongest-REM attachment with hysteresis: switch away from `current` only
// if the best cell beats it by more than the hysteresis margin.
std::size_t select_serving_cell(std::span<const radio::Rem> rems, const geom::Vec2& pos,
                                std::optional<std::size_t> current, double hysteresis_db);

}  // namespace fabricnet::net
