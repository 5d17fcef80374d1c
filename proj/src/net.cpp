#include "fabricnet/net.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace fabricnet::net {

namespace {

double dbm_to_mw(double dbm) { return std::pow(10.0, dbm / 10.0); }

}  // namespace

double sinr_db(double serving_rss_dbm, std::span<const double> interferer_rss_dbm,
               double noise_floor_dbm) {
  double denom_mw = dbm_to_mw(noise_floor_dbm);
  for (double i : interferer_rss_dbm) denom_mw += dbm_to_mw(i);
  return serving_rss_dbm - 10.0 * std::log10(denom_mw);
}

double rate_from_sinr(double sinr, double bandwidth_hz, double cap_se) {
  if (bandwidth_hz < 0.0) throw std::invalid_argument("rate_from_sinr: bandwidth must be >= 0");
  if (bandwidth_hz == 0.0) return 0.0;
  const double se = std::log2(1.0 + std::pow(10.0, sinr / 10.0));
  return bandwidth_hz * std::min(se, cap_se);
}

std::vector<Arrival> generate_arrivals(std::span<const TrafficFlow> flows,
                                       const factory::FactorySpec& factory_spec,
                                       double slot_begin, double slot_s,
                                       const sim::RngStream& traffic_stream) {
  if (slot_s <= 0.0) throw std::invalid_argument("generate_arrivals: slot length must be > 0");
  // Slot boundaries are snapped to the canonical i * slot_s grid when the
  // caller is on it, so consecutive slots share bit-identical boundaries and
  // no packet can fall into a rounding crack or be counted twice.
  double lo = slot_begin;
  double slot_end = slot_begin + slot_s;
  const double idx_f = slot_begin / slot_s;
  const auto idx = static_cast<std::int64_t>(std::llround(idx_f));
  if (std::fabs(idx_f - static_cast<double>(idx)) < 1e-9) {
    lo = static_cast<double>(idx) * slot_s;
    slot_end = static_cast<double>(idx + 1) * slot_s;
  }
  const double slot_begin_eff = lo;
  std::vector<Arrival> arrivals;

  for (std::size_t fi = 0; fi < flows.size(); ++fi) {
    const TrafficFlow& f = flows[fi];
    const double period_s = f.period_ms / 1000.0;
    const double jitter_s = f.jitter_sigma_ms / 1000.0;
    const double slack = 6.0 * jitter_s + period_s;
    const auto k_lo =
        static_cast<std::int64_t>(std::floor(std::max(0.0, slot_begin_eff - slack) / period_s));
    const auto k_hi = static_cast<std::int64_t>(std::ceil((slot_end + slack) / period_s));
    const sim::RngStream flow_stream = traffic_stream.substream(fi);

    for (std::int64_t k = k_lo; k <= k_hi; ++k) {
      const double nominal_t = static_cast<double>(k) * period_s;
      if (nominal_t < 0.0) continue;
      double t = nominal_t;
      std::uint64_t bytes = f.payload_bytes;
      if (jitter_s > 0.0 || f.burst_alpha > 0.0) {
        sim::RngStream pkt = flow_stream.substream(static_cast<std::uint64_t>(k));
        if (jitter_s > 0.0) t += jitter_s * pkt.gaussian();
        if (f.burst_alpha > 0.0) {
          bytes = static_cast<std::uint64_t>(
              std::llround(static_cast<double>(f.payload_bytes) * pkt.pareto(f.burst_alpha)));
        }
      }
      if (t < slot_begin_eff || t >= slot_end) continue;
      if (f.mode_gate) {
        bool found = false;
        for (const factory::Machine& m : factory_spec.machines) {
          if (m.id == f.mode_gate->machine_id) {
            found = true;
            if (m.mode_at(nominal_t) != f.mode_gate->mode_index) goto next_packet;
            break;
          }
        }
        if (!found) throw std::invalid_argument("mode gate references unknown machine");
      }
      arrivals.push_back(Arrival{t, fi, bytes});
    next_packet:;
    }
  }

  std::stable_sort(arrivals.begin(), arrivals.end(), [](const Arrival& a, const Arrival& b) {
    if (a.t != b.t) return a.t < b.t;
    return a.flow_index < b.flow_index;
  });
  return arrivals;
}

std::map<std::pair<std::string, std::string>, std::uint64_t> generate_offered_load(
    std::span<const TrafficFlow> flows, const factory::FactorySpec& factory_spec,
    double slot_begin, double slot_s, const sim::RngStream& traffic_stream) {
  std::map<std::pair<std::string, std::string>, std::uint64_t> load;
  for (const Arrival& a :
       generate_arrivals(flows, factory_spec, slot_begin, slot_s, traffic_stream)) {
    const TrafficFlow& f = flows[a.flow_index];
    load[{f.device_id, f.slice_id}] += a.bytes;
  }
  return load;
}

void DeviceQueue::push(const Packet& pkt, std::uint64_t queue_cap_bytes) {
  arrived_bytes += pkt.bytes;
  if (backlog_bytes + pkt.bytes > queue_cap_bytes) {
    dropped_bytes += pkt.bytes;
    return;
  }
  packets.push_back(pkt);
  backlog_bytes += pkt.bytes;
}

ServeSlotResult serve_slot(const Cell& cell, const std::map<std::string, int>& allocations,
                           std::vector<DeviceQueue>& queues,
                           const std::map<std::string, double>& device_sinr_db,
                           const std::map<std::string, geom::Vec2>& device_pos,
                           double slot_begin, const NetParams& params) {
  int allocated = 0;
  for (const auto& [slice, prbs] : allocations) {
    if (prbs < 0) throw std::invalid_argument("serve_slot: negative PRB allocation");
    allocated += prbs;
  }
  if (allocated > cell.total_prbs) {
    throw std::invalid_argument("serve_slot: allocation exceeds total PRBs");
  }

  const double slot_end = slot_begin + params.slot_s;

  // Count backlogged devices per slice for the equal time split.
  std::map<std::string, int> active_per_slice;
  for (const DeviceQueue& q : queues) {
    if (!q.packets.empty()) active_per_slice[q.slice_id]++;
  }

  ServeSlotResult result;
  for (DeviceQueue& q : queues) {
    q.served_bytes = 0;
    q.completed_packets = 0;
    q.latency_sum_s = 0.0;
    const std::uint64_t arrived_this_slot = q.arrived_bytes;
    const std::uint64_t dropped_this_slot = q.dropped_bytes;

    auto alloc_it = allocations.find(q.slice_id);
    const int prbs = alloc_it == allocations.end() ? 0 : alloc_it->second;
    const int sharers = active_per_slice.count(q.slice_id) ? active_per_slice[q.slice_id] : 0;

    if (prbs > 0 && sharers > 0 && !q.packets.empty()) {
      const double sinr = device_sinr_db.at(q.device_id);
      const double rate_bps =
          rate_from_sinr(sinr, prbs * params.prb_bandwidth_hz, params.cap_spectral_efficiency);
      // Equal time split among the slice's backlogged devices; the device
      // transmits at its own rate during its share.
      const double rate_Bps = rate_bps / 8.0 * (1.0 / sharers);
      double cursor = slot_begin;
      while (!q.packets.empty() && cursor < slot_end && rate_Bps > 0.0) {
        Packet& head = q.packets.front();
        const double start = std::max(cursor, head.arrival_t);
        if (start >= slot_end) break;
        const std::uint64_t remaining = head.bytes - head.served;
        const double time_needed = static_cast<double>(remaining) / rate_Bps;
        if (start + time_needed <= slot_end) {
          const double done_t = start + time_needed;
          q.served_bytes += remaining;
          q.backlog_bytes -= remaining;
          q.latency_sum_s += done_t - head.arrival_t;
          q.completed_packets += 1;
          q.packets.pop_front();
          cursor = done_t;
        } else {
          const auto servable =
              static_cast<std::uint64_t>(std::floor((slot_end - start) * rate_Bps));
          const std::uint64_t granted = std::min(servable, remaining);
          head.served += granted;
          q.served_bytes += granted;
          q.backlog_bytes -= granted;
          cursor = slot_end;
        }
      }
    }

    QoSSample sample;
    sample.t = slot_begin;
    sample.device_id = q.device_id;
    sample.slice_id = q.slice_id;
    auto pos_it = device_pos.find(q.device_id);
    if (pos_it != device_pos.end()) sample.position = pos_it->second;
    sample.ul_throughput_bps = static_cast<double>(q.served_bytes) * 8.0 / params.slot_s;
    sample.latency_ms =
        q.completed_packets > 0 ? q.latency_sum_s / q.completed_packets * 1000.0 : 0.0;
    sample.loss_ratio = arrived_this_slot > 0
                            ? static_cast<double>(dropped_this_slot) / arrived_this_slot
                            : 0.0;
    sample.serving_cell = cell.id;
    result.samples.push_back(sample);

    SliceSlotStats& st = result.per_slice[q.slice_id];
    st.arrived_bytes += arrived_this_slot;
    st.served_bytes += q.served_bytes;
    st.dropped_bytes += dropped_this_slot;
    st.backlog_bytes += q.backlog_bytes;
    st.completed_packets += q.completed_packets;
    st.latency_sum_s += q.latency_sum_s;

    q.arrived_bytes = 0;
    q.dropped_bytes = 0;
  }
  return result;
}

std::size_t select_serving_cell(std::span<const radio::Rem> rems, const geom::Vec2& pos,
                                std::optional<std::size_t> current, double hysteresis_db) {
  if (rems.empty()) throw std::invalid_argument("select_serving_cell: no cells");
  std::size_t best = 0;
  double best_rss = rems[0].bilinear(pos);
  for (std::size_t i = 1; i < rems.size(); ++i) {
    const double rss = rems[i].bilinear(pos);
    if (rss > best_rss) {
      best_rss = rss;
      best = i;
    }
  }
  if (current && *current < rems.size() && best != *current) {
    if (best_rss <= rems[*current].bilinear(pos) + hysteresis_db) return *current;
  }
  return best;
}

}  // namespace fabricnet::net
