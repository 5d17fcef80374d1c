#include "fabricnet/factory.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace fabricnet::factory {

double Machine::cycle_length() const {
  double total = 0.0;
  for (int idx : schedule) total += modes.at(static_cast<std::size_t>(idx)).duration_s;
  return total;
}

int Machine::mode_at(double t) const {
  if (schedule.empty()) throw std::invalid_argument("machine schedule is empty");
  const double cycle = cycle_length();
  double u = std::fmod(t, cycle);
  if (u < 0.0) u += cycle;
  double acc = 0.0;
  for (int idx : schedule) {
    acc += modes.at(static_cast<std::size_t>(idx)).duration_s;
    if (u < acc) return idx;
  }
  return schedule.back();  // u == cycle boundary under fp roundoff
}

double Agv::path_length() const {
  double len = 0.0;
  for (std::size_t i = 1; i < waypoints.size(); ++i) {
    len += geom::distance(waypoints[i - 1], waypoints[i]);
  }
  if (loop && waypoints.size() > 1) {
    len += geom::distance(waypoints.back(), waypoints.front());
  }
  return len;
}

geom::Vec2 agv_position(const Agv& agv, double t) {
  if (agv.waypoints.empty()) throw std::invalid_argument("agv has no waypoints");
  if (agv.waypoints.size() == 1) return agv.waypoints.front();

  const double total = agv.path_length();
  double s = agv.speed_mps * std::max(t, 0.0);
  if (agv.loop) {
    s = std::fmod(s, total);
  } else {
    s = std::min(s, total);
  }

  const std::size_t n = agv.waypoints.size();
  const std::size_t segments = agv.loop ? n : n - 1;
  for (std::size_t i = 0; i < segments; ++i) {
    const geom::Vec2& a = agv.waypoints[i];
    const geom::Vec2& b = agv.waypoints[(i + 1) % n];
    const double seg = geom::distance(a, b);
    if (s <= seg || i + 1 == segments) {
      const double f = seg > 0.0 ? std::min(s / seg, 1.0) : 0.0;
      return a + (b - a) * f;
    }
    s -= seg;
  }
  return agv.waypoints.back();
}

ProductionStatus production_status(const FactorySpec& spec, double t) {
  if (t < 0.0) throw std::invalid_argument("production_status: t must be >= 0");
  ProductionStatus status;

  const double c = spec.cycle_length_s;
  double frac = std::fmod(t, c) / c;
  if (frac < 0.0) frac += 1.0;
  status.cycle_phase =
      std::min(spec.phase_count - 1, static_cast<int>(std::floor(spec.phase_count * frac)));

  for (const Machine& m : spec.machines) {
    status.machine_modes[m.id] = m.mode_at(t);
  }
  // The start/stop window applies within each cycle so the status stays
  // exactly cycle-periodic.
  const double tc = std::fmod(t, c);
  for (const Agv& a : spec.agvs) {
    if (a.active_at(tc)) status.active_agvs.insert(a.id);
  }
  return status;
}

std::vector<double> status_feature_vector(const ProductionStatus& status,
                                          const StatusEncoding& encoding) {
  if (status.machine_modes.size() != encoding.machine_order.size()) {
    throw std::invalid_argument("status machine set does not match encoding");
  }
  std::vector<double> v;
  v.reserve(static_cast<std::size_t>(encoding.phase_count) + encoding.machine_order.size() + 1);
  for (int p = 0; p < encoding.phase_count; ++p) {
    v.push_back(p == status.cycle_phase ? 1.0 : 0.0);
  }
  for (const std::string& id : encoding.machine_order) {
    auto it = status.machine_modes.find(id);
    if (it == status.machine_modes.end()) {
      throw std::invalid_argument("unknown machine id in status: " + id);
    }
    v.push_back(static_cast<double>(it->second));
  }
  v.push_back(static_cast<double>(status.active_agvs.size()));
  return v;
}

}  // namespace fabricnet::factory
