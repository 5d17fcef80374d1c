#pragma once

#include <limits>
#include <map>
#include <set>
#include <string>
#include <vector>

#include "fabricnet/geometry.hpp"

namespace fabricnet::factory {

struct Wall {
  geom::Vec2 a;
  geom::Vec2 b;
  double penetration_loss_db = 0.0;
};

struct Zone {
  std::string name;
  geom::Rect rect;
};

struct FactoryLayout {
  geom::Rect bounds;
  std::vector<Wall> walls;
  std::vector<Zone> zones;
};

struct MachineMode {
  std::string name;
  double duration_s = 0.0;
  std::string traffic_profile;
};

struct Machine {
  std::string id;
  geom::Vec2 position;
  std::vector<MachineMode> modes;
  std::vector<int> schedule;  // indices into modes, cycled

  double cycle_length() const;
  // Mode index active at time t; mode intervals are half-open [start, end).
  int mode_at(double t) const;
};

struct Agv {
  std::string id;
  std::vector<geom::Vec2> waypoints;
  double speed_mps = 1.0;
  bool loop = true;
  std::string task_profile;
  double start_t = 0.0;
  double stop_t = std::numeric_limits<double>::infinity();

  double path_length() const;
  bool active_at(double t) const { return t >= start_t && t < stop_t; }
};

// Factory side of a scenario: layout plus everything that drives the
// production-status observable.
struct FactorySpec {
  FactoryLayout layout;
  std::vector<Machine> machines;
  std::vector<Agv> agvs;
  double cycle_length_s = 100.0;  // global production cycle C
  int phase_count = 20;           // P
};

struct ProductionStatus {
  int cycle_phase = 0;
  std::map<std::string, int> machine_modes;
  std::set<std::string> active_agvs;

  bool operator==(const ProductionStatus&) const = default;
};

// Fixed-length numeric encoding layout for ProductionStatus.
struct StatusEncoding {
  int phase_count = 1;
  std::vector<std::string> machine_order;
};

// Position along the waypoint route at constant speed; wraps if loop, else
// clamps at the final waypoint. t is clamped below at 0.
geom::Vec2 agv_position(const Agv& agv, double t);

// Snapshot at time t. AGV start/stop windows are evaluated against the
// cycle-local time, so the status is an exactly cycle-periodic function.
ProductionStatus production_status(const FactorySpec& spec, double t);

// phase one-hot ++ per-machine mode index ++ active-AGV count.
// Throws if the status's machine set does not match the encoding.
std::vector<double> status_feature_vector(const ProductionStatus& status,
                                          const StatusEncoding& encoding);

}  // namespace fabricnet::factory
