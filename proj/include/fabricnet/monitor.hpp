#pragma once

#include <span>
#include <string>
#include <vector>

namespace fabricnet::monitor {

struct TrafficSeries {
  std::string region_id;
  std::vector<double> values;  // load per window, non-negative
  double window_s = 0.1;
};

// Symmetric n x n Gramian angular field with entries in [-1, 1].
struct GafMatrix {
  int n = 0;
  std::vector<double> values;  // row-major

  double at(int i, int j) const { return values[static_cast<std::size_t>(i) * n + j]; }
};

// x~_i = 2 (x_i - min) / (max - min) - 1; a constant series maps to all
// zeros. Throws on empty or non-finite input.
std::vector<double> rescale_unit(std::span<const double> series);

// G_ij = cos(phi_i + phi_j) with phi_i = arccos(x~_i).
GafMatrix gaf_encode(std::span<const double> series);

// Frobenius distance; throws on dimension mismatch.
double gaf_distance(const GafMatrix& a, const GafMatrix& b);

// One observation interval: the monitored regions' series over the window
// (same order and length everywhere) and the hidden region's load.
using WindowSeries = std::vector<std::vector<double>>;

struct HistoryEntry {
  WindowSeries monitored;
  double remote_load = 0.0;
};

// k-NN regression in GAF space: window distance is the root of summed
// squared Frobenius distances over the monitored regions; the estimate is
// the mean label of the k nearest entries (ties by history index).
double estimate_remote_region(std::span<const HistoryEntry> history, const WindowSeries& query,
                              int k);

// Row-major CSV, 9 significant digits.
std::string gaf_to_csv(const GafMatrix& m);

}  // namespace fabricnet::monitor
