#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "fabricnet/factory.hpp"
#include "fabricnet/geometry.hpp"
#include "fabricnet/parallel.hpp"
#include "fabricnet/radio.hpp"
#include "fabricnet/rng.hpp"

namespace fabricnet::locate {

struct FingerprintEntry {
  geom::Vec2 position;
  std::vector<double> rss_dbm;  // one value per transmitter, fixed order
};

struct FingerprintDb {
  std::vector<std::string> transmitter_ids;
  std::vector<FingerprintEntry> entries;
};

// Samples congruent REMs every `grid_stride` cells; each entry's vector holds
// all transmitters' values at that cell center.
FingerprintDb build_fingerprint_db(std::span<const radio::Rem> rems, int grid_stride);

struct PositionEstimate {
  geom::Vec2 position;
  std::string method;
};

// Inverse-distance-weighted centroid of the k nearest entries in Euclidean
// dB distance. An exact match (distance 0) returns that entry's position;
// distance ties resolve by entry index.
PositionEstimate fingerprint_knn(const FingerprintDb& db, std::span<const double> observed,
                                 int k);

// Log-distance range inversion d = d0 * 10^((tx_power - rss - pl0) / (10 n)),
// clamped to [max(d_min, 0), max_distance].
double rss_to_distance(double rss_dbm, const radio::PropagationParams& p,
                       double max_distance_m);

// Linearized least squares on the circle equations (first anchor's equation
// subtracted from the rest), clamped to bounds. Throws on fewer than three
// anchors or a rank-deficient (collinear) geometry.
PositionEstimate trilaterate(std::span<const geom::Vec2> anchors,
                             std::span<const double> distances, const geom::Rect& bounds);

enum class MethodKind { fingerprint_knn, trilateration };

struct MethodSpec {
  MethodKind kind = MethodKind::fingerprint_knn;
  int k = 4;          // neighbours, fingerprint only
  std::string label;  // empty derives "knn<k>" or "trilateration"
};

struct LocateScenario {
  factory::FactoryLayout layout;
  std::vector<geom::Vec2> tx_positions;
  radio::PropagationParams prop;
  double cell_size_m = 1.0;
  int db_stride = 1;
};

struct ErrorSample {
  std::string method;
  geom::Vec2 truth;
  geom::Vec2 estimate;
  double error_m = 0.0;
};

struct MethodSummary {
  std::string method;
  double mean_m = 0.0;
  double median_m = 0.0;
  double p90_m = 0.0;
};

struct PositioningResult {
  std::vector<ErrorSample> samples;  // method-major, query order within a method
  std::vector<MethodSummary> summary;
};

// Uniform queries over the floor; observations are exact Motley-Keenan RSS
// plus i.i.d. Gaussian dB noise per transmitter, one substream per query.
// Deterministic per seed and identical across execution modes.
PositioningResult evaluate_positioning(const LocateScenario& sc,
                                       std::span<const MethodSpec> methods, int n_queries,
                                       double noise_sigma_db, std::uint64_t seed,
                                       Exec exec = Exec::parallel);

}  // namespace fabricnet::locate
