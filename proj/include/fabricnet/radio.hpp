#pragma once

#include <cstddef>
#include <span>
#include <string>
#include <vector>

#include "fabricnet/factory.hpp"
#include "fabricnet/geometry.hpp"
#include "fabricnet/parallel.hpp"
#include "fabricnet/rng.hpp"

namespace fabricnet::radio {

struct PropagationParams {
  double pl0_db = 40.0;        // loss at reference distance d0
  double d0_m = 1.0;
  double exponent = 2.0;
  double shadowing_sigma_db = 0.0;
  double tx_power_dbm = 23.0;
  double noise_floor_dbm = -96.0;
  double d_min_m = 0.1;        // distance clamp; <= 0 disables clamping
};

// Per-transmitter grid of expected RSS (dBm) at cell centers. Row-major,
// index = iy * nx + ix; cell (ix, iy) center = origin + (ix+0.5, iy+0.5)*cell.
struct Rem {
  std::string transmitter_id;
  geom::Vec2 origin;
  double cell_size = 1.0;
  int nx = 0;
  int ny = 0;
  std::vector<double> values;

  double at(int ix, int iy) const { return values[static_cast<std::size_t>(iy) * nx + ix]; }
  double& at(int ix, int iy) { return values[static_cast<std::size_t>(iy) * nx + ix]; }
  geom::Vec2 cell_center(int ix, int iy) const {
    return {origin.x + (ix + 0.5) * cell_size, origin.y + (iy + 0.5) * cell_size};
  }
  bool congruent(const Rem& o) const {
    return nx == o.nx && ny == o.ny && cell_size == o.cell_size && origin == o.origin;
  }
  // Bilinear interpolation between cell centers, clamped at the border band.
  double bilinear(const geom::Vec2& pos) const;
};

struct RssSample {
  geom::Vec2 position;
  std::string transmitter_id;
  double rss_dbm = 0.0;
  double t = 0.0;
};

using RssSampleSet = std::vector<RssSample>;

// pl0 + 10*n*log10(d/d0), with d clamped below at d_min when clamping is on.
double path_loss_log_distance(double d_m, const PropagationParams& p);

// Log-distance loss plus the penetration loss of every wall the open
// segment (tx, rx) crosses. Symmetric in tx and rx.
double path_loss_motley_keenan(const geom::Vec2& tx, const geom::Vec2& rx,
                               const factory::FactoryLayout& layout,
                               const PropagationParams& p);

// Expected RSS at every cell center: tx_power - motley_keenan loss.
Rem build_model_rem(const factory::FactoryLayout& layout, const std::string& transmitter_id,
                    const geom::Vec2& tx_pos, const PropagationParams& p, double cell_size,
                    Exec exec = Exec::parallel);

// Inverse-distance-weighted interpolation of this transmitter's samples.
// A cell center within 1e-9 m of a sample takes that sample's value exactly.
Rem build_measured_rem(const RssSampleSet& samples, const std::string& transmitter_id,
                       const factory::FactoryLayout& layout, double cell_size,
                       double idw_power = 2.0, Exec exec = Exec::parallel);

// Convex per-cell blend w*measured + (1-w)*model with
// w = exp(-d_near^2 / (2*bandwidth^2)), d_near = distance to the nearest
// measurement. Grids must be congruent.
Rem fuse_rem(const Rem& model, const Rem& measured, const RssSampleSet& samples,
             double bandwidth_m, Exec exec = Exec::parallel);

struct ShadowingParams {
  double sigma_db = 0.0;               // log-normal shadowing std
  double decorrelation_distance_m = 5.0;
  double fast_fading_sigma_db = 0.0;   // i.i.d. per-sample term
};

// Gauss-Markov shadowing state along one device's path towards one
// transmitter. A fresh state yields an independent N(0, sigma) draw.
struct ShadowingState {
  bool initialized = false;
  geom::Vec2 last_pos;
  double last_shadow_db = 0.0;
};

// Advances the Gauss-Markov state to pos and returns the combined shadowing
// plus fast-fading term in dB. A fresh state yields an independent N(0, sigma)
// draw; rho = exp(-step distance / decorrelation distance).
double advance_shadowing(ShadowingState& state, const geom::Vec2& pos, sim::RngStream& rng,
                         const ShadowingParams& p);

// Bilinear REM value plus spatially correlated shadowing plus fast fading.
// Deterministic given the stream state; throws if pos is outside the grid.
double sample_rss(const Rem& rem, const geom::Vec2& pos, ShadowingState& state,
                  sim::RngStream& rng, const ShadowingParams& p);

// CSV export: header row carries origin and cell size, then row-major values.
std::string rem_to_csv(const Rem& rem);

}  // namespace fabricnet::radio
