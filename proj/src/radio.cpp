#include "fabricnet/radio.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <limits>
#include <stdexcept>

namespace fabricnet::radio {

namespace {

int grid_cells(double extent, double cell_size) {
  return std::max(1, static_cast<int>(std::ceil(extent / cell_size - 1e-9)));
}

}  // namespace

double Rem::bilinear(const geom::Vec2& pos) const {
  if (nx == 1 && ny == 1) return values[0];
  const double gx = (pos.x - origin.x) / cell_size - 0.5;
  const double gy = (pos.y - origin.y) / cell_size - 0.5;
  const int ix0 = std::clamp(static_cast<int>(std::floor(gx)), 0, nx - (nx > 1 ? 2 : 1));
  const int iy0 = std::clamp(static_cast<int>(std::floor(gy)), 0, ny - (ny > 1 ? 2 : 1));
  const int ix1 = std::min(ix0 + 1, nx - 1);
  const int iy1 = std::min(iy0 + 1, ny - 1);
  const double fx = std::clamp(gx - ix0, 0.0, 1.0);
  const double fy = std::clamp(gy - iy0, 0.0, 1.0);
  const double v00 = at(ix0, iy0);
  const double v10 = at(ix1, iy0);
  const double v01 = at(ix0, iy1);
  const double v11 = at(ix1, iy1);
  return v00 * (1 - fx) * (1 - fy) + v10 * fx * (1 - fy) + v01 * (1 - fx) * fy + v11 * fx * fy;
}

double path_loss_log_distance(double d_m, const PropagationParams& p) {
  double d = d_m;
  if (p.d_min_m > 0.0) {
    d = std::max(d, p.d_min_m);
  } else if (d <= 0.0) {
    throw std::invalid_argument("path_loss_log_distance: d must be > 0 with clamping disabled");
  }
  return p.pl0_db + 10.0 * p.exponent * std::log10(d / p.d0_m);
}

double path_loss_motley_keenan(const geom::Vec2& tx, const geom::Vec2& rx,
                               const factory::FactoryLayout& layout,
                               const PropagationParams& p) {
  double loss = path_loss_log_distance(geom::distance(tx, rx), p);
  for (const factory::Wall& w : layout.walls) {
    if (geom::segment_crosses_wall(tx, rx, w.a, w.b)) loss += w.penetration_loss_db;
  }
  return loss;
}

Rem build_model_rem(const factory::FactoryLayout& layout, const std::string& transmitter_id,
                    const geom::Vec2& tx_pos, const PropagationParams& p, double cell_size,
                    Exec exec) {
  if (cell_size <= 0.0) throw std::invalid_argument("build_model_rem: cell_size must be > 0");
  Rem rem;
  rem.transmitter_id = transmitter_id;
  rem.origin = layout.bounds.lo;
  rem.cell_size = cell_size;
  rem.nx = grid_cells(layout.bounds.width(), cell_size);
  rem.ny = grid_cells(layout.bounds.height(), cell_size);
  rem.values.resize(static_cast<std::size_t>(rem.nx) * rem.ny);

  auto cell_value = [&](int ix, int iy) {
    return p.tx_power_dbm - path_loss_motley_keenan(tx_pos, rem.cell_center(ix, iy), layout, p);
  };

  if (exec == Exec::parallel) {
#pragma omp parallel for schedule(static)
    for (int iy = 0; iy < rem.ny; ++iy) {
      for (int ix = 0; ix < rem.nx; ++ix) rem.at(ix, iy) = cell_value(ix, iy);
    }
  } else {
    for (int iy = 0; iy < rem.ny; ++iy) {
      for (int ix = 0; ix < rem.nx; ++ix) rem.at(ix, iy) = cell_value(ix, iy);
    }
  }
  return rem;
}

Rem build_measured_rem(const RssSampleSet& samples, const std::string& transmitter_id,
                       const factory::FactoryLayout& layout, double cell_size,
                       double idw_power, Exec exec) {
  std::vector<const RssSample*> own;
  for (const RssSample& s : samples) {
    if (s.transmitter_id == transmitter_id) own.push_back(&s);
  }
  if (own.empty()) {
    throw std::invalid_argument("build_measured_rem: no samples for transmitter " + transmitter_id);
  }

  Rem rem;
  rem.transmitter_id = transmitter_id;
  rem.origin = layout.bounds.lo;
  rem.cell_size = cell_size;
  rem.nx = grid_cells(layout.bounds.width(), cell_size);
  rem.ny = grid_cells(layout.bounds.height(), cell_size);
  rem.values.resize(static_cast<std::size_t>(rem.nx) * rem.ny);

  auto cell_value = [&](int ix, int iy) {
    const geom::Vec2 c = rem.cell_center(ix, iy);
    double wsum = 0.0;
    double vsum = 0.0;
    for (const RssSample* s : own) {
      const double d = geom::distance(c, s->position);
      if (d <= 1e-9) return s->rss_dbm;  // exactness convention at sample points
      const double w = 1.0 / std::pow(d, idw_power);
      wsum += w;
      vsum += w * s->rss_dbm;
    }
    return vsum / wsum;
  };

  if (exec == Exec::parallel) {
#pragma omp parallel for schedule(static)
    for (int iy = 0; iy < rem.ny; ++iy) {
      for (int ix = 0; ix < rem.nx; ++ix) rem.at(ix, iy) = cell_value(ix, iy);
    }
  } else {
    for (int iy = 0; iy < rem.ny; ++iy) {
      for (int ix = 0; ix < rem.nx; ++ix) rem.at(ix, iy) = cell_value(ix, iy);
    }
  }
  return rem;
}

Rem fuse_rem(const Rem& model, const Rem& measured, const RssSampleSet& samples,
             double bandwidth_m, Exec exec) {
  if (!model.congruent(measured)) throw std::invalid_argument("fuse_rem: grid mismatch");
  if (bandwidth_m <= 0.0) throw std::invalid_argument("fuse_rem: bandwidth must be > 0");

  Rem fused = model;
  fused.transmitter_id = model.transmitter_id;

  auto cell_value = [&](int ix, int iy) {
    const geom::Vec2 c = fused.cell_center(ix, iy);
    double d2_near = std::numeric_limits<double>::infinity();
    for (const RssSample& s : samples) {
      if (s.transmitter_id != model.transmitter_id) continue;
      const geom::Vec2 d = c - s.position;
      d2_near = std::min(d2_near, geom::dot(d, d));
    }
    const double w =
        std::isinf(d2_near) ? 0.0 : std::exp(-d2_near / (2.0 * bandwidth_m * bandwidth_m));
    return w * measured.at(ix, iy) + (1.0 - w) * model.at(ix, iy);
  };

  if (exec == Exec::parallel) {
#pragma omp parallel for schedule(static)
    for (int iy = 0; iy < fused.ny; ++iy) {
      for (int ix = 0; ix < fused.nx; ++ix) fused.at(ix, iy) = cell_value(ix, iy);
    }
  } else {
    for (int iy = 0; iy < fused.ny; ++iy) {
      for (int ix = 0; ix < fused.nx; ++ix) fused.at(ix, iy) = cell_value(ix, iy);
    }
  }
  return fused;
}

double advance_shadowing(ShadowingState& state, const geom::Vec2& pos, sim::RngStream& rng,
                         const ShadowingParams& p) {
  double shadow = 0.0;
  if (p.sigma_db > 0.0) {
    const double g = rng.gaussian();
    if (!state.initialized) {
      shadow = p.sigma_db * g;
    } else {
      const double rho =
          std::exp(-geom::distance(pos, state.last_pos) / p.decorrelation_distance_m);
      shadow = rho * state.last_shadow_db + p.sigma_db * std::sqrt(1.0 - rho * rho) * g;
    }
  }
  state.initialized = true;
  state.last_pos = pos;
  state.last_shadow_db = shadow;

  double fading = 0.0;
  if (p.fast_fading_sigma_db > 0.0) fading = p.fast_fading_sigma_db * rng.gaussian();
  return shadow + fading;
}

double sample_rss(const Rem& rem, const geom::Vec2& pos, ShadowingState& state,
                  sim::RngStream& rng, const ShadowingParams& p) {
  const geom::Vec2 lo = rem.origin;
  const geom::Vec2 hi = {rem.origin.x + rem.nx * rem.cell_size,
                         rem.origin.y + rem.ny * rem.cell_size};
  if (pos.x < lo.x || pos.x > hi.x || pos.y < lo.y || pos.y > hi.y) {
    throw std::invalid_argument("sample_rss: position outside REM grid");
  }
  return rem.bilinear(pos) + advance_shadowing(state, pos, rng, p);
}

std::string rem_to_csv(const Rem& rem) {
  char buf[64];
  std::string out;
  std::snprintf(buf, sizeof(buf), "# rem,%s,origin,%.9g,%.9g,cell_size,%.9g,nx,%d,ny,%d\n",
                rem.transmitter_id.c_str(), rem.origin.x, rem.origin.y, rem.cell_size, rem.nx,
                rem.ny);
  out += buf;
  for (int iy = 0; iy < rem.ny; ++iy) {
    for (int ix = 0; ix < rem.nx; ++ix) {
      std::snprintf(buf, sizeof(buf), "%.9g", rem.at(ix, iy));
      out += buf;
      out += (ix + 1 == rem.nx) ? '\n' : ',';
    }
  }
  return out;
}

}  // namespace fabricnet::radio
