#include "fabricnet/locate.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <utility>

#include "fabricnet/linalg.hpp"

#ifdef _OPENMP
#include <omp.h>
#endif

namespace fabricnet::locate {
namespace {

double quantile_sorted(const std::vector<double>& sorted, double q) {
  const std::size_t n = sorted.size();
  if (n == 0) return 0.0;
  const auto rank = static_cast<std::size_t>(std::ceil(q * n));
  return sorted[std::min(n - 1, rank == 0 ? 0 : rank - 1)];
}

double median_sorted(const std::vector<double>& sorted) {
  const std::size_t n = sorted.size();
  if (n == 0) return 0.0;
  if (n % 2 == 1) return sorted[n / 2];
  return 0.5 * (sorted[n / 2 - 1] + sorted[n / 2]);
}

}  // namespace

FingerprintDb build_fingerprint_db(std::span<const radio::Rem> rems, int grid_stride) {
  if (rems.empty()) throw std::invalid_argument("build_fingerprint_db: no REMs");
  if (grid_stride < 1) throw std::invalid_argument("build_fingerprint_db: stride must be >= 1");
  for (const radio::Rem& r : rems) {
    if (!r.congruent(rems[0]))
      throw std::invalid_argument("build_fingerprint_db: REM grids are not congruent");
  }

  FingerprintDb db;
  for (const radio::Rem& r : rems) db.transmitter_ids.push_back(r.transmitter_id);
  for (int iy = 0; iy < rems[0].ny; iy += grid_stride) {
    for (int ix = 0; ix < rems[0].nx; ix += grid_stride) {
      FingerprintEntry e;
      e.position = rems[0].cell_center(ix, iy);
      e.rss_dbm.reserve(rems.size());
      for (const radio::Rem& r : rems) e.rss_dbm.push_back(r.at(ix, iy));
      db.entries.push_back(std::move(e));
    }
  }
  return db;
}

PositionEstimate fingerprint_knn(const FingerprintDb& db, std::span<const double> observed,
                                 int k) {
  if (k < 1) throw std::invalid_argument("fingerprint_knn: k must be >= 1");
  if (static_cast<std::size_t>(k) > db.entries.size())
    throw std::invalid_argument("fingerprint_knn: k exceeds database size");
  for (const FingerprintEntry& e : db.entries) {
    if (e.rss_dbm.size() != observed.size())
      throw std::invalid_argument("fingerprint_knn: observed vector length mismatch");
  }

  std::vector<std::pair<double, std::size_t>> dist;
  dist.reserve(db.entries.size());
  for (std::size_t i = 0; i < db.entries.size(); ++i) {
    double d2 = 0.0;
    for (std::size_t j = 0; j < observed.size(); ++j) {
      const double d = observed[j] - db.entries[i].rss_dbm[j];
      d2 += d * d;
    }
    dist.emplace_back(d2, i);
  }
  std::partial_sort(dist.begin(), dist.begin() + k, dist.end());

  constexpr double kZero = 1e-24;
  if (dist[0].first <= kZero)
    return {db.entries[dist[0].second].position, "fingerprint_knn"};

  double wsum = 0.0;
  geom::Vec2 centroid{0.0, 0.0};
  for (int i = 0; i < k; ++i) {
    const double w = 1.0 / std::sqrt(dist[static_cast<std::size_t>(i)].first);
    centroid = centroid + db.entries[dist[static_cast<std::size_t>(i)].second].position * w;
    wsum += w;
  }
  return {centroid * (1.0 / wsum), "fingerprint_knn"};
}

double rss_to_distance(double rss_dbm, const radio::PropagationParams& p,
                       double max_distance_m) {
  const double d = p.d0_m * std::pow(10.0, (p.tx_power_dbm - rss_dbm - p.pl0_db) /
                                               (10.0 * p.exponent));
  return std::clamp(d, std::max(p.d_min_m, 0.0), max_distance_m);
}

PositionEstimate trilaterate(std::span<const geom::Vec2> anchors,
                             std::span<const double> distances, const geom::Rect& bounds) {
  if (anchors.size() != distances.size())
    throw std::invalid_argument("trilaterate: one distance per anchor required");
  if (anchors.size() < 3) throw std::invalid_argument("trilaterate: need at least 3 anchors");

  const geom::Vec2 a0 = anchors[0];
  const double d0 = distances[0];
  double ata[4] = {0.0, 0.0, 0.0, 0.0};
  double atb[2] = {0.0, 0.0};
  for (std::size_t i = 1; i < anchors.size(); ++i) {
    const double ax = 2.0 * (anchors[i].x - a0.x);
    const double ay = 2.0 * (anchors[i].y - a0.y);
    const double b = d0 * d0 - distances[i] * distances[i] + anchors[i].x * anchors[i].x -
                     a0.x * a0.x + anchors[i].y * anchors[i].y - a0.y * a0.y;
    ata[0] += ax * ax;
    ata[1] += ax * ay;
    ata[2] += ay * ax;
    ata[3] += ay * ay;
    atb[0] += ax * b;
    atb[1] += ay * b;
  }
  std::vector<double> a(ata, ata + 4);
  std::vector<double> rhs(atb, atb + 2);
  std::vector<double> x;
  if (!linalg::solve(std::move(a), std::move(rhs), 2, x))
    throw std::runtime_error("trilaterate: rank-deficient anchor geometry (collinear anchors)");
  return {bounds.clamp({x[0], x[1]}), "trilateration"};
}

PositioningResult evaluate_positioning(const LocateScenario& sc,
                                       std::span<const MethodSpec> methods, int n_queries,
                                       double noise_sigma_db, std::uint64_t seed, Exec exec) {
  if (methods.empty()) throw std::invalid_argument("evaluate_positioning: no methods");
  if (n_queries < 1) throw std::invalid_argument("evaluate_positioning: need >= 1 query");
  if (sc.tx_positions.empty())
    throw std::invalid_argument("evaluate_positioning: no transmitters");

  std::vector<radio::Rem> rems;
  rems.reserve(sc.tx_positions.size());
  for (std::size_t i = 0; i < sc.tx_positions.size(); ++i) {
    rems.push_back(radio::build_model_rem(sc.layout, "tx" + std::to_string(i),
                                          sc.tx_positions[i], sc.prop, sc.cell_size_m, exec));
  }
  const FingerprintDb db = build_fingerprint_db(rems, sc.db_stride);

  std::vector<std::string> labels;
  for (const MethodSpec& m : methods) {
    if (!m.label.empty()) {
      labels.push_back(m.label);
    } else if (m.kind == MethodKind::trilateration) {
      labels.push_back("trilateration");
    } else {
      labels.push_back("knn" + std::to_string(m.k));
    }
    if (m.kind == MethodKind::trilateration && sc.tx_positions.size() < 3)
      throw std::invalid_argument("evaluate_positioning: trilateration needs >= 3 transmitters");
    if (m.kind == MethodKind::fingerprint_knn &&
        (m.k < 1 || static_cast<std::size_t>(m.k) > db.entries.size()))
      throw std::invalid_argument("evaluate_positioning: k out of range for the database");
  }

  const double diag = sc.layout.bounds.diagonal();
  const sim::RngStream root(seed, "locate/queries");
  const std::size_t n_methods = methods.size();
  std::vector<ErrorSample> samples(static_cast<std::size_t>(n_queries) * n_methods);

  auto run_query = [&](int q) {
    sim::RngStream rng = root.substream(static_cast<std::uint64_t>(q));
    const geom::Vec2 truth{sc.layout.bounds.lo.x + rng.uniform01() * sc.layout.bounds.width(),
                           sc.layout.bounds.lo.y + rng.uniform01() * sc.layout.bounds.height()};
    std::vector<double> observed(sc.tx_positions.size());
    for (std::size_t j = 0; j < sc.tx_positions.size(); ++j) {
      const double rss = sc.prop.tx_power_dbm - radio::path_loss_motley_keenan(
                                                    sc.tx_positions[j], truth, sc.layout,
                                                    sc.prop);
      observed[j] = rss + (noise_sigma_db > 0.0 ? rng.gaussian(0.0, noise_sigma_db) : 0.0);
    }
    for (std::size_t m = 0; m < n_methods; ++m) {
      PositionEstimate est;
      if (methods[m].kind == MethodKind::trilateration) {
        std::vector<double> dists(observed.size());
        for (std::size_t j = 0; j < observed.size(); ++j)
          dists[j] = rss_to_distance(observed[j], sc.prop, diag);
        est = trilaterate(sc.tx_positions, dists, sc.layout.bounds);
      } else {
        est = fingerprint_knn(db, observed, methods[m].k);
      }
      ErrorSample& out = samples[m * static_cast<std::size_t>(n_queries) +
                                 static_cast<std::size_t>(q)];
      out.method = labels[m];
      out.truth = truth;
      out.estimate = est.position;
      out.error_m = geom::distance(truth, est.position);
    }
  };

  if (exec == Exec::parallel) {
#pragma omp parallel for schedule(static)
    for (int q = 0; q < n_queries; ++q) run_query(q);
  } else {
    for (int q = 0; q < n_queries; ++q) run_query(q);
  }

  PositioningResult res;
  res.samples = std::move(samples);
  for (std::size_t m = 0; m < n_methods; ++m) {
    std::vector<double> errs;
    errs.reserve(static_cast<std::size_t>(n_queries));
    for (int q = 0; q < n_queries; ++q)
      errs.push_back(res.samples[m * static_cast<std::size_t>(n_queries) +
                                 static_cast<std::size_t>(q)]
                         .error_m);
    std::sort(errs.begin(), errs.end());
    double mean = 0.0;
    for (double e : errs) mean += e;
    mean /= static_cast<double>(errs.size());
    res.summary.push_back({labels[m], mean, median_sorted(errs), quantile_sorted(errs, 0.9)});
  }
  return res;
}

}  // namespace fabricnet::locate
