#include "fabricnet/monitor.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <stdexcept>
#include <utility>

namespace fabricnet::monitor {

std::vector<double> rescale_unit(std::span<const double> series) {
  if (series.empty()) throw std::invalid_argument("rescale_unit: empty series");
  double lo = series[0];
  double hi = series[0];
  for (double v : series) {
    if (!std::isfinite(v)) throw std::invalid_argument("rescale_unit: non-finite value");
    lo = std::min(lo, v);
    hi = std::max(hi, v);
  }
  std::vector<double> out(series.size(), 0.0);
  if (hi > lo) {
    for (std::size_t i = 0; i < series.size(); ++i)
      out[i] = 2.0 * (series[i] - lo) / (hi - lo) - 1.0;
  }
  return out;
}

GafMatrix gaf_encode(std::span<const double> series) {
  const std::vector<double> scaled = rescale_unit(series);
  std::vector<double> phi(scaled.size());
  for (std::size_t i = 0; i < scaled.size(); ++i)
    phi[i] = std::acos(std::clamp(scaled[i], -1.0, 1.0));

  GafMatrix g;
  g.n = static_cast<int>(scaled.size());
  g.values.resize(scaled.size() * scaled.size());
  for (int i = 0; i < g.n; ++i) {
    for (int j = i; j < g.n; ++j) {
      const double v = std::cos(phi[static_cast<std::size_t>(i)] +
                                phi[static_cast<std::size_t>(j)]);
      g.values[static_cast<std::size_t>(i) * g.n + j] = v;
      g.values[static_cast<std::size_t>(j) * g.n + i] = v;
    }
  }
  return g;
}

double gaf_distance(const GafMatrix& a, const GafMatrix& b) {
  if (a.n != b.n) throw std::invalid_argument("gaf_distance: dimension mismatch");
  double s = 0.0;
  for (std::size_t i = 0; i < a.values.size(); ++i) {
    const double d = a.values[i] - b.values[i];
    s += d * d;
  }
  return std::sqrt(s);
}

double estimate_remote_region(std::span<const HistoryEntry> history, const WindowSeries& query,
                              int k) {
  if (k < 1) throw std::invalid_argument("estimate_remote_region: k must be >= 1");
  if (static_cast<std::size_t>(k) > history.size())
    throw std::invalid_argument("estimate_remote_region: k exceeds history size");
  if (query.empty()) throw std::invalid_argument("estimate_remote_region: empty query window");

  std::vector<GafMatrix> query_enc;
  query_enc.reserve(query.size());
  for (const std::vector<double>& s : query) query_enc.push_back(gaf_encode(s));

  std::vector<std::pair<double, std::size_t>> dist;
  dist.reserve(history.size());
  for (std::size_t h = 0; h < history.size(); ++h) {
    if (history[h].monitored.size() != query.size())
      throw std::invalid_argument("estimate_remote_region: monitored-region arity mismatch");
    double d2 = 0.0;
    for (std::size_t r = 0; r < query.size(); ++r) {
      const double d = gaf_distance(query_enc[r], gaf_encode(history[h].monitored[r]));
      d2 += d * d;
    }
    dist.emplace_back(std::sqrt(d2), h);
  }
  std::partial_sort(dist.begin(), dist.begin() + k, dist.end());

  double mean = 0.0;
  for (int i = 0; i < k; ++i)
    mean += history[dist[static_cast<std::size_t>(i)].second].remote_load;
  return mean / k;
}

std::string gaf_to_csv(const GafMatrix& m) {
  std::string out;
  char buf[64];
  for (int i = 0; i < m.n; ++i) {
    for (int j = 0; j < m.n; ++j) {
      std::snprintf(buf, sizeof(buf), "%.9g", m.at(i, j));
      if (j) out += ',';
      out += buf;
    }
    out += '\n';
  }
  return out;
}

}  // namespace fabricnet::monitor
