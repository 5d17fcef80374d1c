#include "fabricnet/predict.hpp"

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <limits>
#include <numeric>
#include <stdexcept>
#include <utility>

#include "fabricnet/linalg.hpp"

namespace fabricnet::predict {
namespace {

constexpr double kTimeEps = 1e-9;

double mean_of(std::span<const double> v) {
  if (v.empty()) return 0.0;
  return std::accumulate(v.begin(), v.end(), 0.0) / static_cast<double>(v.size());
}

double population_std(std::span<const double> v, double mean) {
  if (v.size() < 2) return 0.0;
  double acc = 0.0;
  for (double x : v) acc += (x - mean) * (x - mean);
  return std::sqrt(acc / static_cast<double>(v.size()));
}

}  // namespace

double feature_distance2(double qx, double qy, int qphase, const TrainingPoint& p,
                         const FeatureScales& scales, int phase_count) {
  const double dx = (qx - p.x) / scales.x;
  const double dy = (qy - p.y) / scales.y;
  double dp = std::abs(static_cast<double>(qphase - p.phase));
  if (phase_count > 0) dp = std::min(dp, static_cast<double>(phase_count) - dp);
  dp /= scales.phase;
  return dx * dx + dy * dy + dp * dp;
}

Prediction predict_reactive(const PredictorQuery& query) {
  if (query.recent.empty())
    throw std::invalid_argument("predict_reactive: recent trace is empty");
  return {query.recent.back().ul_bps, 0.0, query.horizon_s};
}

Prediction predict_oracle(std::span<const TraceSample> future_trace, double t, double horizon_s) {
  if (horizon_s <= 0.0) throw std::invalid_argument("predict_oracle: horizon must be > 0");
  if (future_trace.empty() || future_trace.front().t > t + kTimeEps ||
      future_trace.back().t < t + horizon_s - kTimeEps)
    throw std::invalid_argument("predict_oracle: trace does not cover the horizon");

  double lo = std::numeric_limits<double>::infinity();
  for (const TraceSample& s : future_trace) {
    if (s.t < t - kTimeEps) continue;
    if (s.t > t + horizon_s + kTimeEps) break;
    lo = std::min(lo, s.ul_bps);
  }
  return {lo, 0.0, horizon_s};
}

KnnModel knn_fit(TrainingSet train, int k, const FeatureScales& scales, int phase_count,
                 double margin_z) {
  if (k < 1) throw std::invalid_argument("knn_fit: k must be >= 1");
  if (static_cast<std::size_t>(k) > train.size())
    throw std::invalid_argument("knn_fit: k exceeds training set size");
  if (scales.x <= 0.0 || scales.y <= 0.0 || scales.phase <= 0.0)
    throw std::invalid_argument("knn_fit: feature scales must be > 0");
  KnnModel m;
  m.k = k;
  m.scales = scales;
  m.phase_count = phase_count;
  m.margin_z = margin_z;
  m.train = std::move(train);
  return m;
}

Prediction knn_predict(const KnnModel& model, const PredictorQuery& query) {
  const std::size_t n = model.train.size();
  if (n == 0) throw std::invalid_argument("knn_predict: empty model");
  const std::size_t k = static_cast<std::size_t>(model.k);

  std::vector<std::pair<double, std::size_t>> dist(n);
  for (std::size_t i = 0; i < n; ++i)
    dist[i] = {feature_distance2(query.x, query.y, query.phase, model.train[i], model.scales,
                                 model.phase_count),
               i};
  std::partial_sort(dist.begin(), dist.begin() + k, dist.end());

  std::vector<double> labels(k);
  for (std::size_t i = 0; i < k; ++i) labels[i] = model.train[dist[i].second].label_bps;
  const double mean = mean_of(labels);
  const double spread = population_std(labels, mean);
  return {mean, model.margin_z * spread, query.horizon_s};
}

double RegressionTree::predict(double x, double y, double phase) const {
  int id = 0;
  const double feat[3] = {x, y, phase};
  while (nodes[static_cast<std::size_t>(id)].feature >= 0) {
    const TreeNode& nd = nodes[static_cast<std::size_t>(id)];
    id = feat[nd.feature] <= nd.threshold ? nd.left : nd.right;
  }
  return nodes[static_cast<std::size_t>(id)].value;
}

namespace {

double point_feature(const TrainingPoint& p, int f) {
  switch (f) {
    case 0: return p.x;
    case 1: return p.y;
    default: return static_cast<double>(p.phase);
  }
}

struct TreeBuilder {
  const TrainingSet& train;
  int max_depth;  // < 0 means unlimited
  std::vector<TreeNode> nodes;

  int build(std::vector<std::size_t>& idx, std::size_t lo, std::size_t hi, int depth) {
    const std::size_t n = hi - lo;
    double sum = 0.0, sumsq = 0.0;
    for (std::size_t i = lo; i < hi; ++i) {
      const double v = train[idx[i]].label_bps;
      sum += v;
      sumsq += v * v;
    }
    const double mean = sum / static_cast<double>(n);
    const double sse_total = sumsq - sum * sum / static_cast<double>(n);

    const int id = static_cast<int>(nodes.size());
    nodes.push_back({-1, 0.0, -1, -1, mean});
    if (n < 2 || (max_depth >= 0 && depth >= max_depth)) return id;

    int best_f = -1;
    double best_thr = 0.0;
    double best_gain = 1e-12;
    std::vector<std::pair<double, double>> vals;  // (feature value, label)
    vals.reserve(n);
    for (int f = 0; f < 3; ++f) {
      vals.clear();
      for (std::size_t i = lo; i < hi; ++i)
        vals.emplace_back(point_feature(train[idx[i]], f), train[idx[i]].label_bps);
      std::sort(vals.begin(), vals.end());
      double lsum = 0.0, lsq = 0.0;
      for (std::size_t i = 1; i < n; ++i) {
        lsum += vals[i - 1].second;
        lsq += vals[i - 1].second * vals[i - 1].second;
        if (!(vals[i - 1].first < vals[i].first)) continue;
        const double nl = static_cast<double>(i);
        const double nr = static_cast<double>(n - i);
        const double rsum = sum - lsum;
        const double rsq = sumsq - lsq;
        const double sse_l = lsq - lsum * lsum / nl;
        const double sse_r = rsq - rsum * rsum / nr;
        const double gain = sse_total - sse_l - sse_r;
        if (gain > best_gain) {
          best_gain = gain;
          best_f = f;
          best_thr = vals[i - 1].first;
        }
      }
    }
    if (best_f < 0) return id;

    const auto mid = std::stable_partition(
        idx.begin() + static_cast<std::ptrdiff_t>(lo), idx.begin() + static_cast<std::ptrdiff_t>(hi),
        [&](std::size_t j) { return point_feature(train[j], best_f) <= best_thr; });
    const std::size_t split = static_cast<std::size_t>(mid - idx.begin());
    nodes[static_cast<std::size_t>(id)].feature = best_f;
    nodes[static_cast<std::size_t>(id)].threshold = best_thr;
    const int left = build(idx, lo, split, depth + 1);
    nodes[static_cast<std::size_t>(id)].left = left;
    const int right = build(idx, split, hi, depth + 1);
    nodes[static_cast<std::size_t>(id)].right = right;
    return id;
  }
};

RegressionTree fit_one_tree(const TrainingSet& train, int max_depth, std::vector<std::size_t> idx) {
  TreeBuilder b{train, max_depth, {}};
  b.build(idx, 0, idx.size(), 0);
  return RegressionTree{std::move(b.nodes)};
}

}  // namespace

ForestModel forest_fit(const TrainingSet& train, int trees, int max_depth,
                       const sim::RngStream& rng, double margin_z, Exec exec) {
  if (train.size() < 2) throw std::invalid_argument("forest_fit: need at least 2 training points");
  if (trees < 1) throw std::invalid_argument("forest_fit: need at least 1 tree");

  ForestModel model;
  model.margin_z = margin_z;
  {
    double acc = 0.0;
    for (const TrainingPoint& p : train) acc += p.label_bps;
    model.global_mean = acc / static_cast<double>(train.size());
  }
  const TrainingPoint& first = train.front();
  model.degenerate =
      std::all_of(train.begin(), train.end(), [&](const TrainingPoint& p) {
        return p.x == first.x && p.y == first.y && p.phase == first.phase;
      });
  if (model.degenerate) return model;

  const std::size_t n = train.size();
  model.trees.resize(static_cast<std::size_t>(trees));

  auto fit_tree = [&](int t) {
    std::vector<std::size_t> idx(n);
    if (trees == 1) {
      std::iota(idx.begin(), idx.end(), std::size_t{0});
    } else {
      sim::RngStream boot = rng.substream(static_cast<std::uint64_t>(t));
      for (std::size_t i = 0; i < n; ++i)
        idx[i] = static_cast<std::size_t>(boot.uniform_int(n));
    }
    model.trees[static_cast<std::size_t>(t)] = fit_one_tree(train, max_depth, std::move(idx));
  };

  if (exec == Exec::parallel) {
#pragma omp parallel for schedule(static)
    for (int t = 0; t < trees; ++t) fit_tree(t);
  } else {
    for (int t = 0; t < trees; ++t) fit_tree(t);
  }
  return model;
}

Prediction forest_predict(const ForestModel& model, const PredictorQuery& query) {
  if (model.degenerate) return {model.global_mean, 0.0, query.horizon_s};
  if (model.trees.empty()) throw std::invalid_argument("forest_predict: empty model");
  std::vector<double> outs(model.trees.size());
  for (std::size_t i = 0; i < model.trees.size(); ++i)
    outs[i] = model.trees[i].predict(query.x, query.y, static_cast<double>(query.phase));
  const double mean = mean_of(outs);
  const double spread = population_std(outs, mean);
  return {mean, model.margin_z * spread, query.horizon_s};
}

ArModel ar_fit(std::span<const double> series, int order) {
  if (order < 0) throw std::invalid_argument("ar_fit: order must be >= 0");
  const std::size_t n = series.size();
  if (n <= static_cast<std::size_t>(order))
    throw std::invalid_argument("ar_fit: series shorter than order + 1");

  const double series_mean = mean_of(series);
  auto ar0 = [&] {
    ArModel m;
    m.intercept = series_mean;
    m.residual_std = population_std(series, series_mean);
    m.order = 0;
    return m;
  };
  if (order == 0) return ar0();

  const std::size_t p = static_cast<std::size_t>(order);
  const std::size_t dim = p + 1;  // intercept + p lags
  const std::size_t rows = n - p;
  std::vector<double> ata(dim * dim, 0.0);
  std::vector<double> atb(dim, 0.0);
  std::vector<double> row(dim);
  for (std::size_t r = 0; r < rows; ++r) {
    const std::size_t t = r + p;
    row[0] = 1.0;
    for (std::size_t j = 0; j < p; ++j) row[j + 1] = series[t - 1 - j];
    for (std::size_t a = 0; a < dim; ++a) {
      atb[a] += row[a] * series[t];
      for (std::size_t b = 0; b < dim; ++b) ata[a * dim + b] += row[a] * row[b];
    }
  }

  std::vector<double> coef;
  if (!linalg::solve(std::move(ata), std::move(atb), dim, coef)) return ar0();

  ArModel m;
  m.intercept = coef[0];
  m.coeffs.assign(coef.begin() + 1, coef.end());
  m.order = order;
  double sse = 0.0;
  for (std::size_t r = 0; r < rows; ++r) {
    const std::size_t t = r + p;
    double yhat = m.intercept;
    for (std::size_t j = 0; j < p; ++j) yhat += m.coeffs[j] * series[t - 1 - j];
    const double e = series[t] - yhat;
    sse += e * e;
  }
  m.residual_std = std::sqrt(sse / static_cast<double>(rows));
  return m;
}

Prediction ar_predict(const ArModel& model, std::span<const double> recent, int steps,
                      double margin_z, double horizon_s) {
  if (steps < 1) throw std::invalid_argument("ar_predict: steps must be >= 1");
  const std::size_t p = static_cast<std::size_t>(model.order);
  if (recent.size() < p)
    throw std::invalid_argument("ar_predict: recent shorter than model order");

  std::vector<double> window(recent.end() - static_cast<std::ptrdiff_t>(p), recent.end());
  double lo = std::numeric_limits<double>::infinity();
  for (int s = 0; s < steps; ++s) {
    double yhat = model.intercept;
    for (std::size_t j = 0; j < p; ++j) yhat += model.coeffs[j] * window[window.size() - 1 - j];
    lo = std::min(lo, yhat);
    if (p > 0) {
      window.erase(window.begin());
      window.push_back(yhat);
    }
  }
  return {lo, margin_z * model.residual_std, horizon_s};
}

StalenessMonitor::StalenessMonitor(double train_residual_std, std::size_t window,
                                   double stale_factor)
    : threshold_(stale_factor * train_residual_std), window_(window) {
  if (window_ == 0) throw std::invalid_argument("StalenessMonitor: window must be >= 1");
  errors_.assign(window_, 0.0);
}

void StalenessMonitor::record(double predicted, double actual) {
  errors_[next_] = std::fabs(predicted - actual);
  next_ = (next_ + 1) % window_;
  if (next_ == 0) full_ = true;
}

bool StalenessMonitor::stale() const { return full_ && rolling_mae() > threshold_; }

double StalenessMonitor::rolling_mae() const {
  const std::size_t count = full_ ? window_ : next_;
  if (count == 0) return 0.0;
  double acc = 0.0;
  for (std::size_t i = 0; i < count; ++i) acc += errors_[i];
  return acc / static_cast<double>(count);
}

}  // namespace fabricnet::predict
