#pragma once

#include <memory>
#include <span>
#include <string>
#include <vector>

#include "fabricnet/parallel.hpp"
#include "fabricnet/rng.hpp"

namespace fabricnet::predict {

// One point of the uplink-throughput trace the predictors consume.
struct TraceSample {
  double t = 0.0;
  double x = 0.0;
  double y = 0.0;
  int phase = 0;
  double ul_bps = 0.0;
};

struct PredictorQuery {
  double x = 0.0;
  double y = 0.0;
  int phase = 0;
  std::span<const TraceSample> recent;
  double horizon_s = 1.0;
};

struct Prediction {
  double mean_bps = 0.0;    // predicted minimum throughput over the horizon
  double margin_bps = 0.0;  // uncertainty spread, >= 0
  double horizon_s = 0.0;
};

struct TrainingPoint {
  double x = 0.0;
  double y = 0.0;
  int phase = 0;
  double label_bps = 0.0;  // realized minimum throughput over the following horizon
};

using TrainingSet = std::vector<TrainingPoint>;

struct FeatureScales {
  double x = 10.0;
  double y = 10.0;
  double phase = 1.0;
};

// Scaled squared distance with cyclic phase distance min(|a-b|, P-|a-b|).
double feature_distance2(double qx, double qy, int qphase, const TrainingPoint& p,
                         const FeatureScales& scales, int phase_count);

Prediction predict_reactive(const PredictorQuery& query);

// Exact minimum of the realized trace over [t, t+horizon]; the trace must
// cover the window.
Prediction predict_oracle(std::span<const TraceSample> future_trace, double t, double horizon_s);

struct KnnModel {
  int k = 12;
  FeatureScales scales;
  int phase_count = 1;
  double margin_z = 1.0;
  TrainingSet train;
};

KnnModel knn_fit(TrainingSet train, int k, const FeatureScales& scales, int phase_count,
                 double margin_z = 1.0);
Prediction knn_predict(const KnnModel& model, const PredictorQuery& query);

struct TreeNode {
  int feature = -1;  // -1 marks a leaf
  double threshold = 0.0;
  int left = -1;
  int right = -1;
  double value = 0.0;
};

struct RegressionTree {
  std::vector<TreeNode> nodes;
  double predict(double x, double y, double phase) const;
};

struct ForestModel {
  std::vector<RegressionTree> trees;
  double margin_z = 1.0;
  bool degenerate = false;  // all training features identical
  double global_mean = 0.0;
};

// Bagged variance-reduction regression trees on (x, y, phase). A single-tree
// forest trains on the full set instead of a bootstrap draw, so it degenerates
// to a plain regression tree. Tree t draws its bootstrap from
// rng.substream(t), which keeps the fit identical across thread counts.
ForestModel forest_fit(const TrainingSet& train, int trees, int max_depth,
                       const sim::RngStream& rng, double margin_z = 1.0,
                       Exec exec = Exec::parallel);
Prediction forest_predict(const ForestModel& model, const PredictorQuery& query);

struct ArModel {
  std::vector<double> coeffs;  // lag-1 first
  double intercept = 0.0;
  double residual_std = 0.0;
  int order = 0;
};

// Least-squares AR(p) with intercept; singular normal equations fall back to
// AR(0), i.e. the series mean.
ArModel ar_fit(std::span<const double> series, int order);
// Multi-step rollout from the tail of `recent`; mean is the minimum over the
// rolled-out steps.
Prediction ar_predict(const ArModel& model, std::span<const double> recent, int steps,
                      double margin_z = 1.0, double horizon_s = 0.0);

// Rolling-window staleness alarm: flags when the held-out mean absolute error
// exceeds stale_factor times the training residual std.
class StalenessMonitor {
 public:
  StalenessMonitor(double train_residual_std, std::size_t window = 50, double stale_factor = 2.0);
  void record(double predicted, double actual);
  bool stale() const;
  double rolling_mae() const;

 private:
  double threshold_;
  std::size_t window_;
  std::vector<double> errors_;
  std::size_t next_ = 0;
  bool full_ = false;
};

}  // namespace fabricnet::predict
