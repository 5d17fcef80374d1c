#include <algorithm>
#include <cmath>
#include <random>
#include <stdexcept>
#include <vector>

#include "doctest.h"
#include "fabricnet/model_io.hpp"
#include "fabricnet/predict.hpp"
#include "fabricnet/rng.hpp"

using namespace fabricnet;
using namespace fabricnet::predict;

namespace {

std::vector<TraceSample> ramp_trace() {
  std::vector<TraceSample> trace;
  const double values[] = {40e6, 30e6, 50e6};
  for (int i = 0; i < 3; ++i) trace.push_back({0.5 * i, 0.0, 0.0, 0, values[i]});
  return trace;
}

TrainingSet random_train(int n, sim::RngStream& rng, int phase_count) {
  TrainingSet train;
  train.reserve(n);
  for (int i = 0; i < n; ++i) {
    train.push_back({rng.uniform(0.0, 50.0), rng.uniform(0.0, 40.0),
                     static_cast<int>(rng.uniform_int(phase_count)), rng.uniform(5e6, 60e6)});
  }
  return train;
}

Prediction exhaustive_knn(const KnnModel& model, const PredictorQuery& q) {
  std::vector<std::pair<double, std::size_t>> order;
  order.reserve(model.train.size());
  for (std::size_t i = 0; i < model.train.size(); ++i) {
    order.emplace_back(
        feature_distance2(q.x, q.y, q.phase, model.train[i], model.scales, model.phase_count), i);
  }
  std::sort(order.begin(), order.end());
  double sum = 0.0;
  for (int i = 0; i < model.k; ++i) sum += model.train[order[i].second].label_bps;
  const double mean = sum / model.k;
  double var = 0.0;
  for (int i = 0; i < model.k; ++i) {
    const double d = model.train[order[i].second].label_bps - mean;
    var += d * d;
  }
  Prediction p;
  p.mean_bps = mean;
  p.margin_bps = model.margin_z * std::sqrt(var / model.k);
  p.horizon_s = q.horizon_s;
  return p;
}

}  // namespace

TEST_CASE("the reactive predictor repeats the last observation") {
  const auto trace = ramp_trace();
  PredictorQuery q;
  q.recent = trace;
  q.horizon_s = 1.0;
  const Prediction p = predict_reactive(q);
  CHECK(p.mean_bps == 50e6);
  CHECK(p.margin_bps == 0.0);
  q.horizon_s = 7.0;
  CHECK(predict_reactive(q).mean_bps == 50e6);
}

TEST_CASE("the reactive predictor rejects an empty history") {
  PredictorQuery q;
  CHECK_THROWS_AS(predict_reactive(q), std::invalid_argument);
}

TEST_CASE("the oracle returns the realized minimum over the horizon") {
  const auto trace = ramp_trace();
  CHECK(predict_oracle(trace, 0.0, 1.0).mean_bps == 30e6);
  CHECK(predict_oracle(trace, 0.75, 0.25).mean_bps == 50e6);
  CHECK_THROWS_AS(predict_oracle(trace, 0.0, 0.0), std::invalid_argument);
  CHECK(predict_oracle(trace, 0.0, 1.0).margin_bps == 0.0);
}

TEST_CASE("the oracle never exceeds any realized value in the window") {
  sim::RngStream rng(31, "oracle");
  std::vector<TraceSample> trace;
  for (int i = 0; i < 200; ++i) trace.push_back({0.1 * i, 0.0, 0.0, 0, rng.uniform(1e6, 9e7)});
  const Prediction p = predict_oracle(trace, 4.0, 3.0);
  for (const TraceSample& s : trace) {
    if (s.t >= 4.0 && s.t <= 7.0) CHECK(p.mean_bps <= s.ul_bps);
  }
}

TEST_CASE("the oracle rejects a window the trace does not cover") {
  const auto trace = ramp_trace();
  CHECK_THROWS_AS(predict_oracle(trace, 0.5, 5.0), std::invalid_argument);
}

TEST_CASE("phase distance wraps around the cycle") {
  TrainingPoint p;
  p.phase = 19;
  const FeatureScales unit{1.0, 1.0, 1.0};
  CHECK(feature_distance2(0.0, 0.0, 0, p, unit, 20) == doctest::Approx(1.0));
  CHECK(feature_distance2(0.0, 0.0, 10, p, unit, 20) == doctest::Approx(81.0));
}

TEST_CASE("a query on a training point with k=1 returns its label") {
  TrainingSet train = {{3.0, 4.0, 2, 20e6}, {30.0, 20.0, 5, 50e6}};
  const KnnModel model = knn_fit(train, 1, FeatureScales{}, 20);
  PredictorQuery q;
  q.x = 3.0;
  q.y = 4.0;
  q.phase = 2;
  const Prediction p = knn_predict(model, q);
  CHECK(p.mean_bps == 20e6);
  CHECK(p.margin_bps == 0.0);
}

TEST_CASE("two equidistant neighbors average and spread") {
  TrainingSet train = {{1.0, 0.0, 0, 10.0}, {-1.0, 0.0, 0, 20.0}};
  const KnnModel model = knn_fit(train, 2, FeatureScales{1.0, 1.0, 1.0}, 1, 2.0);
  PredictorQuery q;
  const Prediction p = knn_predict(model, q);
  CHECK(p.mean_bps == doctest::Approx(15.0));
  CHECK(p.margin_bps == doctest::Approx(2.0 * 5.0));
}

TEST_CASE("knn predictions stay inside the label range") {
  sim::RngStream rng(12, "knn-range");
  const TrainingSet train = random_train(120, rng, 20);
  double lo = train[0].label_bps, hi = train[0].label_bps;
  for (const TrainingPoint& p : train) {
    lo = std::min(lo, p.label_bps);
    hi = std::max(hi, p.label_bps);
  }
  const KnnModel model = knn_fit(train, 12, FeatureScales{}, 20);
  for (int i = 0; i < 50; ++i) {
    PredictorQuery q;
    q.x = rng.uniform(-5.0, 55.0);
    q.y = rng.uniform(-5.0, 45.0);
    q.phase = static_cast<int>(rng.uniform_int(20));
    const Prediction p = knn_predict(model, q);
    CHECK(p.mean_bps >= lo - 1e-9);
    CHECK(p.mean_bps <= hi + 1e-9);
    CHECK(p.margin_bps >= 0.0);
    CHECK(std::isfinite(p.mean_bps));
  }
}

TEST_CASE("knn matches an exhaustive neighbor scan exactly") {
  sim::RngStream rng(44, "knn-scan");
  const KnnModel model = knn_fit(random_train(150, rng, 20), 7, FeatureScales{}, 20);
  for (int i = 0; i < 200; ++i) {
    PredictorQuery q;
    q.x = rng.uniform(0.0, 50.0);
    q.y = rng.uniform(0.0, 40.0);
    q.phase = static_cast<int>(rng.uniform_int(20));
    const Prediction got = knn_predict(model, q);
    const Prediction want = exhaustive_knn(model, q);
    CHECK(got.mean_bps == want.mean_bps);
    CHECK(got.margin_bps == want.margin_bps);
  }
}

TEST_CASE("knn is invariant under training-set permutation") {
  sim::RngStream rng(9, "knn-perm");
  TrainingSet train = random_train(80, rng, 20);
  const KnnModel base = knn_fit(train, 5, FeatureScales{}, 20);
  std::mt19937 shuffler(1234);
  std::shuffle(train.begin(), train.end(), shuffler);
  const KnnModel permuted = knn_fit(train, 5, FeatureScales{}, 20);
  for (int i = 0; i < 50; ++i) {
    PredictorQuery q;
    q.x = rng.uniform(0.0, 50.0);
    q.y = rng.uniform(0.0, 40.0);
    q.phase = static_cast<int>(rng.uniform_int(20));
    CHECK(knn_predict(base, q).mean_bps == knn_predict(permuted, q).mean_bps);
  }
}

TEST_CASE("knn refuses k larger than the training set") {
  TrainingSet train = {{0.0, 0.0, 0, 1.0}};
  CHECK_THROWS_AS(knn_fit(train, 2, FeatureScales{}, 1), std::invalid_argument);
  CHECK_THROWS_AS(knn_fit(train, 0, FeatureScales{}, 1), std::invalid_argument);
}

TEST_CASE("exact-match knn has zero error on a repeated cycle") {
  const int phases = 10;
  auto level = [](int phase) { return 10e6 + 3e6 * phase; };
  TrainingSet train;
  for (int p = 0; p < phases; ++p)
    train.push_back({2.0 * p, 1.0 * p, p, level(p)});
  const KnnModel model = knn_fit(train, 1, FeatureScales{}, phases);
  double mae = 0.0;
  for (int p = 0; p < phases; ++p) {
    PredictorQuery q;
    q.x = 2.0 * p;
    q.y = 1.0 * p;
    q.phase = p;
    mae += std::fabs(knn_predict(model, q).mean_bps - level(p));
  }
  CHECK(mae == 0.0);
}

TEST_CASE("a depth-zero single tree is the global mean") {
  TrainingSet train = {{0.0, 0.0, 0, 10.0}, {10.0, 0.0, 0, 20.0},
                       {0.0, 10.0, 0, 30.0}, {10.0, 10.0, 0, 40.0}};
  sim::RngStream rng(5, "forest");
  const ForestModel model = forest_fit(train, 1, 0, rng);
  for (double x : {0.0, 3.0, 11.0}) {
    PredictorQuery q;
    q.x = x;
    const Prediction p = forest_predict(model, q);
    CHECK(p.mean_bps == doctest::Approx(25.0));
    CHECK(p.margin_bps == 0.0);
  }
}

TEST_CASE("a pure training set collapses every tree to the common label") {
  sim::RngStream rng(6, "forest");
  TrainingSet train = random_train(40, rng, 4);
  for (TrainingPoint& p : train) p.label_bps = 7.0;
  const ForestModel model = forest_fit(train, 5, 3, rng);
  PredictorQuery q;
  q.x = 20.0;
  q.y = 10.0;
  const Prediction p = forest_predict(model, q);
  CHECK(p.mean_bps == doctest::Approx(7.0));
  CHECK(p.margin_bps == doctest::Approx(0.0));
}

TEST_CASE("an unbounded single tree memorizes distinct points") {
  TrainingSet train = {{0.0, 0.0, 0, 10.0}, {10.0, 0.0, 0, 20.0},
                       {0.0, 10.0, 0, 30.0}, {10.0, 10.0, 0, 40.0}};
  sim::RngStream rng(7, "forest");
  const ForestModel model = forest_fit(train, 1, 16, rng);
  for (const TrainingPoint& t : train) {
    PredictorQuery q;
    q.x = t.x;
    q.y = t.y;
    q.phase = t.phase;
    CHECK(forest_predict(model, q).mean_bps == doctest::Approx(t.label_bps));
  }
}

TEST_CASE("identical features degenerate to the global mean") {
  TrainingSet train = {{5.0, 5.0, 1, 10.0}, {5.0, 5.0, 1, 30.0}};
  sim::RngStream rng(8, "forest");
  const ForestModel model = forest_fit(train, 4, 3, rng);
  CHECK(model.degenerate);
  PredictorQuery q;
  q.x = 1.0;
  const Prediction p = forest_predict(model, q);
  CHECK(p.mean_bps == doctest::Approx(20.0));
  CHECK(p.margin_bps == 0.0);
}

TEST_CASE("forest fitting is identical in serial and parallel") {
  sim::RngStream rng(10, "forest");
  const TrainingSet train = random_train(100, rng, 8);
  sim::RngStream fit_rng(11, "forest-fit");
  const ForestModel serial = forest_fit(train, 8, 5, fit_rng, 1.0, Exec::serial);
  const ForestModel parallel = forest_fit(train, 8, 5, fit_rng, 1.0, Exec::parallel);
  for (int i = 0; i < 40; ++i) {
    PredictorQuery q;
    q.x = rng.uniform(0.0, 50.0);
    q.y = rng.uniform(0.0, 40.0);
    q.phase = static_cast<int>(rng.uniform_int(8));
    const Prediction a = forest_predict(serial, q);
    const Prediction b = forest_predict(parallel, q);
    CHECK(a.mean_bps == b.mean_bps);
    CHECK(a.margin_bps == b.margin_bps);
  }
}

TEST_CASE("a constant series predicts the constant") {
  const std::vector<double> series(20, 5.0);
  const ArModel model = ar_fit(series, 2);
  const std::vector<double> recent = {5.0, 5.0};
  const Prediction p = ar_predict(model, recent, 3);
  CHECK(p.mean_bps == doctest::Approx(5.0));
}

TEST_CASE("least squares recovers a geometric decay coefficient") {
  std::vector<double> series;
  double v = 1.0;
  for (int i = 0; i < 30; ++i) {
    series.push_back(v);
    v *= 0.5;
  }
  const ArModel model = ar_fit(series, 1);
  REQUIRE(model.order == 1);
  CHECK(model.coeffs[0] == doctest::Approx(0.5).epsilon(1e-6));
  CHECK(model.intercept == doctest::Approx(0.0).scale(1.0).epsilon(1e-6));
}

TEST_CASE("a one-step rollout applies the recurrence once") {
  std::vector<double> series;
  double v = 1.0;
  for (int i = 0; i < 30; ++i) {
    series.push_back(v);
    v *= 0.5;
  }
  const ArModel model = ar_fit(series, 1);
  const std::vector<double> recent = {8.0};
  const Prediction p = ar_predict(model, recent, 1);
  CHECK(p.mean_bps == doctest::Approx(model.coeffs[0] * 8.0 + model.intercept));
}

TEST_CASE("a multi-step rollout reports its minimum") {
  std::vector<double> series;
  double v = 1.0;
  for (int i = 0; i < 30; ++i) {
    series.push_back(v);
    v *= 0.5;
  }
  const ArModel model = ar_fit(series, 1);
  const std::vector<double> recent = {8.0};
  double rolled = 8.0;
  double lowest = std::numeric_limits<double>::infinity();
  for (int s = 0; s < 4; ++s) {
    rolled = model.coeffs[0] * rolled + model.intercept;
    lowest = std::min(lowest, rolled);
  }
  const Prediction p = ar_predict(model, recent, 4);
  CHECK(p.mean_bps == doctest::Approx(lowest).epsilon(1e-12));
  CHECK(p.margin_bps >= 0.0);
}

TEST_CASE("ar fitting needs more samples than the order") {
  const std::vector<double> series = {1.0, 2.0};
  CHECK_THROWS_AS(ar_fit(series, 2), std::invalid_argument);
}

TEST_CASE("the staleness alarm trips only on a full window of bad errors") {
  StalenessMonitor monitor(1.0, 5, 2.0);
  CHECK_FALSE(monitor.stale());
  for (int i = 0; i < 5; ++i) monitor.record(10.0, 10.5);
  CHECK(monitor.rolling_mae() == doctest::Approx(0.5));
  CHECK_FALSE(monitor.stale());
  for (int i = 0; i < 5; ++i) monitor.record(10.0, 20.0);
  CHECK(monitor.rolling_mae() == doctest::Approx(10.0));
  CHECK(monitor.stale());
}

TEST_CASE("a partially filled window does not alarm") {
  StalenessMonitor monitor(1.0, 10, 2.0);
  for (int i = 0; i < 9; ++i) monitor.record(0.0, 50.0);
  CHECK_FALSE(monitor.stale());
  monitor.record(0.0, 50.0);
  CHECK(monitor.stale());
}

TEST_CASE("a knn model survives the record-file round trip") {
  sim::RngStream rng(21, "io");
  const KnnModel model = knn_fit(random_train(60, rng, 12), 9, FeatureScales{8.0, 6.0, 2.0}, 12, 1.5);
  const io::RecordFile rf = io::parse_record_file(io::record_file_to_string(io::pack_model(model)));
  const KnnModel back = io::unpack_knn(rf);
  CHECK(back.k == model.k);
  CHECK(back.phase_count == model.phase_count);
  CHECK(back.margin_z == model.margin_z);
  CHECK(back.scales.x == model.scales.x);
  CHECK(back.train.size() == model.train.size());
  for (int i = 0; i < 30; ++i) {
    PredictorQuery q;
    q.x = rng.uniform(0.0, 50.0);
    q.y = rng.uniform(0.0, 40.0);
    q.phase = static_cast<int>(rng.uniform_int(12));
    const Prediction a = knn_predict(model, q);
    const Prediction b = knn_predict(back, q);
    CHECK(a.mean_bps == b.mean_bps);
    CHECK(a.margin_bps == b.margin_bps);
  }
}

TEST_CASE("a forest model survives the record-file round trip") {
  sim::RngStream rng(22, "io");
  const TrainingSet train = random_train(80, rng, 10);
  sim::RngStream fit_rng(23, "io-fit");
  const ForestModel model = forest_fit(train, 6, 4, fit_rng, 2.0);
  const io::RecordFile rf = io::parse_record_file(io::record_file_to_string(io::pack_model(model)));
  const ForestModel back = io::unpack_forest(rf);
  CHECK(back.trees.size() == model.trees.size());
  CHECK(back.margin_z == model.margin_z);
  CHECK(back.degenerate == model.degenerate);
  for (int i = 0; i < 30; ++i) {
    PredictorQuery q;
    q.x = rng.uniform(0.0, 50.0);
    q.y = rng.uniform(0.0, 40.0);
    q.phase = static_cast<int>(rng.uniform_int(10));
    const Prediction a = forest_predict(model, q);
    const Prediction b = forest_predict(back, q);
    CHECK(a.mean_bps == b.mean_bps);
    CHECK(a.margin_bps == b.margin_bps);
  }
}

TEST_CASE("an ar model survives the record-file round trip") {
  sim::RngStream rng(24, "io");
  std::vector<double> series;
  double v = 50.0;
  for (int i = 0; i < 60; ++i) {
    series.push_back(v);
    v = 0.8 * v + 2.0 + rng.gaussian(0.0, 0.3);
  }
  const ArModel model = ar_fit(series, 3);
  const io::RecordFile rf = io::parse_record_file(io::record_file_to_string(io::pack_model(model)));
  const ArModel back = io::unpack_ar(rf);
  CHECK(back.order == model.order);
  CHECK(back.intercept == model.intercept);
  CHECK(back.residual_std == model.residual_std);
  REQUIRE(back.coeffs.size() == model.coeffs.size());
  for (std::size_t i = 0; i < model.coeffs.size(); ++i) CHECK(back.coeffs[i] == model.coeffs[i]);
}
