#include <benchmark/benchmark.h>

#include <cmath>
#include <vector>

#include "fabricnet/factory.hpp"
#include "fabricnet/locate.hpp"
#include "fabricnet/predict.hpp"
#include "fabricnet/radio.hpp"
#include "fabricnet/rng.hpp"

namespace {

using namespace fabricnet;

factory::FactoryLayout bench_layout() {
  factory::FactoryLayout layout;
  layout.bounds = {{0.0, 0.0}, {60.0, 40.0}};
  layout.walls.push_back({{30.0, 0.0}, {30.0, 28.0}, 8.0});
  layout.walls.push_back({{45.0, 12.0}, {45.0, 40.0}, 8.0});
  return layout;
}

radio::PropagationParams bench_prop() {
  radio::PropagationParams p;
  p.pl0_db = 40.0;
  p.exponent = 3.0;
  p.tx_power_dbm = 6.0;
  return p;
}

void bm_rem_build(benchmark::State& state, Exec exec) {
  const factory::FactoryLayout layout = bench_layout();
  const radio::PropagationParams prop = bench_prop();
  for (auto _ : state) {
    radio::Rem rem = radio::build_model_rem(layout, "tx", {8.0, 20.0}, prop, 0.5, exec);
    benchmark::DoNotOptimize(rem.values.data());
  }
}

predict::TrainingSet bench_training_set() {
  predict::TrainingSet train;
  sim::RngStream rng(7, "bench/train");
  for (int i = 0; i < 2000; ++i) {
    predict::TrainingPoint p;
    p.x = rng.uniform(0.0, 60.0);
    p.y = rng.uniform(0.0, 40.0);
    p.phase = static_cast<int>(rng.uniform_int(20));
    p.label_bps = 1e6 * (1.0 + p.x * 0.2 + std::sin(p.phase)) + rng.gaussian(0.0, 1e5);
    train.push_back(p);
  }
  return train;
}

void bm_forest_fit(benchmark::State& state, Exec exec) {
  const predict::TrainingSet train = bench_training_set();
  const sim::RngStream rng(11, "bench/forest");
  for (auto _ : state) {
    predict::ForestModel m = predict::forest_fit(train, 16, 8, rng, 1.0, exec);
    benchmark::DoNotOptimize(m.trees.data());
  }
}

void bm_positioning(benchmark::State& state, Exec exec) {
  locate::LocateScenario sc;
  sc.layout = bench_layout();
  sc.tx_positions = {{5.0, 5.0}, {55.0, 5.0}, {30.0, 35.0}, {5.0, 35.0}};
  sc.prop = bench_prop();
  sc.cell_size_m = 1.0;
  sc.db_stride = 1;
  const std::vector<locate::MethodSpec> methods{
      {locate::MethodKind::fingerprint_knn, 4, ""}};
  for (auto _ : state) {
    locate::PositioningResult res =
        locate::evaluate_positioning(sc, methods, 200, 2.0, 3, exec);
    benchmark::DoNotOptimize(res.samples.data());
  }
}

}  // namespace

BENCHMARK_CAPTURE(bm_rem_build, serial, Exec::serial)->Unit(benchmark::kMillisecond);
BENCHMARK_CAPTURE(bm_rem_build, parallel, Exec::parallel)->Unit(benchmark::kMillisecond);
BENCHMARK_CAPTURE(bm_forest_fit, serial, Exec::serial)->Unit(benchmark::kMillisecond);
BENCHMARK_CAPTURE(bm_forest_fit, parallel, Exec::parallel)->Unit(benchmark::kMillisecond);
BENCHMARK_CAPTURE(bm_positioning, serial, Exec::serial)->Unit(benchmark::kMillisecond);
BENCHMARK_CAPTURE(bm_positioning, parallel, Exec::parallel)->Unit(benchmark::kMillisecond);

BENCHMARK_MAIN();
