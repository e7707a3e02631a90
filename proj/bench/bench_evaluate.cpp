// Serial vs OpenMP evaluation, and the conditioning cache on vs off.

#include <map>
#include <thread>

#include <benchmark/benchmark.h>

#include "intraday/evaluation.hpp"
#include "intraday/sampler.hpp"
#include "intraday/synthgen.hpp"
#include "intraday/tuning.hpp"

namespace {

using namespace intraday;

struct Workload {
  std::vector<MixtureForecast> forecasts;
  Dataset data;
};

const Workload &workload(std::size_t n_count, std::size_t k) {
  static std::map<std::pair<std::size_t, std::size_t>, Workload> cache;
  auto &w = cache[{n_count, k}];
  if (w.forecasts.empty()) {
    const GroundTruth truth(GeneratorConfig{});
    const auto conds = make_conditions(n_count, 3);
    for (std::size_t n = 0; n < n_count; ++n) {
      w.forecasts.push_back(approximate_forecast(truth, "b" + std::to_string(n),
                                                 conds[n], k, derive_key(5, {n})));
    }
    w.data = build_best_case_set(w.forecasts, 7);
  }
  return w;
}

int threads() { return static_cast<int>(std::max(1u, std::thread::hardware_concurrency())); }

void BM_EvaluateSerial(benchmark::State &state) {
  const auto &w = workload(static_cast<std::size_t>(state.range(0)),
                           static_cast<std::size_t>(state.range(1)));
  EvaluationOptions opt;
  opt.seed = 1;
  opt.samples = static_cast<std::size_t>(state.range(1));
  for (auto _ : state) {
    benchmark::DoNotOptimize(evaluate_serial(w.data, w.forecasts, opt));
  }
}

void BM_EvaluateParallel(benchmark::State &state) {
  const auto &w = workload(static_cast<std::size_t>(state.range(0)),
                           static_cast<std::size_t>(state.range(1)));
  EvaluationOptions opt;
  opt.seed = 1;
  opt.samples = static_cast<std::size_t>(state.range(1));
  for (auto _ : state) {
    benchmark::DoNotOptimize(evaluate_parallel(w.data, w.forecasts, opt, threads()));
  }
  state.counters["threads"] = threads();
}

void BM_EvaluateCacheOff(benchmark::State &state) {
  const auto &w = workload(static_cast<std::size_t>(state.range(0)),
                           static_cast<std::size_t>(state.range(1)));
  EvaluationOptions opt;
  opt.seed = 1;
  opt.samples = static_cast<std::size_t>(state.range(1));
  opt.cache = CachePolicy::kDisabled;
  for (auto _ : state) {
    benchmark::DoNotOptimize(evaluate_serial(w.data, w.forecasts, opt));
  }
}

// One update sampled S times: the cache pays off as S grows.
void BM_SampleEnsemble(benchmark::State &state) {
  const auto &w = workload(1, 100);
  const auto policy = state.range(1) != 0 ? CachePolicy::kEnabled : CachePolicy::kDisabled;
  const auto &inst = w.data.instances[0];
  for (auto _ : state) {
    const IntradayUpdate upd = update(w.forecasts[0], inst.profile.head(12), policy);
    benchmark::DoNotOptimize(
        sample_ensemble(upd, static_cast<std::size_t>(state.range(0)), 3));
  }
  state.SetLabel(policy == CachePolicy::kEnabled ? "cache on" : "cache off");
}

BENCHMARK(BM_EvaluateSerial)->Args({64, 25})->Args({64, 100})->Unit(benchmark::kMillisecond);
BENCHMARK(BM_EvaluateParallel)->Args({64, 25})->Args({64, 100})->Unit(benchmark::kMillisecond);
BENCHMARK(BM_EvaluateCacheOff)->Args({64, 25})->Args({64, 100})->Unit(benchmark::kMillisecond);
BENCHMARK(BM_SampleEnsemble)
    ->ArgsProduct({{10, 100, 1000}, {0, 1}})
    ->Unit(benchmark::kMicrosecond);

} // namespace

BENCHMARK_MAIN();
