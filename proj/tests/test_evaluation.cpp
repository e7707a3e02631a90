#include <random>

#include <gtest/gtest.h>

#include "intraday/evaluation.hpp"
#include "intraday/sampler.hpp"
#include "intraday/synthgen.hpp"
#include "intraday/tuning.hpp"
#include "support.hpp"

namespace intraday {
namespace {

using Eigen::VectorXd;

struct Fixture {
  Dataset data;
  std::vector<MixtureForecast> forecasts;
};

Fixture make_fixture(std::size_t n_count, std::size_t k, Eigen::Index horizon) {
  GeneratorConfig config;
  config.horizon = horizon;
  config.pool_size = 16;
  const GroundTruth truth(config);
  const auto conditions = make_conditions(n_count, 5);
  Fixture f;
  for (std::size_t n = 0; n < n_count; ++n) {
    f.forecasts.push_back(approximate_forecast(
        truth, "i" + std::to_string(n), conditions[n], k, 100 + n));
  }
  f.data = build_best_case_set(f.forecasts, 9);
  return f;
}

void expect_same(const PerformanceTrace &a, const PerformanceTrace &b) {
  EXPECT_EQ(a.metric, b.metric);
  EXPECT_EQ(a.variant, b.variant);
  EXPECT_EQ(a.values, b.values);
}

void expect_same(const EvaluationResult &a, const EvaluationResult &b) {
  const auto ta = a.traces();
  const auto tb = b.traces();
  ASSERT_EQ(ta.size(), tb.size());
  for (std::size_t i = 0; i < ta.size(); ++i) {
    expect_same(ta[i], tb[i]);
  }
  EXPECT_EQ(a.updated.grid.values, b.updated.grid.values);
  EXPECT_EQ(a.non_updated.grid.values, b.non_updated.grid.values);
  EXPECT_EQ(a.failed_instances, b.failed_instances);
}

TEST(Evaluation, SerialEqualsParallel) {
  const Fixture f = make_fixture(12, 5, 8);
  EvaluationOptions opt;
  opt.seed = 3;
  const EvaluationResult serial = evaluate_serial(f.data, f.forecasts, opt);
  for (const int threads : {2, 3, 8}) {
    expect_same(serial, evaluate_parallel(f.data, f.forecasts, opt, threads));
  }
}

TEST(Evaluation, CachePolicyDoesNotChangeResults) {
  const Fixture f = make_fixture(6, 4, 6);
  EvaluationOptions on;
  on.seed = 4;
  EvaluationOptions off = on;
  off.cache = CachePolicy::kDisabled;
  expect_same(evaluate(f.data, f.forecasts, on), evaluate(f.data, f.forecasts, off));
}

TEST(Evaluation, PipelineEqualsStandaloneMetrics) {
  const Fixture f = make_fixture(7, 4, 6);
  EvaluationOptions opt;
  opt.seed = 11;
  opt.excluded_tail = 1;
  const EvaluationResult res = evaluate(f.data, f.forecasts, opt);
  const StepMask mask{6, 1};
  const std::size_t samples = 4;

  for (const Variant variant : {Variant::kUpdated, Variant::kNonUpdated}) {
    const VariantEvaluation &v =
        variant == Variant::kUpdated ? res.updated : res.non_updated;
    const NllResult nll =
        nll_trace(f.data, f.forecasts, res.t_primes, variant);
    expect_same(v.nll, nll.trace);

    std::vector<Ensemble> ensembles;
    std::vector<QuantileSet> quantiles;
    std::vector<PointForecast> points;
    for (std::size_t n = 0; n < f.data.size(); ++n) {
      const auto &inst = f.data.instances[n];
      for (const Eigen::Index tp : res.t_primes) {
        const IntradayUpdate upd =
            variant == Variant::kUpdated
                ? update(f.forecasts[n], inst.profile.head(tp))
                : non_updated(f.forecasts[n], tp);
        Ensemble ens = sample_ensemble(upd, samples, opt.seed);
        ens.t_prime = tp;
        ens.source_id = inst.id;
        QuantileSet q = empirical_quantiles(ens, opt.levels);
        q.t_prime = tp;
        q.source_id = inst.id;
        quantiles.push_back(std::move(q));
        ensembles.push_back(std::move(ens));
        points.push_back({inst.id, tp, mixture_mean(upd)});
      }
    }
    const WaterfallGrid grid = ae_grid(f.data, ensembles, variant);
    EXPECT_EQ(v.grid.values, grid.values);
    expect_same(v.mae, mae_trace(grid, mask));
    const CrpsTraces crps = crps_trace(f.data, quantiles, mask, variant);
    expect_same(v.crps, crps.normalized);
    expect_same(v.crps_raw, crps.raw);
    expect_same(v.rmse, rmse_trace(f.data, points, mask, variant));
  }
}

TEST(Evaluation, VariantsCoincideWithoutObservations) {
  const Fixture f = make_fixture(5, 3, 5);
  EvaluationOptions opt;
  opt.seed = 2;
  const EvaluationResult res = evaluate(f.data, f.forecasts, opt);
  EXPECT_EQ(res.updated.nll.values.at(0), res.non_updated.nll.values.at(0));
  EXPECT_EQ(res.updated.mae.values.at(0), res.non_updated.mae.values.at(0));
  EXPECT_EQ(res.updated.crps.values.at(0), res.non_updated.crps.values.at(0));
  EXPECT_EQ(res.updated.rmse.values.at(0), res.non_updated.rmse.values.at(0));
}

TEST(Evaluation, PerfectForecastHasZeroPointErrors) {
  // near-degenerate components centred on the truth
  Dataset data;
  std::vector<MixtureForecast> fcs;
  for (int n = 0; n < 3; ++n) {
    Instance inst;
    inst.id = "p" + std::to_string(n);
    inst.profile = VectorXd::LinSpaced(4, n, n + 3);
    fcs.emplace_back(inst.id,
                     std::vector<MvnComponent>{MvnComponent(
                         inst.profile,
                         CovarianceSpec::diagonal(VectorXd::Constant(4, 1e-150)))});
    data.instances.push_back(std::move(inst));
  }
  EvaluationOptions opt;
  opt.seed = 1;
  const EvaluationResult res = evaluate(data, fcs, opt);
  for (const auto &[tp, value] : res.updated.rmse.values) {
    EXPECT_EQ(value, 0.0);
    EXPECT_LT(res.updated.mae.values.at(tp), 1e-100);
  }
}

TEST(PairedStats, MeanAndStandardError) {
  const PairedStats s =
      paired_difference(support::vec({1, 2, 3, 4}), support::vec({0, 0, 0, 0}));
  EXPECT_DOUBLE_EQ(s.mean, 2.5);
  EXPECT_NEAR(s.standard_error, std::sqrt((5.0 / 3.0) / 4.0), 1e-15);
}

} // namespace
} // namespace intraday
