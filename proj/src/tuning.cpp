#include "intraday/tuning.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "intraday/error.hpp"
#include "intraday/sampler.hpp"

namespace intraday {

Dataset build_best_case_set(std::span<const MixtureForecast> forecasts,
                            std::uint64_t seed) {
  Dataset out;
  out.tag = DatasetTag::kBestCase;
  out.instances.reserve(forecasts.size());
  for (const auto &forecast : forecasts) {
    const Ensemble ens = sample_day_ahead(forecast, 1, seed);
    Instance instance;
    instance.id = forecast.id();
    instance.profile = ens.trajectories.row(0).transpose();
    instance.condition = forecast.condition();
    instance.generating_component = ens.components.front();
    out.instances.push_back(std::move(instance));
  }
  return out;
}

Dataset build_synthetic_set(const GroundTruth &truth,
                            const std::vector<std::vector<double>> &conditions,
                            std::uint64_t seed) {
  Dataset out;
  out.tag = DatasetTag::kSynthetic;
  out.instances.reserve(conditions.size());
  for (std::size_t n = 0; n < conditions.size(); ++n) {
    Instance instance;
    instance.id = "synth-" + std::to_string(n);
    instance.condition = conditions[n];
    instance.profile =
        draw_day(truth, conditions[n], derive_key(seed, {n})).profile;
    out.instances.push_back(std::move(instance));
  }
  return out;
}

double trace_gap(const PerformanceTrace &a, const PerformanceTrace &b,
                 Eigen::Index horizon) {
  if (horizon < 2) {
    throw Error(ErrorKind::kInvalidArgument, "trace gap needs T >= 2");
  }
  double total = 0.0;
  for (Eigen::Index t_prime = 1; t_prime < horizon; ++t_prime) {
    const auto ia = a.values.find(t_prime);
    const auto ib = b.values.find(t_prime);
    if (ia == a.values.end() || ib == b.values.end()) {
      throw Error(ErrorKind::kShapeMismatch,
                  "trace gap: missing T'=" + std::to_string(t_prime));
    }
    total += std::abs(ia->second - ib->second);
  }
  return total / static_cast<double>(horizon - 1);
}

std::size_t argmin_gap(const std::map<std::size_t, double> &gap) {
  if (gap.empty()) {
    throw Error(ErrorKind::kInvalidArgument, "empty K grid");
  }
  // map iterates K ascending, so strict < keeps the smallest K on ties
  auto best = gap.begin();
  for (auto it = gap.begin(); it != gap.end(); ++it) {
    if (it->second < best->second) {
      best = it;
    }
  }
  return best->first;
}

TuningReport select_k(std::span<const std::size_t> k_grid,
                      const GroundTruth &truth,
                      const std::vector<std::vector<double>> &conditions,
                      const TuningSeeds &seeds, int threads) {
  if (k_grid.empty()) {
    throw Error(ErrorKind::kInvalidArgument, "select_k: empty K grid");
  }
  if (conditions.empty()) {
    throw Error(ErrorKind::kInvalidArgument, "select_k: no conditions");
  }
  const Eigen::Index horizon = truth.horizon();
  std::vector<Eigen::Index> t_primes;
  for (Eigen::Index t = 1; t < horizon; ++t) {
    t_primes.push_back(t);
  }

  Dataset synthetic = build_synthetic_set(truth, conditions, seeds.synthetic);

  TuningReport report;
  report.k_grid.assign(k_grid.begin(), k_grid.end());
  std::sort(report.k_grid.begin(), report.k_grid.end());
  report.k_grid.erase(std::unique(report.k_grid.begin(), report.k_grid.end()),
                      report.k_grid.end());

  for (const std::size_t k : report.k_grid) {
    if (k == 0) {
      throw Error(ErrorKind::kInvalidArgument, "select_k: K must be >= 1");
    }
    std::vector<MixtureForecast> forecasts;
    forecasts.reserve(conditions.size());
    for (std::size_t n = 0; n < conditions.size(); ++n) {
      forecasts.push_back(approximate_forecast(truth, "synth-" + std::to_string(n),
                                               conditions[n], k,
                                               derive_key(seeds.forecast, {n})));
    }
    const Dataset best = build_best_case_set(forecasts, seeds.best_case);
    NllResult best_nll =
        nll_trace(best, forecasts, t_primes, Variant::kUpdated, threads);
    NllResult synth_nll =
        nll_trace(synthetic, forecasts, t_primes, Variant::kUpdated, threads);
    best_nll.trace.dataset = DatasetTag::kBestCase;
    synth_nll.trace.dataset = DatasetTag::kSynthetic;
    report.gap[k] = trace_gap(best_nll.trace, synth_nll.trace, horizon);
    report.best_case[k] = std::move(best_nll.trace);
    report.synthetic[k] = std::move(synth_nll.trace);
  }
  report.k_star = argmin_gap(report.gap);
  return report;
}

} // namespace intraday
