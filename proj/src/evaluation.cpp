#include "intraday/evaluation.hpp"

#include <cmath>
#include <limits>
#include <memory>
#include <string>

#include "intraday/error.hpp"
#include "intraday/parallel.hpp"
#include "intraday/sampler.hpp"

namespace intraday {

namespace {

constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

// Per-instance, per-variant contributions for every requested T'.
struct VariantRecord {
  Eigen::VectorXd log_density;            // per T'
  std::vector<Eigen::VectorXd> abs_sums;  // per T': sum_s |x - xhat| per step
  std::vector<Eigen::VectorXd> pinball;   // per T': sum_i pinball per step
  Eigen::VectorXd root;                   // per T': NaN when fully masked
  std::size_t samples = 0;
};

struct InstanceRecord {
  bool failed = false;
  VariantRecord updated;
  VariantRecord non_updated;
};

void score_variant(const IntradayUpdate &upd, const Eigen::VectorXd &profile,
                   Eigen::Index j, std::size_t samples,
                   const EvaluationOptions &options, const StepMask &mask,
                   VariantRecord &out) {
  // The baseline is an update of the marginal, so its own T' is always 0.
  const Eigen::Index rest = upd.remaining();
  const Eigen::Index t_prime = profile.size() - rest;
  const auto future = profile.tail(rest);

  out.log_density[j] = predictive_log_density(upd, future);

  const Ensemble ens = sample_ensemble(upd, samples, options.seed);
  Eigen::VectorXd abs_sums(rest);
  for (Eigen::Index t = 0; t < rest; ++t) {
    abs_sums[t] = (ens.trajectories.col(t).array() - profile[t_prime + t])
                      .abs()
                      .sum();
  }
  out.abs_sums[static_cast<std::size_t>(j)] = std::move(abs_sums);

  const QuantileSet quantiles = empirical_quantiles(ens, options.levels);
  Eigen::VectorXd pinball(rest);
  for (Eigen::Index t = 0; t < rest; ++t) {
    double partial = 0.0;
    for (std::size_t i = 0; i < options.levels.size(); ++i) {
      partial += pinball_loss(options.levels[i], profile[t_prime + t],
                              quantiles.values(static_cast<Eigen::Index>(i), t));
    }
    pinball[t] = partial;
  }
  out.pinball[static_cast<std::size_t>(j)] = std::move(pinball);

  const Eigen::VectorXd squared =
      (future - mixture_mean(upd)).array().square().matrix();
  double mse = 0.0;
  out.root[j] = detail::masked_mean(squared, t_prime, mask, mse)
                    ? std::sqrt(mse)
                    : kNaN;
}

void init_record(VariantRecord &record, Eigen::Index j_count,
                 std::size_t samples) {
  record.log_density.resize(j_count);
  record.abs_sums.resize(static_cast<std::size_t>(j_count));
  record.pinball.resize(static_cast<std::size_t>(j_count));
  record.root.resize(j_count);
  record.samples = samples;
}

InstanceRecord evaluate_instance(const Instance &instance,
                                 const MixtureForecast &forecast,
                                 std::span<const Eigen::Index> t_primes,
                                 const EvaluationOptions &options,
                                 const StepMask &mask) {
  if (forecast.id() != instance.id ||
      forecast.horizon() != instance.profile.size()) {
    throw Error(ErrorKind::kShapeMismatch,
                "evaluate: forecast '" + forecast.id() +
                    "' does not match instance '" + instance.id + "'");
  }
  const std::size_t samples =
      options.samples > 0 ? options.samples
                          : std::max<std::size_t>(forecast.size(), 2);
  const auto j_count = static_cast<Eigen::Index>(t_primes.size());
  InstanceRecord record;
  init_record(record.updated, j_count, samples);
  init_record(record.non_updated, j_count, samples);

  const std::shared_ptr<const MixtureForecast> handle(
      std::shared_ptr<const void>(), &forecast);
  try {
    for (Eigen::Index j = 0; j < j_count; ++j) {
      const Eigen::Index t_prime = t_primes[static_cast<std::size_t>(j)];
      const IntradayUpdate upd =
          update(handle, instance.profile.head(t_prime), options.cache);
      score_variant(upd, instance.profile, j, samples, options, mask,
                    record.updated);
      const IntradayUpdate nu = non_updated(forecast, t_prime, options.cache);
      score_variant(nu, instance.profile, j, samples, options, mask,
                    record.non_updated);
    }
  } catch (const Error &e) {
    if (e.error_category() != ErrorCategory::kNumerical) {
      throw;
    }
    record.failed = true;
  }
  return record;
}

VariantEvaluation reduce(const Dataset &dataset,
                         const std::vector<InstanceRecord> &records,
                         std::span<const Eigen::Index> t_primes,
                         const EvaluationOptions &options, const StepMask &mask,
                         Variant variant) {
  VariantEvaluation out;
  out.variant = variant;
  for (PerformanceTrace *trace :
       {&out.nll, &out.mae, &out.crps, &out.crps_raw, &out.rmse}) {
    trace->variant = variant;
    trace->dataset = dataset.tag;
  }
  out.nll.metric = "nll";
  out.crps.metric = "crps";
  out.crps_raw.metric = "crps_raw";
  out.rmse.metric = "rmse";
  out.grid.variant = variant;

  std::vector<const VariantRecord *> kept;
  for (const auto &record : records) {
    if (!record.failed) {
      kept.push_back(variant == Variant::kUpdated ? &record.updated
                                                  : &record.non_updated);
    }
  }
  const auto j_count = static_cast<Eigen::Index>(t_primes.size());
  out.log_densities.resize(static_cast<Eigen::Index>(kept.size()), j_count);
  for (std::size_t r = 0; r < kept.size(); ++r) {
    out.log_densities.row(static_cast<Eigen::Index>(r)) =
        kept[r]->log_density.transpose();
  }
  if (kept.empty()) {
    out.mae = mae_trace(out.grid, mask, dataset.tag);
    return out;
  }
  const double n_count = static_cast<double>(kept.size());
  const Eigen::Index horizon = dataset.horizon();
  const double q_count = static_cast<double>(options.levels.size());

  for (Eigen::Index j = 0; j < j_count; ++j) {
    const Eigen::Index t_prime = t_primes[static_cast<std::size_t>(j)];
    const auto js = static_cast<std::size_t>(j);
    const Eigen::Index rest = horizon - t_prime;

    double log_sum = 0.0;
    for (Eigen::Index r = 0; r < out.log_densities.rows(); ++r) {
      log_sum += out.log_densities(r, j);
    }
    out.nll.values[t_prime] = -log_sum / n_count;

    Eigen::VectorXd abs_sums = Eigen::VectorXd::Zero(rest);
    Eigen::VectorXd zeta = Eigen::VectorXd::Zero(rest);
    double draws = 0.0;
    double sum_of_roots = 0.0;
    bool any_step = false;
    for (const VariantRecord *record : kept) {
      abs_sums += record->abs_sums[js];
      zeta += record->pinball[js];
      draws += static_cast<double>(record->samples);
      if (!std::isnan(record->root[j])) {
        sum_of_roots += record->root[j];
        any_step = true;
      }
    }
    for (Eigen::Index t = 0; t < rest; ++t) {
      out.grid.values[{t_prime, t_prime + 1 + t}] = abs_sums[t] / draws;
    }
    zeta *= 2.0 / n_count;
    double crps = 0.0;
    if (detail::masked_mean(zeta, t_prime, mask, crps)) {
      out.crps_raw.values[t_prime] = crps;
      out.crps.values[t_prime] = crps / q_count;
    }
    if (any_step) {
      out.rmse.values[t_prime] = sum_of_roots / n_count;
    }
  }
  out.mae = mae_trace(out.grid, mask, dataset.tag);
  return out;
}

std::vector<Eigen::Index> resolve_t_primes(const Dataset &dataset,
                                           const EvaluationOptions &options) {
  const Eigen::Index horizon = dataset.horizon();
  for (const auto &instance : dataset.instances) {
    if (instance.profile.size() != horizon) {
      throw Error(ErrorKind::kShapeMismatch,
                  "evaluate: instance '" + instance.id +
                      "' has a different horizon");
    }
  }
  std::vector<Eigen::Index> t_primes = options.t_primes;
  if (t_primes.empty()) {
    for (Eigen::Index t = 0; t < horizon; ++t) {
      t_primes.push_back(t);
    }
  }
  for (const Eigen::Index t_prime : t_primes) {
    if (t_prime < 0 || t_prime >= horizon) {
      throw Error(ErrorKind::kOutOfBounds,
                  "evaluate: T'=" + std::to_string(t_prime) + " outside [0, " +
                      std::to_string(horizon) + ")");
    }
  }
  return t_primes;
}

EvaluationResult run(const Dataset &dataset,
                     std::span<const MixtureForecast> forecasts,
                     const EvaluationOptions &options, int threads) {
  if (forecasts.size() != dataset.size()) {
    throw Error(ErrorKind::kShapeMismatch,
                "evaluate: " + std::to_string(dataset.size()) +
                    " instances but " + std::to_string(forecasts.size()) +
                    " forecasts");
  }
  EvaluationResult result;
  result.t_primes = resolve_t_primes(dataset, options);
  const StepMask mask{dataset.horizon(), options.excluded_tail};

  std::vector<InstanceRecord> records(dataset.size());
  parallel_for(dataset.size(), threads, [&](std::size_t n) {
    records[n] = evaluate_instance(dataset.instances[n], forecasts[n],
                                   result.t_primes, options, mask);
  });

  for (std::size_t n = 0; n < records.size(); ++n) {
    if (records[n].failed) {
      result.failed_instances.push_back(dataset.instances[n].id);
    }
  }
  result.updated = reduce(dataset, records, result.t_primes, options, mask,
                          Variant::kUpdated);
  result.non_updated = reduce(dataset, records, result.t_primes, options, mask,
                              Variant::kNonUpdated);
  return result;
}

} // namespace

std::vector<PerformanceTrace> EvaluationResult::traces() const {
  std::vector<PerformanceTrace> out;
  for (const VariantEvaluation *v : {&updated, &non_updated}) {
    out.push_back(v->nll);
    out.push_back(v->mae);
    out.push_back(v->crps);
    out.push_back(v->crps_raw);
    out.push_back(v->rmse);
  }
  return out;
}

EvaluationResult evaluate_serial(const Dataset &dataset,
                                 std::span<const MixtureForecast> forecasts,
                                 const EvaluationOptions &options) {
  return run(dataset, forecasts, options, 1);
}

EvaluationResult evaluate_parallel(const Dataset &dataset,
                                   std::span<const MixtureForecast> forecasts,
                                   const EvaluationOptions &options,
                                   int threads) {
  return run(dataset, forecasts, options, std::max(threads, 2));
}

EvaluationResult evaluate(const Dataset &dataset,
                          std::span<const MixtureForecast> forecasts,
                          const EvaluationOptions &options) {
  return options.threads <= 1 ? evaluate_serial(dataset, forecasts, options)
                              : evaluate_parallel(dataset, forecasts, options,
                                                  options.threads);
}

PairedStats paired_difference(const Eigen::Ref<const Eigen::VectorXd> &a,
                              const Eigen::Ref<const Eigen::VectorXd> &b) {
  if (a.size() != b.size() || a.size() == 0) {
    throw Error(ErrorKind::kShapeMismatch,
                "paired difference needs equal, non-empty samples");
  }
  const Eigen::VectorXd diff = a - b;
  PairedStats stats;
  stats.mean = diff.mean();
  if (diff.size() > 1) {
    const double var = (diff.array() - stats.mean).square().sum() /
                       static_cast<double>(diff.size() - 1);
    stats.standard_error = std::sqrt(var / static_cast<double>(diff.size()));
  }
  return stats;
}

} // namespace intraday
