#include "intraday/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <string>
#include <unordered_map>

#include "intraday/error.hpp"
#include "intraday/parallel.hpp"

namespace intraday {

namespace {

using IdIndex = std::unordered_map<std::string, std::size_t>;

IdIndex index_instances(const Dataset &dataset) {
  IdIndex index;
  for (std::size_t n = 0; n < dataset.size(); ++n) {
    if (!index.emplace(dataset.instances[n].id, n).second) {
      throw Error(ErrorKind::kDuplicateId,
                  "instance id '" + dataset.instances[n].id + "' repeats");
    }
  }
  return index;
}

std::size_t lookup(const IdIndex &index, const std::string &id) {
  const auto it = index.find(id);
  if (it == index.end()) {
    throw Error(ErrorKind::kShapeMismatch,
                "no test instance with id '" + id + "'");
  }
  return it->second;
}

// Groups items by T' and checks that every group covers every instance
// exactly once. Returns, per T', item pointers ordered by instance index.
template <typename Item>
std::map<Eigen::Index, std::vector<const Item *>>
group_by_t_prime(const Dataset &dataset, std::span<const Item> items,
                 const char *what) {
  const IdIndex index = index_instances(dataset);
  std::map<Eigen::Index, std::vector<const Item *>> groups;
  for (const Item &item : items) {
    auto &group = groups[item.t_prime];
    group.resize(dataset.size(), nullptr);
    const std::size_t n = lookup(index, item.source_id);
    if (group[n] != nullptr) {
      throw Error(ErrorKind::kShapeMismatch,
                  std::string(what) + ": two entries for instance '" +
                      item.source_id + "' at T'=" +
                      std::to_string(item.t_prime));
    }
    const Eigen::Index horizon = dataset.instances[n].profile.size();
    if (item.t_prime < 0 || item.t_prime >= horizon) {
      throw Error(ErrorKind::kShapeMismatch,
                  std::string(what) + ": T'=" + std::to_string(item.t_prime) +
                      " outside [0, T)");
    }
    group[n] = &item;
  }
  for (const auto &[t_prime, group] : groups) {
    for (std::size_t n = 0; n < group.size(); ++n) {
      if (group[n] == nullptr) {
        throw Error(ErrorKind::kShapeMismatch,
                    std::string(what) + ": instance '" +
                        dataset.instances[n].id + "' missing at T'=" +
                        std::to_string(t_prime));
      }
    }
  }
  return groups;
}

} // namespace

namespace detail {

// Mean of per-step values over unmasked 1-based steps [t_prime+1, T];
// false when every remaining step is masked.
bool masked_mean(const Eigen::Ref<const Eigen::VectorXd> &per_step,
                 Eigen::Index t_prime, const StepMask &mask, double &out) {
  double sum = 0.0;
  Eigen::Index count = 0;
  for (Eigen::Index j = 0; j < per_step.size(); ++j) {
    if (step_mask(mask, t_prime + 1 + j)) {
      sum += per_step[j];
      ++count;
    }
  }
  if (count == 0) {
    return false;
  }
  out = sum / static_cast<double>(count);
  return true;
}

} // namespace detail

bool step_mask(const StepMask &mask, Eigen::Index t) {
  if (mask.excluded_tail <= 0) {
    return true;
  }
  return t <= mask.horizon - mask.excluded_tail;
}

std::vector<double> default_quantile_levels() {
  std::vector<double> levels;
  for (int i = 1; i <= 19; ++i) {
    levels.push_back(static_cast<double>(i) * 0.05);
  }
  return levels;
}

double pinball_loss(double level, double truth, double quantile) {
  return std::max(level * (truth - quantile), (1.0 - level) * (quantile - truth));
}

NllResult nll_trace(const Dataset &dataset,
                    std::span<const MixtureForecast> forecasts,
                    std::span<const Eigen::Index> t_primes, Variant variant,
                    int threads) {
  if (forecasts.size() != dataset.size()) {
    throw Error(ErrorKind::kShapeMismatch,
                "nll: " + std::to_string(dataset.size()) + " instances but " +
                    std::to_string(forecasts.size()) + " forecasts");
  }
  const std::size_t n_count = dataset.size();
  const auto j_count = static_cast<Eigen::Index>(t_primes.size());
  Eigen::MatrixXd values(static_cast<Eigen::Index>(n_count), j_count);
  std::vector<char> failed(n_count, 0);

  parallel_for(n_count, threads, [&](std::size_t n) {
    const Instance &instance = dataset.instances[n];
    const MixtureForecast &forecast = forecasts[n];
    if (forecast.id() != instance.id ||
        forecast.horizon() != instance.profile.size()) {
      throw Error(ErrorKind::kShapeMismatch,
                  "nll: forecast '" + forecast.id() +
                      "' does not match instance '" + instance.id + "'");
    }
    // Non-owning handle; the forecast outlives every update built here.
    const std::shared_ptr<const MixtureForecast> handle(
        std::shared_ptr<const void>(), &forecast);
    const Eigen::Index horizon = forecast.horizon();
    try {
      for (Eigen::Index j = 0; j < j_count; ++j) {
        const Eigen::Index t_prime = t_primes[static_cast<std::size_t>(j)];
        const IntradayUpdate upd =
            variant == Variant::kUpdated
                ? update(handle, instance.profile.head(t_prime))
                : non_updated(forecast, t_prime);
        values(static_cast<Eigen::Index>(n), j) = predictive_log_density(
            upd, instance.profile.tail(horizon - t_prime));
      }
    } catch (const Error &e) {
      if (e.error_category() != ErrorCategory::kNumerical) {
        throw;
      }
      failed[n] = 1;
    }
  });

  NllResult result;
  result.trace.metric = "nll";
  result.trace.variant = variant;
  result.trace.dataset = dataset.tag;
  std::vector<Eigen::Index> kept;
  for (std::size_t n = 0; n < n_count; ++n) {
    if (failed[n]) {
      result.failed_instances.push_back(dataset.instances[n].id);
    } else {
      kept.push_back(static_cast<Eigen::Index>(n));
    }
  }
  result.log_densities.resize(static_cast<Eigen::Index>(kept.size()), j_count);
  for (std::size_t r = 0; r < kept.size(); ++r) {
    result.log_densities.row(static_cast<Eigen::Index>(r)) = values.row(kept[r]);
  }
  if (!kept.empty()) {
    for (Eigen::Index j = 0; j < j_count; ++j) {
      double sum = 0.0;
      for (Eigen::Index r = 0; r < result.log_densities.rows(); ++r) {
        sum += result.log_densities(r, j);
      }
      result.trace.values[t_primes[static_cast<std::size_t>(j)]] =
          -sum / static_cast<double>(kept.size());
    }
  }
  return result;
}

WaterfallGrid ae_grid(const Dataset &dataset, std::span<const Ensemble> ensembles,
                      Variant variant) {
  WaterfallGrid grid;
  grid.variant = variant;
  if (dataset.size() == 0) {
    return grid;
  }
  const auto groups = group_by_t_prime(dataset, ensembles, "ae_grid");
  for (const auto &[t_prime, group] : groups) {
    const Eigen::Index horizon = dataset.horizon();
    const Eigen::Index rest = horizon - t_prime;
    const Eigen::Index samples = group.front()->size();
    Eigen::VectorXd sums = Eigen::VectorXd::Zero(rest);
    for (std::size_t n = 0; n < group.size(); ++n) {
      const Ensemble &ens = *group[n];
      const Eigen::VectorXd &profile = dataset.instances[n].profile;
      if (profile.size() != horizon || ens.remaining() != rest) {
        throw Error(ErrorKind::kShapeMismatch,
                    "ae_grid: ensemble for '" + ens.source_id +
                        "' has the wrong horizon");
      }
      if (ens.size() != samples) {
        throw Error(ErrorKind::kShapeMismatch,
                    "ae_grid: ensembles at T'=" + std::to_string(t_prime) +
                        " do not share a common S");
      }
      for (Eigen::Index j = 0; j < rest; ++j) {
        sums[j] += (ens.trajectories.col(j).array() - profile[t_prime + j])
                       .abs()
                       .sum();
      }
    }
    const double denom =
        static_cast<double>(group.size()) * static_cast<double>(samples);
    for (Eigen::Index j = 0; j < rest; ++j) {
      grid.values[{t_prime, t_prime + 1 + j}] = sums[j] / denom;
    }
  }
  return grid;
}

PerformanceTrace mae_trace(const WaterfallGrid &grid, const StepMask &mask,
                           DatasetTag dataset) {
  PerformanceTrace trace;
  trace.metric = "mae";
  trace.variant = grid.variant;
  trace.dataset = dataset;
  std::map<Eigen::Index, std::vector<double>> rows;
  for (const auto &[key, value] : grid.values) {
    rows[key.first].push_back(value); // map order: t ascending within T'
  }
  for (const auto &[t_prime, row] : rows) {
    double mean = 0.0;
    if (detail::masked_mean(Eigen::Map<const Eigen::VectorXd>(
                        row.data(), static_cast<Eigen::Index>(row.size())),
                    t_prime, mask, mean)) {
      trace.values[t_prime] = mean;
    }
  }
  return trace;
}

QuantileSet empirical_quantiles(const Ensemble &ensemble,
                                std::span<const double> levels) {
  if (levels.empty()) {
    throw Error(ErrorKind::kInvalidLevels, "no quantile levels");
  }
  for (std::size_t i = 0; i < levels.size(); ++i) {
    if (!(levels[i] > 0.0 && levels[i] < 1.0)) {
      throw Error(ErrorKind::kInvalidLevels,
                  "quantile level " + std::to_string(levels[i]) +
                      " is not strictly inside (0, 1)");
    }
    if (i > 0 && !(levels[i] > levels[i - 1])) {
      throw Error(ErrorKind::kInvalidLevels,
                  "quantile levels must be strictly increasing");
    }
  }
  const Eigen::Index samples = ensemble.size();
  if (samples < 2) {
    throw Error(ErrorKind::kInvalidS, "quantiles need S >= 2");
  }
  QuantileSet out;
  out.levels.assign(levels.begin(), levels.end());
  out.t_prime = ensemble.t_prime;
  out.source_id = ensemble.source_id;
  out.values.resize(static_cast<Eigen::Index>(levels.size()),
                    ensemble.remaining());
  std::vector<double> column(static_cast<std::size_t>(samples));
  for (Eigen::Index j = 0; j < ensemble.remaining(); ++j) {
    for (Eigen::Index s = 0; s < samples; ++s) {
      column[static_cast<std::size_t>(s)] = ensemble.trajectories(s, j);
    }
    std::sort(column.begin(), column.end());
    for (std::size_t i = 0; i < levels.size(); ++i) {
      const double position = levels[i] * static_cast<double>(samples - 1);
      const auto lo = static_cast<std::size_t>(std::floor(position));
      const std::size_t hi = std::min(lo + 1, column.size() - 1);
      const double frac = position - static_cast<double>(lo);
      out.values(static_cast<Eigen::Index>(i), j) =
          column[lo] + frac * (column[hi] - column[lo]);
    }
  }
  return out;
}

CrpsTraces crps_trace(const Dataset &dataset,
                      std::span<const QuantileSet> quantiles,
                      const StepMask &mask, Variant variant, DatasetTag tag) {
  CrpsTraces out;
  out.raw.metric = "crps_raw";
  out.normalized.metric = "crps";
  out.raw.variant = out.normalized.variant = variant;
  out.raw.dataset = out.normalized.dataset = tag;
  if (dataset.size() == 0 || quantiles.empty()) {
    return out;
  }
  const std::vector<double> &levels = quantiles.front().levels;
  for (const auto &set : quantiles) {
    if (set.levels != levels) {
      throw Error(ErrorKind::kShapeMismatch,
                  "crps: quantile levels differ between instances");
    }
  }
  const auto groups = group_by_t_prime(dataset, quantiles, "crps");
  const double n_count = static_cast<double>(dataset.size());
  const double q_count = static_cast<double>(levels.size());
  for (const auto &[t_prime, group] : groups) {
    const Eigen::Index rest = dataset.horizon() - t_prime;
    Eigen::VectorXd zeta = Eigen::VectorXd::Zero(rest);
    for (std::size_t n = 0; n < group.size(); ++n) {
      const QuantileSet &set = *group[n];
      if (set.values.cols() != rest) {
        throw Error(ErrorKind::kShapeMismatch,
                    "crps: quantiles for '" + set.source_id +
                        "' have the wrong horizon");
      }
      const Eigen::VectorXd &profile = dataset.instances[n].profile;
      for (Eigen::Index j = 0; j < rest; ++j) {
        double partial = 0.0;
        for (std::size_t i = 0; i < levels.size(); ++i) {
          partial += pinball_loss(levels[i], profile[t_prime + j],
                                  set.values(static_cast<Eigen::Index>(i), j));
        }
        zeta[j] += partial;
      }
    }
    zeta *= 2.0 / n_count;
    double mean = 0.0;
    if (detail::masked_mean(zeta, t_prime, mask, mean)) {
      out.raw.values[t_prime] = mean;
      out.normalized.values[t_prime] = mean / q_count;
    }
  }
  return out;
}

PerformanceTrace rmse_trace(const Dataset &dataset,
                            std::span<const PointForecast> points,
                            const StepMask &mask, Variant variant,
                            DatasetTag tag) {
  PerformanceTrace trace;
  trace.metric = "rmse";
  trace.variant = variant;
  trace.dataset = tag;
  if (dataset.size() == 0) {
    return trace;
  }
  const auto groups = group_by_t_prime(dataset, points, "rmse");
  for (const auto &[t_prime, group] : groups) {
    const Eigen::Index rest = dataset.horizon() - t_prime;
    double sum_of_roots = 0.0;
    bool any_step = false;
    for (std::size_t n = 0; n < group.size(); ++n) {
      const PointForecast &point = *group[n];
      if (point.values.size() != rest) {
        throw Error(ErrorKind::kShapeMismatch,
                    "rmse: point forecast for '" + point.source_id +
                        "' has the wrong horizon");
      }
      const Eigen::VectorXd squared =
          (dataset.instances[n].profile.tail(rest) - point.values)
              .array()
              .square()
              .matrix();
      double mse = 0.0;
      if (detail::masked_mean(squared, t_prime, mask, mse)) {
        sum_of_roots += std::sqrt(mse);
        any_step = true;
      }
    }
    if (any_step) {
      trace.values[t_prime] = sum_of_roots / static_cast<double>(group.size());
    }
  }
  return trace;
}

} // namespace intraday
