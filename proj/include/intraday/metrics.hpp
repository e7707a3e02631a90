#ifndef INTRADAY_METRICS_HPP_
#define INTRADAY_METRICS_HPP_

#include <map>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include <Eigen/Core>

#include "intraday/dataset.hpp"
#include "intraday/mixture.hpp"
#include "intraday/sampler.hpp"
#include "intraday/update.hpp"

namespace intraday {

/// Metric values indexed by update time T'.
struct PerformanceTrace {
  std::string metric;
  Variant variant = Variant::kUpdated;
  DatasetTag dataset = DatasetTag::kReal;
  std::map<Eigen::Index, double> values;
};

/// AE(T', t) for 1-based forecast steps t in [T' + 1, T].
struct WaterfallGrid {
  Variant variant = Variant::kUpdated;
  std::map<std::pair<Eigen::Index, Eigen::Index>, double> values;
};

/// Ensemble quantiles: row i holds level i across the remaining horizon.
struct QuantileSet {
  std::vector<double> levels;
  Eigen::MatrixXd values; // Q x (T - T')
  Eigen::Index t_prime = 0;
  std::string source_id;
};

/// Point forecast over the remaining horizon (usually mixture_mean).
struct PointForecast {
  std::string source_id;
  Eigen::Index t_prime = 0;
  Eigen::VectorXd values;
};

/// Which time steps take part in the t-averages. Steps in the trailing
/// `excluded_tail` window are dropped from aggregation but still used as
/// observations.
struct StepMask {
  Eigen::Index horizon = 0;
  Eigen::Index excluded_tail = 0;

  static StepMask all(Eigen::Index horizon) { return {horizon, 0}; }
  /// 96 quarter-hours with the 28 evening steps after 17:00 excluded.
  static StepMask pv(Eigen::Index horizon = 96) { return {horizon, 28}; }
};

/// Whether 1-based step t participates in metric aggregation.
bool step_mask(const StepMask &mask, Eigen::Index t);

/// {0.05, 0.10, ..., 0.95}.
std::vector<double> default_quantile_levels();

/// max(q (x - y), (1 - q)(y - x)).
double pinball_loss(double level, double truth, double quantile);

struct NllResult {
  PerformanceTrace trace;
  std::vector<std::string> failed_instances;
  /// Per-instance log predictive densities: rows follow the instances that
  /// did not fail, columns follow the requested T' values.
  Eigen::MatrixXd log_densities;
};

/// NLL(T') = -(1/N) sum_n log p(x_n^{T':} | x_n^{:T'}). Forecasts are
/// matched to instances by position and id. Instances whose conditioning
/// fails at any T' are reported and excluded.
NllResult nll_trace(const Dataset &dataset,
                    std::span<const MixtureForecast> forecasts,
                    std::span<const Eigen::Index> t_primes, Variant variant,
                    int threads = 1);

/// AE(T', t) = (1 / (N S)) sum_{n,s} |x_{t,n} - xhat_{t,n,s}|. Ensembles are
/// grouped by T' and matched to instances by id; every T' group must cover
/// every instance with a common S.
WaterfallGrid ae_grid(const Dataset &dataset,
                      std::span<const Ensemble> ensembles,
                      Variant variant = Variant::kUpdated);

/// MAE(T') = mean of AE(T', t) over unmasked t > T'.
PerformanceTrace mae_trace(const WaterfallGrid &grid, const StepMask &mask,
                           DatasetTag dataset = DatasetTag::kReal);

/// Quantiles per time step by linear interpolation between order statistics
/// at 1-based position q (S - 1) + 1. Levels must be strictly increasing in
/// (0, 1) and S >= 2.
QuantileSet empirical_quantiles(const Ensemble &ensemble,
                                std::span<const double> levels);

struct CrpsTraces {
  /// mean over t of zeta(T', t) = (2/N) sum_{n,i} pinball
  PerformanceTrace raw;
  /// raw / Q
  PerformanceTrace normalized;
};

CrpsTraces crps_trace(const Dataset &dataset,
                      std::span<const QuantileSet> quantiles,
                      const StepMask &mask,
                      Variant variant = Variant::kUpdated,
                      DatasetTag tag = DatasetTag::kReal);

/// RMSE(T') = (1/N) sum_n sqrt(mean over unmasked t of squared residuals):
/// the root is taken per instance before averaging.
PerformanceTrace rmse_trace(const Dataset &dataset,
                            std::span<const PointForecast> points,
                            const StepMask &mask,
                            Variant variant = Variant::kUpdated,
                            DatasetTag tag = DatasetTag::kReal);

namespace detail {
/// Mean over the unmasked 1-based steps [t_prime + 1, T] of values indexed
/// from t_prime + 1; false when every step is masked.
bool masked_mean(const Eigen::Ref<const Eigen::VectorXd> &per_step,
                 Eigen::Index t_prime, const StepMask &mask, double &out);
} // namespace detail

} // namespace intraday

#endif // INTRADAY_METRICS_HPP_
