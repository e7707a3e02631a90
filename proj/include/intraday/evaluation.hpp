#ifndef INTRADAY_EVALUATION_HPP_
#define INTRADAY_EVALUATION_HPP_

#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include <Eigen/Core>

#include "intraday/dataset.hpp"
#include "intraday/metrics.hpp"
#include "intraday/mixture.hpp"
#include "intraday/update.hpp"

namespace intraday {

struct EvaluationOptions {
  /// Update times to evaluate; empty means 0 .. T-1.
  std::vector<Eigen::Index> t_primes;
  /// Ensemble size; 0 means S = max(K, 2) per instance.
  std::size_t samples = 0;
  std::uint64_t seed = 0;
  std::vector<double> levels = default_quantile_levels();
  /// Trailing steps excluded from the t-averages (PV-style configs).
  Eigen::Index excluded_tail = 0;
  CachePolicy cache = CachePolicy::kEnabled;
  /// Instance-level parallelism used by evaluate().
  int threads = 1;
};

struct VariantEvaluation {
  Variant variant = Variant::kUpdated;
  PerformanceTrace nll;
  PerformanceTrace mae;
  PerformanceTrace crps;
  PerformanceTrace crps_raw;
  PerformanceTrace rmse;
  WaterfallGrid grid;
  /// log predictive densities, kept instances x T' values.
  Eigen::MatrixXd log_densities;
};

struct EvaluationResult {
  std::vector<Eigen::Index> t_primes;
  VariantEvaluation updated;
  VariantEvaluation non_updated;
  /// Instances with a numerical failure in either variant at any T'; they
  /// are excluded from both variants.
  std::vector<std::string> failed_instances;

  /// All traces, updated variant first, metrics in a fixed order.
  std::vector<PerformanceTrace> traces() const;
};

/// Reference implementation: one instance after another.
EvaluationResult evaluate_serial(const Dataset &dataset,
                                 std::span<const MixtureForecast> forecasts,
                                 const EvaluationOptions &options);

/// Instances spread over an OpenMP team. Bit-identical to evaluate_serial
/// for any thread count: every instance writes its own record and the
/// reduction runs serially in instance order.
EvaluationResult evaluate_parallel(const Dataset &dataset,
                                   std::span<const MixtureForecast> forecasts,
                                   const EvaluationOptions &options,
                                   int threads);

/// evaluate_serial when options.threads <= 1, else evaluate_parallel.
EvaluationResult evaluate(const Dataset &dataset,
                          std::span<const MixtureForecast> forecasts,
                          const EvaluationOptions &options);

/// Mean and standard error of the paired differences a - b.
struct PairedStats {
  double mean = 0.0;
  double standard_error = 0.0;
};
PairedStats paired_difference(const Eigen::Ref<const Eigen::VectorXd> &a,
                              const Eigen::Ref<const Eigen::VectorXd> &b);

} // namespace intraday

#endif // INTRADAY_EVALUATION_HPP_
