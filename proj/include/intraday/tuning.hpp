#ifndef INTRADAY_TUNING_HPP_
#define INTRADAY_TUNING_HPP_

#include <cstdint>
#include <map>
#include <span>
#include <vector>

#include "intraday/dataset.hpp"
#include "intraday/metrics.hpp"
#include "intraday/mixture.hpp"
#include "intraday/synthgen.hpp"

namespace intraday {

struct TuningReport {
  std::vector<std::size_t> k_grid;
  /// Mean |NLL_best(T') - NLL_synth(T')| over T' = 1 .. T-1.
  std::map<std::size_t, double> gap;
  std::size_t k_star = 0;
  /// Updated-variant NLL traces per K, best-case and synthetic.
  std::map<std::size_t, PerformanceTrace> best_case;
  std::map<std::size_t, PerformanceTrace> synthetic;
};

/// One draw per forecast from its own mixture, with the generating component
/// recorded. Instance ids and conditions are copied from the forecasts.
Dataset build_best_case_set(std::span<const MixtureForecast> forecasts,
                            std::uint64_t seed);

/// One fresh ground-truth draw per condition; ids are "synth-<n>".
Dataset build_synthetic_set(const GroundTruth &truth,
                            const std::vector<std::vector<double>> &conditions,
                            std::uint64_t seed);

/// Mean absolute difference of two traces over T' = 1 .. T-1.
double trace_gap(const PerformanceTrace &a, const PerformanceTrace &b,
                 Eigen::Index horizon);

/// Index of the smallest gap; ties go to the smallest K.
std::size_t argmin_gap(const std::map<std::size_t, double> &gap);

struct TuningSeeds {
  /// Latent seeds of the K-component forecasts (shared prefix across K).
  std::uint64_t forecast = 1;
  std::uint64_t best_case = 2;
  /// Ground-truth draws, shared across K.
  std::uint64_t synthetic = 3;
};

/// For each K on the grid: a K-component forecast per condition, the NLL
/// trace on a best-case set drawn from those forecasts and on one synthetic
/// set shared by all K, and their gap.
TuningReport select_k(std::span<const std::size_t> k_grid,
                      const GroundTruth &truth,
                      const std::vector<std::vector<double>> &conditions,
                      const TuningSeeds &seeds, int threads = 1);

} // namespace intraday

#endif // INTRADAY_TUNING_HPP_
