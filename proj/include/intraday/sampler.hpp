#ifndef INTRADAY_SAMPLER_HPP_
#define INTRADAY_SAMPLER_HPP_

#include <cstdint>
#include <string>
#include <vector>

#include <Eigen/Core>

#include "intraday/mixture.hpp"
#include "intraday/update.hpp"

namespace intraday {

/// S equiprobable trajectories over the remaining horizon.
struct Ensemble {
  Eigen::MatrixXd trajectories; // S x (T - T')
  std::vector<int> components;  // selected component per trace
  Eigen::Index t_prime = 0;
  std::uint64_t seed = 0;
  std::string source_id;

  Eigen::Index size() const { return trajectories.rows(); }
  Eigen::Index remaining() const { return trajectories.cols(); }
};

/// Hierarchical sampling: per trace, pick a component from Categorical(gamma),
/// fetch its conditioned moments (cached by the update when enabled) and draw
/// mean + L z with z ~ N(0, I).
///
/// Trace s uses its own counter-based substream keyed by
/// (seed, source id, source horizon, T', s), so the ensemble does not depend
/// on the order traces are drawn in or on the cache policy.
Ensemble sample_ensemble(const IntradayUpdate &update, std::size_t samples,
                         std::uint64_t seed);

/// Samples the day-ahead mixture (T' = 0, prior weights).
Ensemble sample_day_ahead(const MixtureForecast &forecast, std::size_t samples,
                          std::uint64_t seed);

/// Index of the component selected by a uniform draw u in [0, 1) against
/// the cumulative weights. Zero-weight components are never returned.
std::size_t select_component(const Eigen::Ref<const Eigen::VectorXd> &weights,
                             double u);

} // namespace intraday

#endif // INTRADAY_SAMPLER_HPP_
