#ifndef INTRADAY_SYNTHGEN_HPP_
#define INTRADAY_SYNTHGEN_HPP_

#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include <Eigen/Core>

#include "intraday/mixture.hpp"
#include "intraday/random.hpp"

namespace intraday {

enum class CovarianceStyle { kDiagonal, kPdcc };

/// Parameters of the synthetic daily-profile process.
struct GeneratorConfig {
  Eigen::Index horizon = 24;
  /// Number of smooth bump functions driven by the latent vector.
  Eigen::Index latent_dim = 6;
  double base_level = 1.0;
  double daily_amplitude = 0.6;
  double second_harmonic = 0.25;
  /// Scale of the latent-driven mean offsets.
  double latent_amplitude = 0.5;
  /// Width of the bump functions and dictionary patterns, in steps.
  double smoothness = 2.5;
  /// Typical per-step standard deviation within a component.
  double noise_scale = 0.15;
  CovarianceStyle covariance = CovarianceStyle::kPdcc;
  /// Dictionary size V; 0 means V = T.
  Eigen::Index dictionary_size = 0;
  double ridge = 1e-4;
  /// Finite pool of M latent draws; 0 means a fresh latent per seed.
  std::uint64_t pool_size = 64;
  std::uint64_t seed = 1;

  /// Throws InvalidConfig.
  void validate() const;
};

/// One draw of the process together with the latent seed that produced it.
struct DayDraw {
  Eigen::VectorXd profile;
  std::uint64_t component_seed = 0;
};

/// A frozen instance of the process. In finite-pool mode the process is
/// itself a uniform mixture of pool_size Gaussians per condition.
class GroundTruth {
public:
  explicit GroundTruth(GeneratorConfig config);

  const GeneratorConfig &config() const { return config_; }
  Eigen::Index horizon() const { return config_.horizon; }
  /// Shared dictionary (pdcc style), null for diagonal.
  const DictionaryPtr &dictionary() const { return dictionary_; }

  /// Deterministic map (condition, component seed) -> component.
  MvnComponent component(std::span<const double> condition,
                         std::uint64_t component_seed) const;

  /// Condition-dependent part of the mean, shared by all components.
  Eigen::VectorXd mean_process(std::span<const double> condition) const;

  /// Draws a latent component seed: uniform on [0, M) in finite-pool mode,
  /// any 64-bit value otherwise.
  std::uint64_t draw_component_seed(Substream &rng) const;

private:
  GeneratorConfig config_;
  DictionaryPtr dictionary_;
  Eigen::MatrixXd bumps_; // T x latent_dim
};

GroundTruth make_ground_truth(const GeneratorConfig &config);

/// K-component uniform mixture from K latent seeds drawn from `seed`; the
/// first k seeds are shared by every K drawn from the same seed.
MixtureForecast approximate_forecast(const GroundTruth &truth, std::string id,
                                     std::span<const double> condition,
                                     std::size_t components, std::uint64_t seed);

/// Uniform mixture over an explicit list of latent seeds.
MixtureForecast forecast_from_seeds(const GroundTruth &truth, std::string id,
                                    std::span<const double> condition,
                                    std::span<const std::uint64_t> seeds);

/// The exact finite-pool process: every pool member with weight 1/M.
MixtureForecast pool_forecast(const GroundTruth &truth, std::string id,
                              std::span<const double> condition);

/// One profile: a latent seed, then a draw from its component.
DayDraw draw_day(const GroundTruth &truth, std::span<const double> condition,
                 std::uint64_t seed);

/// Day-of-week style conditions: [sin, cos] of a random weekday phase.
std::vector<std::vector<double>> make_conditions(std::size_t count,
                                                 std::uint64_t seed);

} // namespace intraday

#endif // INTRADAY_SYNTHGEN_HPP_
