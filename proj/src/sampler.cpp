#include "intraday/sampler.hpp"

#include <random>
#include <string>

#include "intraday/error.hpp"
#include "intraday/random.hpp"

namespace intraday {

std::size_t select_component(const Eigen::Ref<const Eigen::VectorXd> &weights,
                             double u) {
  const double target = u * weights.sum();
  double cumulative = 0.0;
  Eigen::Index last_positive = -1;
  for (Eigen::Index k = 0; k < weights.size(); ++k) {
    if (weights[k] <= 0.0) {
      continue;
    }
    cumulative += weights[k];
    last_positive = k;
    if (cumulative > target) {
      return static_cast<std::size_t>(k);
    }
  }
  if (last_positive < 0) {
    throw Error(ErrorKind::kAllComponentsDegenerate,
                "no component has positive weight");
  }
  // u * sum rounded up to the full sum
  return static_cast<std::size_t>(last_positive);
}

Ensemble sample_ensemble(const IntradayUpdate &update, std::size_t samples,
                         std::uint64_t seed) {
  if (samples == 0) {
    throw Error(ErrorKind::kInvalidS, "ensemble size S must be >= 1");
  }
  const auto s_count = static_cast<Eigen::Index>(samples);
  const Eigen::Index rest = update.remaining();
  const std::uint64_t id_hash = hash_string(update.source().id());
  const auto horizon = static_cast<std::uint64_t>(update.horizon());
  const auto t_prime = static_cast<std::uint64_t>(update.t_prime());

  Ensemble out;
  out.trajectories.resize(s_count, rest);
  out.components.resize(samples);
  out.t_prime = update.t_prime();
  out.seed = seed;
  out.source_id = update.source().id();

  Eigen::VectorXd z(rest);
  for (Eigen::Index s = 0; s < s_count; ++s) {
    Substream rng(seed, {id_hash, horizon, t_prime,
                         static_cast<std::uint64_t>(s)});
    const std::size_t k = select_component(update.gamma(), rng.uniform());
    const auto comp = update.conditioned(k);
    std::normal_distribution<double> normal;
    for (Eigen::Index i = 0; i < rest; ++i) {
      z[i] = normal(rng);
    }
    out.trajectories.row(s) =
        (comp->mean + comp->factor.lower.triangularView<Eigen::Lower>() * z)
            .transpose();
    out.components[static_cast<std::size_t>(s)] = static_cast<int>(k);
  }
  return out;
}

Ensemble sample_day_ahead(const MixtureForecast &forecast, std::size_t samples,
                          std::uint64_t seed) {
  return sample_ensemble(update(forecast, Eigen::VectorXd(0)), samples, seed);
}

} // namespace intraday
