#include "intraday/synthgen.hpp"

#include <cmath>
#include <numbers>
#include <random>
#include <string>

#include "intraday/error.hpp"
#include "intraday/linalg.hpp"

namespace intraday {

namespace {

constexpr std::uint64_t kTagBumps = hash_string("bumps");
constexpr std::uint64_t kTagDictionary = hash_string("dictionary");
constexpr std::uint64_t kTagLatent = hash_string("latent");
constexpr std::uint64_t kTagForecast = hash_string("forecast");
constexpr std::uint64_t kTagDay = hash_string("day");
constexpr std::uint64_t kTagCondition = hash_string("condition");

double bump(double t, double center, double width) {
  const double z = (t - center) / width;
  return std::exp(-0.5 * z * z);
}

} // namespace

void GeneratorConfig::validate() const {
  auto fail = [](const std::string &what) {
    throw Error(ErrorKind::kInvalidConfig, what);
  };
  if (horizon < 2) {
    fail("horizon must be >= 2");
  }
  if (latent_dim < 1) {
    fail("latent_dim must be >= 1");
  }
  if (!(daily_amplitude >= 0.0) || !(second_harmonic >= 0.0) ||
      !(latent_amplitude > 0.0)) {
    fail("amplitudes must be positive");
  }
  if (!(smoothness > 0.0) || !(noise_scale > 0.0)) {
    fail("smoothness and noise_scale must be > 0");
  }
  if (!std::isfinite(base_level)) {
    fail("base_level must be finite");
  }
  if (covariance == CovarianceStyle::kPdcc) {
    if (dictionary_size != 0 && dictionary_size < horizon) {
      fail("pdcc dictionary size V must be >= T");
    }
    if (!(ridge > 0.0)) {
      fail("pdcc ridge must be > 0");
    }
  }
}

GroundTruth::GroundTruth(GeneratorConfig config) : config_(std::move(config)) {
  config_.validate();
  const Eigen::Index horizon = config_.horizon;

  Substream bump_rng(config_.seed, {kTagBumps});
  bumps_.resize(horizon, config_.latent_dim);
  const double spacing = static_cast<double>(horizon) /
                         static_cast<double>(config_.latent_dim);
  for (Eigen::Index j = 0; j < config_.latent_dim; ++j) {
    const double center = (static_cast<double>(j) + 0.5) * spacing +
                          (bump_rng.uniform() - 0.5) * 0.6 * spacing;
    for (Eigen::Index t = 0; t < horizon; ++t) {
      bumps_(t, j) = bump(static_cast<double>(t), center, config_.smoothness);
    }
  }

  if (config_.covariance == CovarianceStyle::kPdcc) {
    const Eigen::Index size =
        config_.dictionary_size == 0 ? horizon : config_.dictionary_size;
    Substream dict_rng(config_.seed, {kTagDictionary});
    Eigen::MatrixXd patterns(horizon, size);
    for (Eigen::Index v = 0; v < size; ++v) {
      if (v < horizon) {
        // local patterns tiling the day
        const double center = static_cast<double>(v) + 0.5;
        const double width = config_.smoothness * (0.6 + 0.8 * dict_rng.uniform());
        for (Eigen::Index t = 0; t < horizon; ++t) {
          patterns(t, v) = bump(static_cast<double>(t), center, width);
        }
      } else {
        // long-range patterns
        const double freq = 1.0 + std::floor(3.0 * dict_rng.uniform());
        const double phase = 2.0 * std::numbers::pi * dict_rng.uniform();
        for (Eigen::Index t = 0; t < horizon; ++t) {
          patterns(t, v) = std::sin(2.0 * std::numbers::pi * freq *
                                        static_cast<double>(t) /
                                        static_cast<double>(horizon) +
                                    phase);
        }
      }
      patterns.col(v).normalize();
    }
    dictionary_ = make_dictionary("synthgen-" + std::to_string(config_.seed),
                                  std::move(patterns), config_.ridge);
  }
}

std::uint64_t GroundTruth::draw_component_seed(Substream &rng) const {
  if (config_.pool_size == 0) {
    return rng();
  }
  std::uniform_int_distribution<std::uint64_t> pick(0, config_.pool_size - 1);
  return pick(rng);
}

Eigen::VectorXd
GroundTruth::mean_process(std::span<const double> condition) const {
  const double phase =
      condition.size() >= 2 ? std::atan2(condition[0], condition[1]) : 0.0;
  const double scale = condition.empty() ? 1.0 : 1.0 + 0.15 * condition[0];
  const auto horizon = static_cast<double>(config_.horizon);
  Eigen::VectorXd mean(config_.horizon);
  for (Eigen::Index t = 0; t < config_.horizon; ++t) {
    const double x = 2.0 * std::numbers::pi * (static_cast<double>(t) + 0.5) /
                     horizon;
    mean[t] = config_.base_level +
              scale * config_.daily_amplitude *
                  std::sin(x - 0.5 * std::numbers::pi + 0.3 * phase) +
              config_.second_harmonic * std::sin(2.0 * x + 0.5 * phase);
  }
  return mean;
}

MvnComponent GroundTruth::component(std::span<const double> condition,
                                    std::uint64_t component_seed) const {
  const std::uint64_t latent_id = config_.pool_size == 0
                                      ? component_seed
                                      : component_seed % config_.pool_size;
  Substream rng(config_.seed, {kTagLatent, latent_id});
  std::normal_distribution<double> normal;

  Eigen::VectorXd latent(config_.latent_dim);
  for (Eigen::Index j = 0; j < latent.size(); ++j) {
    latent[j] = normal(rng);
  }
  const double spread = config_.noise_scale * std::exp(0.3 * normal(rng));
  Eigen::VectorXd mean =
      mean_process(condition) + config_.latent_amplitude * (bumps_ * latent);

  const Eigen::Index scales =
      dictionary_ ? dictionary_->size() : config_.horizon;
  Eigen::VectorXd sigma(scales);
  for (Eigen::Index v = 0; v < scales; ++v) {
    sigma[v] = spread * std::exp(0.35 * normal(rng));
  }
  if (dictionary_) {
    return MvnComponent(std::move(mean),
                        CovarianceSpec::pdcc(dictionary_, std::move(sigma)));
  }
  return MvnComponent(std::move(mean), CovarianceSpec::diagonal(std::move(sigma)));
}

GroundTruth make_ground_truth(const GeneratorConfig &config) {
  return GroundTruth(config);
}

MixtureForecast forecast_from_seeds(const GroundTruth &truth, std::string id,
                                    std::span<const double> condition,
                                    std::span<const std::uint64_t> seeds) {
  std::vector<MvnComponent> components;
  components.reserve(seeds.size());
  for (const auto seed : seeds) {
    components.push_back(truth.component(condition, seed));
  }
  return MixtureForecast(std::move(id), std::move(components),
                         std::vector<double>(condition.begin(), condition.end()));
}

MixtureForecast approximate_forecast(const GroundTruth &truth, std::string id,
                                     std::span<const double> condition,
                                     std::size_t components, std::uint64_t seed) {
  if (components == 0) {
    throw Error(ErrorKind::kInvalidArgument, "K must be >= 1");
  }
  Substream rng(seed, {kTagForecast});
  std::vector<std::uint64_t> seeds(components);
  for (auto &s : seeds) {
    s = truth.draw_component_seed(rng);
  }
  return forecast_from_seeds(truth, std::move(id), condition, seeds);
}

MixtureForecast pool_forecast(const GroundTruth &truth, std::string id,
                              std::span<const double> condition) {
  if (truth.config().pool_size == 0) {
    throw Error(ErrorKind::kInvalidConfig,
                "pool_forecast needs a finite pool");
  }
  std::vector<std::uint64_t> seeds(truth.config().pool_size);
  for (std::uint64_t m = 0; m < seeds.size(); ++m) {
    seeds[m] = m;
  }
  return forecast_from_seeds(truth, std::move(id), condition, seeds);
}

DayDraw draw_day(const GroundTruth &truth, std::span<const double> condition,
                 std::uint64_t seed) {
  Substream rng(seed, {kTagDay});
  DayDraw out;
  out.component_seed = truth.draw_component_seed(rng);
  const MvnComponent comp = truth.component(condition, out.component_seed);
  const CholeskyFactor factor = factorize(comp.covariance());
  std::normal_distribution<double> normal;
  Eigen::VectorXd z(comp.dimension());
  for (Eigen::Index t = 0; t < z.size(); ++t) {
    z[t] = normal(rng);
  }
  out.profile = comp.mean() + factor.lower.triangularView<Eigen::Lower>() * z;
  return out;
}

std::vector<std::vector<double>> make_conditions(std::size_t count,
                                                 std::uint64_t seed) {
  std::vector<std::vector<double>> out;
  out.reserve(count);
  for (std::size_t n = 0; n < count; ++n) {
    Substream rng(seed, {kTagCondition, n});
    std::uniform_int_distribution<int> weekday(0, 6);
    const double phase =
        2.0 * std::numbers::pi * static_cast<double>(weekday(rng)) / 7.0;
    out.push_back({std::sin(phase), std::cos(phase)});
  }
  return out;
}

} // namespace intraday
