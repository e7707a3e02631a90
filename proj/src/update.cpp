#include "intraday/update.hpp"

#include <cmath>
#include <limits>
#include <string>

#include "intraday/error.hpp"

namespace intraday {

IntradayUpdate::IntradayUpdate(std::shared_ptr<const MixtureForecast> source,
                               Eigen::VectorXd observations,
                               CachePolicy policy)
    : source_(std::move(source)), observations_(std::move(observations)),
      policy_(policy),
      computations_(std::make_unique<std::atomic<std::size_t>>(0)) {
  if (!source_) {
    throw Error(ErrorKind::kInvalidArgument, "update without a forecast");
  }
  const Eigen::Index t_prime = observations_.size();
  if (t_prime >= source_->horizon()) {
    throw Error(ErrorKind::kOutOfBounds,
                "update needs 0 <= T' < T; got T'=" + std::to_string(t_prime) +
                    " with T=" + std::to_string(source_->horizon()) +
                    " (nothing left to forecast)");
  }
  if (!observations_.allFinite()) {
    throw Error(ErrorKind::kNonFiniteInput, "observations are not finite");
  }

  const std::size_t k_count = source_->size();
  observed_factors_.resize(k_count);
  if (t_prime == 0) {
    weights_ = {source_->weights(), 0};
  } else {
    std::vector<double> log_likelihoods(k_count);
    for (std::size_t k = 0; k < k_count; ++k) {
      const MvnComponent &component = source_->component(k);
      try {
        observed_factors_[k] =
            factorize(component.covariance().topLeftCorner(t_prime, t_prime));
        log_likelihoods[k] = gaussian_log_density(
            *observed_factors_[k], component.mean().head(t_prime), observations_);
      } catch (const Error &e) {
        if (e.kind() != ErrorKind::kNotPositiveDefinite) {
          throw;
        }
        log_likelihoods[k] = -std::numeric_limits<double>::infinity();
      }
    }
    const Eigen::VectorXd &w = source_->weights();
    weights_ = {responsibilities(std::span<const double>(w.data(), w.size()),
                                 log_likelihoods),
                t_prime};
  }
  slots_ = std::make_unique<Slot[]>(k_count);
}

std::shared_ptr<ConditionedComponent>
IntradayUpdate::compute(std::size_t k) const {
  computations_->fetch_add(1, std::memory_order_relaxed);
  const MvnComponent &component = source_->component(k);
  if (t_prime() == 0) {
    return std::make_shared<ConditionedComponent>(
        marginal_component(component, 0));
  }
  if (!observed_factors_[k]) {
    throw Error(ErrorKind::kNotPositiveDefinite,
                "component " + std::to_string(k) +
                    " has a non-factorizable observed block");
  }
  if (policy_ == CachePolicy::kDisabled) {
    // nothing reused: the observed block is factorized again
    return std::make_shared<ConditionedComponent>(
        condition_component(component, observations_));
  }
  return std::make_shared<ConditionedComponent>(
      condition_component(component, observations_, *observed_factors_[k]));
}

std::shared_ptr<const ConditionedComponent>
IntradayUpdate::conditioned(std::size_t k) const {
  if (k >= source_->size()) {
    throw Error(ErrorKind::kOutOfBounds,
                "component index " + std::to_string(k) + " out of range");
  }
  if (policy_ == CachePolicy::kDisabled) {
    return compute(k);
  }
  Slot &slot = slots_[k];
  std::call_once(slot.once, [&] { slot.value = compute(k); });
  return slot.value;
}

bool IntradayUpdate::is_cached(std::size_t k) const {
  return policy_ == CachePolicy::kEnabled && k < source_->size() &&
         slots_[k].value != nullptr;
}

std::size_t IntradayUpdate::conditioning_count() const {
  return computations_->load(std::memory_order_relaxed);
}

IntradayUpdate update(std::shared_ptr<const MixtureForecast> forecast,
                      const Eigen::Ref<const Eigen::VectorXd> &obs,
                      CachePolicy policy) {
  return IntradayUpdate(std::move(forecast), obs, policy);
}

IntradayUpdate update(const MixtureForecast &forecast,
                      const Eigen::Ref<const Eigen::VectorXd> &obs,
                      CachePolicy policy) {
  return IntradayUpdate(std::make_shared<const MixtureForecast>(forecast), obs,
                        policy);
}

IntradayUpdate non_updated(const MixtureForecast &forecast,
                           Eigen::Index t_prime, CachePolicy policy) {
  if (t_prime < 0 || t_prime >= forecast.horizon()) {
    throw Error(ErrorKind::kOutOfBounds,
                "non-updated baseline needs 0 <= T' < T, got T'=" +
                    std::to_string(t_prime));
  }
  auto marginal = std::make_shared<const MixtureForecast>(
      marginalize(forecast, StepRange{t_prime + 1, forecast.horizon()}));
  return IntradayUpdate(std::move(marginal), Eigen::VectorXd(0), policy);
}

double predictive_log_density(const IntradayUpdate &update,
                              const Eigen::Ref<const Eigen::VectorXd> &x_future) {
  if (x_future.size() != update.remaining()) {
    throw Error(ErrorKind::kDimensionMismatch,
                "predictive density expects " +
                    std::to_string(update.remaining()) + " values, got " +
                    std::to_string(x_future.size()));
  }
  const Eigen::VectorXd &gamma = update.gamma();
  Eigen::VectorXd terms(gamma.size());
  for (Eigen::Index k = 0; k < gamma.size(); ++k) {
    if (gamma[k] <= 0.0) {
      terms[k] = -std::numeric_limits<double>::infinity();
      continue;
    }
    const auto comp = update.conditioned(static_cast<std::size_t>(k));
    terms[k] = std::log(gamma[k]) +
               gaussian_log_density(comp->factor, comp->mean, x_future);
  }
  return log_sum_exp(terms);
}

Eigen::VectorXd mixture_mean(const IntradayUpdate &update) {
  const Eigen::VectorXd &gamma = update.gamma();
  Eigen::VectorXd mean = Eigen::VectorXd::Zero(update.remaining());
  for (Eigen::Index k = 0; k < gamma.size(); ++k) {
    if (gamma[k] > 0.0) {
      mean += gamma[k] * update.conditioned(static_cast<std::size_t>(k))->mean;
    }
  }
  return mean;
}

MixtureForecast as_forecast(const IntradayUpdate &update) {
  std::vector<MvnComponent> components;
  components.reserve(update.source().size());
  for (std::size_t k = 0; k < update.source().size(); ++k) {
    const auto comp = update.conditioned(k);
    components.emplace_back(comp->mean, CovarianceSpec::dense(comp->covariance));
  }
  return MixtureForecast(update.source().id(), std::move(components),
                         update.gamma(), update.source().condition());
}

IntradayUpdate extend(const IntradayUpdate &update,
                      const Eigen::Ref<const Eigen::VectorXd> &new_obs,
                      CachePolicy policy) {
  return IntradayUpdate(std::make_shared<const MixtureForecast>(as_forecast(update)),
                        new_obs, policy);
}

} // namespace intraday
