#ifndef INTRADAY_UPDATE_HPP_
#define INTRADAY_UPDATE_HPP_

#include <atomic>
#include <memory>
#include <mutex>
#include <optional>
#include <vector>

#include <Eigen/Core>

#include "intraday/conditioning.hpp"
#include "intraday/mixture.hpp"

namespace intraday {

/// Whether conditioned components are stored after their first use.
enum class CachePolicy { kEnabled, kDisabled };

/// The intraday forecast after observing the first t_prime steps: posterior
/// weights plus lazily conditioned remaining-horizon components.
///
/// Conditioned components are computed on first request and, with caching
/// enabled, stored write-once per slot. Concurrent readers are safe.
class IntradayUpdate {
public:
  IntradayUpdate(std::shared_ptr<const MixtureForecast> source,
                 Eigen::VectorXd observations,
                 CachePolicy policy = CachePolicy::kEnabled);

  IntradayUpdate(IntradayUpdate &&) noexcept = default;
  IntradayUpdate &operator=(IntradayUpdate &&) noexcept = default;

  const MixtureForecast &source() const { return *source_; }
  const std::shared_ptr<const MixtureForecast> &source_ptr() const {
    return source_;
  }
  Eigen::Index t_prime() const { return observations_.size(); }
  Eigen::Index horizon() const { return source_->horizon(); }
  Eigen::Index remaining() const { return horizon() - t_prime(); }
  const Eigen::VectorXd &observations() const { return observations_; }
  const PosteriorWeights &weights() const { return weights_; }
  const Eigen::VectorXd &gamma() const { return weights_.gamma; }
  CachePolicy cache_policy() const { return policy_; }

  /// Conditioned component k. With caching disabled every call conditions
  /// from scratch, observed-block factor included.
  std::shared_ptr<const ConditionedComponent> conditioned(std::size_t k) const;

  /// True when slot k has been populated (always false without caching).
  bool is_cached(std::size_t k) const;

  /// Number of conditioning computations performed so far.
  std::size_t conditioning_count() const;

private:
  struct Slot {
    std::once_flag once;
    std::shared_ptr<const ConditionedComponent> value;
  };

  std::shared_ptr<ConditionedComponent> compute(std::size_t k) const;

  std::shared_ptr<const MixtureForecast> source_;
  Eigen::VectorXd observations_;
  CachePolicy policy_;
  PosteriorWeights weights_;
  // Factors of the observed blocks from the weight computation, reused by
  // conditioning. Empty optional when the block did not factorize.
  std::vector<std::optional<CholeskyFactor>> observed_factors_;
  std::unique_ptr<Slot[]> slots_;
  std::unique_ptr<std::atomic<std::size_t>> computations_;
};

/// Updates a day-ahead forecast with the observed prefix `obs`
/// (0 <= obs.size() < T). T' = T is rejected.
IntradayUpdate update(std::shared_ptr<const MixtureForecast> forecast,
                      const Eigen::Ref<const Eigen::VectorXd> &obs,
                      CachePolicy policy = CachePolicy::kEnabled);

IntradayUpdate update(const MixtureForecast &forecast,
                      const Eigen::Ref<const Eigen::VectorXd> &obs,
                      CachePolicy policy = CachePolicy::kEnabled);

/// The non-updated baseline at t_prime: the day-ahead marginal over
/// [t_prime + 1, T], wrapped as an update with no observations.
IntradayUpdate non_updated(const MixtureForecast &forecast,
                           Eigen::Index t_prime,
                           CachePolicy policy = CachePolicy::kEnabled);

/// log sum_k gamma_k N(x_future; conditioned_k). Populates the cache.
double predictive_log_density(const IntradayUpdate &update,
                              const Eigen::Ref<const Eigen::VectorXd> &x_future);

/// sum_k gamma_k * conditioned mean_k.
Eigen::VectorXd mixture_mean(const IntradayUpdate &update);

/// The predictive distribution as a mixture over the remaining horizon with
/// the posterior weights as priors and dense conditioned covariances.
MixtureForecast as_forecast(const IntradayUpdate &update);

/// Chains a further update: conditions the predictive distribution of
/// `update` on the next new_obs.size() observed steps.
IntradayUpdate extend(const IntradayUpdate &update,
                      const Eigen::Ref<const Eigen::VectorXd> &new_obs,
                      CachePolicy policy = CachePolicy::kEnabled);

} // namespace intraday

#endif // INTRADAY_UPDATE_HPP_
