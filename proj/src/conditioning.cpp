#include "intraday/conditioning.hpp"

#include <cmath>
#include <limits>
#include <string>
#include <vector>

#include "intraday/error.hpp"

namespace intraday {

namespace {

void check_prefix(const MvnComponent &component, Eigen::Index observed) {
  if (observed < 1 || observed >= component.dimension()) {
    throw Error(ErrorKind::kDimensionMismatch,
                "conditioning needs 1 <= T' < T, got T'=" +
                    std::to_string(observed) +
                    " with T=" + std::to_string(component.dimension()));
  }
}

} // namespace

ConditionedComponent
condition_component(const MvnComponent &component,
                    const Eigen::Ref<const Eigen::VectorXd> &obs) {
  check_prefix(component, obs.size());
  const Eigen::Index t_prime = obs.size();
  return condition_component(
      component, obs,
      factorize(component.covariance().topLeftCorner(t_prime, t_prime)));
}

ConditionedComponent
condition_component(const MvnComponent &component,
                    const Eigen::Ref<const Eigen::VectorXd> &obs,
                    const CholeskyFactor &observed_factor) {
  check_prefix(component, obs.size());
  if (!obs.allFinite()) {
    throw Error(ErrorKind::kNonFiniteInput, "observations are not finite");
  }
  const Eigen::Index t_prime = obs.size();
  const Eigen::Index rest = component.dimension() - t_prime;
  if (observed_factor.size() != t_prime) {
    throw Error(ErrorKind::kDimensionMismatch,
                "observed-block factor does not match T'");
  }
  const Eigen::MatrixXd &cov = component.covariance();
  const auto lower = observed_factor.lower.triangularView<Eigen::Lower>();

  // W = L^{-1} S_x^T, so S_x S_o^{-1} S_x^T = W^T W.
  Eigen::MatrixXd w = cov.block(0, t_prime, t_prime, rest);
  lower.solveInPlace(w);
  Eigen::VectorXd residual = obs - component.mean().head(t_prime);
  lower.solveInPlace(residual);

  ConditionedComponent out;
  out.mean = component.mean().tail(rest) + w.transpose() * residual;
  out.covariance = cov.bottomRightCorner(rest, rest);
  out.covariance.selfadjointView<Eigen::Lower>().rankUpdate(w.transpose(), -1.0);
  out.covariance.triangularView<Eigen::StrictlyUpper>() =
      out.covariance.transpose();
  out.factor = factorize(out.covariance);
  return out;
}

ConditionedComponent marginal_component(const MvnComponent &component,
                                        Eigen::Index t_prime) {
  if (t_prime < 0 || t_prime >= component.dimension()) {
    throw Error(ErrorKind::kOutOfBounds,
                "marginal needs 0 <= T' < T, got T'=" + std::to_string(t_prime));
  }
  const Eigen::Index rest = component.dimension() - t_prime;
  ConditionedComponent out;
  out.mean = component.mean().tail(rest);
  out.covariance = component.covariance().bottomRightCorner(rest, rest);
  out.factor = factorize(out.covariance);
  return out;
}

Eigen::VectorXd responsibilities(std::span<const double> prior_weights,
                                 std::span<const double> log_likelihoods) {
  constexpr double kNegInf = -std::numeric_limits<double>::infinity();
  if (prior_weights.size() != log_likelihoods.size()) {
    throw Error(ErrorKind::kDimensionMismatch,
                "responsibilities: weight and likelihood counts differ");
  }
  const auto k = static_cast<Eigen::Index>(prior_weights.size());
  Eigen::VectorXd log_post(k);
  double peak = kNegInf;
  for (Eigen::Index i = 0; i < k; ++i) {
    const double prior = prior_weights[static_cast<std::size_t>(i)];
    const double ll = log_likelihoods[static_cast<std::size_t>(i)];
    if (prior < 0.0 || std::isnan(prior)) {
      throw Error(ErrorKind::kInvalidArgument,
                  "responsibilities: negative prior weight");
    }
    const double value =
        prior > 0.0 && std::isfinite(ll) ? std::log(prior) + ll : kNegInf;
    log_post[i] = value;
    if (value > peak) {
      peak = value;
    }
  }
  if (!std::isfinite(peak)) {
    throw Error(ErrorKind::kAllComponentsDegenerate,
                "every component has zero posterior weight");
  }
  Eigen::VectorXd gamma(k);
  for (Eigen::Index i = 0; i < k; ++i) {
    gamma[i] = log_post[i] == kNegInf ? 0.0 : std::exp(log_post[i] - peak);
  }
  gamma /= gamma.sum();
  return gamma;
}

PosteriorWeights posterior_weights(const MixtureForecast &forecast,
                                   const Eigen::Ref<const Eigen::VectorXd> &obs) {
  const Eigen::Index t_prime = obs.size();
  if (t_prime > forecast.horizon()) {
    throw Error(ErrorKind::kOutOfBounds,
                "posterior weights: T'=" + std::to_string(t_prime) +
                    " exceeds T=" + std::to_string(forecast.horizon()));
  }
  if (t_prime == 0) {
    return {forecast.weights(), 0};
  }
  if (!obs.allFinite()) {
    throw Error(ErrorKind::kNonFiniteInput, "observations are not finite");
  }
  std::vector<double> log_likelihoods(forecast.size());
  for (std::size_t k = 0; k < forecast.size(); ++k) {
    const MvnComponent &component = forecast.component(k);
    try {
      const CholeskyFactor factor =
          factorize(component.covariance().topLeftCorner(t_prime, t_prime));
      log_likelihoods[k] =
          gaussian_log_density(factor, component.mean().head(t_prime), obs);
    } catch (const Error &e) {
      if (e.kind() != ErrorKind::kNotPositiveDefinite) {
        throw;
      }
      log_likelihoods[k] = -std::numeric_limits<double>::infinity();
    }
  }
  const Eigen::VectorXd &w = forecast.weights();
  return {responsibilities(std::span<const double>(w.data(), w.size()),
                           log_likelihoods),
          t_prime};
}

} // namespace intraday
