#ifndef INTRADAY_CONDITIONING_HPP_
#define INTRADAY_CONDITIONING_HPP_

#include <span>

#include <Eigen/Core>

#include "intraday/linalg.hpp"
#include "intraday/mixture.hpp"

namespace intraday {

/// A component conditioned on an observed prefix, with the Cholesky factor
/// of its covariance kept for density evaluation and sampling.
struct ConditionedComponent {
  Eigen::VectorXd mean;
  Eigen::MatrixXd covariance;
  CholeskyFactor factor;
};

/// Gaussian conditioning on the first obs.size() steps:
///   mean = mu_f + S_x S_o^{-1} (obs - mu_o)
///   cov  = S_f - S_x S_o^{-1} S_x^T
/// with S_o^{-1} applied through the factor of the observed block.
/// Requires 1 <= obs.size() < T.
ConditionedComponent
condition_component(const MvnComponent &component,
                    const Eigen::Ref<const Eigen::VectorXd> &obs);

/// Same as above, reusing an existing factor of the observed block.
ConditionedComponent
condition_component(const MvnComponent &component,
                    const Eigen::Ref<const Eigen::VectorXd> &obs,
                    const CholeskyFactor &observed_factor);

/// The remaining-horizon marginal of a component, packaged as a conditioned
/// component (the T' = 0 case and the non-updated baseline).
ConditionedComponent
marginal_component(const MvnComponent &component, Eigen::Index t_prime);

/// Posterior component weights on the (K-1)-simplex after observing the
/// first t_prime steps.
struct PosteriorWeights {
  Eigen::VectorXd gamma;
  Eigen::Index t_prime = 0;
};

/// gamma_k proportional to prior_k * exp(log_likelihood_k), computed with a
/// max shift. Priors need not be normalised; zero priors and non-finite
/// log-likelihoods get weight 0. Throws AllComponentsDegenerate when no
/// component carries weight.
Eigen::VectorXd responsibilities(std::span<const double> prior_weights,
                                 std::span<const double> log_likelihoods);

/// Posterior weights of a forecast given the observed prefix `obs`.
/// An empty prefix returns the prior weights unchanged.
PosteriorWeights posterior_weights(const MixtureForecast &forecast,
                                   const Eigen::Ref<const Eigen::VectorXd> &obs);

} // namespace intraday

#endif // INTRADAY_CONDITIONING_HPP_
