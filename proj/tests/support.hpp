#ifndef INTRADAY_TESTS_SUPPORT_HPP_
#define INTRADAY_TESTS_SUPPORT_HPP_

#include <cmath>
#include <numbers>
#include <random>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "intraday/mixture.hpp"

namespace support {

using Eigen::Index;
using Eigen::MatrixXd;
using Eigen::VectorXd;

inline VectorXd vec(std::initializer_list<double> values) {
  VectorXd out(static_cast<Index>(values.size()));
  Index i = 0;
  for (const double v : values) {
    out[i++] = v;
  }
  return out;
}

/// A A^T + floor I with A standard normal.
inline MatrixXd random_spd(Index n, std::mt19937_64 &rng, double floor = 0.3) {
  std::normal_distribution<double> normal;
  MatrixXd a(n, n);
  for (Index i = 0; i < a.size(); ++i) {
    a.data()[i] = normal(rng);
  }
  return a * a.transpose() / static_cast<double>(n) +
         floor * MatrixXd::Identity(n, n);
}

inline VectorXd random_vector(Index n, std::mt19937_64 &rng, double scale = 1.0) {
  std::normal_distribution<double> normal(0.0, scale);
  VectorXd v(n);
  for (Index i = 0; i < n; ++i) {
    v[i] = normal(rng);
  }
  return v;
}

/// Dense-covariance mixture with random (non-uniform) weights.
inline intraday::MixtureForecast random_forecast(Index horizon, std::size_t k,
                                                 std::mt19937_64 &rng,
                                                 std::string id = "fc") {
  std::vector<intraday::MvnComponent> comps;
  std::uniform_real_distribution<double> unif(0.2, 1.0);
  VectorXd w(static_cast<Index>(k));
  for (std::size_t c = 0; c < k; ++c) {
    comps.emplace_back(random_vector(horizon, rng),
                       intraday::CovarianceSpec::dense(random_spd(horizon, rng)));
    w[static_cast<Index>(c)] = unif(rng);
  }
  w /= w.sum();
  return intraday::MixtureForecast(std::move(id), std::move(comps), w);
}

/// N(x; mu, S) through an explicit inverse and LU determinant.
inline double brute_normal_pdf(const VectorXd &mu, const MatrixXd &cov,
                               const VectorXd &x) {
  const MatrixXd inv = cov.inverse();
  const double det = cov.determinant();
  const VectorXd d = x - mu;
  const double quad = d.dot(inv * d);
  return std::exp(-0.5 * quad) /
         std::sqrt(std::pow(2.0 * std::numbers::pi,
                            static_cast<double>(mu.size())) *
                   det);
}

/// Mixture density of the first x.size() steps.
inline double brute_prefix_density(const intraday::MixtureForecast &fc,
                                   const VectorXd &x) {
  const Index n = x.size();
  double total = 0.0;
  for (std::size_t k = 0; k < fc.size(); ++k) {
    const auto &c = fc.component(k);
    total += fc.weights()[static_cast<Index>(k)] *
             brute_normal_pdf(c.mean().head(n),
                              c.covariance().topLeftCorner(n, n), x);
  }
  return total;
}

/// p(future | obs) = p(obs, future) / p(obs).
inline double brute_conditional_density(const intraday::MixtureForecast &fc,
                                        const VectorXd &obs,
                                        const VectorXd &future) {
  VectorXd joint(obs.size() + future.size());
  joint << obs, future;
  const double denom = obs.size() == 0 ? 1.0 : brute_prefix_density(fc, obs);
  return brute_prefix_density(fc, joint) / denom;
}

} // namespace support

#endif // INTRADAY_TESTS_SUPPORT_HPP_
