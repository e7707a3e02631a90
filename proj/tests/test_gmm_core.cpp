#include <algorithm>
#include <cmath>
#include <numbers>
#include <random>

#include <Eigen/Eigenvalues>
#include <gtest/gtest.h>

#include "intraday/conditioning.hpp"
#include "intraday/error.hpp"
#include "intraday/linalg.hpp"
#include "intraday/mixture.hpp"
#include "intraday/update.hpp"
#include "support.hpp"

namespace intraday {
namespace {

using support::vec;
using Eigen::MatrixXd;
using Eigen::VectorXd;

// Values frozen from scipy.stats.multivariate_normal.
constexpr double kLogPdf2d = -3.377597837249263;
constexpr double kGammaHigh = 0.9996646498695336;
constexpr double kGammaLow = 0.00033535013046647816;

MatrixXd mat2(double a, double b, double c, double d) {
  MatrixXd m(2, 2);
  m << a, b, c, d;
  return m;
}

MvnComponent dense(VectorXd mean, MatrixXd cov) {
  return MvnComponent(std::move(mean), CovarianceSpec::dense(std::move(cov)));
}

template <typename Fn> ErrorKind kind_of(Fn &&fn) {
  try {
    fn();
  } catch (const Error &e) {
    return e.kind();
  }
  ADD_FAILURE() << "no error thrown";
  return ErrorKind::kIo;
}

TEST(Materialize, PdccIdentityDictionary) {
  auto dict = make_dictionary("u", MatrixXd::Identity(2, 2), 0.1);
  const MatrixXd m = CovarianceSpec::pdcc(dict, vec({1, 2})).materialize();
  EXPECT_TRUE(m.isApprox(mat2(1.1, 0, 0, 4.1), 1e-15));
}

TEST(Materialize, DiagonalSquaresSigma) {
  const MatrixXd m = CovarianceSpec::diagonal(vec({3})).materialize();
  EXPECT_DOUBLE_EQ(m(0, 0), 9.0);
}

TEST(Materialize, PdccHandProduct) {
  auto dict = make_dictionary("u", mat2(1, 1, 1, -1), 0.0);
  const MatrixXd m = CovarianceSpec::pdcc(dict, vec({1, 1})).materialize();
  EXPECT_TRUE(m.isApprox(mat2(2, 0, 0, 2), 1e-15));
}

TEST(Materialize, DimensionErrors) {
  auto dict = make_dictionary("u", MatrixXd::Identity(2, 3), 0.1);
  EXPECT_EQ(kind_of([&] { CovarianceSpec::pdcc(dict, vec({1, 2})); }),
            ErrorKind::kDimensionMismatch);
  EXPECT_EQ(kind_of([] { make_dictionary("u", MatrixXd::Identity(3, 2), 0.1); }),
            ErrorKind::kDimensionMismatch);
  EXPECT_EQ(kind_of([] { CovarianceSpec::diagonal(vec({1, -1})); }),
            ErrorKind::kInvalidArgument);
  EXPECT_EQ(kind_of([] { CovarianceSpec::dense(mat2(1, 0.5, 0.4, 1)); }),
            ErrorKind::kInvalidArgument);
}

TEST(Factorize, JitterRescuesSemidefinite) {
  // rank one: singular without jitter
  const MatrixXd m = mat2(1, 1, 1, 1);
  const CholeskyFactor f = factorize(m);
  EXPECT_GT(f.jitter, 0.0);
  EXPECT_LE(f.jitter, kJitterMax);
}

TEST(Factorize, IndefiniteFails) {
  EXPECT_EQ(kind_of([] { factorize(mat2(1, 2, 2, 1)); }),
            ErrorKind::kNotPositiveDefinite);
}

TEST(LogDensity, StandardNormal) {
  const MvnComponent c = dense(vec({0}), MatrixXd::Identity(1, 1));
  EXPECT_NEAR(log_density(c, vec({0})), -0.5 * std::log(2 * std::numbers::pi),
              1e-14);
  EXPECT_NEAR(log_density(c, vec({2})),
              -0.5 * std::log(2 * std::numbers::pi) - 2.0, 1e-14);
}

TEST(LogDensity, TwoDimensionalOracle) {
  const MvnComponent c = dense(vec({1, 2}), mat2(4, 2, 2, 3));
  EXPECT_NEAR(log_density(c, vec({3, 3})), kLogPdf2d, 1e-12);
  // independent route: analytic 2x2 inverse, det = 8
  const double quad = (3.0 * 4 - 2 * 2 * 2 * 1 + 4 * 1) / 8.0;
  EXPECT_NEAR(-std::log(2 * std::numbers::pi) - 0.5 * std::log(8.0) - 0.5 * quad,
              kLogPdf2d, 1e-12);
}

TEST(LogDensity, RejectsBadInput) {
  const MvnComponent c = dense(vec({0, 0}), MatrixXd::Identity(2, 2));
  EXPECT_EQ(kind_of([&] { log_density(c, vec({0})); }),
            ErrorKind::kDimensionMismatch);
  EXPECT_EQ(kind_of([&] { log_density(c, vec({0, NAN})); }),
            ErrorKind::kNonFiniteInput);
}

TEST(Marginalize, LastIndex) {
  MixtureForecast fc("a", {MvnComponent(vec({1, 2, 3}),
                                        CovarianceSpec::diagonal(vec({1, 2, 3})))});
  const MixtureForecast m = marginalize(fc, {3, 3});
  EXPECT_EQ(m.component(0).mean(), vec({3}));
  EXPECT_DOUBLE_EQ(m.component(0).covariance()(0, 0), 9.0);
}

TEST(Marginalize, FirstIndexAndFullRange) {
  MixtureForecast fc("a", {dense(vec({1, 2}), mat2(4, 2, 2, 3))});
  const MixtureForecast first = marginalize(fc, {1, 1});
  EXPECT_EQ(first.component(0).mean(), vec({1}));
  EXPECT_DOUBLE_EQ(first.component(0).covariance()(0, 0), 4.0);
  const MixtureForecast full = marginalize(fc, {1, 2});
  EXPECT_EQ(full.component(0).mean(), fc.component(0).mean());
  EXPECT_EQ(full.component(0).covariance(), fc.component(0).covariance());
  EXPECT_EQ(full.weights(), fc.weights());
}

TEST(Marginalize, RangeErrors) {
  MixtureForecast fc("a", {dense(vec({1, 2}), mat2(4, 2, 2, 3))});
  EXPECT_EQ(kind_of([&] { marginalize(fc, {2, 1}); }), ErrorKind::kEmptyRange);
  EXPECT_EQ(kind_of([&] { marginalize(fc, {1, 3}); }), ErrorKind::kOutOfBounds);
  EXPECT_EQ(kind_of([&] { marginalize(fc, {0, 1}); }), ErrorKind::kOutOfBounds);
}

TEST(Forecast, WeightsAndDictionaryValidated) {
  auto c = dense(vec({0}), MatrixXd::Identity(1, 1));
  EXPECT_EQ(kind_of([&] { MixtureForecast("a", {c, c}, vec({0.6, 0.6})); }),
            ErrorKind::kInvalidArgument);
  EXPECT_EQ(kind_of([&] { MixtureForecast("a", {c, c}, vec({1.5, -0.5})); }),
            ErrorKind::kInvalidArgument);
  auto d1 = make_dictionary("d1", MatrixXd::Identity(1, 1), 0.1);
  auto d2 = make_dictionary("d2", MatrixXd::Identity(1, 1), 0.1);
  MvnComponent p1(vec({0}), CovarianceSpec::pdcc(d1, vec({1})));
  MvnComponent p2(vec({0}), CovarianceSpec::pdcc(d2, vec({1})));
  EXPECT_EQ(kind_of([&] { MixtureForecast("a", {p1, p2}); }),
            ErrorKind::kInvalidArgument);
  MixtureForecast ok("a", {p1, p1});
  EXPECT_EQ(ok.dictionary(), d1);
}

TEST(Condition, HandEvaluation) {
  const auto r = condition_component(dense(vec({1, 2}), mat2(4, 2, 2, 3)),
                                     vec({3}));
  EXPECT_NEAR(r.mean[0], 3.0, 1e-14);
  EXPECT_NEAR(r.covariance(0, 0), 2.0, 1e-14);
}

TEST(Condition, IndependentBlocks) {
  const auto r = condition_component(dense(vec({0, 5}), mat2(1, 0, 0, 4)),
                                     vec({7}));
  EXPECT_DOUBLE_EQ(r.mean[0], 5.0);
  EXPECT_DOUBLE_EQ(r.covariance(0, 0), 4.0);
}

TEST(Condition, NearlyPerfectCorrelation) {
  for (const double eps : {1e-2, 1e-4, 1e-6}) {
    const auto r = condition_component(
        dense(vec({0, 0}), mat2(1, 1, 1, 1 + eps)), vec({0.5}));
    EXPECT_NEAR(r.covariance(0, 0), eps, 1e-12);
    EXPECT_NEAR(r.mean[0], 0.5, 1e-12);
  }
}

TEST(Condition, PreconditionsChecked) {
  const auto c = dense(vec({1, 2}), mat2(4, 2, 2, 3));
  EXPECT_EQ(kind_of([&] { condition_component(c, vec({1, 2})); }),
            ErrorKind::kDimensionMismatch);
  EXPECT_EQ(kind_of([&] { condition_component(c, VectorXd()); }),
            ErrorKind::kDimensionMismatch);
}

TEST(PosteriorWeights, DensityRatioFixture) {
  MixtureForecast fc("a", {dense(vec({0, 0}), MatrixXd::Identity(2, 2)),
                           dense(vec({4, 0}), MatrixXd::Identity(2, 2))});
  const auto w = posterior_weights(fc, vec({0}));
  EXPECT_NEAR(w.gamma[0], kGammaHigh, 1e-15);
  EXPECT_NEAR(w.gamma[1], kGammaLow, 1e-15);
  EXPECT_NEAR(w.gamma[0], 1.0 / (1.0 + std::exp(-8.0)), 1e-15);
}

TEST(PosteriorWeights, NoObservationsReturnsPrior) {
  std::vector<MvnComponent> comps(4, dense(vec({0, 0}), MatrixXd::Identity(2, 2)));
  MixtureForecast fc("a", comps);
  const auto w = posterior_weights(fc, VectorXd());
  EXPECT_EQ(w.t_prime, 0);
  for (Eigen::Index k = 0; k < 4; ++k) {
    EXPECT_EQ(w.gamma[k], 0.25);
  }
}

TEST(PosteriorWeights, IdenticalComponentsSplitEvenly) {
  const auto c = dense(vec({1, 2}), mat2(4, 2, 2, 3));
  MixtureForecast fc("a", {c, c});
  const auto w = posterior_weights(fc, vec({17.0}));
  EXPECT_DOUBLE_EQ(w.gamma[0], 0.5);
  EXPECT_DOUBLE_EQ(w.gamma[1], 0.5);
}

TEST(PosteriorWeights, AllDegenerate) {
  const double prior[] = {0.5, 0.5};
  const double ll[] = {-INFINITY, NAN};
  EXPECT_EQ(kind_of([&] { responsibilities(prior, ll); }),
            ErrorKind::kAllComponentsDegenerate);
}

TEST(PosteriorWeights, ExtremeLogLikelihoodsStayOnSimplex) {
  const double prior[] = {0.2, 0.3, 0.5};
  const double ll[] = {-1e6, -1e6 - 3.0, -2e6};
  const VectorXd g = responsibilities(prior, ll);
  EXPECT_NEAR(g.sum(), 1.0, 1e-12);
  EXPECT_GT(g[0], g[1]);
  EXPECT_EQ(g[2], 0.0);
}

// ---- properties on random instances ----

class RandomInstances : public ::testing::TestWithParam<int> {};

TEST_P(RandomInstances, SimplexAndScalingInvariance) {
  std::mt19937_64 rng(1000 + GetParam());
  const Eigen::Index horizon = 2 + GetParam() % 4;
  const std::size_t k = 1 + GetParam() % 4;
  const auto fc = support::random_forecast(horizon, k, rng);
  const Eigen::Index t_prime = 1 + GetParam() % (horizon - 1);
  const VectorXd obs = support::random_vector(t_prime, rng, 1.5);
  const auto w = posterior_weights(fc, obs);
  EXPECT_NEAR(w.gamma.sum(), 1.0, 1e-12);
  EXPECT_GE(w.gamma.minCoeff(), 0.0);

  std::vector<double> ll(k);
  std::vector<double> scaled(k);
  for (std::size_t c = 0; c < k; ++c) {
    ll[c] = log_density(marginalize(MixtureForecast("m", {fc.component(c)}),
                                    {1, t_prime}),
                        obs);
    scaled[c] = 7.5 * fc.weights()[static_cast<Eigen::Index>(c)];
  }
  const VectorXd g2 = responsibilities(scaled, ll);
  EXPECT_LE((g2 - w.gamma).cwiseAbs().maxCoeff(), 1e-12);
  Eigen::Index a1 = 0;
  Eigen::Index a2 = 0;
  w.gamma.maxCoeff(&a1);
  g2.maxCoeff(&a2);
  EXPECT_EQ(a1, a2);
}

TEST_P(RandomInstances, SchurPsdAndObservationIndependence) {
  std::mt19937_64 rng(2000 + GetParam());
  const Eigen::Index horizon = 2 + GetParam() % 4;
  const auto fc = support::random_forecast(horizon, 3, rng);
  const Eigen::Index t_prime = 1 + GetParam() % (horizon - 1);
  const VectorXd o1 = support::random_vector(t_prime, rng);
  const VectorXd o2 = support::random_vector(t_prime, rng, 3.0);
  for (const auto &c : fc.components()) {
    const auto r1 = condition_component(c, o1);
    const auto r2 = condition_component(c, o2);
    EXPECT_EQ(r1.covariance, r2.covariance);
    Eigen::SelfAdjointEigenSolver<MatrixXd> eig(r1.covariance);
    EXPECT_GE(eig.eigenvalues().minCoeff(), -1e-10);
    EXPECT_LE(asymmetry(r1.covariance), 1e-15);
  }
}

TEST_P(RandomInstances, PredictiveDensityMatchesJointRatio) {
  std::mt19937_64 rng(3000 + GetParam());
  const Eigen::Index horizon = 2 + GetParam() % 4;
  const std::size_t k = 1 + GetParam() % 4;
  const auto fc = support::random_forecast(horizon, k, rng);
  for (Eigen::Index t_prime = 0; t_prime < horizon; ++t_prime) {
    const VectorXd x = support::random_vector(horizon, rng);
    const IntradayUpdate upd = update(fc, x.head(t_prime));
    const double ours = predictive_log_density(upd, x.tail(horizon - t_prime));
    const double brute = std::log(support::brute_conditional_density(
        fc, x.head(t_prime), x.tail(horizon - t_prime)));
    EXPECT_NEAR(ours, brute, 1e-9 * std::max(1.0, std::abs(brute)));
  }
}

TEST_P(RandomInstances, ComponentOrderInvariance) {
  std::mt19937_64 rng(4000 + GetParam());
  const Eigen::Index horizon = 3 + GetParam() % 3;
  const auto fc = support::random_forecast(horizon, 4, rng);
  std::vector<MvnComponent> comps(fc.components().rbegin(),
                                  fc.components().rend());
  const VectorXd w = fc.weights().reverse();
  const MixtureForecast rev("fc", comps, w);
  const VectorXd x = support::random_vector(horizon, rng);
  for (Eigen::Index t_prime = 0; t_prime < horizon; ++t_prime) {
    const double a = predictive_log_density(update(fc, x.head(t_prime)),
                                            x.tail(horizon - t_prime));
    const double b = predictive_log_density(update(rev, x.head(t_prime)),
                                            x.tail(horizon - t_prime));
    EXPECT_NEAR(a, b, 1e-12 * std::max(1.0, std::abs(a)));
  }
}

INSTANTIATE_TEST_SUITE_P(Seeds, RandomInstances, ::testing::Range(0, 24));

} // namespace
} // namespace intraday
