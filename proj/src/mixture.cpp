#include "intraday/mixture.hpp"

#include <cmath>
#include <limits>
#include <string>

#include "intraday/error.hpp"
#include "intraday/linalg.hpp"

namespace intraday {

namespace {

constexpr double kSymmetryTolerance = 1e-10;
constexpr double kWeightSumTolerance = 1e-12;

void require_positive(const Eigen::VectorXd &values, const char *what) {
  if (!values.allFinite() || (values.array() <= 0.0).any()) {
    throw Error(ErrorKind::kInvalidArgument,
                std::string(what) + " entries must be finite and > 0");
  }
}

} // namespace

DictionaryPtr make_dictionary(std::string id, Eigen::MatrixXd patterns,
                              double ridge) {
  if (patterns.rows() == 0 || patterns.cols() < patterns.rows()) {
    throw Error(ErrorKind::kDimensionMismatch,
                "dictionary '" + id + "' must be T x V with V >= T, got " +
                    std::to_string(patterns.rows()) + " x " +
                    std::to_string(patterns.cols()));
  }
  if (!patterns.allFinite()) {
    throw Error(ErrorKind::kNonFiniteInput,
                "dictionary '" + id + "' has non-finite entries");
  }
  if (!std::isfinite(ridge) || ridge < 0.0) {
    throw Error(ErrorKind::kInvalidArgument,
                "dictionary '" + id + "' ridge must be finite and >= 0");
  }
  return std::make_shared<const PatternDictionary>(
      PatternDictionary{std::move(id), std::move(patterns), ridge});
}

CovarianceSpec CovarianceSpec::diagonal(Eigen::VectorXd sigma) {
  if (sigma.size() == 0) {
    throw Error(ErrorKind::kDimensionMismatch, "diagonal sigma is empty");
  }
  require_positive(sigma, "diagonal sigma");
  return CovarianceSpec(Diagonal{std::move(sigma)});
}

CovarianceSpec CovarianceSpec::pdcc(DictionaryPtr dictionary,
                                    Eigen::VectorXd aux_sigma) {
  if (!dictionary) {
    throw Error(ErrorKind::kDanglingDictionaryRef, "pdcc without dictionary");
  }
  if (aux_sigma.size() != dictionary->size()) {
    throw Error(ErrorKind::kDimensionMismatch,
                "pdcc aux_sigma has length " + std::to_string(aux_sigma.size()) +
                    " but dictionary '" + dictionary->id + "' has " +
                    std::to_string(dictionary->size()) + " patterns");
  }
  require_positive(aux_sigma, "pdcc aux_sigma");
  return CovarianceSpec(Pdcc{std::move(dictionary), std::move(aux_sigma)});
}

CovarianceSpec CovarianceSpec::dense(Eigen::MatrixXd matrix) {
  if (matrix.rows() == 0 || matrix.rows() != matrix.cols()) {
    throw Error(ErrorKind::kDimensionMismatch,
                "dense covariance must be square and non-empty");
  }
  if (!matrix.allFinite()) {
    throw Error(ErrorKind::kNonFiniteInput, "dense covariance is not finite");
  }
  if (asymmetry(matrix) > kSymmetryTolerance) {
    throw Error(ErrorKind::kInvalidArgument, "dense covariance is not symmetric");
  }
  return CovarianceSpec(Dense{std::move(matrix)});
}

Eigen::Index CovarianceSpec::dimension() const {
  if (const auto *d = as_diagonal()) {
    return d->sigma.size();
  }
  if (const auto *p = as_pdcc()) {
    return p->dictionary->horizon();
  }
  return as_dense()->matrix.rows();
}

Eigen::MatrixXd CovarianceSpec::materialize() const {
  if (const auto *d = as_diagonal()) {
    return d->sigma.array().square().matrix().asDiagonal();
  }
  if (const auto *p = as_pdcc()) {
    const Eigen::MatrixXd &u = p->dictionary->patterns;
    const Eigen::MatrixXd scaled = u * p->aux_sigma.asDiagonal();
    Eigen::MatrixXd out = scaled * scaled.transpose();
    out.diagonal().array() += p->dictionary->ridge;
    // Exact symmetry; the product can differ in the last bit.
    return 0.5 * (out + out.transpose());
  }
  return as_dense()->matrix;
}

MvnComponent::MvnComponent(Eigen::VectorXd mean, CovarianceSpec cov)
    : mean_(std::move(mean)), spec_(std::move(cov)) {
  if (spec_.dimension() != mean_.size()) {
    throw Error(ErrorKind::kDimensionMismatch,
                "component mean has length " + std::to_string(mean_.size()) +
                    " but covariance is " + std::to_string(spec_.dimension()) +
                    "-dimensional");
  }
  if (!mean_.allFinite()) {
    throw Error(ErrorKind::kNonFiniteInput, "component mean is not finite");
  }
  covariance_ = spec_.materialize();
}

MixtureForecast::MixtureForecast(std::string id,
                                 std::vector<MvnComponent> components,
                                 std::vector<double> condition)
    : id_(std::move(id)), components_(std::move(components)),
      condition_(std::move(condition)) {
  if (!components_.empty()) {
    weights_ = Eigen::VectorXd::Constant(
        static_cast<Eigen::Index>(components_.size()),
        1.0 / static_cast<double>(components_.size()));
  }
  validate();
}

MixtureForecast::MixtureForecast(std::string id,
                                 std::vector<MvnComponent> components,
                                 Eigen::VectorXd weights,
                                 std::vector<double> condition)
    : id_(std::move(id)), components_(std::move(components)),
      weights_(std::move(weights)), condition_(std::move(condition)) {
  validate();
}

void MixtureForecast::validate() {
  if (components_.empty()) {
    throw Error(ErrorKind::kInvalidArgument,
                "forecast '" + id_ + "' has no components");
  }
  if (weights_.size() != static_cast<Eigen::Index>(components_.size())) {
    throw Error(ErrorKind::kDimensionMismatch,
                "forecast '" + id_ + "' has " +
                    std::to_string(components_.size()) + " components but " +
                    std::to_string(weights_.size()) + " weights");
  }
  if (!weights_.allFinite() || (weights_.array() < 0.0).any() ||
      std::abs(weights_.sum() - 1.0) > kWeightSumTolerance) {
    throw Error(ErrorKind::kInvalidArgument,
                "forecast '" + id_ + "' weights must be >= 0 and sum to 1");
  }
  horizon_ = components_.front().dimension();
  for (const auto &component : components_) {
    if (component.dimension() != horizon_) {
      throw Error(ErrorKind::kDimensionMismatch,
                  "forecast '" + id_ + "' mixes component horizons");
    }
    if (const auto *p = component.spec().as_pdcc()) {
      if (!dictionary_) {
        dictionary_ = p->dictionary;
      } else if (dictionary_ != p->dictionary) {
        throw Error(ErrorKind::kInvalidArgument,
                    "forecast '" + id_ +
                        "' components reference different dictionaries");
      }
    }
  }
}

bool MixtureForecast::has_uniform_weights() const {
  const double uniform = 1.0 / static_cast<double>(components_.size());
  return (weights_.array() == uniform).all();
}

double log_density(const MvnComponent &component,
                   const Eigen::Ref<const Eigen::VectorXd> &x) {
  if (x.size() != component.dimension()) {
    throw Error(ErrorKind::kDimensionMismatch,
                "log density: expected " + std::to_string(component.dimension()) +
                    " values, got " + std::to_string(x.size()));
  }
  if (!x.allFinite()) {
    throw Error(ErrorKind::kNonFiniteInput, "log density: x is not finite");
  }
  return gaussian_log_density(factorize(component.covariance()),
                              component.mean(), x);
}

double log_density(const MixtureForecast &forecast,
                   const Eigen::Ref<const Eigen::VectorXd> &x) {
  Eigen::VectorXd terms(static_cast<Eigen::Index>(forecast.size()));
  for (std::size_t k = 0; k < forecast.size(); ++k) {
    const double w = forecast.weights()[static_cast<Eigen::Index>(k)];
    terms[static_cast<Eigen::Index>(k)] =
        w > 0.0 ? std::log(w) + log_density(forecast.component(k), x)
                : -std::numeric_limits<double>::infinity();
  }
  return log_sum_exp(terms);
}

MixtureForecast marginalize(const MixtureForecast &forecast, StepRange range) {
  if (range.last < range.first) {
    throw Error(ErrorKind::kEmptyRange, "marginalize: empty range");
  }
  if (range.first < 1 || range.last > forecast.horizon()) {
    throw Error(ErrorKind::kOutOfBounds,
                "marginalize: range [" + std::to_string(range.first) + ", " +
                    std::to_string(range.last) + "] outside [1, " +
                    std::to_string(forecast.horizon()) + "]");
  }
  if (range.first == 1 && range.last == forecast.horizon()) {
    return forecast;
  }
  const Eigen::Index start = range.first - 1;
  const Eigen::Index n = range.size();
  std::vector<MvnComponent> components;
  components.reserve(forecast.size());
  for (const auto &component : forecast.components()) {
    components.emplace_back(
        component.mean().segment(start, n),
        CovarianceSpec::dense(component.covariance().block(start, start, n, n)));
  }
  return MixtureForecast(forecast.id(), std::move(components),
                         forecast.weights(), forecast.condition());
}

double log_sum_exp(const Eigen::Ref<const Eigen::VectorXd> &values) {
  constexpr double kNegInf = -std::numeric_limits<double>::infinity();
  double peak = kNegInf;
  for (const double v : values) {
    if (!std::isnan(v) && v > peak) {
      peak = v;
    }
  }
  if (peak == kNegInf) {
    return kNegInf;
  }
  double sum = 0.0;
  for (const double v : values) {
    if (!std::isnan(v) && v != kNegInf) {
      sum += std::exp(v - peak);
    }
  }
  return peak + std::log(sum);
}

} // namespace intraday
