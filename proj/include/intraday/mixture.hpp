#ifndef INTRADAY_MIXTURE_HPP_
#define INTRADAY_MIXTURE_HPP_

#include <memory>
#include <string>
#include <variant>
#include <vector>

#include <Eigen/Core>

namespace intraday {

/// Pattern dictionary shared by every PDCC component of a forecast.
/// `patterns` is T x V with V >= T; `ridge` is the constant added to the
/// diagonal of every composed covariance.
struct PatternDictionary {
  std::string id;
  Eigen::MatrixXd patterns;
  double ridge = 0.0;

  Eigen::Index horizon() const { return patterns.rows(); }
  Eigen::Index size() const { return patterns.cols(); }
};

using DictionaryPtr = std::shared_ptr<const PatternDictionary>;

/// Validates V >= T, finite entries and ridge >= 0, then wraps for sharing.
DictionaryPtr make_dictionary(std::string id, Eigen::MatrixXd patterns,
                              double ridge);

class CovarianceSpec {
public:
  struct Diagonal {
    Eigen::VectorXd sigma;
  };
  struct Pdcc {
    DictionaryPtr dictionary;
    Eigen::VectorXd aux_sigma;
  };
  struct Dense {
    Eigen::MatrixXd matrix;
  };

  static CovarianceSpec diagonal(Eigen::VectorXd sigma);
  static CovarianceSpec pdcc(DictionaryPtr dictionary,
                             Eigen::VectorXd aux_sigma);
  /// Symmetric within 1e-10 (relative to the largest entry) and finite.
  /// Positive definiteness is checked when the matrix is factorized.
  static CovarianceSpec dense(Eigen::MatrixXd matrix);

  Eigen::Index dimension() const;

  /// diag(sigma)^2, U diag(aux_sigma)^2 U^T + ridge I, or the stored matrix.
  Eigen::MatrixXd materialize() const;

  const Diagonal *as_diagonal() const { return std::get_if<Diagonal>(&repr_); }
  const Pdcc *as_pdcc() const { return std::get_if<Pdcc>(&repr_); }
  const Dense *as_dense() const { return std::get_if<Dense>(&repr_); }

private:
  explicit CovarianceSpec(std::variant<Diagonal, Pdcc, Dense> repr)
      : repr_(std::move(repr)) {}

  std::variant<Diagonal, Pdcc, Dense> repr_;
};

inline Eigen::MatrixXd materialize(const CovarianceSpec &cov) {
  return cov.materialize();
}

/// One multivariate normal component. The covariance is materialized once
/// at construction; all algebra works on the dense matrix.
class MvnComponent {
public:
  MvnComponent(Eigen::VectorXd mean, CovarianceSpec cov);

  const Eigen::VectorXd &mean() const { return mean_; }
  const CovarianceSpec &spec() const { return spec_; }
  const Eigen::MatrixXd &covariance() const { return covariance_; }
  Eigen::Index dimension() const { return mean_.size(); }

private:
  Eigen::VectorXd mean_;
  CovarianceSpec spec_;
  Eigen::MatrixXd covariance_;
};

/// K weighted MVN components over a T-step horizon.
class MixtureForecast {
public:
  /// Uniform weights 1/K.
  MixtureForecast(std::string id, std::vector<MvnComponent> components,
                  std::vector<double> condition = {});
  MixtureForecast(std::string id, std::vector<MvnComponent> components,
                  Eigen::VectorXd weights, std::vector<double> condition = {});

  const std::string &id() const { return id_; }
  Eigen::Index horizon() const { return horizon_; }
  std::size_t size() const { return components_.size(); }
  const std::vector<MvnComponent> &components() const { return components_; }
  const MvnComponent &component(std::size_t k) const { return components_[k]; }
  const Eigen::VectorXd &weights() const { return weights_; }
  const std::vector<double> &condition() const { return condition_; }
  /// Shared PDCC dictionary, or null when no component is PDCC.
  const DictionaryPtr &dictionary() const { return dictionary_; }

  /// True when the weights are exactly 1.0 / K.
  bool has_uniform_weights() const;

private:
  void validate();

  std::string id_;
  Eigen::Index horizon_ = 0;
  std::vector<MvnComponent> components_;
  Eigen::VectorXd weights_;
  std::vector<double> condition_;
  DictionaryPtr dictionary_;
};

/// Contiguous 1-based inclusive range of time steps [first, last].
struct StepRange {
  Eigen::Index first = 1;
  Eigen::Index last = 1;

  Eigen::Index size() const { return last - first + 1; }
};

/// log N(x; mu, Sigma) through a (jittered) Cholesky factor.
double log_density(const MvnComponent &component,
                   const Eigen::Ref<const Eigen::VectorXd> &x);

/// log sum_k w_k N(x; mu_k, Sigma_k), log-sum-exp stabilised.
double log_density(const MixtureForecast &forecast,
                   const Eigen::Ref<const Eigen::VectorXd> &x);

/// Restricts every component to `range`. Restricted covariances are stored
/// as dense blocks; weights are unchanged.
MixtureForecast marginalize(const MixtureForecast &forecast, StepRange range);

/// log(sum exp(values)), ignoring -inf entries. Returns -inf when all are.
double log_sum_exp(const Eigen::Ref<const Eigen::VectorXd> &values);

} // namespace intraday

#endif // INTRADAY_MIXTURE_HPP_
