#ifndef INTRADAY_LINALG_HPP_
#define INTRADAY_LINALG_HPP_

#include <Eigen/Cholesky>
#include <Eigen/Core>

namespace intraday {

inline constexpr double kLog2Pi = 1.8378770664093454835606594728112;

/// Jitter ladder for factorizations that fail on the first attempt:
/// 1e-10, 1e-9, ..., 1e-4 added to the diagonal.
inline constexpr double kJitterStart = 1e-10;
inline constexpr double kJitterMax = 1e-4;

/// Lower Cholesky factor L with L L^T = A + jitter * I.
struct CholeskyFactor {
  Eigen::MatrixXd lower;
  double jitter = 0.0;

  Eigen::Index size() const { return lower.rows(); }

  /// sum_i log L_ii, i.e. half the log-determinant.
  double half_log_det() const;

  /// Solves L y = b in place.
  void solve_lower_in_place(Eigen::Ref<Eigen::VectorXd> b) const;
};

/// Factorizes a symmetric matrix, escalating diagonal jitter x10 per retry
/// from kJitterStart up to kJitterMax. Throws NotPositiveDefinite when the
/// ladder is exhausted or the input is not finite.
CholeskyFactor factorize(const Eigen::Ref<const Eigen::MatrixXd> &matrix);

/// log N(x; mean, L L^T) given the factor.
double gaussian_log_density(const CholeskyFactor &factor,
                            const Eigen::Ref<const Eigen::VectorXd> &mean,
                            const Eigen::Ref<const Eigen::VectorXd> &x);

/// max |A - A^T| scaled by max(1, max |A|).
double asymmetry(const Eigen::Ref<const Eigen::MatrixXd> &matrix);

} // namespace intraday

#endif // INTRADAY_LINALG_HPP_
