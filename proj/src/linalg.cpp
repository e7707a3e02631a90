#include "intraday/linalg.hpp"

#include <cmath>
#include <string>

#include "intraday/error.hpp"

namespace intraday {

namespace {

bool try_factorize(const Eigen::Ref<const Eigen::MatrixXd> &matrix,
                   double jitter, Eigen::MatrixXd &lower) {
  Eigen::LLT<Eigen::MatrixXd> llt;
  if (jitter == 0.0) {
    llt.compute(matrix);
  } else {
    Eigen::MatrixXd shifted = matrix;
    shifted.diagonal().array() += jitter;
    llt.compute(shifted);
  }
  if (llt.info() != Eigen::Success) {
    return false;
  }
  lower = llt.matrixL();
  // LLT accepts tiny positive pivots that still yield a useless factor.
  return lower.diagonal().allFinite() && (lower.diagonal().array() > 0.0).all();
}

} // namespace

double CholeskyFactor::half_log_det() const {
  return lower.diagonal().array().log().sum();
}

void CholeskyFactor::solve_lower_in_place(Eigen::Ref<Eigen::VectorXd> b) const {
  lower.triangularView<Eigen::Lower>().solveInPlace(b);
}

CholeskyFactor factorize(const Eigen::Ref<const Eigen::MatrixXd> &matrix) {
  if (matrix.rows() != matrix.cols()) {
    throw Error(ErrorKind::kDimensionMismatch, "factorize: matrix is not square");
  }
  if (!matrix.allFinite()) {
    throw Error(ErrorKind::kNotPositiveDefinite,
                "factorize: matrix has non-finite entries");
  }
  CholeskyFactor out;
  if (try_factorize(matrix, 0.0, out.lower)) {
    return out;
  }
  for (double jitter = kJitterStart; jitter <= kJitterMax * (1.0 + 1e-9);
       jitter *= 10.0) {
    if (try_factorize(matrix, jitter, out.lower)) {
      out.jitter = jitter;
      return out;
    }
  }
  throw Error(ErrorKind::kNotPositiveDefinite,
              "factorize: " + std::to_string(matrix.rows()) + "x" +
                  std::to_string(matrix.cols()) +
                  " matrix is not positive definite after jitter " +
                  std::to_string(kJitterMax));
}

double gaussian_log_density(const CholeskyFactor &factor,
                            const Eigen::Ref<const Eigen::VectorXd> &mean,
                            const Eigen::Ref<const Eigen::VectorXd> &x) {
  if (mean.size() != factor.size() || x.size() != factor.size()) {
    throw Error(ErrorKind::kDimensionMismatch,
                "log density: expected dimension " +
                    std::to_string(factor.size()) + ", got " +
                    std::to_string(x.size()));
  }
  if (!x.allFinite()) {
    throw Error(ErrorKind::kNonFiniteInput, "log density: x is not finite");
  }
  Eigen::VectorXd z = x - mean;
  factor.solve_lower_in_place(z);
  const auto n = static_cast<double>(factor.size());
  return -0.5 * z.squaredNorm() - factor.half_log_det() - 0.5 * n * kLog2Pi;
}

double asymmetry(const Eigen::Ref<const Eigen::MatrixXd> &matrix) {
  if (matrix.size() == 0) {
    return 0.0;
  }
  const double scale = std::max(1.0, matrix.cwiseAbs().maxCoeff());
  return (matrix - matrix.transpose()).cwiseAbs().maxCoeff() / scale;
}

} // namespace intraday
