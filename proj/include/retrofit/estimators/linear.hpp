#pragma once

#include <Eigen/Dense>
#include <span>
#include <string>
#include <vector>

#include "retrofit/domain.hpp"

namespace retrofit {

template <class Scalar>
using Vec = Eigen::Matrix<Scalar, Eigen::Dynamic, 1>;
template <class Scalar>
using Mat = Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic>;

template <class Scalar>
struct RegressionFit {
  Vec<Scalar> coefficients;
  Vec<Scalar> residuals;   // y - X b, unweighted
  Mat<Scalar> covariance;  // heteroskedasticity-robust (HC1)
  Mat<Scalar> bread;       // (X' W X)^-1
};

namespace detail {

inline std::string column_name(std::span<const std::string> names, Eigen::Index j) {
  if (j < static_cast<Eigen::Index>(names.size())) return names[static_cast<std::size_t>(j)];
  return "column " + std::to_string(j);
}

/// Throws EstimationError listing the columns that the pivoted QR found to be
/// linearly dependent on earlier ones.
template <class QR>
void require_full_rank(const QR& qr, std::span<const std::string> names) {
  const Eigen::Index p = qr.cols();
  if (qr.rank() == p) return;
  std::string msg = "rank-deficient design; dependent columns:";
  const auto& perm = qr.colsPermutation().indices();
  for (Eigen::Index j = qr.rank(); j < p; ++j) msg += " " + column_name(names, perm(j));
  throw EstimationError(msg);
}

}  // namespace detail

/// Weighted least squares minimizing sum w_i (y_i - x_i'b)^2. `names` labels
/// the columns of X in error messages.
template <class DerivedX, class DerivedY, class DerivedW>
RegressionFit<typename DerivedX::Scalar> ols(const Eigen::MatrixBase<DerivedX>& X,
                                             const Eigen::MatrixBase<DerivedY>& y,
                                             const Eigen::MatrixBase<DerivedW>& weights,
                                             std::span<const std::string> names = {}) {
  using Scalar = typename DerivedX::Scalar;
  const Eigen::Index n = X.rows(), p = X.cols();
  if (y.size() != n || weights.size() != n)
    throw std::invalid_argument("ols: dimension mismatch");
  if (n <= p) throw EstimationError("ols: need more observations than columns");

  const Vec<Scalar> sw = weights.derived().array().sqrt().matrix();
  const Mat<Scalar> Xw = sw.asDiagonal() * X.derived();
  Eigen::ColPivHouseholderQR<Mat<Scalar>> qr(Xw);
  detail::require_full_rank(qr, names);

  RegressionFit<Scalar> fit;
  fit.coefficients = qr.solve(Vec<Scalar>(sw.cwiseProduct(y.derived())));
  fit.residuals = y.derived() - X.derived() * fit.coefficients;

  fit.bread = (Xw.transpose() * Xw).inverse();
  const Vec<Scalar> we = weights.derived().cwiseProduct(fit.residuals);
  const Mat<Scalar> score = we.asDiagonal() * X.derived();
  const Mat<Scalar> meat = score.transpose() * score;
  fit.covariance = fit.bread * meat * fit.bread * (Scalar(n) / Scalar(n - p));
  return fit;
}

template <class DerivedX, class DerivedY>
RegressionFit<typename DerivedX::Scalar> ols(const Eigen::MatrixBase<DerivedX>& X,
                                             const Eigen::MatrixBase<DerivedY>& y,
                                             std::span<const std::string> names = {}) {
  using Scalar = typename DerivedX::Scalar;
  return ols(X, y, Vec<Scalar>::Ones(X.rows()), names);
}

/// Cluster-robust (CR1) covariance of an unweighted OLS fit. `cluster[i]` is
/// the cluster of row i.
template <class DerivedX, class Scalar>
Mat<Scalar> cluster_covariance(const Eigen::MatrixBase<DerivedX>& X,
                               const RegressionFit<Scalar>& fit, std::span<const int> cluster) {
  const Eigen::Index n = X.rows(), p = X.cols();
  if (static_cast<Eigen::Index>(cluster.size()) != n)
    throw std::invalid_argument("cluster_covariance: dimension mismatch");
  int groups = 0;
  for (int c : cluster) groups = std::max(groups, c + 1);
  Mat<Scalar> sums = Mat<Scalar>::Zero(groups, p);
  for (Eigen::Index i = 0; i < n; ++i)
    sums.row(cluster[static_cast<std::size_t>(i)]) += fit.residuals(i) * X.row(i);
  const Mat<Scalar> meat = sums.transpose() * sums;
  const Scalar g = groups;
  const Scalar factor = g / (g - 1) * Scalar(n - 1) / Scalar(n - p);
  return fit.bread * meat * fit.bread * factor;
}

}  // namespace retrofit
