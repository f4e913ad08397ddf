#pragma once

#include <cmath>

#include "retrofit/estimators/linear.hpp"

namespace retrofit {

template <class Scalar>
struct LogisticFit {
  Vec<Scalar> coefficients;
  Vec<Scalar> probabilities;  // unclipped fitted values
  Mat<Scalar> covariance;     // inverse observed information
  Scalar max_abs_score = 0;
  int iterations = 0;
};

struct LogisticOptions {
  double score_tolerance = 1e-8;
  double step_tolerance = 1e-10;
  double divergence_bound = 30.0;
  int max_iterations = 100;
};

namespace detail {

template <class Scalar>
Scalar logistic(Scalar eta) {
  return eta >= 0 ? Scalar(1) / (Scalar(1) + std::exp(-eta))
                  : std::exp(eta) / (Scalar(1) + std::exp(eta));
}

template <class Scalar>
Scalar softplus(Scalar eta) {
  return eta > 0 ? eta + std::log1p(std::exp(-eta)) : std::log1p(std::exp(eta));
}

}  // namespace detail

/// Maximum-likelihood logistic regression by damped Newton-Raphson.
/// Throws EstimationError on separation (a coefficient beyond the divergence
/// bound), a singular information matrix, or non-convergence.
template <class DerivedX, class DerivedD>
LogisticFit<typename DerivedX::Scalar> logistic_fit(const Eigen::MatrixBase<DerivedX>& X,
                                                    const Eigen::MatrixBase<DerivedD>& d,
                                                    const LogisticOptions& opt = {},
                                                    std::span<const std::string> names = {}) {
  using Scalar = typename DerivedX::Scalar;
  const Eigen::Index n = X.rows(), p = X.cols();
  if (d.size() != n) throw std::invalid_argument("logistic_fit: dimension mismatch");
  for (Eigen::Index i = 0; i < n; ++i)
    if (d(i) != Scalar(0) && d(i) != Scalar(1))
      throw std::invalid_argument("logistic_fit: outcome must be 0/1");

  auto loglik = [&](const Vec<Scalar>& eta) {
    Scalar ll = 0;
    for (Eigen::Index i = 0; i < n; ++i) ll += d(i) * eta(i) - detail::softplus(eta(i));
    return ll;
  };

  LogisticFit<Scalar> fit;
  Vec<Scalar> beta = Vec<Scalar>::Zero(p);
  Vec<Scalar> eta = X.derived() * beta;
  Scalar ll = loglik(eta);
  Vec<Scalar> pi(n), w(n);
  bool converged = false;
  for (int iter = 0; iter <= opt.max_iterations; ++iter) {
    for (Eigen::Index i = 0; i < n; ++i) {
      pi(i) = detail::logistic(eta(i));
      w(i) = pi(i) * (1 - pi(i));
    }
    const Vec<Scalar> score = X.derived().transpose() * (d.derived() - pi);
    fit.max_abs_score = score.cwiseAbs().maxCoeff();
    fit.iterations = iter;
    if (fit.max_abs_score < opt.score_tolerance) {
      converged = true;
      break;
    }
    if (iter == opt.max_iterations) break;

    const Mat<Scalar> info = X.derived().transpose() * w.asDiagonal() * X.derived();
    Eigen::ColPivHouseholderQR<Mat<Scalar>> qr(info);
    detail::require_full_rank(qr, names);
    Vec<Scalar> step = qr.solve(score);

    // Step halving guards against overshoot far from the optimum.
    Vec<Scalar> next = beta + step;
    Vec<Scalar> next_eta = X.derived() * next;
    Scalar next_ll = loglik(next_eta);
    for (int h = 0; h < 30 && next_ll < ll - Scalar(1e-12) * std::abs(ll); ++h) {
      step /= 2;
      next = beta + step;
      next_eta = X.derived() * next;
      next_ll = loglik(next_eta);
    }
    beta = next;
    eta = next_eta;
    ll = next_ll;
    if (beta.cwiseAbs().maxCoeff() > opt.divergence_bound)
      throw EstimationError(
          "logistic_fit: coefficients diverge (perfect separation); reduce the covariate set");
    if (step.cwiseAbs().maxCoeff() < opt.step_tolerance) {
      for (Eigen::Index i = 0; i < n; ++i) pi(i) = detail::logistic(eta(i));
      const Vec<Scalar> final_score = X.derived().transpose() * (d.derived() - pi);
      fit.max_abs_score = final_score.cwiseAbs().maxCoeff();
      converged = true;
      break;
    }
  }
  if (!converged) throw EstimationError("logistic_fit: Newton-Raphson did not converge");

  for (Eigen::Index i = 0; i < n; ++i) {
    pi(i) = detail::logistic(eta(i));
    w(i) = pi(i) * (1 - pi(i));
  }
  fit.coefficients = beta;
  fit.probabilities = pi;
  fit.covariance = (X.derived().transpose() * w.asDiagonal() * X.derived()).inverse();
  return fit;
}

}  // namespace retrofit
