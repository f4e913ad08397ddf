#pragma once

#include <random>

#include "retrofit/estimators/linear.hpp"
#include "retrofit/estimators/logistic.hpp"

namespace retrofit {

/// Group-by-period outcome means of a 2x2 design.
struct CellMeans {
  double pre_control = 0;
  double pre_treated = 0;
  double post_control = 0;
  double post_treated = 0;
};

inline double naive_did(const CellMeans& m) {
  return (m.post_treated - m.post_control) - (m.pre_treated - m.pre_control);
}

template <class D0, class D1, class DD>
CellMeans cell_means(const Eigen::MatrixBase<D0>& y0, const Eigen::MatrixBase<D1>& y1,
                     const Eigen::MatrixBase<DD>& d) {
  CellMeans m;
  double nt = 0, nc = 0;
  for (Eigen::Index i = 0; i < d.size(); ++i) {
    if (d(i) != 0) {
      m.pre_treated += y0(i);
      m.post_treated += y1(i);
      ++nt;
    } else {
      m.pre_control += y0(i);
      m.post_control += y1(i);
      ++nc;
    }
  }
  if (nt == 0 || nc == 0) throw EstimationError("naive_did: both groups must be non-empty");
  m.pre_treated /= nt;
  m.post_treated /= nt;
  m.pre_control /= nc;
  m.post_control /= nc;
  return m;
}

template <class D0, class D1, class DD>
double naive_did(const Eigen::MatrixBase<D0>& y0, const Eigen::MatrixBase<D1>& y1,
                 const Eigen::MatrixBase<DD>& d) {
  return naive_did(cell_means(y0, y1, d));
}

/// Standard error of the naive estimator from the two groups' ΔY variances.
template <class DY, class DD>
double naive_did_se(const Eigen::MatrixBase<DY>& dy, const Eigen::MatrixBase<DD>& d) {
  double st = 0, sc = 0, qt = 0, qc = 0, nt = 0, nc = 0;
  for (Eigen::Index i = 0; i < d.size(); ++i) {
    if (d(i) != 0) {
      st += dy(i), qt += dy(i) * dy(i), ++nt;
    } else {
      sc += dy(i), qc += dy(i) * dy(i), ++nc;
    }
  }
  if (nt < 2 || nc < 2) throw EstimationError("naive_did_se: need two units per group");
  const double vt = (qt - st * st / nt) / (nt - 1);
  const double vc = (qc - sc * sc / nc) / (nc - 1);
  return std::sqrt(vt / nt + vc / nc);
}

template <class Scalar>
struct TwfeFit {
  Scalar att = 0;
  Scalar se = 0;
  RegressionFit<Scalar> fit;
  Mat<Scalar> cluster_cov;
};

/// Two-way fixed effects DiD: OLS of the stacked outcomes on intercept, period,
/// group, period x group and the covariates of X (whose first column is the
/// intercept and is not repeated). att is the interaction coefficient; se is
/// cluster-robust with `cluster[i]` the cluster of unit i.
template <class D0, class D1, class DD, class DX>
TwfeFit<typename DX::Scalar> twfe_att(const Eigen::MatrixBase<D0>& y0,
                                      const Eigen::MatrixBase<D1>& y1,
                                      const Eigen::MatrixBase<DD>& d,
                                      const Eigen::MatrixBase<DX>& X,
                                      std::span<const int> cluster,
                                      std::span<const std::string> names = {}) {
  using Scalar = typename DX::Scalar;
  const Eigen::Index n = X.rows(), q = X.cols() - 1;
  if (y0.size() != n || y1.size() != n || d.size() != n ||
      static_cast<Eigen::Index>(cluster.size()) != n)
    throw std::invalid_argument("twfe_att: dimension mismatch");

  Mat<Scalar> Z(2 * n, 4 + q);
  Vec<Scalar> y(2 * n);
  std::vector<int> stacked(static_cast<std::size_t>(2 * n));
  for (Eigen::Index i = 0; i < n; ++i) {
    for (int t = 0; t < 2; ++t) {
      const Eigen::Index r = 2 * i + t;
      Z(r, 0) = 1;
      Z(r, 1) = t;
      Z(r, 2) = d(i);
      Z(r, 3) = t * d(i);
      Z.row(r).tail(q) = X.row(i).tail(q);
      y(r) = t == 0 ? y0(i) : y1(i);
      stacked[static_cast<std::size_t>(r)] = cluster[static_cast<std::size_t>(i)];
    }
  }
  std::vector<std::string> znames{"intercept", "post", "treated", "post:treated"};
  for (Eigen::Index j = 1; j <= q; ++j) znames.push_back(detail::column_name(names, j));

  TwfeFit<Scalar> out;
  out.fit = ols(Z, y, znames);
  out.cluster_cov = cluster_covariance(Z, out.fit, stacked);
  out.att = out.fit.coefficients(3);
  out.se = std::sqrt(out.cluster_cov(3, 3));
  return out;
}

template <class Scalar>
struct DrDidFit {
  Scalar att = 0;
  Scalar se = 0;
  Vec<Scalar> influence;
  Vec<Scalar> propensity;            // clipped
  Vec<Scalar> outcome_coefficients;  // regression of ΔY on X among controls
  LogisticFit<Scalar> ps;
};

struct DrDidOptions {
  double propensity_clip = 1e-6;
  LogisticOptions logistic{};
};

/// Doubly-robust DiD for panel data: a logistic propensity model and a linear
/// outcome-change regression on controls combined into one ATT. The standard
/// error comes from the influence function, which accounts for estimation of
/// both nuisance models.
template <class DY, class DD, class DX>
DrDidFit<typename DX::Scalar> drdid_panel(const Eigen::MatrixBase<DY>& dy,
                                          const Eigen::MatrixBase<DD>& d,
                                          const Eigen::MatrixBase<DX>& X,
                                          const DrDidOptions& opt = {},
                                          std::span<const std::string> names = {}) {
  using Scalar = typename DX::Scalar;
  const Eigen::Index n = X.rows(), p = X.cols();
  if (dy.size() != n || d.size() != n) throw std::invalid_argument("drdid_panel: dimension mismatch");
  const Eigen::Index nt = static_cast<Eigen::Index>((d.derived().array() != 0).count());
  if (nt < 2 || n - nt < 2) throw EstimationError("drdid_panel: need two units per group");

  DrDidFit<Scalar> out;
  out.ps = logistic_fit(X, d, opt.logistic, names);
  const Scalar clip = opt.propensity_clip;
  const Vec<Scalar> ps = out.ps.probabilities.array().max(clip).min(Scalar(1) - clip).matrix();
  out.propensity = ps;

  Mat<Scalar> Xc(n - nt, p);
  Vec<Scalar> dyc(n - nt);
  for (Eigen::Index i = 0, r = 0; i < n; ++i) {
    if (d(i) != 0) continue;
    Xc.row(r) = X.row(i);
    dyc(r++) = dy(i);
  }
  out.outcome_coefficients = ols(Xc, dyc, names).coefficients;

  const Vec<Scalar> e = dy.derived() - X.derived() * out.outcome_coefficients;
  const Vec<Scalar> wt = d.derived().template cast<Scalar>();
  const Vec<Scalar> wc =
      (ps.array() * (1 - wt.array()) / (1 - ps.array())).matrix();
  const Scalar mwt = wt.mean(), mwc = wc.mean();
  const Scalar eta_t = wt.cwiseProduct(e).mean() / mwt;
  const Scalar eta_c = wc.cwiseProduct(e).mean() / mwc;
  out.att = eta_t - eta_c;

  const Vec<Scalar> ctrl = (1 - wt.array()).matrix();
  const Mat<Scalar> A = X.derived().transpose() * ctrl.asDiagonal() * X.derived() / Scalar(n);
  const Vec<Scalar> v = (ps.array() * (1 - ps.array())).matrix();
  const Mat<Scalar> B = X.derived().transpose() * v.asDiagonal() * X.derived() / Scalar(n);

  // Rows are the per-unit linear representations of the two nuisance fits.
  const Mat<Scalar> lin_or =
      (ctrl.cwiseProduct(e).asDiagonal() * X.derived()) * A.inverse().transpose();
  const Mat<Scalar> lin_ps = ((wt - ps).asDiagonal() * X.derived()) * B.inverse().transpose();

  const Vec<Scalar> M1 = (X.derived().transpose() * wt) / Scalar(n) / mwt;
  const Vec<Scalar> M3 = (X.derived().transpose() * wc) / Scalar(n) / mwc;
  const Vec<Scalar> ec = (e.array() - eta_c).matrix();
  const Vec<Scalar> M2 = (X.derived().transpose() * wc.cwiseProduct(ec)) / Scalar(n) / mwc;

  out.influence = (wt.cwiseProduct((e.array() - eta_t).matrix()) / mwt -
                   wc.cwiseProduct(ec) / mwc - lin_or * (M1 - M3) - lin_ps * M2);
  out.se = std::sqrt(out.influence.squaredNorm() / Scalar(n) / Scalar(n));
  return out;
}

struct BootstrapResult {
  double se = 0;
  int replicates = 0;  // successful replicates
  int failures = 0;    // replicates where estimation failed
};

/// Bootstrap standard error of the DR-DiD ATT, resampling whole clusters with
/// replacement (`cluster[i]` is the cluster of unit i; one unit per cluster
/// gives the ordinary nonparametric bootstrap).
template <class DY, class DD, class DX>
BootstrapResult drdid_bootstrap_se(const Eigen::MatrixBase<DY>& dy, const Eigen::MatrixBase<DD>& d,
                                   const Eigen::MatrixBase<DX>& X, std::span<const int> cluster,
                                   int replicates, std::uint64_t seed,
                                   const DrDidOptions& opt = {}) {
  using Scalar = typename DX::Scalar;
  const Eigen::Index n = X.rows();
  int groups = 0;
  for (int c : cluster) groups = std::max(groups, c + 1);
  std::vector<std::vector<Eigen::Index>> members(static_cast<std::size_t>(groups));
  for (Eigen::Index i = 0; i < n; ++i) members[static_cast<std::size_t>(cluster[i])].push_back(i);

  std::mt19937_64 rng(seed);
  std::uniform_int_distribution<int> pick(0, groups - 1);
  std::vector<double> draws;
  BootstrapResult out;
  std::vector<Eigen::Index> rows;
  for (int b = 0; b < replicates; ++b) {
    rows.clear();
    for (int g = 0; g < groups; ++g) {
      const auto& m = members[static_cast<std::size_t>(pick(rng))];
      rows.insert(rows.end(), m.begin(), m.end());
    }
    const auto m = static_cast<Eigen::Index>(rows.size());
    Mat<Scalar> Xb(m, X.cols());
    Vec<Scalar> dyb(m), db(m);
    for (Eigen::Index r = 0; r < m; ++r) {
      Xb.row(r) = X.row(rows[r]);
      dyb(r) = dy(rows[r]);
      db(r) = d(rows[r]);
    }
    try {
      draws.push_back(static_cast<double>(drdid_panel(dyb, db, Xb, opt).att));
    } catch (const EstimationError&) {
      ++out.failures;
    }
  }
  out.replicates = static_cast<int>(draws.size());
  if (out.replicates < 2) throw EstimationError("drdid_bootstrap_se: too few successful replicates");
  double mean = 0;
  for (double x : draws) mean += x;
  mean /= out.replicates;
  double ss = 0;
  for (double x : draws) ss += (x - mean) * (x - mean);
  out.se = std::sqrt(ss / (out.replicates - 1));
  return out;
}

}  // namespace retrofit
