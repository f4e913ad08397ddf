#include <doctest.h>

#include <cmath>
#include <numeric>
#include <random>

#include "retrofit/estimators/did.hpp"
#include "retrofit/estimators/linear.hpp"
#include "retrofit/estimators/logistic.hpp"
#include "retrofit/synth.hpp"

using namespace retrofit;
using Eigen::MatrixXd;
using Eigen::VectorXd;

namespace {

struct Panel {
  VectorXd y0, y1, d;
  MatrixXd x;
};

Panel random_panel(std::uint64_t seed, int n = 300) {
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> z;
  Panel p{VectorXd(n), VectorXd(n), VectorXd(n), MatrixXd(n, 3)};
  for (int i = 0; i < n; ++i) {
    p.x(i, 0) = 1;
    p.x(i, 1) = z(rng);
    p.x(i, 2) = z(rng);
    p.d(i) = std::bernoulli_distribution(0.3)(rng);
    p.y0(i) = 5 + 0.3 * p.x(i, 1) + 0.2 * z(rng);
    p.y1(i) = p.y0(i) - 0.1 * p.d(i) + 0.05 * p.x(i, 2) + 0.1 * z(rng);
  }
  return p;
}

std::vector<int> identity_clusters(Eigen::Index n) {
  std::vector<int> c(static_cast<std::size_t>(n));
  std::iota(c.begin(), c.end(), 0);
  return c;
}

}  // namespace

TEST_CASE("naive_did examples") {
  CHECK(naive_did(CellMeans{10.0, 10.0, 9.8, 9.0}) == doctest::Approx(-0.8));
  CHECK(naive_did(CellMeans{10.0, 12.0, 9.0, 11.0}) == doctest::Approx(0.0));
  CHECK(naive_did(CellMeans{13.5, 13.5, 13.3, 12.5}) == doctest::Approx(-0.8));

  VectorXd y0(4), y1(4), d(4);
  y0 << 10, 10, 10, 10;
  y1 << 9, 9, 9.8, 9.8;
  d << 1, 1, 0, 0;
  CHECK(naive_did(y0, y1, d) == doctest::Approx(-0.8));
  d.setZero();
  CHECK_THROWS_AS(naive_did(y0, y1, d), EstimationError);
}

TEST_CASE("ols") {
  SUBCASE("exact fit") {
    MatrixXd X(5, 2);
    VectorXd y(5);
    for (int i = 0; i < 5; ++i) {
      X(i, 0) = 1;
      X(i, 1) = i * 0.7 - 1;
      y(i) = 2 + 3 * X(i, 1);
    }
    auto f = ols(X, y);
    CHECK(f.coefficients(0) == doctest::Approx(2));
    CHECK(f.coefficients(1) == doctest::Approx(3));
    CHECK(f.residuals.cwiseAbs().maxCoeff() < 1e-12);
  }
  SUBCASE("intercept only gives the mean") {
    VectorXd y(4);
    y << 1, 4, 2, 9;
    auto f = ols(MatrixXd::Ones(4, 1), y);
    CHECK(f.coefficients(0) == doctest::Approx(4));
  }
  SUBCASE("weighted normal equations") {
    std::mt19937_64 rng(5);
    std::normal_distribution<double> z;
    for (int rep = 0; rep < 20; ++rep) {
      const int n = 200;
      MatrixXd X(n, 4);
      VectorXd y(n), w(n);
      for (int i = 0; i < n; ++i) {
        X(i, 0) = 1;
        for (int j = 1; j < 4; ++j) X(i, j) = z(rng) * 10;
        y(i) = X.row(i).sum() + z(rng) * 50;
        w(i) = std::exp(z(rng));
      }
      auto f = ols(X, y, w);
      CHECK((X.transpose() * w.cwiseProduct(f.residuals)).cwiseAbs().maxCoeff() < 1e-8);
      CHECK(f.covariance.rows() == 4);
      CHECK((f.covariance.diagonal().array() > 0).all());
    }
  }
  SUBCASE("rank deficiency names the dependent column") {
    MatrixXd X(6, 3);
    for (int i = 0; i < 6; ++i) {
      X(i, 0) = 1;
      X(i, 1) = i;
      X(i, 2) = 2 * i;
    }
    VectorXd y = VectorXd::LinSpaced(6, 0, 1);
    const std::vector<std::string> names{"intercept", "a", "twice_a"};
    try {
      ols(X, y, names);
      FAIL("expected rank error");
    } catch (const EstimationError& e) {
      const std::string msg = e.what();
      CHECK((msg.find("twice_a") != std::string::npos || msg.find(" a") != std::string::npos));
    }
  }
}

TEST_CASE("logistic_fit") {
  SUBCASE("intercept only has the closed form") {
    VectorXd d(10);
    d << 1, 0, 0, 1, 0, 0, 0, 1, 0, 0;
    auto f = logistic_fit(MatrixXd::Ones(10, 1), d);
    CHECK(f.coefficients(0) == doctest::Approx(std::log(0.3 / 0.7)).epsilon(1e-10));
    CHECK(f.max_abs_score < 1e-8);
  }
  SUBCASE("score vanishes at the optimum") {
    auto p = random_panel(3, 1000);
    auto f = logistic_fit(p.x, p.d);
    const VectorXd score = p.x.transpose() * (p.d - f.probabilities);
    CHECK(score.cwiseAbs().maxCoeff() < 1e-8);
    CHECK(f.max_abs_score < 1e-8);
  }
  SUBCASE("perfect separation is reported") {
    MatrixXd X(20, 2);
    VectorXd d(20);
    for (int i = 0; i < 20; ++i) {
      X(i, 0) = 1;
      X(i, 1) = i;
      d(i) = i >= 10;
    }
    CHECK_THROWS_AS(logistic_fit(X, d), EstimationError);
  }
  SUBCASE("non-binary outcome") {
    VectorXd d = VectorXd::Constant(3, 0.5);
    CHECK_THROWS(logistic_fit(MatrixXd::Ones(3, 1), d));
  }
}

TEST_CASE("estimator equivalence without covariates") {
  for (std::uint64_t seed = 1; seed <= 10; ++seed) {
    auto p = random_panel(seed);
    const Eigen::Index n = p.d.size();
    const MatrixXd one = MatrixXd::Ones(n, 1);
    const VectorXd dy = p.y1 - p.y0;
    const double naive = naive_did(p.y0, p.y1, p.d);
    const auto cl = identity_clusters(n);
    CHECK(std::abs(twfe_att(p.y0, p.y1, p.d, one, cl).att - naive) < 1e-10);
    auto dr = drdid_panel(dy, p.d, one);
    CHECK(std::abs(dr.att - naive) < 1e-10);
    // With an intercept only, the influence-function se matches the two-sample formula.
    CHECK(dr.se == doctest::Approx(naive_did_se(dy, p.d)).epsilon(0.01));
  }
}

TEST_CASE("uniform shift of the outcome change") {
  auto p = random_panel(21);
  const VectorXd dy = p.y1 - p.y0;
  const VectorXd shifted = (dy.array() + 7.5).matrix();
  const auto a = drdid_panel(dy, p.d, p.x);
  const auto b = drdid_panel(shifted, p.d, p.x);
  CHECK(std::abs(a.att - b.att) < 1e-12);
  CHECK(std::abs(naive_did(p.y0, (p.y1.array() + 7.5).matrix(), p.d) - naive_did(p.y0, p.y1, p.d)) <
        1e-12);
  const auto cl = identity_clusters(dy.size());
  const VectorXd y1s = (p.y1.array() + 7.5).matrix();
  CHECK(std::abs(twfe_att(p.y0, y1s, p.d, p.x, cl).att - twfe_att(p.y0, p.y1, p.d, p.x, cl).att) <
        1e-10);
}

TEST_CASE("drdid influence function") {
  for (std::uint64_t seed : {4u, 5u, 6u}) {
    auto p = random_panel(seed, 800);
    const VectorXd dy = p.y1 - p.y0;
    auto dr = drdid_panel(dy, p.d, p.x);
    CHECK(std::abs(dr.influence.mean()) < 1e-10);
    CHECK(dr.se == doctest::Approx(std::sqrt(dr.influence.squaredNorm()) / dr.influence.size()));
    CHECK(dr.att == doctest::Approx(-0.1).epsilon(0.5));
    CHECK((dr.propensity.array() >= 1e-6).all());
  }
}

TEST_CASE("drdid on synthetic panels") {
  ScenarioSpec spec;
  spec.n_treated = 1000;
  spec.n_control_pool = 1000;
  spec.true_att_log = -0.10;
  auto s = generate_panel(spec, 17);
  auto dr = drdid_panel(s.delta_y, s.d, s.x);
  CHECK(std::abs(dr.att - s.true_att) < 2 * dr.se);
  // TWFE covariates enter as levels, so trends must not depend on them.
  spec.trend_coefs = {0.0, 0.0};
  s = generate_panel(spec, 17);
  const auto cl = identity_clusters(s.d.size());
  auto tw = twfe_att(s.y0, s.y1, s.d, s.x, cl);
  CHECK(std::abs(tw.att - s.true_att) < 2 * tw.se);
}

TEST_CASE("bootstrap standard error") {
  ScenarioSpec spec;
  spec.n_treated = 300;
  spec.n_control_pool = 700;
  auto s = generate_panel(spec, 99);
  const auto cl = identity_clusters(s.d.size());
  auto dr = drdid_panel(s.delta_y, s.d, s.x);
  auto b = drdid_bootstrap_se(s.delta_y, s.d, s.x, cl, 200, 3);
  CHECK(b.replicates + b.failures == 200);
  CHECK(b.se == doctest::Approx(dr.se).epsilon(0.25));
  auto again = drdid_bootstrap_se(s.delta_y, s.d, s.x, cl, 200, 3);
  CHECK(again.se == b.se);
}

TEST_CASE("twfe cluster covariance reduces to HC1 shape with singleton clusters") {
  auto p = random_panel(8, 400);
  const auto cl = identity_clusters(p.d.size());
  auto tw = twfe_att(p.y0, p.y1, p.d, p.x, cl);
  CHECK(tw.se > 0);
  CHECK(tw.cluster_cov.rows() == 4 + 2);
  CHECK(std::abs(tw.att - (-0.1)) < 4 * tw.se);
}
