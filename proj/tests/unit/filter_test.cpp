#include "dcs/filter.hpp"
#include "dcs/simulate.hpp"

#include <boost/math/distributions/students_t.hpp>
#include <boost/math/distributions/beta.hpp>
#include <boost/math/quadrature/gauss_kronrod.hpp>
#include <gtest/gtest.h>

#include <cmath>
#include <random>

#include "test_support.hpp"

namespace dcs {
namespace {

TEST(ScoreWeight, GaussianLimitIsIdentity) {
  Vector v(2);
  v << 1.5, -0.7;
  const ScoreTriple s = score_weight(v, Matrix::Identity(2, 2), std::numeric_limits<double>::infinity());
  EXPECT_EQ(s.u, v);
  EXPECT_EQ(s.w, 1.0);
  EXPECT_EQ(s.b, 0.0);
}

TEST(ScoreWeight, BoundHoldsForExtremeInnovations) {
  Matrix omega(2, 2);
  omega << 2.0, 0.6, 0.6, 0.5;
  const Matrix inv = omega.inverse();
  const double lmax = Eigen::SelfAdjointEigenSolver<Matrix>(omega).eigenvalues().maxCoeff();
  std::mt19937_64 rng(11);
  std::cauchy_distribution<double> cauchy;
  for (double nu : {0.8, 3.0, 7.0, 50.0}) {
    const double bound = 0.5 * std::sqrt(nu * lmax);
    double seen = 0.0;
    for (int k = 0; k < 20000; ++k) {
      Vector v(2);
      v << cauchy(rng), cauchy(rng);
      const ScoreTriple s = score_weight(v, inv, nu);
      seen = std::max(seen, s.u.norm());
      ASSERT_LE(s.u.norm(), bound * (1.0 + 1e-12));
      EXPECT_NEAR(s.b, 1.0 - 1.0 / s.w, 1e-15);
    }
    EXPECT_GT(seen, 0.9 * bound) << "bound should be nearly attained, nu=" << nu;
  }
}

TEST(LogDensity, UnivariateMatchesStudentT) {
  for (double nu : {1.5, 4.0, 30.0}) {
    for (double scale : {0.4, 2.5}) {
      const boost::math::students_t dist(nu);
      for (double x : {-3.0, -0.2, 0.0, 1.7}) {
        Vector v(1);
        v << x;
        Matrix om(1, 1);
        om << scale;
        const double ref = std::log(boost::math::pdf(dist, x / std::sqrt(scale)) / std::sqrt(scale));
        EXPECT_NEAR(loglik_obs(v, om, nu), ref, 1e-12);
      }
    }
  }
}

TEST(LogDensity, BivariateClosedForm) {
  Matrix om(2, 2);
  om << 1.3, 0.4, 0.4, 0.8;
  Vector v(2);
  v << 0.9, -1.4;
  const double nu = 6.0, n = 2.0;
  const double q = v.dot(om.inverse() * v);
  const double ref = std::lgamma((nu + n) / 2) - std::lgamma(nu / 2) - 0.5 * n * std::log(nu * M_PI) -
                     0.5 * std::log(om.determinant()) - 0.5 * (nu + n) * std::log1p(q / nu);
  EXPECT_NEAR(loglik_obs(v, om, nu), ref, 1e-12);
  const double gauss = -0.5 * n * std::log(2 * M_PI) - 0.5 * std::log(om.determinant()) - 0.5 * q;
  EXPECT_NEAR(loglik_obs(v, om, std::numeric_limits<double>::infinity()), gauss, 1e-12);
  EXPECT_NEAR(log_gamma_ratio(1e9, 2), std::log(0.5e9), 1e-6);
}

// E||u||^{2s} with Omega = c I: ||u||^2 = c nu beta (1 - beta), beta ~ Beta(N/2, nu/2).
TEST(UMoments, MatchQuadrature) {
  for (Eigen::Index n : {1, 2, 3}) {
    for (double nu : {3.0, 7.5}) {
      for (int s : {1, 2}) {
        const double c = 1.7;
        const boost::math::beta_distribution<double> beta(0.5 * n, 0.5 * nu);
        auto f = [&](double x) { return boost::math::pdf(beta, x) * std::pow(c * nu * x * (1 - x), s); };
        const double ref = boost::math::quadrature::gauss_kronrod<double, 61>::integrate(f, 0.0, 1.0, 12, 1e-13);
        EXPECT_NEAR(u_moment(nu, n, c, s), ref, 1e-9 * ref) << "n=" << n << " nu=" << nu << " s=" << s;
      }
    }
  }
}

TEST(UMoments, CovarianceMatchesSimulation) {
  const double nu = 5.0;
  Matrix om(2, 2);
  om << 1.0, 0.5, 0.5, 2.0;
  const ScaleFactor sf = factor_scale(om);
  Rng rng(5);
  const int draws = 200000;
  Matrix acc = Matrix::Zero(2, 2);
  for (int k = 0; k < draws; ++k) {
    const Vector v = sf.lower * draw_standard_t(nu, 2, rng);
    const Vector u = score_weight(v, sf.inverse, nu).u;
    acc += u * u.transpose();
  }
  acc /= draws;
  EXPECT_LT(test::rel_err(acc, u_covariance(nu, om)), 0.01);
}

TEST(Filter, ZeroGainGivesConstantLocation) {
  std::mt19937_64 rng(2);
  ModelParams p = test::random_params(rng);
  p = ModelParams(p.dof(), p.mean(), p.scale(), p.ar(), Matrix::Zero(2, 2));
  const Matrix y = test::noisy_series(rng, p, 50);
  const FilterOutput f = filter_pass(p, y);
  for (Eigen::Index t = 0; t <= 50; ++t) EXPECT_NEAR((f.mu.row(t).transpose() - p.mean()).norm(), 0.0, 1e-14);
  // With a constant location the log-likelihood is a sum of i.i.d. t log densities.
  double ref = 0.0;
  for (Eigen::Index t = 0; t < 50; ++t) ref += loglik_obs(y.row(t).transpose() - p.mean(), p.scale(), p.dof());
  EXPECT_NEAR(f.loglik, ref, 1e-10);
}

TEST(Filter, ReconstructionIdentity) {
  std::mt19937_64 rng(4);
  const ModelParams p = test::random_params(rng);
  const Matrix y = test::noisy_series(rng, p, 120);
  const FilterOutput f = filter_pass(p, y);
  ASSERT_EQ(f.mu.rows(), 121);
  for (Eigen::Index t = 0; t < 120; ++t) {
    EXPECT_NEAR((f.mu.row(t) + f.v.row(t) - y.row(t)).norm(), 0.0, 1e-12);
    const Vector next = p.mean() + p.ar() * (f.mu.row(t).transpose() - p.mean()) + p.gain() * f.u.row(t).transpose();
    EXPECT_NEAR((f.mu.row(t + 1).transpose() - next).norm(), 0.0, 1e-12);
    const Vector z = factor_scale(p.scale()).lower * f.std_resid.row(t).transpose();
    EXPECT_NEAR((z - f.v.row(t).transpose()).norm(), 0.0, 1e-12);
  }
  EXPECT_NEAR(f.loglik, f.ell.sum(), 1e-9);
}

TEST(Filter, PermutationEquivariance) {
  std::mt19937_64 rng(8);
  const ModelParams p = test::random_params(rng, 3);
  const Matrix y = test::noisy_series(rng, p, 80);
  Matrix P = Matrix::Zero(3, 3);
  P(0, 2) = P(1, 0) = P(2, 1) = 1.0;
  const ModelParams q(p.dof(), P * p.mean(), P * p.scale() * P.transpose(), P * p.ar() * P.transpose(),
                      P * p.gain() * P.transpose());
  const FilterOutput a = filter_pass(p, y);
  const FilterOutput b = filter_pass(q, y * P.transpose());
  EXPECT_NEAR(a.loglik, b.loglik, 1e-9);
  EXPECT_NEAR((a.mu * P.transpose() - b.mu).norm(), 0.0, 1e-10);
}

TEST(Filter, CustomStartAndErrors) {
  std::mt19937_64 rng(9);
  const ModelParams p = test::random_params(rng);
  const Matrix y = test::noisy_series(rng, p, 10);
  Vector start(2);
  start << 100.0, -100.0;
  EXPECT_EQ(filter_pass(p, y, start).mu.row(0).transpose(), start);
  Matrix bad = y;
  bad(3, 1) = std::numeric_limits<double>::quiet_NaN();
  EXPECT_THROW((void)filter_pass(p, bad), InvalidInput);
  EXPECT_THROW((void)filter_pass(p, Matrix::Zero(5, 3)), InvalidInput);
  Matrix indefinite(2, 2);
  indefinite << 1, 3, 3, 1;
  EXPECT_THROW((void)filter_pass(ModelParams(5.0, p.mean(), indefinite, p.ar(), p.gain()), y), NotPositiveDefinite);
}

TEST(Filter, GaussianPassUsesRawInnovations) {
  std::mt19937_64 rng(10);
  const ModelParams p = test::random_params(rng);
  const Matrix y = test::noisy_series(rng, p, 60);
  const FilterOutput g = gaussian_filter_pass(p, y);
  EXPECT_EQ(g.u, g.v);
  const FilterOutput h = filter_pass(p.as_gaussian(), y);
  EXPECT_NEAR((g.mu - h.mu).norm(), 0.0, 1e-12);
  EXPECT_NEAR(g.loglik, h.loglik, 1e-9);
}

}  // namespace
}  // namespace dcs
