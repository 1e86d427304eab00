#include "dcs/simulate.hpp"
#include "dcs/stability.hpp"

#include <gtest/gtest.h>

#include <sstream>

#include "test_support.hpp"

namespace dcs {
namespace {

TEST(Draws, StudentTVariance) {
  Rng rng(1);
  const double nu = 6.0;
  const int draws = 200000;
  Matrix acc = Matrix::Zero(2, 2);
  for (int k = 0; k < draws; ++k) {
    const Vector e = draw_standard_t(nu, 2, rng);
    acc += e * e.transpose();
  }
  acc /= draws;
  EXPECT_NEAR(acc(0, 0), nu / (nu - 2.0), 0.04);
  EXPECT_NEAR(acc(1, 1), nu / (nu - 2.0), 0.04);
  EXPECT_NEAR(acc(0, 1), 0.0, 0.02);
  EXPECT_THROW((void)draw_standard_t(0.0, 2, rng), InvalidInput);
}

TEST(Simulate, DeterministicAndSeedSensitive) {
  const ModelParams p = bivariate_design(5.0);
  const SimOutput a = simulate(p, 300, 100, 99);
  const SimOutput b = simulate(p, 300, 100, 99);
  const SimOutput c = simulate(p, 300, 100, 100);
  EXPECT_EQ(a.y, b.y);
  EXPECT_EQ(a.mu_true, b.mu_true);
  EXPECT_NE(a.y, c.y);
  // The true location path is what the filter reproduces at the true parameters.
  const FilterOutput f = filter_pass(p, a.y, Vector(a.mu_true.row(0).transpose()));
  EXPECT_LT((f.mu.topRows(300) - a.mu_true).norm(), 1e-9);
}

TEST(Simulate, PrefixProperty) {
  const ModelParams p = bivariate_design(4.0);
  const SimOutput longer = simulate(p, 500, 50, 3);
  const SimOutput shorter = simulate(p, 200, 50, 3);
  EXPECT_EQ(longer.y.topRows(200), shorter.y);
}

TEST(Simulate, RejectsNonStationary) {
  const Matrix eye = Matrix::Identity(2, 2);
  EXPECT_THROW((void)simulate(ModelParams(5.0, Vector::Zero(2), eye, 1.01 * eye, eye), 10, 0, 1), InvalidInput);
  EXPECT_THROW((void)simulate(bivariate_design(5.0), 0, 0, 1), InvalidInput);
}

TEST(ParallelFor, CoversEveryIndexAndPropagatesErrors) {
  std::vector<int> hits(1000, 0);
  parallel_for(hits.size(), 4, [&](std::size_t i) { hits[i] += 1; });
  EXPECT_EQ(std::count(hits.begin(), hits.end(), 1), 1000);
  EXPECT_THROW(parallel_for(10, 3, [](std::size_t i) { if (i == 7) throw InvalidInput("boom"); }), InvalidInput);
}

TEST(MonteCarlo, IndependentOfThreadCount) {
  const ModelParams p = bivariate_design(5.0);
  McOptions one;
  one.threads = 1;
  one.burn_in = 100;
  McOptions four = one;
  four.threads = 4;
  const McReport a = mc_study(p, {150, 300}, 6, 11, one);
  const McReport b = mc_study(p, {150, 300}, 6, 11, four);
  ASSERT_EQ(a.cells.size(), 2u);
  for (std::size_t k = 0; k < a.cells.size(); ++k) {
    EXPECT_EQ(a.cells[k].draws, b.cells[k].draws);
    EXPECT_EQ(a.cells[k].rmse, b.cells[k].rmse);
  }
  const McCell& c = a.cells[1];
  EXPECT_EQ(c.successes + c.failures, 6);
  const Vector err = (c.draws.rowwise() - a.truth.transpose()).colwise().squaredNorm().transpose() / c.successes;
  EXPECT_LT((err.cwiseSqrt() - c.rmse).norm(), 1e-12);
  EXPECT_LT((c.estimate - a.truth - c.bias).norm(), 1e-12);
  std::ostringstream csv;
  write_mc_csv(csv, a);
  const std::string text = csv.str();
  EXPECT_EQ(std::count(text.begin(), text.end(), '\n'), 1 + 2 * 14);
  EXPECT_NE(format_mc_table(a).find("Phi11"), std::string::npos);
}

TEST(Contraction, ZeroGainIsExact) {
  Matrix phi(2, 2);
  phi << 0.6, 0.2, 0.0, 0.4;
  const ContractionEstimate c = contraction_mc(phi, Matrix::Zero(2, 2), Matrix::Identity(2, 2), 5.0, 1000, 1);
  EXPECT_DOUBLE_EQ(c.estimate, std::log(spectral_norm(phi)));
  EXPECT_EQ(c.se, 0.0);
  EXPECT_THROW((void)contraction_mc(phi, phi, Matrix::Identity(2, 2), 5.0, 10, 1), InvalidInput);
}

// The draw X = Phi + K dC/dmu; check against the u-Jacobian at v = S e.
TEST(Contraction, MatchesFilterJacobianAverage) {
  const double nu = 7.0;
  Matrix om(2, 2);
  om << 1.5, 0.4, 0.4, 0.8;
  Matrix phi(2, 2), gain(2, 2);
  phi << 0.5, 0.1, 0.0, 0.4;
  gain << 0.6, 0.0, 0.1, 0.5;
  const ContractionEstimate c = contraction_mc(phi, gain, om, nu, 20000, 4);
  const Matrix root = symmetric_sqrt(om);
  Rng rng(4);
  double sum = 0.0;
  for (int k = 0; k < 20000; ++k) {
    const Vector v = root * draw_standard_t(nu, 2, rng);
    const ScoreTriple st = score_weight(v, om.inverse(), nu);
    const Matrix dC = (2.0 * (1 - st.b) * (1 - st.b) / nu) * v * (om.inverse() * v).transpose() -
                      (1 - st.b) * Matrix::Identity(2, 2);
    sum += std::log(spectral_norm(phi + gain * dC));
  }
  EXPECT_NEAR(c.estimate, sum / 20000, 1e-10);
}

TEST(RegionScan, MonotoneBoundaryAndDeterministic) {
  RegionOptions opt;
  opt.threads = 1;
  const RegionScan a = region_scan(7.0, Matrix::Identity(2, 2), 8, 2000, 5, opt);
  opt.threads = 3;
  const RegionScan b = region_scan(7.0, Matrix::Identity(2, 2), 8, 2000, 5, opt);
  int inside = 0;
  for (std::size_t k = 0; k < a.cells.size(); ++k) {
    EXPECT_EQ(a.cells[k].value.estimate, b.cells[k].value.estimate);
    inside += a.cells[k].invertible;
  }
  EXPECT_GT(inside, 0);
  EXPECT_LT(inside, 64);
  // Shrinking either norm never leaves the region.
  for (int i = 0; i < 8; ++i) {
    for (int j = 0; j < 8; ++j) {
      if (!a.at(i, j).invertible) continue;
      if (i > 0) EXPECT_TRUE(a.at(i - 1, j).invertible) << i << "," << j;
      if (j > 0) EXPECT_TRUE(a.at(i, j - 1).invertible) << i << "," << j;
    }
  }
  std::ostringstream csv;
  write_region_csv(csv, a);
  const std::string text = csv.str();
  EXPECT_EQ(std::count(text.begin(), text.end(), '\n'), 65);
}

TEST(TwoStart, DivergenceDecaysInsideRegion) {
  const ModelParams p = bivariate_design(7.0);
  const SimOutput sim = simulate(p, 400, 100, 9);
  Vector a(2), b(2);
  a << 10.0, -10.0;
  b << -5.0, 20.0;
  const StartDivergence d = two_start_divergence(p, sim.y, a, b);
  EXPECT_LT(d.rate, 1.0);
  EXPECT_GT(d.r_squared, 0.9);
  EXPECT_LT(d.distance.back(), 1e-8 * d.distance.front());
  EXPECT_THROW((void)two_start_divergence(p, sim.y, a, a), InvalidInput);
}

}  // namespace
}  // namespace dcs
