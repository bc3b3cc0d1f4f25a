#include "svolab/logistic.h"

#include <gtest/gtest.h>

#include <cmath>
#include <random>

#include "support/oracles.h"

namespace svolab {
namespace {

struct Data {
  Eigen::MatrixXd design;
  std::vector<std::vector<double>> rows;
  std::vector<std::uint8_t> labels;
};

Data Simulate(std::size_t n, double b0, double b1, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> x_dist(0.0, 1.0);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  Data d;
  d.design.resize(static_cast<Eigen::Index>(n), 2);
  for (std::size_t i = 0; i < n; ++i) {
    double x = x_dist(rng);
    double p = 1.0 / (1.0 + std::exp(-(b0 + b1 * x)));
    d.design(static_cast<Eigen::Index>(i), 0) = 1.0;
    d.design(static_cast<Eigen::Index>(i), 1) = x;
    d.rows.push_back({1.0, x});
    d.labels.push_back(u(rng) < p ? 1 : 0);
  }
  return d;
}

TEST(LogisticTest, BalancedInterceptOnlyIsZero) {
  Eigen::MatrixXd x = Eigen::MatrixXd::Ones(10, 1);
  std::vector<std::uint8_t> y = {1, 0, 1, 0, 1, 0, 1, 0, 1, 0};
  LogisticFit fit = FitLogistic(x, y);
  EXPECT_TRUE(fit.converged);
  EXPECT_NEAR(fit.coefficients(0), 0.0, 1e-8);
  EXPECT_NEAR(fit.log_likelihood, 10 * std::log(0.5), 1e-10);
  EXPECT_EQ(fit.predictors, (std::vector<std::string>{"(Intercept)"}));
}

TEST(LogisticTest, RecoversKnownCoefficientsAndMatchesNewton) {
  Data d = Simulate(10000, 0.5, -1.0, 8);
  LogisticFit fit = FitLogistic(d.design, d.labels, {"(Intercept)", "x"});
  ASSERT_TRUE(fit.converged);
  EXPECT_NEAR(fit.coefficients(0), 0.5, 0.1);
  EXPECT_NEAR(fit.coefficients(1), -1.0, 0.1);
  std::vector<double> newton = testing::NewtonLogistic(d.rows, d.labels, {0.2, -0.4});
  EXPECT_NEAR(fit.coefficients(0), newton[0], 1e-6);
  EXPECT_NEAR(fit.coefficients(1), newton[1], 1e-6);
  EXPECT_NEAR(fit.log_likelihood,
              LogisticLogLikelihood(d.design, d.labels, fit.coefficients), 1e-9);
  EXPECT_LT(fit.gradient_norm, 1e-6);
}

TEST(LogisticTest, LogLikelihoodTraceNeverDecreases) {
  for (std::uint64_t seed = 1; seed <= 10; ++seed) {
    Data d = Simulate(300, 0.2 * static_cast<double>(seed) - 1.0, 1.5, seed);
    LogisticFit fit = FitLogistic(d.design, d.labels);
    ASSERT_GE(fit.log_likelihood_trace.size(), 2u);
    for (std::size_t i = 1; i < fit.log_likelihood_trace.size(); ++i) {
      EXPECT_GE(fit.log_likelihood_trace[i], fit.log_likelihood_trace[i - 1] - 1e-9);
    }
    EXPECT_LE(fit.log_likelihood, 0.0);
  }
}

TEST(LogisticTest, PerfectSeparation) {
  Eigen::MatrixXd x(6, 2);
  x << 1, -3, 1, -2, 1, -1, 1, 1, 1, 2, 1, 3;
  std::vector<std::uint8_t> y = {0, 0, 0, 1, 1, 1};
  EXPECT_THROW(FitLogistic(x, y), SeparationDetected);
}

TEST(LogisticTest, SingularDesign) {
  Eigen::MatrixXd x(4, 3);
  x << 1, 1, 2, 1, 2, 4, 1, 3, 6, 1, 4, 8;
  std::vector<std::uint8_t> y = {0, 1, 0, 1};
  EXPECT_THROW(FitLogistic(x, y), SingularDesign);
}

LogisticFit Hand(std::vector<std::string> predictors, double ll) {
  LogisticFit f;
  f.predictors = std::move(predictors);
  f.log_likelihood = ll;
  f.converged = true;
  return f;
}

TEST(LogisticTest, LikelihoodRatio) {
  LogisticFit full = Hand({"(Intercept)", "a"}, -100.0);
  LogisticFit reduced = Hand({"(Intercept)"}, -103.0);
  LikelihoodRatio lr = LikelihoodRatioTest(full, reduced, 1);
  EXPECT_DOUBLE_EQ(lr.chi_sq, 6.0);
  // df = 1: P(X > x) = erfc(sqrt(x / 2)).
  EXPECT_NEAR(lr.p_value, std::erfc(std::sqrt(3.0)), 1e-12);
  EXPECT_NEAR(lr.p_value, 0.0143, 5e-5);

  LikelihoodRatio same = LikelihoodRatioTest(full, full, 1);
  EXPECT_EQ(same.chi_sq, 0.0);
  EXPECT_EQ(same.p_value, 1.0);

  LogisticFit noisy = Hand({"(Intercept)", "a"}, -103.0 - 1e-12);
  EXPECT_EQ(LikelihoodRatioTest(noisy, reduced, 1).chi_sq, 0.0);
}

TEST(LogisticTest, LikelihoodRatioErrors) {
  LogisticFit full = Hand({"(Intercept)", "a"}, -100.0);
  EXPECT_THROW(LikelihoodRatioTest(full, Hand({"(Intercept)", "b"}, -101), 1), NotNested);
  LogisticFit bad = Hand({"(Intercept)"}, -101);
  bad.converged = false;
  EXPECT_THROW(LikelihoodRatioTest(full, bad, 1), NotConverged);
}

TEST(LogisticTest, ChiSquareTailAgainstClosedForms) {
  for (double x : {0.1, 1.0, 3.84, 10.0}) {
    EXPECT_NEAR(ChiSquareUpperTail(x, 1), std::erfc(std::sqrt(x / 2)), 1e-12) << x;
    // df = 2 is exponential.
    EXPECT_NEAR(ChiSquareUpperTail(x, 2), std::exp(-x / 2), 1e-12) << x;
    // df = 4: exp(-x/2) (1 + x/2).
    EXPECT_NEAR(ChiSquareUpperTail(x, 4), std::exp(-x / 2) * (1 + x / 2), 1e-12) << x;
  }
  EXPECT_EQ(ChiSquareUpperTail(0.0, 3), 1.0);
}

}  // namespace
}  // namespace svolab
