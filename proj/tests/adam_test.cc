#include "svolab/adam.h"

#include <gtest/gtest.h>

#include <cmath>

namespace svolab {
namespace {

TEST(AdamTest, MinimisesSquare) {
  std::vector<double> w = {3.0};
  AdamState state(1);
  int steps = 0;
  while (std::abs(w[0]) >= 0.05 && steps < 200) {
    std::vector<double> g = {2.0 * w[0]};
    AdamStep(state, w, g, 0.1);
    ++steps;
  }
  EXPECT_LT(std::abs(w[0]), 0.05);
  EXPECT_LE(steps, 200);
}

// Hand-expanded bias-corrected update for two steps.
TEST(AdamTest, MatchesExplicitFormula) {
  const double lr = 0.01, b1 = 0.9, b2 = 0.999, eps = 1e-8;
  std::vector<double> w = {1.0, -2.0};
  std::vector<double> g1 = {0.5, -4.0}, g2 = {-1.0, 3.0};
  AdamState state(2);
  AdamStep(state, w, g1, lr);
  AdamStep(state, w, g2, lr);
  EXPECT_EQ(state.step, 2);

  const double start[2] = {1.0, -2.0};
  for (int i = 0; i < 2; ++i) {
    double m = 0, v = 0, x = start[i];
    const double gs[2] = {g1[i], g2[i]};
    for (int t = 1; t <= 2; ++t) {
      m = b1 * m + (1 - b1) * gs[t - 1];
      v = b2 * v + (1 - b2) * gs[t - 1] * gs[t - 1];
      double mhat = m / (1 - std::pow(b1, t));
      double vhat = v / (1 - std::pow(b2, t));
      x -= lr * mhat / (std::sqrt(vhat) + eps);
    }
    EXPECT_NEAR(w[i], x, 1e-12) << i;
  }
}

TEST(AdamTest, FirstStepMovesByLearningRate) {
  std::vector<double> w = {0.0, 0.0, 0.0};
  std::vector<double> g = {1e-3, -50.0, 0.0};
  AdamState state(3);
  AdamStep(state, w, g, 0.1);
  EXPECT_NEAR(w[0], -0.1, 1e-5);
  EXPECT_NEAR(w[1], 0.1, 1e-9);
  EXPECT_EQ(w[2], 0.0);
}

TEST(AdamTest, ModelOverloadMatchesFlat) {
  MlpModel m = MlpModel::GlorotUniform(MlpShape{3, 2, 2}, 4);
  MlpModel g = MlpModel::GlorotUniform(MlpShape{3, 2, 2}, 5);
  std::vector<double> flat(m.parameters().begin(), m.parameters().end());
  AdamState a(flat.size()), b(flat.size());
  AdamStep(a, m, g, 0.01);
  AdamStep(b, flat, g.parameters(), 0.01);
  EXPECT_EQ(std::vector<double>(m.parameters().begin(), m.parameters().end()), flat);
}

}  // namespace
}  // namespace svolab
