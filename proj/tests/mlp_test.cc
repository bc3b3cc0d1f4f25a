#include "svolab/mlp.h"

#include <gtest/gtest.h>

#include <cmath>
#include <random>

#include "support/oracles.h"
#include "support/synthetic.h"

namespace svolab {
namespace {

TEST(MlpTest, ParameterCount) {
  MlpShape s{900, 64, 32};
  EXPECT_EQ(s.parameter_count(), 900u * 64 + 64 + 64 * 32 + 32 + 32 * 2 + 2);
  MlpModel m(s);
  EXPECT_EQ(m.parameters().size(), s.parameter_count());
}

TEST(MlpTest, ZeroModelIsUniformAndATie) {
  MlpModel m(MlpShape{4, 3, 2});
  std::vector<double> x = {1, 2, 3, 4};
  auto p = Forward(m, x);
  EXPECT_DOUBLE_EQ(p[0], 0.5);
  EXPECT_DOUBLE_EQ(p[1], 0.5);

  std::vector<TriadExample> examples(3);
  for (std::size_t i = 0; i < examples.size(); ++i) {
    examples[i].features = x;
    examples[i].first_is_subject = i != 1;
  }
  Evaluation e = Evaluate(m, examples);
  EXPECT_EQ(e.ties, 3u);
  // Ties resolve to "first is subject".
  EXPECT_EQ(e.correct, 2u);
  EXPECT_DOUBLE_EQ(e.accuracy, 2.0 / 3.0);
}

TEST(MlpTest, GlorotIsSeededWithZeroBiases) {
  MlpShape s{10, 6, 4};
  MlpModel a = MlpModel::GlorotUniform(s, 5);
  EXPECT_EQ(a, MlpModel::GlorotUniform(s, 5));
  EXPECT_FALSE(a == MlpModel::GlorotUniform(s, 6));
  EXPECT_TRUE(a.b1().isZero());
  EXPECT_TRUE(a.b2().isZero());
  EXPECT_TRUE(a.b3().isZero());
  const double limit = std::sqrt(6.0 / (10 + 6));
  EXPECT_LE(a.w1().cwiseAbs().maxCoeff(), limit);
}

TEST(MlpTest, LossMatchesLoopOracle) {
  std::mt19937_64 rng(17);
  for (int trial = 0; trial < 20; ++trial) {
    testing::CheckProblem p = testing::RandomCheckProblem(rng);
    double expected = testing::LoopLoss(p.model, p.features, p.labels);
    EXPECT_NEAR(ComputeLoss(p.model, p.features, p.labels), expected, 1e-12);
    EXPECT_NEAR(ComputeLossAndGradients(p.model, p.features, p.labels).loss, expected, 1e-12);
  }
}

TEST(MlpTest, ForwardBatchMatchesForward) {
  std::mt19937_64 rng(3);
  testing::CheckProblem p = testing::RandomCheckProblem(rng);
  RowMatrix probs = ForwardBatch(p.model, p.features);
  for (Eigen::Index r = 0; r < p.features.rows(); ++r) {
    std::vector<double> row(p.features.row(r).begin(), p.features.row(r).end());
    auto single = Forward(p.model, row);
    EXPECT_NEAR(probs(r, 0), single[0], 1e-14);
    EXPECT_NEAR(probs(r, 0) + probs(r, 1), 1.0, 1e-14);
  }
}

TEST(MlpTest, GradientsMatchCentralDifferences) {
  std::mt19937_64 rng(2024);
  for (int trial = 0; trial < 25; ++trial) {
    testing::CheckProblem p = testing::RandomCheckProblem(rng);
    testing::GradientCheck c = testing::CheckGradients(p.model, p.features, p.labels);
    EXPECT_EQ(c.entries, p.model.parameters().size());
    EXPECT_LT(c.max_relative_error, 1e-4) << "trial " << trial;
  }
}

TEST(MlpTest, ShapeAndBatchErrors) {
  MlpModel m(MlpShape{4, 3, 2});
  RowMatrix wrong(2, 5);
  wrong.setZero();
  std::vector<std::uint8_t> labels = {0, 1};
  EXPECT_THROW(ComputeLoss(m, wrong, labels), ShapeError);
  RowMatrix empty(0, 4);
  EXPECT_THROW(ComputeLossAndGradients(m, empty, std::span<const std::uint8_t>{}), EmptyBatch);
  Dataset none;
  none.features.resize(0, 4);
  EXPECT_THROW(Evaluate(m, none), EmptyDataset);
}

TEST(MlpTest, ModelFileRoundTrip) {
  testing::TempDir dir;
  MlpModel m = MlpModel::GlorotUniform(MlpShape{7, 5, 3}, 1);
  m.b3()(1) = -0.25;
  WriteModelFile(dir / "m.bin", m);
  EXPECT_EQ(ReadModelFile(dir / "m.bin"), m);
}

TEST(MlpTest, DatasetFromExamples) {
  std::vector<TriadExample> ex = testing::TwoGaussians(9, 6, 1.0, 1, 1);
  Dataset d = Dataset::FromExamples(ex);
  ASSERT_EQ(d.size(), 9u);
  EXPECT_EQ(d.feature_length(), 6);
  for (std::size_t i = 0; i < ex.size(); ++i) {
    EXPECT_EQ(d.first_is_subject[i], ex[i].first_is_subject ? 1 : 0);
    EXPECT_EQ(d.features(static_cast<Eigen::Index>(i), 2), ex[i].features[2]);
  }
}

}  // namespace
}  // namespace svolab
