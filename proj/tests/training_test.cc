#include "svolab/training.h"

#include <gtest/gtest.h>

#include <cmath>
#include <limits>

#include "support/synthetic.h"

namespace svolab {
namespace {

using testing::TwoGaussians;

ClassifierConfig Small() {
  ClassifierConfig c;
  c.hidden1 = 8;
  c.hidden2 = 8;
  c.max_epochs = 15;
  c.batch_size = 16;
  c.patience = 5;
  c.seed = 42;
  return c;
}

TEST(TrainingTest, DefaultGridIsEighteenInCanonicalOrder) {
  std::vector<ClassifierConfig> grid = BuildGrid({}, ClassifierConfig{});
  ASSERT_EQ(grid.size(), 18u);
  for (std::size_t i = 1; i < grid.size(); ++i) {
    EXPECT_TRUE(CanonicalLess(grid[i - 1], grid[i])) << i;
  }
  EXPECT_EQ(grid.front().learning_rate, 0.0001);
  EXPECT_EQ(grid.front().hidden1, 32);
  EXPECT_EQ(grid.front().hidden2, 32);
  EXPECT_EQ(grid.back().learning_rate, 0.001);
  EXPECT_EQ(grid.back().hidden1, 128);
  EXPECT_EQ(grid.back().hidden2, 128);
  EXPECT_EQ(grid[1].hidden2, 64);
  EXPECT_EQ(grid[3].hidden1, 64);
}

TEST(TrainingTest, GridCarriesBaseFields) {
  ClassifierConfig base;
  base.max_epochs = 7;
  base.seed = 99;
  for (const ClassifierConfig& c : BuildGrid({}, base)) {
    EXPECT_EQ(c.max_epochs, 7);
    EXPECT_EQ(c.seed, 99u);
  }
}

GridEntry Entry(double lr, int h1, int h2, std::optional<double> dev) {
  GridEntry e;
  e.config.learning_rate = lr;
  e.config.hidden1 = h1;
  e.config.hidden2 = h2;
  if (dev) {
    TrainedResult r{e.config, MlpModel(MlpShape{1, 1, 1}), *dev, std::nullopt, 1, 1, 0, {}};
    e.result = r;
  } else {
    e.error = "failed";
  }
  return e;
}

TEST(TrainingTest, SelectBestBreaksTiesCanonically) {
  std::vector<GridEntry> entries = {
      Entry(0.001, 64, 32, 0.8), Entry(0.0001, 128, 32, 0.8), Entry(0.0001, 32, 32, 0.7),
      Entry(0.0001, 32, 64, std::nullopt)};
  EXPECT_EQ(SelectBest(entries), 1u);
  entries[2] = Entry(0.0001, 32, 32, 0.81);
  EXPECT_EQ(SelectBest(entries), 2u);
}

TEST(TrainingTest, SelectBestNeedsOneSuccess) {
  std::vector<GridEntry> entries = {Entry(0.001, 32, 32, std::nullopt)};
  EXPECT_THROW(SelectBest(entries), std::runtime_error);
}

TEST(TrainingTest, LearnsSeparableData) {
  Dataset train = Dataset::FromExamples(TwoGaussians(400, 10, 3.0, 1, 2));
  Dataset dev = Dataset::FromExamples(TwoGaussians(200, 10, 3.0, 1, 3));
  TrainedResult r = Train(Small(), train, dev);
  EXPECT_GT(r.dev_accuracy, 0.95);
  EXPECT_EQ(Evaluate(r.model, dev).accuracy, r.dev_accuracy);
  ASSERT_FALSE(r.history.empty());
  EXPECT_LE(r.best_epoch, r.epochs_run);
}

TEST(TrainingTest, SingleExampleIsMemorised) {
  std::vector<TriadExample> one = TwoGaussians(1, 6, 1.0, 5, 5);
  std::vector<TriadExample> repeated(32, one[0]);
  Dataset train = Dataset::FromExamples(repeated);
  Dataset dev = Dataset::FromExamples(one);
  ClassifierConfig c = Small();
  c.learning_rate = 0.05;
  c.max_epochs = 200;
  c.patience = 200;
  TrainedResult r = Train(c, train, dev);
  EXPECT_LT(r.history.back().train_loss, 0.01);
}

TEST(TrainingTest, EarlyStoppingRespectsPatience) {
  // Shuffled labels: dev accuracy plateaus quickly.
  Dataset train = Dataset::FromExamples(testing::ShuffleLabels(TwoGaussians(200, 6, 0.0, 1, 2), 9));
  Dataset dev = Dataset::FromExamples(TwoGaussians(50, 6, 0.0, 1, 3));
  ClassifierConfig c = Small();
  c.max_epochs = 200;
  c.patience = 3;
  TrainedResult r = Train(c, train, dev);
  EXPECT_LT(r.epochs_run, 200);
  EXPECT_EQ(r.epochs_run - r.best_epoch, 3);
}

TEST(TrainingTest, NonFiniteLossIsReported) {
  std::vector<TriadExample> ex = TwoGaussians(20, 4, 1.0, 1, 1);
  ex[3].features[0] = std::numeric_limits<double>::quiet_NaN();
  Dataset train = Dataset::FromExamples(ex);
  Dataset dev = Dataset::FromExamples(TwoGaussians(5, 4, 1.0, 1, 2));
  EXPECT_THROW(Train(Small(), train, dev), NonFiniteLoss);
}

TEST(TrainingTest, InvalidInputs) {
  Dataset dev = Dataset::FromExamples(TwoGaussians(5, 4, 1.0, 1, 2));
  Dataset other = Dataset::FromExamples(TwoGaussians(5, 3, 1.0, 1, 2));
  Dataset empty;
  empty.features.resize(0, 4);
  EXPECT_THROW(Train(Small(), empty, dev), EmptyDataset);
  EXPECT_THROW(Train(Small(), dev, other), ShapeError);
  ClassifierConfig bad = Small();
  bad.batch_size = 0;
  EXPECT_THROW(Train(bad, dev, dev), std::invalid_argument);
}

struct GridFixture : ::testing::Test {
  Dataset train = Dataset::FromExamples(TwoGaussians(200, 8, 1.0, 3, 4));
  Dataset dev = Dataset::FromExamples(TwoGaussians(100, 8, 1.0, 3, 5));
  Dataset test = Dataset::FromExamples(TwoGaussians(100, 8, 1.0, 3, 6));
  std::vector<ClassifierConfig> grid = [] {
    ClassifierConfig base = Small();
    base.max_epochs = 4;
    GridSpec spec;
    spec.hidden1 = {4, 8};
    spec.hidden2 = {4};
    return BuildGrid(spec, base);
  }();
};

TEST_F(GridFixture, TestSetDoesNotInfluenceSelection) {
  GridSearchResult with = GridSearch(grid, train, dev, &test);
  GridSearchResult without = GridSearch(grid, train, dev, nullptr);
  EXPECT_EQ(with.selected, without.selected);
  EXPECT_EQ(with.best().model, without.best().model);
  EXPECT_TRUE(with.best().test_accuracy.has_value());
  EXPECT_FALSE(without.best().test_accuracy.has_value());
  for (std::size_t i = 0; i < with.entries.size(); ++i) {
    if (i == with.selected) continue;
    EXPECT_FALSE(with.entries[i].result->test_accuracy.has_value());
  }
}

TEST_F(GridFixture, WorkerCountDoesNotChangeResults) {
  GridSearchResult one = GridSearch(grid, train, dev, &test, 1);
  GridSearchResult three = GridSearch(grid, train, dev, &test, 3);
  ASSERT_EQ(one.entries.size(), three.entries.size());
  EXPECT_EQ(one.selected, three.selected);
  for (std::size_t i = 0; i < one.entries.size(); ++i) {
    EXPECT_EQ(one.entries[i].config, three.entries[i].config);
    EXPECT_EQ(one.entries[i].result->model, three.entries[i].result->model);
    EXPECT_EQ(one.entries[i].result->dev_accuracy, three.entries[i].result->dev_accuracy);
  }
  EXPECT_EQ(one.best().test_accuracy, three.best().test_accuracy);
}

TEST_F(GridFixture, FailedConfigIsRecorded) {
  grid[1].batch_size = 0;
  GridSearchResult r = GridSearch(grid, train, dev, nullptr);
  EXPECT_FALSE(r.entries[1].result.has_value());
  EXPECT_FALSE(r.entries[1].error.empty());
  EXPECT_NE(r.selected, 1u);
}

TEST(TrainingTest, RoundAccuracy) {
  EXPECT_DOUBLE_EQ(RoundAccuracy(0.86664), 0.8666);
  EXPECT_DOUBLE_EQ(RoundAccuracy(0.86666), 0.8667);
  EXPECT_DOUBLE_EQ(RoundAccuracy(1.0), 1.0);
}

}  // namespace
}  // namespace svolab
