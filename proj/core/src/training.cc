#include "svolab/training.h"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <numeric>
#include <random>
#include <sstream>
#include <thread>
#include <tuple>

#include "svolab/adam.h"
#include "svolab/rng.h"

namespace svolab {

std::vector<ClassifierConfig> BuildGrid(const GridSpec& spec,
                                        const ClassifierConfig& base) {
  std::vector<double> lrs = spec.learning_rates;
  std::vector<int> h1s = spec.hidden1;
  std::vector<int> h2s = spec.hidden2;
  std::sort(lrs.begin(), lrs.end());
  std::sort(h1s.begin(), h1s.end());
  std::sort(h2s.begin(), h2s.end());
  std::vector<ClassifierConfig> grid;
  for (double lr : lrs) {
    for (int h1 : h1s) {
      for (int h2 : h2s) {
        ClassifierConfig c = base;
        c.learning_rate = lr;
        c.hidden1 = h1;
        c.hidden2 = h2;
        grid.push_back(c);
      }
    }
  }
  return grid;
}

bool CanonicalLess(const ClassifierConfig& a, const ClassifierConfig& b) {
  return std::tie(a.learning_rate, a.hidden1, a.hidden2) <
         std::tie(b.learning_rate, b.hidden1, b.hidden2);
}

TrainedResult Train(const ClassifierConfig& config, const Dataset& train,
                    const Dataset& dev) {
  if (train.size() == 0) throw EmptyDataset("empty training set");
  if (dev.size() == 0) throw EmptyDataset("empty dev set");
  if (train.feature_length() != dev.feature_length()) {
    throw ShapeError("train and dev feature lengths differ");
  }
  if (config.max_epochs < 1 || config.batch_size < 1 || config.patience < 1) {
    throw std::invalid_argument("max_epochs, batch_size and patience must be >= 1");
  }

  const MlpShape shape{train.feature_length(), config.hidden1, config.hidden2};
  MlpModel model = MlpModel::GlorotUniform(shape, config.seed);
  AdamState adam(shape.parameter_count());
  std::mt19937_64 shuffle_rng(Mix64(config.seed ^ 0x5eed5eed5eed5eedULL));

  TrainedResult result{config, model, -1.0, std::nullopt, 0, 0, 0, {}};
  std::vector<std::size_t> order(train.size());
  std::iota(order.begin(), order.end(), std::size_t{0});
  const std::size_t batch_size = static_cast<std::size_t>(config.batch_size);
  RowMatrix batch;
  std::vector<std::uint8_t> labels;
  int epochs_without_improvement = 0;

  for (int epoch = 1; epoch <= config.max_epochs; ++epoch) {
    std::shuffle(order.begin(), order.end(), shuffle_rng);
    double loss_sum = 0.0;
    for (std::size_t start = 0, b = 0; start < order.size(); start += batch_size, ++b) {
      const std::size_t n = std::min(batch_size, order.size() - start);
      batch.resize(static_cast<Eigen::Index>(n), train.features.cols());
      labels.resize(n);
      for (std::size_t r = 0; r < n; ++r) {
        const auto row = static_cast<Eigen::Index>(order[start + r]);
        batch.row(static_cast<Eigen::Index>(r)) = train.features.row(row);
        labels[r] = train.first_is_subject[order[start + r]];
      }
      LossAndGradients lg = ComputeLossAndGradients(model, batch, labels);
      if (!std::isfinite(lg.loss)) {
        std::ostringstream msg;
        msg << "non-finite loss at epoch " << epoch << ", batch " << b
            << " (lr=" << config.learning_rate << ", hidden1=" << config.hidden1
            << ", hidden2=" << config.hidden2 << ", seed=" << config.seed << ")";
        throw NonFiniteLoss(msg.str());
      }
      loss_sum += lg.loss * static_cast<double>(n);
      AdamStep(adam, model, lg.gradients, config.learning_rate);
    }
    Evaluation dev_eval = Evaluate(model, dev);
    result.history.push_back(
        {epoch, loss_sum / static_cast<double>(order.size()), dev_eval.accuracy});
    result.epochs_run = epoch;
    if (dev_eval.accuracy > result.dev_accuracy) {
      result.dev_accuracy = dev_eval.accuracy;
      result.dev_ties = dev_eval.ties;
      result.best_epoch = epoch;
      result.model = model;
      epochs_without_improvement = 0;
    } else if (++epochs_without_improvement >= config.patience) {
      break;
    }
  }
  return result;
}

std::size_t SelectBest(const std::vector<GridEntry>& entries) {
  std::optional<std::size_t> best;
  for (std::size_t i = 0; i < entries.size(); ++i) {
    if (!entries[i].result) continue;
    if (!best) {
      best = i;
      continue;
    }
    const double a = entries[i].result->dev_accuracy;
    const double b = entries[*best].result->dev_accuracy;
    if (a > b || (a == b && CanonicalLess(entries[i].config, entries[*best].config))) {
      best = i;
    }
  }
  if (!best) throw std::runtime_error("every grid configuration failed");
  return *best;
}

GridSearchResult GridSearch(const std::vector<ClassifierConfig>& grid,
                            const Dataset& train, const Dataset& dev,
                            const Dataset* test, int workers) {
  if (grid.empty()) throw std::invalid_argument("empty hyperparameter grid");
  GridSearchResult out;
  out.entries.resize(grid.size());
  std::atomic<std::size_t> next{0};
  auto work = [&]() {
    for (std::size_t i = next++; i < grid.size(); i = next++) {
      GridEntry& entry = out.entries[i];
      entry.config = grid[i];
      try {
        entry.result = Train(grid[i], train, dev);
      } catch (const std::exception& e) {
        entry.error = e.what();
      }
    }
  };
  const int n_threads = std::clamp(workers, 1, static_cast<int>(grid.size()));
  if (n_threads == 1) {
    work();
  } else {
    std::vector<std::jthread> pool;
    for (int t = 0; t < n_threads; ++t) pool.emplace_back(work);
  }

  out.selected = SelectBest(out.entries);
  if (test != nullptr) {
    TrainedResult& best = *out.entries[out.selected].result;
    best.test_accuracy = Evaluate(best.model, *test).accuracy;
  }
  return out;
}

double RoundAccuracy(double accuracy) {
  return std::round(accuracy * 10000.0) / 10000.0;
}

}  // namespace svolab
