// Mini-batch training with dev-set early stopping, and the 2 x 3 x 3
// hyperparameter grid with dev-accuracy selection.

#ifndef SVOLAB_TRAINING_H_
#define SVOLAB_TRAINING_H_

#include <cstddef>
#include <cstdint>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "svolab/mlp.h"

namespace svolab {

struct ClassifierConfig {
  double learning_rate = 0.001;
  int hidden1 = 64;
  int hidden2 = 64;
  int max_epochs = 50;
  int batch_size = 32;
  int patience = 10;
  std::uint64_t seed = 0;

  bool operator==(const ClassifierConfig&) const = default;
};

// Grid axes. The default learning rates are {0.001, 0.0001}.
struct GridSpec {
  std::vector<double> learning_rates = {0.001, 0.0001};
  std::vector<int> hidden1 = {32, 64, 128};
  std::vector<int> hidden2 = {32, 64, 128};
};

// Full cross product in canonical order: learning rate ascending, then
// hidden1 ascending, then hidden2 ascending. Non-grid fields come from base.
std::vector<ClassifierConfig> BuildGrid(const GridSpec& spec,
                                        const ClassifierConfig& base);

// True when a sorts strictly before b in canonical grid order.
bool CanonicalLess(const ClassifierConfig& a, const ClassifierConfig& b);

class NonFiniteLoss : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

struct EpochRecord {
  int epoch = 0;
  double train_loss = 0.0;
  double dev_accuracy = 0.0;
};

struct TrainedResult {
  ClassifierConfig config;
  MlpModel model;
  double dev_accuracy = 0.0;
  std::optional<double> test_accuracy;
  int epochs_run = 0;
  int best_epoch = 0;
  std::size_t dev_ties = 0;
  std::vector<EpochRecord> history;
};

// Returns the snapshot with the best dev accuracy. Stops after max_epochs or
// after `patience` consecutive epochs without strict dev improvement.
TrainedResult Train(const ClassifierConfig& config, const Dataset& train,
                    const Dataset& dev);

struct GridEntry {
  ClassifierConfig config;
  std::optional<TrainedResult> result;
  std::string error;
};

struct GridSearchResult {
  std::vector<GridEntry> entries;  // same order as the input grid
  std::size_t selected = 0;        // index into entries
  const TrainedResult& best() const { return *entries[selected].result; }
};

// Index of the successful entry with the highest dev accuracy; ties go to
// the entry earliest in canonical order. Throws if every entry failed.
std::size_t SelectBest(const std::vector<GridEntry>& entries);

// Trains every config (on up to `workers` threads; results do not depend on
// the worker count), selects by dev accuracy and, when a test set is given,
// evaluates only the selected model on it.
GridSearchResult GridSearch(const std::vector<ClassifierConfig>& grid,
                            const Dataset& train, const Dataset& dev,
                            const Dataset* test, int workers = 1);

// Accuracies are reported to four decimal places.
double RoundAccuracy(double accuracy);

}  // namespace svolab

#endif  // SVOLAB_TRAINING_H_
