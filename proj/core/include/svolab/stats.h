// Descriptive statistics for the forced-choice experiments and the
// classifier runs.
//
// Mixed-effects models are approximated: animacy effects use fixed-effects
// logistic regression with likelihood-ratio tests, and the case-marking
// comparison aggregates corpora to language means before comparing groups.
// Reported coefficients are therefore not expected to match random-effects
// estimates numerically.

#ifndef SVOLAB_STATS_H_
#define SVOLAB_STATS_H_

#include <array>
#include <compare>
#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include "svolab/logistic.h"

namespace svolab {

class NoData : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

class MissingCondition : public std::invalid_argument {
 public:
  explicit MissingCondition(std::vector<std::string> item_ids);
  const std::vector<std::string>& item_ids() const { return item_ids_; }

 private:
  std::vector<std::string> item_ids_;
};

class EmptyGroup : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

class RangeError : public std::out_of_range {
 public:
  using std::out_of_range::out_of_range;
};

struct AnimacyCondition {
  bool subject_animate = false;
  bool object_animate = false;

  auto operator<=>(const AnimacyCondition&) const = default;
};

// "AA", "AI", "IA", "II" (subject letter first).
std::string ConditionLabel(const AnimacyCondition& c);

struct ResponseRecord {
  std::string participant_id;
  std::string item_id;
  bool correct = false;
  bool is_catch = false;
  std::optional<AnimacyCondition> condition;
};

// Item id -> condition, from a TSV with columns item_id, subject_animate,
// object_animate. Booleans may be 1/0, true/false, yes/no, animate/inanimate.
// An optional header line starting with "item_id" is skipped.
using AnimacyAnnotations = std::map<std::string, AnimacyCondition>;
AnimacyAnnotations ParseAnimacyTsv(std::string_view text);
AnimacyAnnotations LoadAnimacyTsv(const std::filesystem::path& path);

struct MeanCi {
  double mean = 0.0;
  double lower = 0.0;
  double upper = 0.0;
  std::size_t n = 0;
  // Set when n == 1: the standard error is undefined and the interval
  // collapses to the mean.
  bool degenerate = false;
};

// mean +/- 1.96 * sd / sqrt(n), sd with divisor n.
MeanCi NormalCi(std::span<const double> values);
// Percentile bootstrap of the mean.
MeanCi BootstrapCi(std::span<const double> values, std::size_t resamples = 10000,
                   std::uint64_t seed = 1);

// Per-participant fraction correct (correct / total) over non-catch
// responses, keyed by participant id.
std::map<std::string, double> ParticipantAccuracies(
    std::span<const ResponseRecord> responses);

// Participant means in percent, and a 95% CI over participants. Catch
// responses are ignored.
MeanCi ParticipantSummary(std::span<const ResponseRecord> responses);
MeanCi ParticipantSummaryBootstrap(std::span<const ResponseRecord> responses,
                                   std::size_t resamples = 10000,
                                   std::uint64_t seed = 1);

struct ItemSummary {
  std::size_t n_items = 0;
  double min = 0.0;     // percent
  double max = 0.0;     // percent
  double median = 0.0;  // percent
  double pct_above_80 = 0.0;  // percent of items with accuracy > 80%
  double pct_above_90 = 0.0;  // percent of items with accuracy > 90%
};

ItemSummary SummarizeItems(std::span<const ResponseRecord> responses);

double Median(std::vector<double> values);

struct AnimacyCell {
  AnimacyCondition condition;
  std::size_t n_items = 0;
  MeanCi accuracy;  // percent, over item means
};

// Cells in order AA, AI, IA, II. Throws MissingCondition when any non-catch
// response lacks a condition.
std::array<AnimacyCell, 4> AnimacyTable(std::span<const ResponseRecord> responses);

struct AnimacyRegression {
  LogisticFit full;     // intercept, subject_animate, object_animate, interaction
  LogisticFit reduced;  // intercept only
  LikelihoodRatio lrt;  // df = 3
};

AnimacyRegression FitAnimacyRegression(std::span<const ResponseRecord> responses);

// unambiguous_fraction * 1 + lexical_accuracy * (1 - unambiguous_fraction).
double CombinedRedundancy(double unambiguous_fraction, double lexical_accuracy);

struct CorpusAccuracy {
  std::string corpus;
  std::string language;
  bool cased = false;
  double accuracy = 0.0;
};

struct CaseGroupComparison {
  double cased_mean = 0.0;
  double uncased_mean = 0.0;
  double difference = 0.0;  // cased - uncased
  // Least squares of language mean on a cased indicator.
  double intercept = 0.0;
  double slope = 0.0;
  std::size_t cased_languages = 0;
  std::size_t uncased_languages = 0;
  std::map<std::string, double> language_means;
  std::string method;
};

// Aggregates corpora to one mean per language, then compares groups.
CaseGroupComparison CompareCaseGroups(std::span<const CorpusAccuracy> corpora);

struct AccuracySummary {
  std::size_t n = 0;
  double median = 0.0;
  double min = 0.0;
  double max = 0.0;
  MeanCi mean;
};

AccuracySummary SummarizeAccuracies(std::span<const double> accuracies);

}  // namespace svolab

#endif  // SVOLAB_STATS_H_
