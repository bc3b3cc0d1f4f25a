#include "svolab/stats.h"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <random>
#include <sstream>

#include "svolab/triad_io.h"

namespace svolab {
namespace {

constexpr double kZ95 = 1.96;

struct Tally {
  std::size_t correct = 0;
  std::size_t total = 0;
};

std::map<std::string, Tally> TallyBy(std::span<const ResponseRecord> responses,
                                     bool by_participant) {
  std::map<std::string, Tally> tallies;
  for (const ResponseRecord& r : responses) {
    if (r.is_catch) continue;
    Tally& t = tallies[by_participant ? r.participant_id : r.item_id];
    ++t.total;
    if (r.correct) ++t.correct;
  }
  return tallies;
}

double Fraction(const Tally& t) {
  return static_cast<double>(t.correct) / static_cast<double>(t.total);
}

bool ParseFlag(std::string_view s, std::size_t line_number) {
  std::string v(s);
  std::transform(v.begin(), v.end(), v.begin(), [](unsigned char c) { return std::tolower(c); });
  if (v == "1" || v == "true" || v == "yes" || v == "animate" || v == "a") return true;
  if (v == "0" || v == "false" || v == "no" || v == "inanimate" || v == "i") return false;
  throw std::runtime_error("animacy file line " + std::to_string(line_number) +
                           ": cannot read '" + v + "' as animate/inanimate");
}

}  // namespace

MissingCondition::MissingCondition(std::vector<std::string> item_ids)
    : std::invalid_argument([&] {
        std::string msg = "responses without an animacy condition for items:";
        for (const std::string& id : item_ids) msg += " " + id;
        return msg;
      }()),
      item_ids_(std::move(item_ids)) {}

std::string ConditionLabel(const AnimacyCondition& c) {
  return std::string{c.subject_animate ? 'A' : 'I', c.object_animate ? 'A' : 'I'};
}

AnimacyAnnotations ParseAnimacyTsv(std::string_view text) {
  AnimacyAnnotations out;
  std::istringstream in{std::string(text)};
  std::string line;
  std::size_t line_number = 0;
  while (std::getline(in, line)) {
    ++line_number;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty() || line.front() == '#') continue;
    if (line.rfind("item_id", 0) == 0) continue;
    std::istringstream fields(line);
    std::string item, subject, object;
    if (!std::getline(fields, item, '\t') || !std::getline(fields, subject, '\t') ||
        !std::getline(fields, object, '\t')) {
      throw std::runtime_error("animacy file line " + std::to_string(line_number) +
                               ": expected item_id, subject_animate, object_animate");
    }
    out[item] = AnimacyCondition{ParseFlag(subject, line_number),
                                 ParseFlag(object, line_number)};
  }
  return out;
}

AnimacyAnnotations LoadAnimacyTsv(const std::filesystem::path& path) {
  return ParseAnimacyTsv(ReadTextFile(path));
}

MeanCi NormalCi(std::span<const double> values) {
  if (values.empty()) throw NoData("no values for a confidence interval");
  MeanCi out;
  out.n = values.size();
  const double n = static_cast<double>(values.size());
  out.mean = std::accumulate(values.begin(), values.end(), 0.0) / n;
  if (values.size() == 1) {
    out.lower = out.upper = out.mean;
    out.degenerate = true;
    return out;
  }
  double ss = 0.0;
  for (double v : values) ss += (v - out.mean) * (v - out.mean);
  const double se = std::sqrt(ss / n) / std::sqrt(n);
  out.lower = out.mean - kZ95 * se;
  out.upper = out.mean + kZ95 * se;
  return out;
}

MeanCi BootstrapCi(std::span<const double> values, std::size_t resamples,
                   std::uint64_t seed) {
  if (values.empty()) throw NoData("no values for a confidence interval");
  if (resamples == 0) throw std::invalid_argument("bootstrap needs resamples > 0");
  MeanCi out;
  out.n = values.size();
  out.mean = std::accumulate(values.begin(), values.end(), 0.0) /
             static_cast<double>(values.size());
  if (values.size() == 1) {
    out.lower = out.upper = out.mean;
    out.degenerate = true;
    return out;
  }
  std::mt19937_64 rng(seed);
  std::uniform_int_distribution<std::size_t> pick(0, values.size() - 1);
  std::vector<double> means(resamples);
  for (double& m : means) {
    double sum = 0.0;
    for (std::size_t i = 0; i < values.size(); ++i) sum += values[pick(rng)];
    m = sum / static_cast<double>(values.size());
  }
  std::sort(means.begin(), means.end());
  auto quantile = [&](double q) {
    const double pos = q * static_cast<double>(resamples - 1);
    const auto lo = static_cast<std::size_t>(std::floor(pos));
    const auto hi = std::min(lo + 1, resamples - 1);
    return means[lo] + (pos - static_cast<double>(lo)) * (means[hi] - means[lo]);
  };
  out.lower = quantile(0.025);
  out.upper = quantile(0.975);
  return out;
}

std::map<std::string, double> ParticipantAccuracies(
    std::span<const ResponseRecord> responses) {
  std::map<std::string, double> out;
  for (const auto& [id, tally] : TallyBy(responses, true)) out[id] = Fraction(tally);
  return out;
}

namespace {

std::vector<double> ParticipantPercents(std::span<const ResponseRecord> responses) {
  std::vector<double> percents;
  for (const auto& [id, acc] : ParticipantAccuracies(responses)) {
    percents.push_back(100.0 * acc);
  }
  if (percents.empty()) throw NoData("no participants with non-catch responses");
  return percents;
}

}  // namespace

MeanCi ParticipantSummary(std::span<const ResponseRecord> responses) {
  return NormalCi(ParticipantPercents(responses));
}

MeanCi ParticipantSummaryBootstrap(std::span<const ResponseRecord> responses,
                                   std::size_t resamples, std::uint64_t seed) {
  return BootstrapCi(ParticipantPercents(responses), resamples, seed);
}

double Median(std::vector<double> values) {
  if (values.empty()) throw NoData("median of an empty set");
  std::sort(values.begin(), values.end());
  const std::size_t n = values.size();
  return n % 2 == 1 ? values[n / 2] : 0.5 * (values[n / 2 - 1] + values[n / 2]);
}

ItemSummary SummarizeItems(std::span<const ResponseRecord> responses) {
  auto tallies = TallyBy(responses, false);
  if (tallies.empty()) throw NoData("no items with non-catch responses");
  ItemSummary out;
  out.n_items = tallies.size();
  std::vector<double> percents;
  std::size_t above80 = 0, above90 = 0;
  for (const auto& [id, t] : tallies) {
    percents.push_back(100.0 * Fraction(t));
    // Integer comparisons keep the thresholds exactly strict.
    if (t.correct * 100 > 80 * t.total) ++above80;
    if (t.correct * 100 > 90 * t.total) ++above90;
  }
  out.min = *std::min_element(percents.begin(), percents.end());
  out.max = *std::max_element(percents.begin(), percents.end());
  out.median = Median(percents);
  out.pct_above_80 = 100.0 * static_cast<double>(above80) / static_cast<double>(out.n_items);
  out.pct_above_90 = 100.0 * static_cast<double>(above90) / static_cast<double>(out.n_items);
  return out;
}

std::array<AnimacyCell, 4> AnimacyTable(std::span<const ResponseRecord> responses) {
  std::vector<std::string> missing;
  std::map<AnimacyCondition, std::map<std::string, Tally>> cells;
  for (const ResponseRecord& r : responses) {
    if (r.is_catch) continue;
    if (!r.condition) {
      if (std::find(missing.begin(), missing.end(), r.item_id) == missing.end())
        missing.push_back(r.item_id);
      continue;
    }
    Tally& t = cells[*r.condition][r.item_id];
    ++t.total;
    if (r.correct) ++t.correct;
  }
  if (!missing.empty()) throw MissingCondition(std::move(missing));

  std::array<AnimacyCell, 4> table;
  const std::array<AnimacyCondition, 4> order = {
      AnimacyCondition{true, true}, AnimacyCondition{true, false},
      AnimacyCondition{false, true}, AnimacyCondition{false, false}};
  for (std::size_t c = 0; c < order.size(); ++c) {
    table[c].condition = order[c];
    auto it = cells.find(order[c]);
    if (it == cells.end()) continue;
    std::vector<double> item_percents;
    for (const auto& [id, t] : it->second) item_percents.push_back(100.0 * Fraction(t));
    table[c].n_items = item_percents.size();
    table[c].accuracy = NormalCi(item_percents);
  }
  return table;
}

AnimacyRegression FitAnimacyRegression(std::span<const ResponseRecord> responses) {
  std::vector<const ResponseRecord*> rows;
  std::vector<std::string> missing;
  for (const ResponseRecord& r : responses) {
    if (r.is_catch) continue;
    if (!r.condition) {
      missing.push_back(r.item_id);
      continue;
    }
    rows.push_back(&r);
  }
  if (!missing.empty()) throw MissingCondition(std::move(missing));
  if (rows.empty()) throw NoData("no responses for the animacy regression");

  const auto n = static_cast<Eigen::Index>(rows.size());
  Eigen::MatrixXd full(n, 4);
  Eigen::MatrixXd reduced = Eigen::MatrixXd::Ones(n, 1);
  std::vector<std::uint8_t> labels(rows.size());
  for (Eigen::Index i = 0; i < n; ++i) {
    const ResponseRecord& r = *rows[i];
    const double s = r.condition->subject_animate ? 1.0 : 0.0;
    const double o = r.condition->object_animate ? 1.0 : 0.0;
    full.row(i) << 1.0, s, o, s * o;
    labels[i] = r.correct ? 1 : 0;
  }
  AnimacyRegression out;
  out.full = FitLogistic(full, labels,
                         {"(Intercept)", "subject_animate", "object_animate",
                          "subject_animate:object_animate"});
  out.reduced = FitLogistic(reduced, labels, {"(Intercept)"});
  out.lrt = LikelihoodRatioTest(out.full, out.reduced, 3);
  return out;
}

double CombinedRedundancy(double unambiguous_fraction, double lexical_accuracy) {
  auto in_unit = [](double x) { return x >= 0.0 && x <= 1.0; };
  if (!in_unit(unambiguous_fraction) || !in_unit(lexical_accuracy)) {
    throw RangeError("combined redundancy inputs must lie in [0, 1]");
  }
  return unambiguous_fraction * 1.0 + lexical_accuracy * (1.0 - unambiguous_fraction);
}

CaseGroupComparison CompareCaseGroups(std::span<const CorpusAccuracy> corpora) {
  struct LanguageTally {
    bool cased = false;
    double sum = 0.0;
    std::size_t n = 0;
  };
  std::map<std::string, LanguageTally> languages;
  for (const CorpusAccuracy& c : corpora) {
    auto [it, inserted] = languages.try_emplace(c.language);
    LanguageTally& t = it->second;
    if (inserted) {
      t.cased = c.cased;
    } else if (t.cased != c.cased) {
      throw std::invalid_argument("language '" + c.language +
                                  "' is marked both cased and uncased");
    }
    t.sum += c.accuracy;
    ++t.n;
  }
  CaseGroupComparison out;
  double cased_sum = 0.0, uncased_sum = 0.0;
  for (const auto& [language, t] : languages) {
    const double mean = t.sum / static_cast<double>(t.n);
    out.language_means[language] = mean;
    if (t.cased) {
      cased_sum += mean;
      ++out.cased_languages;
    } else {
      uncased_sum += mean;
      ++out.uncased_languages;
    }
  }
  if (out.cased_languages == 0) throw EmptyGroup("no case-marked languages");
  if (out.uncased_languages == 0) throw EmptyGroup("no languages without case marking");
  out.cased_mean = cased_sum / static_cast<double>(out.cased_languages);
  out.uncased_mean = uncased_sum / static_cast<double>(out.uncased_languages);
  out.difference = out.cased_mean - out.uncased_mean;

  // Ordinary least squares of language mean on the cased indicator.
  const double n = static_cast<double>(languages.size());
  double mean_x = static_cast<double>(out.cased_languages) / n;
  double mean_y = (cased_sum + uncased_sum) / n;
  double sxy = 0.0, sxx = 0.0;
  for (const auto& [language, t] : languages) {
    const double x = t.cased ? 1.0 : 0.0;
    const double y = out.language_means[language];
    sxy += (x - mean_x) * (y - mean_y);
    sxx += (x - mean_x) * (x - mean_x);
  }
  out.slope = sxy / sxx;
  out.intercept = mean_y - out.slope * mean_x;
  out.method =
      "two-stage aggregation: corpus accuracies averaged per language, then "
      "group means compared (fixed-effects stand-in for a random intercept "
      "per language)";
  return out;
}

AccuracySummary SummarizeAccuracies(std::span<const double> accuracies) {
  if (accuracies.empty()) throw NoData("no accuracies to summarize");
  AccuracySummary out;
  out.n = accuracies.size();
  std::vector<double> values(accuracies.begin(), accuracies.end());
  out.median = Median(values);
  out.min = *std::min_element(values.begin(), values.end());
  out.max = *std::max_element(values.begin(), values.end());
  out.mean = NormalCi(values);
  return out;
}

}  // namespace svolab
