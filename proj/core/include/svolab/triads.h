#ifndef SVOLAB_TRIADS_H_
#define SVOLAB_TRIADS_H_

#include <array>
#include <cstddef>
#include <filesystem>
#include <map>
#include <set>
#include <string>
#include <string_view>
#include <tuple>
#include <utility>
#include <vector>

#include "svolab/conllu.h"

namespace svolab {

struct WordRecord {
  std::string form;
  std::string lemma;
  std::string upos;
  int token_id = 0;

  bool operator==(const WordRecord&) const = default;
};

enum class WordOrder { kSVO, kSOV, kOSV, kOVS, kVSO, kVOS };

inline constexpr std::array<WordOrder, 6> kAllWordOrders = {
    WordOrder::kSVO, WordOrder::kSOV, WordOrder::kOSV,
    WordOrder::kOVS, WordOrder::kVSO, WordOrder::kVOS};

std::string_view WordOrderName(WordOrder order);
WordOrder WordOrderFromName(std::string_view name);
// Linear order of three distinct token positions.
WordOrder OrderOf(int subject_id, int verb_id, int object_id);

enum class Surface { kLemma, kForm };

std::string_view SurfaceName(Surface surface);
Surface SurfaceFromName(std::string_view name);

struct Triad {
  WordRecord subject;
  WordRecord verb;
  WordRecord object;
  std::string corpus;
  std::string sent_id;
  WordOrder original_order = WordOrder::kSVO;
  bool subject_is_pron = false;
  bool object_is_pron = false;

  const std::string& SurfaceOf(const WordRecord& w, Surface surface) const {
    return surface == Surface::kLemma ? w.lemma : w.form;
  }
  // Subject and object share a surface string; a human cannot tell them apart.
  bool IdenticalArguments(Surface surface) const {
    return SurfaceOf(subject, surface) == SurfaceOf(object, surface);
  }
  // Stable provenance key: corpus/sent_id/verb_token_id.
  std::string Key() const;

  bool operator==(const Triad&) const = default;
};

struct ExtractionOptions {
  bool exclude_pronouns = true;
  Surface surface = Surface::kLemma;
};

struct ExtractionStats {
  std::size_t total_candidates = 0;
  std::size_t pronoun_dropped = 0;
  std::size_t retained = 0;
  double retention_fraction = 0.0;
  std::size_t identical_arguments = 0;
  std::size_t rejected_non_tree = 0;

  ExtractionStats& operator+=(const ExtractionStats& other);
};

struct ExtractionResult {
  std::vector<Triad> triads;
  ExtractionStats stats;
};

// One triad per VERB token with exactly one nsubj and exactly one obj
// dependent; the head tokens of the two arguments are recorded.
ExtractionResult ExtractTriads(const Treebank& treebank,
                               const ExtractionOptions& options);

// Corpora whose triad count is at least min_triads, in input order.
std::vector<std::string> FilterCorpora(
    const std::vector<std::pair<std::string, std::size_t>>& census,
    std::size_t min_triads = 1600);

// Counts of each original order; every order is present, possibly zero.
std::map<WordOrder, std::size_t> OrderCensus(const std::vector<Triad>& triads);

// Non-SVO triads for manual mis-parse review, in input order.
std::vector<Triad> ReviewListing(const std::vector<Triad>& triads);

// Hand-maintained list of triads to drop (offensive content, repeats).
// File format: one "corpus<TAB>sent_id<TAB>verb_token_id" per line; '#'
// starts a comment.
class ExclusionList {
 public:
  static ExclusionList Load(const std::filesystem::path& path);
  static ExclusionList Parse(std::string_view text);

  void Add(std::string corpus, std::string sent_id, int verb_token_id);
  bool Contains(const Triad& triad) const;
  std::size_t size() const { return keys_.size(); }

  // Returns the triads not on the list; `dropped` receives the count.
  std::vector<Triad> Apply(const std::vector<Triad>& triads,
                           std::size_t* dropped = nullptr) const;

 private:
  std::set<std::tuple<std::string, std::string, int>> keys_;
};

}  // namespace svolab

#endif  // SVOLAB_TRIADS_H_
