// Forced-choice experiment administration: list construction, per-session
// trial layout, response validation, scoring and adjudication round trips.
//
// Two tasks are supported. In choose_subject the participant clicks the noun
// that is doing the action. In construct_sentence the participant places the
// two nouns left and right of the verb (optionally typing a full sentence).

#ifndef SVOLAB_EXPERIMENT_H_
#define SVOLAB_EXPERIMENT_H_

#include <array>
#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <random>
#include <span>
#include <stdexcept>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "svolab/stats.h"
#include "svolab/triads.h"

namespace svolab {

enum class Task { kChooseSubject, kConstructSentence };

std::string_view TaskName(Task task);
Task TaskFromName(std::string_view name);

// Error hierarchy. code() is the wire name used by the HTTP API.
class ExperimentError : public std::runtime_error {
 public:
  ExperimentError(std::string code, const std::string& message)
      : std::runtime_error(message), code_(std::move(code)) {}
  const std::string& code() const { return code_; }

 private:
  std::string code_;
};

#define SVOLAB_EXPERIMENT_ERROR(Name)                       \
  class Name : public ExperimentError {                     \
   public:                                                  \
    explicit Name(const std::string& message)               \
        : ExperimentError(#Name, message) {}                \
  }

SVOLAB_EXPERIMENT_ERROR(InsufficientCatchPool);
SVOLAB_EXPERIMENT_ERROR(UnknownList);
SVOLAB_EXPERIMENT_ERROR(UnknownSession);
SVOLAB_EXPERIMENT_ERROR(UnknownItem);
SVOLAB_EXPERIMENT_ERROR(DuplicateResponse);
SVOLAB_EXPERIMENT_ERROR(ForeignChoice);
SVOLAB_EXPERIMENT_ERROR(OutOfOrder);
SVOLAB_EXPERIMENT_ERROR(InvalidResponse);
SVOLAB_EXPERIMENT_ERROR(IncompleteSession);
SVOLAB_EXPERIMENT_ERROR(MissingAnimacy);

#undef SVOLAB_EXPERIMENT_ERROR

// What a participant sees for one triad: base forms only.
struct Item {
  std::string item_id;
  std::string subject;
  std::string verb;
  std::string object;
  bool is_catch = false;
  std::optional<AnimacyCondition> animacy;

  bool operator==(const Item&) const = default;
};

// Item id is the triad key (corpus/sent_id/verb_token_id).
Item ItemFromTriad(const Triad& triad, Surface surface = Surface::kLemma,
                   bool is_catch = false);

using ItemCatalog = std::map<std::string, Item>;

struct ExperimentList {
  int list_id = 0;
  std::vector<std::string> critical_items;
  std::vector<std::string> catch_items;
  Task task = Task::kChooseSubject;

  std::size_t size() const { return critical_items.size() + catch_items.size(); }
  bool operator==(const ExperimentList&) const = default;
};

struct ListOptions {
  int n_lists = 5;
  int catch_per_list = 20;
  // Every list gets the same catch items (as in the original studies).
  // Otherwise each list draws distinct catch items from the pool.
  bool reuse_catch = true;
  std::uint64_t seed = 0;
  Task task = Task::kChooseSubject;
};

// Lists 1..n_lists. Critical items with identical subject and object are
// dropped, as are critical items that also appear in the catch pool; the
// rest are shuffled and cut into contiguous chunks whose sizes differ by at
// most one (earlier lists get the extra items).
std::vector<ExperimentList> BuildLists(std::span<const Item> critical,
                                       std::span<const Item> catch_pool,
                                       const ListOptions& options);

struct ExperimentDesign {
  Task task = Task::kChooseSubject;
  std::vector<ExperimentList> lists;
  ItemCatalog items;

  const ExperimentList& List(int list_id) const;
  const Item& ItemById(const std::string& item_id) const;
};

ExperimentDesign MakeDesign(std::span<const Item> critical,
                            std::span<const Item> catch_pool,
                            const ListOptions& options);
// Sets Item::animacy from annotations where present.
void AttachAnimacy(ExperimentDesign& design, const AnimacyAnnotations& annotations);

std::string DesignToJson(const ExperimentDesign& design);
ExperimentDesign DesignFromJson(std::string_view text);
void SaveDesign(const std::filesystem::path& path, const ExperimentDesign& design);
ExperimentDesign LoadDesign(const std::filesystem::path& path);

struct TrialResponse {
  std::string item_id;
  // choose_subject: the clicked noun.
  std::string choice;
  // construct_sentence: nouns placed left and right of the verb.
  std::string left_word;
  std::string right_word;
  std::optional<std::string> typed_sentence;
  std::int64_t latency_ms = 0;
  std::string timestamp;  // ISO-8601

  bool operator==(const TrialResponse&) const = default;
};

enum class SessionStatus { kActive, kComplete };

struct Session {
  std::string session_id;
  int list_id = 0;
  Task task = Task::kChooseSubject;
  std::uint64_t seed = 0;
  std::vector<std::string> trial_order;
  // subject_first[k]: trial k shows the subject as the first word.
  std::vector<bool> subject_first;
  std::vector<TrialResponse> responses;
  SessionStatus status = SessionStatus::kActive;

  std::size_t n_trials() const { return trial_order.size(); }
  bool Answered(const std::string& item_id) const;
  // Index of the first trial in trial_order without a response.
  std::optional<std::size_t> NextUnanswered() const;
};

// Seeded uniform shuffle of critical + catch items, plus one independent
// fair coin per trial for the display order of the two nouns.
Session LayoutSession(const ExperimentList& list, std::string session_id,
                      std::uint64_t seed);

struct TrialPayload {
  std::string item_id;
  std::string verb;
  std::array<std::string, 2> words;  // display order
  Task task = Task::kChooseSubject;
  std::size_t index = 0;
  std::size_t n_trials = 0;
};

TrialPayload MakeTrialPayload(const Session& session, std::size_t k,
                              const ItemCatalog& items);

// Throws UnknownItem, DuplicateResponse, OutOfOrder (per-screen mode only),
// ForeignChoice or InvalidResponse.
void ValidateResponse(const Session& session, const Item& item,
                      const TrialResponse& response, bool single_page);

enum class ScoringMode { kOrder, kMorphology };

std::string_view ScoringModeName(ScoringMode mode);

// (session_id, item_id) -> coder decision.
using Adjudications = std::map<std::pair<std::string, std::string>, bool>;

struct ScoreOptions {
  int catch_threshold = 15;
  bool allow_partial = false;
  ScoringMode mode = ScoringMode::kOrder;
  const Adjudications* adjudications = nullptr;
};

struct ItemOutcome {
  std::string item_id;
  bool is_catch = false;
  bool correct = false;
};

struct SessionScore {
  std::string session_id;
  int list_id = 0;
  int catch_correct = 0;
  int catch_total = 0;
  bool included = false;
  std::size_t critical_correct = 0;
  std::size_t critical_total = 0;
  double critical_accuracy = 0.0;
  // Responses left out because no coder decision exists (morphology mode).
  std::size_t unadjudicated = 0;
  std::vector<ItemOutcome> items;  // in trial order, answered trials only
};

// choose_subject: correct iff the chosen noun is the subject.
// construct_sentence, order mode: correct iff the subject is in the left slot.
// construct_sentence, morphology mode: the coder decision decides.
// Inclusion: catch_correct >= catch_threshold (lists without catch items are
// always included).
SessionScore ScoreSession(const Session& session, const ItemCatalog& items,
                          const ScoreOptions& options = {});

// One record per scored response, participant_id = session_id.
std::vector<ResponseRecord> ToResponseRecords(std::span<const Session> sessions,
                                              const ItemCatalog& items,
                                              const ScoreOptions& options = {},
                                              bool included_only = false);

// TSV: session_id, item_id, typed_sentence, correct, left_word, right_word,
// subject, verb, object. The correct column is left blank for the coder.
std::string ExportAdjudication(std::span<const Session> sessions,
                               const ItemCatalog& items);
// Reads a coded export; rows with a blank correct column are skipped.
Adjudications ParseAdjudication(std::string_view tsv);

enum class Policy { kOracle, kChance, kAnimacyHeuristic };

std::string_view PolicyName(Policy policy);
Policy PolicyFromName(std::string_view name);

// Answer for trial k of a session under a synthetic-participant policy.
// The animacy heuristic picks the animate noun when exactly one is animate
// and guesses otherwise; it throws MissingAnimacy without annotations.
TrialResponse SimulateTrial(const Session& session, std::size_t k,
                            const Item& item, Policy policy,
                            std::mt19937_64& rng);

}  // namespace svolab

#endif  // SVOLAB_EXPERIMENT_H_
