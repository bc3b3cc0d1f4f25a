#include "svolab/experiment.h"

#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>
#include <set>
#include <sstream>

#include "support/synthetic.h"

namespace svolab {
namespace {

using testing::AnswerWithCatchScore;
using testing::SyntheticDesign;
using testing::SyntheticItems;

std::vector<std::size_t> CriticalSizes(const std::vector<ExperimentList>& lists) {
  std::vector<std::size_t> out;
  for (const ExperimentList& l : lists) out.push_back(l.critical_items.size());
  return out;
}

TEST(ExperimentTest, ListSizesFor589Items) {
  auto critical = SyntheticItems(589, "c", false);
  auto catch_pool = SyntheticItems(20, "k", true);
  auto lists = BuildLists(critical, catch_pool, ListOptions{});
  EXPECT_EQ(CriticalSizes(lists), (std::vector<std::size_t>{118, 118, 118, 118, 117}));
  for (const ExperimentList& l : lists) EXPECT_EQ(l.catch_items.size(), 20u);
}

TEST(ExperimentTest, ListSizesFor500Items) {
  auto critical = SyntheticItems(500, "c", false);
  auto catch_pool = SyntheticItems(20, "k", true);
  auto lists = BuildLists(critical, catch_pool, ListOptions{});
  ASSERT_EQ(lists.size(), 5u);
  for (std::size_t i = 0; i < lists.size(); ++i) {
    EXPECT_EQ(lists[i].list_id, static_cast<int>(i + 1));
    EXPECT_EQ(lists[i].critical_items.size(), 100u);
    EXPECT_EQ(lists[i].catch_items.size(), 20u);
    EXPECT_EQ(lists[i].size(), 120u);
  }
}

// Every critical item lands in exactly one list and sizes differ by at most one.
TEST(ExperimentTest, ListsPartitionCriticalItems) {
  for (std::size_t n : {5u, 6u, 37u, 101u, 589u}) {
    for (int n_lists : {1, 3, 5, 7}) {
      if (n < static_cast<std::size_t>(n_lists)) continue;
      auto critical = SyntheticItems(n, "c", false);
      auto catch_pool = SyntheticItems(4, "k", true);
      ListOptions o;
      o.n_lists = n_lists;
      o.catch_per_list = 4;
      o.seed = n;
      auto lists = BuildLists(critical, catch_pool, o);
      std::multiset<std::string> seen;
      for (const ExperimentList& l : lists) seen.insert(l.critical_items.begin(), l.critical_items.end());
      EXPECT_EQ(seen.size(), n);
      EXPECT_EQ(std::set<std::string>(seen.begin(), seen.end()).size(), n);
      auto sizes = CriticalSizes(lists);
      auto [lo, hi] = std::minmax_element(sizes.begin(), sizes.end());
      EXPECT_LE(*hi - *lo, 1u);
      EXPECT_TRUE(std::is_sorted(sizes.rbegin(), sizes.rend()));
    }
  }
}

TEST(ExperimentTest, SameSeedSameLists) {
  auto critical = SyntheticItems(50, "c", false);
  auto catch_pool = SyntheticItems(20, "k", true);
  ListOptions o;
  o.seed = 3;
  EXPECT_EQ(BuildLists(critical, catch_pool, o), BuildLists(critical, catch_pool, o));
  ListOptions other = o;
  other.seed = 4;
  EXPECT_NE(BuildLists(critical, catch_pool, o), BuildLists(critical, catch_pool, other));
}

TEST(ExperimentTest, DistinctCatchNeedsALargePool) {
  auto critical = SyntheticItems(50, "c", false);
  auto catch_pool = SyntheticItems(20, "k", true);
  ListOptions o;
  o.reuse_catch = false;
  EXPECT_THROW(BuildLists(critical, catch_pool, o), InsufficientCatchPool);
  auto big_pool = SyntheticItems(100, "k", true);
  auto lists = BuildLists(critical, big_pool, o);
  std::set<std::string> all;
  for (const ExperimentList& l : lists) all.insert(l.catch_items.begin(), l.catch_items.end());
  EXPECT_EQ(all.size(), 100u);
}

TEST(ExperimentTest, IdenticalArgumentItemsAreDropped) {
  auto critical = SyntheticItems(10, "c", false);
  critical[4].object = critical[4].subject;
  auto lists = BuildLists(critical, {}, ListOptions{.n_lists = 1, .catch_per_list = 0});
  EXPECT_EQ(lists[0].critical_items.size(), 9u);
}

TEST(ExperimentTest, LayoutIsASeededPermutation) {
  ExperimentDesign d = SyntheticDesign(5, 100, 20, Task::kChooseSubject);
  const ExperimentList& list = d.List(2);
  Session a = LayoutSession(list, "S1", 10);
  Session b = LayoutSession(list, "S1", 10);
  EXPECT_EQ(a.trial_order, b.trial_order);
  EXPECT_EQ(a.subject_first, b.subject_first);
  EXPECT_EQ(a.n_trials(), 120u);
  std::vector<std::string> expect = list.critical_items;
  expect.insert(expect.end(), list.catch_items.begin(), list.catch_items.end());
  std::vector<std::string> got = a.trial_order;
  std::sort(expect.begin(), expect.end());
  std::sort(got.begin(), got.end());
  EXPECT_EQ(got, expect);
  Session c = LayoutSession(list, "S2", 11);
  EXPECT_NE(a.trial_order, c.trial_order);
  EXPECT_THROW(d.List(6), UnknownList);
}

TEST(ExperimentTest, DisplayOrderCoinIsFair) {
  ExperimentDesign d = SyntheticDesign(1, 2000, 0, Task::kChooseSubject);
  Session s = LayoutSession(d.List(1), "S", 1);
  auto heads = std::count(s.subject_first.begin(), s.subject_first.end(), true);
  // 4 sigma around 1000.
  EXPECT_NEAR(static_cast<double>(heads), 1000.0, 4 * std::sqrt(500.0));
}

TEST(ExperimentTest, PayloadFollowsDisplayOrder) {
  ExperimentDesign d = SyntheticDesign(1, 30, 2, Task::kChooseSubject);
  Session s = LayoutSession(d.List(1), "S", 5);
  for (std::size_t k = 0; k < s.n_trials(); ++k) {
    TrialPayload p = MakeTrialPayload(s, k, d.items);
    const Item& item = d.ItemById(p.item_id);
    EXPECT_EQ(p.words[0], s.subject_first[k] ? item.subject : item.object);
    EXPECT_EQ(p.verb, item.verb);
    EXPECT_EQ(p.index, k);
  }
  EXPECT_THROW(MakeTrialPayload(s, s.n_trials(), d.items), UnknownItem);
}

Item DogsChewBones() { return Item{"dcb", "dogs", "chew", "bones", false, std::nullopt}; }

Session OneTrial(Task task) {
  Session s;
  s.session_id = "S";
  s.task = task;
  s.trial_order = {"dcb"};
  s.subject_first = {true};
  return s;
}

TEST(ExperimentTest, ForeignChoiceRejected) {
  Session s = OneTrial(Task::kChooseSubject);
  TrialResponse r{.item_id = "dcb", .choice = "zebra"};
  EXPECT_THROW(ValidateResponse(s, DogsChewBones(), r, false), ForeignChoice);
  r.choice = "chew";
  EXPECT_THROW(ValidateResponse(s, DogsChewBones(), r, false), ForeignChoice);
  r.choice = "bones";
  EXPECT_NO_THROW(ValidateResponse(s, DogsChewBones(), r, false));
}

TEST(ExperimentTest, ConstructSentenceValidation) {
  Session s = OneTrial(Task::kConstructSentence);
  TrialResponse r{.item_id = "dcb", .left_word = "dogs", .right_word = "dogs"};
  EXPECT_THROW(ValidateResponse(s, DogsChewBones(), r, false), ForeignChoice);
  r.right_word = "zebra";
  EXPECT_THROW(ValidateResponse(s, DogsChewBones(), r, false), ForeignChoice);
  r.right_word = "bones";
  EXPECT_NO_THROW(ValidateResponse(s, DogsChewBones(), r, false));
  r.latency_ms = -1;
  EXPECT_THROW(ValidateResponse(s, DogsChewBones(), r, false), InvalidResponse);
}

TEST(ExperimentTest, DuplicateAndOutOfOrder) {
  ExperimentDesign d = SyntheticDesign(1, 3, 0, Task::kChooseSubject);
  Session s = LayoutSession(d.List(1), "S", 1);
  const Item& second = d.ItemById(s.trial_order[1]);
  TrialResponse early{.item_id = second.item_id, .choice = second.subject};
  EXPECT_THROW(ValidateResponse(s, second, early, false), OutOfOrder);
  EXPECT_NO_THROW(ValidateResponse(s, second, early, true));
  s.responses.push_back(early);
  EXPECT_THROW(ValidateResponse(s, second, early, true), DuplicateResponse);
  EXPECT_EQ(s.NextUnanswered(), 0u);
}

TEST(ExperimentTest, CatchBoundary) {
  ExperimentDesign d = SyntheticDesign(1, 40, 20, Task::kChooseSubject);
  Session s = LayoutSession(d.List(1), "S", 1);
  SessionScore at15 = ScoreSession(AnswerWithCatchScore(s, d.items, 15), d.items);
  EXPECT_EQ(at15.catch_correct, 15);
  EXPECT_EQ(at15.catch_total, 20);
  EXPECT_TRUE(at15.included);
  SessionScore at14 = ScoreSession(AnswerWithCatchScore(s, d.items, 14), d.items);
  EXPECT_EQ(at14.catch_correct, 14);
  EXPECT_FALSE(at14.included);
  EXPECT_EQ(at14.critical_accuracy, 1.0);
  EXPECT_EQ(at14.critical_total, 40u);
}

// Inclusion tracks catch_correct >= threshold for every score and threshold.
TEST(ExperimentTest, InclusionRuleProperty) {
  ExperimentDesign d = SyntheticDesign(1, 5, 20, Task::kChooseSubject);
  Session s = LayoutSession(d.List(1), "S", 2);
  for (int correct = 0; correct <= 20; ++correct) {
    Session done = AnswerWithCatchScore(s, d.items, correct);
    for (int threshold = 0; threshold <= 21; ++threshold) {
      SessionScore score = ScoreSession(done, d.items, {.catch_threshold = threshold});
      EXPECT_EQ(score.included, correct >= threshold);
    }
  }
}

TEST(ExperimentTest, IncompleteSession) {
  ExperimentDesign d = SyntheticDesign(1, 5, 2, Task::kChooseSubject);
  Session s = LayoutSession(d.List(1), "S", 2);
  EXPECT_THROW(ScoreSession(s, d.items), IncompleteSession);
  SessionScore partial = ScoreSession(s, d.items, {.allow_partial = true});
  EXPECT_TRUE(partial.items.empty());
}

TEST(ExperimentTest, ConstructSentenceOrderScoring) {
  Session s = OneTrial(Task::kConstructSentence);
  ItemCatalog items = {{"dcb", DogsChewBones()}};
  s.responses = {{.item_id = "dcb", .left_word = "dogs", .right_word = "bones"}};
  EXPECT_EQ(ScoreSession(s, items).critical_accuracy, 1.0);
  s.responses = {{.item_id = "dcb", .left_word = "bones", .right_word = "dogs"}};
  EXPECT_EQ(ScoreSession(s, items).critical_accuracy, 0.0);
}

std::vector<Session> ConstructSessions(const ExperimentDesign& d, int n) {
  std::vector<Session> out;
  for (int i = 0; i < n; ++i) {
    Session s = LayoutSession(d.List(1), "S" + std::to_string(i), i);
    s = AnswerWithCatchScore(s, d.items, 0);
    for (TrialResponse& r : s.responses) {
      r.typed_sentence = r.right_word + " " + d.ItemById(r.item_id).verb + " " + r.left_word;
      // Reverse the order so order scoring marks everything wrong.
      std::swap(r.left_word, r.right_word);
    }
    out.push_back(s);
  }
  return out;
}

TEST(ExperimentTest, AdjudicationExportEmpty) {
  ExperimentDesign d = SyntheticDesign(1, 3, 0, Task::kConstructSentence);
  std::string tsv = ExportAdjudication({}, d.items);
  EXPECT_EQ(tsv,
            "session_id\titem_id\ttyped_sentence\tcorrect\tleft_word\tright_word\t"
            "subject\tverb\tobject\n");
  EXPECT_TRUE(ParseAdjudication(tsv).empty());
}

TEST(ExperimentTest, AdjudicationRoundTrip) {
  ExperimentDesign d = SyntheticDesign(1, 3, 0, Task::kConstructSentence);
  std::vector<Session> sessions = ConstructSessions(d, 1);
  std::string tsv = ExportAdjudication(sessions, d.items);
  EXPECT_EQ(std::count(tsv.begin(), tsv.end(), '\n'), 4);
  EXPECT_NE(tsv.find(sessions[0].responses[0].typed_sentence.value()), std::string::npos);
  EXPECT_EQ(ScoreSession(sessions[0], d.items).critical_accuracy, 0.0);

  // Coder marks every row correct.
  std::string coded;
  std::istringstream in(tsv);
  std::string line;
  std::getline(in, line);
  coded += line + "\n";
  while (std::getline(in, line)) {
    std::vector<std::string> f;
    std::size_t start = 0, tab;
    while ((tab = line.find('\t', start)) != std::string::npos) {
      f.push_back(line.substr(start, tab - start));
      start = tab + 1;
    }
    f.push_back(line.substr(start));
    f[3] = "1";
    for (std::size_t i = 0; i < f.size(); ++i) coded += (i ? "\t" : "") + f[i];
    coded += "\n";
  }
  Adjudications adj = ParseAdjudication(coded);
  EXPECT_EQ(adj.size(), 3u);
  ScoreOptions morph{.mode = ScoringMode::kMorphology, .adjudications = &adj};
  SessionScore score = ScoreSession(sessions[0], d.items, morph);
  EXPECT_EQ(score.critical_accuracy, 1.0);
  EXPECT_EQ(score.unadjudicated, 0u);
}

TEST(ExperimentTest, MorphologyModeCountsUncodedRows) {
  ExperimentDesign d = SyntheticDesign(1, 3, 0, Task::kConstructSentence);
  std::vector<Session> sessions = ConstructSessions(d, 1);
  Adjudications adj = {{{"S0", sessions[0].trial_order[0]}, false}};
  SessionScore score = ScoreSession(sessions[0], d.items,
                                    {.mode = ScoringMode::kMorphology, .adjudications = &adj});
  EXPECT_EQ(score.unadjudicated, 2u);
  EXPECT_EQ(score.critical_total, 1u);
  EXPECT_THROW(ParseAdjudication("S0\tx\t\tmaybe\n"), std::runtime_error);
}

TEST(ExperimentTest, DesignJsonRoundTrip) {
  ExperimentDesign d = SyntheticDesign(3, 4, 2, Task::kConstructSentence);
  d.items.begin()->second.animacy = AnimacyCondition{true, false};
  ExperimentDesign back = DesignFromJson(DesignToJson(d));
  EXPECT_EQ(back.task, d.task);
  EXPECT_EQ(back.lists, d.lists);
  EXPECT_EQ(back.items, d.items);
}

TEST(ExperimentTest, ItemFromTriadUsesLemmas) {
  Triad t = testing::MakeTriad("c", "s", "dog", "chew", "bone");
  t.subject.form = "Dogs";
  Item item = ItemFromTriad(t);
  EXPECT_EQ(item.item_id, "c/s/2");
  EXPECT_EQ(item.subject, "dog");
  EXPECT_EQ(item.verb, "chew");
}

TEST(ExperimentTest, Policies) {
  for (Policy p : {Policy::kOracle, Policy::kChance, Policy::kAnimacyHeuristic}) {
    EXPECT_EQ(PolicyFromName(PolicyName(p)), p);
  }
  EXPECT_THROW(PolicyFromName("psychic"), std::invalid_argument);
  ExperimentDesign d = SyntheticDesign(1, 50, 0, Task::kChooseSubject);
  Session s = LayoutSession(d.List(1), "S", 1);
  std::mt19937_64 rng(1);
  for (std::size_t k = 0; k < s.n_trials(); ++k) {
    const Item& item = d.ItemById(s.trial_order[k]);
    EXPECT_EQ(SimulateTrial(s, k, item, Policy::kOracle, rng).choice, item.subject);
    EXPECT_THROW(SimulateTrial(s, k, item, Policy::kAnimacyHeuristic, rng), MissingAnimacy);
  }
}

TEST(ExperimentTest, AnimacyHeuristicPicksTheAnimateNoun) {
  ExperimentDesign d = SyntheticDesign(1, 50, 0, Task::kChooseSubject);
  AnimacyAnnotations ann;
  for (const auto& [id, item] : d.items) ann[id] = {true, false};
  AttachAnimacy(d, ann);
  Session s = LayoutSession(d.List(1), "S", 1);
  std::mt19937_64 rng(1);
  for (std::size_t k = 0; k < s.n_trials(); ++k) {
    const Item& item = d.ItemById(s.trial_order[k]);
    s.responses.push_back(SimulateTrial(s, k, item, Policy::kAnimacyHeuristic, rng));
  }
  EXPECT_EQ(ScoreSession(s, d.items).critical_accuracy, 1.0);
}

TEST(ExperimentTest, TaskNames) {
  EXPECT_EQ(TaskFromName(TaskName(Task::kChooseSubject)), Task::kChooseSubject);
  EXPECT_EQ(TaskFromName(TaskName(Task::kConstructSentence)), Task::kConstructSentence);
  EXPECT_THROW(TaskFromName("draw"), std::invalid_argument);
}

}  // namespace
}  // namespace svolab
