#include "svolab/experiment.h"

#include <algorithm>
#include <set>
#include <sstream>

#include "json.hpp"
#include "svolab/rng.h"
#include "svolab/triad_io.h"

namespace svolab {
namespace {

using Json = nlohmann::ordered_json;

constexpr std::uint64_t kDisplaySalt = 0xd15b1a7d15b1a7ULL;

std::string TsvField(std::string s) {
  std::replace_if(s.begin(), s.end(), [](char c) { return c == '\t' || c == '\n' || c == '\r'; },
                  ' ');
  return s;
}

std::vector<std::string> SplitTsvLine(const std::string& line) {
  std::vector<std::string> fields;
  std::size_t start = 0;
  while (true) {
    std::size_t tab = line.find('\t', start);
    fields.push_back(line.substr(start, tab == std::string::npos ? std::string::npos : tab - start));
    if (tab == std::string::npos) break;
    start = tab + 1;
  }
  return fields;
}

bool ResponseCorrect(const Session& session, const Item& item,
                     const TrialResponse& r, const ScoreOptions& options,
                     bool* adjudicated) {
  *adjudicated = true;
  if (session.task == Task::kChooseSubject) return r.choice == item.subject;
  if (options.mode == ScoringMode::kOrder) return r.left_word == item.subject;
  if (options.adjudications != nullptr) {
    auto it = options.adjudications->find({session.session_id, item.item_id});
    if (it != options.adjudications->end()) return it->second;
  }
  *adjudicated = false;
  return false;
}

}  // namespace

std::string_view TaskName(Task task) {
  return task == Task::kChooseSubject ? "choose_subject" : "construct_sentence";
}

Task TaskFromName(std::string_view name) {
  if (name == "choose_subject") return Task::kChooseSubject;
  if (name == "construct_sentence") return Task::kConstructSentence;
  throw std::invalid_argument("unknown task '" + std::string(name) + "'");
}

std::string_view ScoringModeName(ScoringMode mode) {
  return mode == ScoringMode::kOrder ? "order" : "morphology";
}

std::string_view PolicyName(Policy policy) {
  switch (policy) {
    case Policy::kOracle: return "oracle";
    case Policy::kChance: return "chance";
    case Policy::kAnimacyHeuristic: return "animacy-heuristic";
  }
  return "oracle";
}

Policy PolicyFromName(std::string_view name) {
  if (name == "oracle") return Policy::kOracle;
  if (name == "chance") return Policy::kChance;
  if (name == "animacy-heuristic" || name == "animacy") return Policy::kAnimacyHeuristic;
  throw std::invalid_argument("unknown policy '" + std::string(name) + "'");
}

Item ItemFromTriad(const Triad& triad, Surface surface, bool is_catch) {
  Item item;
  item.item_id = triad.Key();
  item.subject = triad.SurfaceOf(triad.subject, surface);
  item.verb = triad.SurfaceOf(triad.verb, surface);
  item.object = triad.SurfaceOf(triad.object, surface);
  item.is_catch = is_catch;
  return item;
}

std::vector<ExperimentList> BuildLists(std::span<const Item> critical,
                                       std::span<const Item> catch_pool,
                                       const ListOptions& options) {
  if (options.n_lists < 1) throw std::invalid_argument("n_lists must be >= 1");
  if (options.catch_per_list < 0) throw std::invalid_argument("catch_per_list must be >= 0");
  const auto n_lists = static_cast<std::size_t>(options.n_lists);
  const auto per_list = static_cast<std::size_t>(options.catch_per_list);

  std::set<std::string> catch_ids;
  for (const Item& c : catch_pool) catch_ids.insert(c.item_id);
  std::set<std::string> seen;
  std::vector<std::string> critical_ids;
  for (const Item& item : critical) {
    if (item.subject == item.object) continue;
    if (catch_ids.count(item.item_id)) continue;
    if (!seen.insert(item.item_id).second) continue;
    critical_ids.push_back(item.item_id);
  }
  if (critical_ids.empty()) throw std::invalid_argument("no usable critical items");

  const std::size_t needed = options.reuse_catch ? per_list : per_list * n_lists;
  if (catch_ids.size() < needed || catch_pool.size() < needed) {
    throw InsufficientCatchPool("catch pool has " + std::to_string(catch_pool.size()) +
                                " items, " + std::to_string(needed) + " required");
  }

  std::mt19937_64 rng(Mix64(options.seed));
  std::shuffle(critical_ids.begin(), critical_ids.end(), rng);
  std::vector<std::string> catch_order;
  for (const Item& c : catch_pool) catch_order.push_back(c.item_id);
  if (!options.reuse_catch) std::shuffle(catch_order.begin(), catch_order.end(), rng);

  std::vector<ExperimentList> lists(n_lists);
  const std::size_t base = critical_ids.size() / n_lists;
  const std::size_t extra = critical_ids.size() % n_lists;
  std::size_t cursor = 0;
  for (std::size_t l = 0; l < n_lists; ++l) {
    ExperimentList& list = lists[l];
    list.list_id = static_cast<int>(l + 1);
    list.task = options.task;
    const std::size_t size = base + (l < extra ? 1 : 0);
    list.critical_items.assign(critical_ids.begin() + static_cast<std::ptrdiff_t>(cursor),
                               critical_ids.begin() + static_cast<std::ptrdiff_t>(cursor + size));
    cursor += size;
    const std::size_t catch_start = options.reuse_catch ? 0 : l * per_list;
    list.catch_items.assign(catch_order.begin() + static_cast<std::ptrdiff_t>(catch_start),
                            catch_order.begin() + static_cast<std::ptrdiff_t>(catch_start + per_list));
  }
  return lists;
}

const ExperimentList& ExperimentDesign::List(int list_id) const {
  for (const ExperimentList& l : lists) {
    if (l.list_id == list_id) return l;
  }
  throw UnknownList("no list with id " + std::to_string(list_id));
}

const Item& ExperimentDesign::ItemById(const std::string& item_id) const {
  auto it = items.find(item_id);
  if (it == items.end()) throw UnknownItem("no item '" + item_id + "'");
  return it->second;
}

ExperimentDesign MakeDesign(std::span<const Item> critical,
                            std::span<const Item> catch_pool,
                            const ListOptions& options) {
  ExperimentDesign design;
  design.task = options.task;
  design.lists = BuildLists(critical, catch_pool, options);
  std::set<std::string> used;
  for (const ExperimentList& l : design.lists) {
    used.insert(l.critical_items.begin(), l.critical_items.end());
    used.insert(l.catch_items.begin(), l.catch_items.end());
  }
  for (const Item& item : critical) {
    if (used.count(item.item_id)) design.items.emplace(item.item_id, item);
  }
  for (Item item : catch_pool) {
    if (!used.count(item.item_id)) continue;
    item.is_catch = true;
    design.items.insert_or_assign(item.item_id, item);
  }
  return design;
}

void AttachAnimacy(ExperimentDesign& design, const AnimacyAnnotations& annotations) {
  for (auto& [id, item] : design.items) {
    auto it = annotations.find(id);
    if (it != annotations.end()) item.animacy = it->second;
  }
}

std::string DesignToJson(const ExperimentDesign& design) {
  Json j;
  j["task"] = std::string(TaskName(design.task));
  Json lists = Json::array();
  for (const ExperimentList& l : design.lists) {
    Json jl;
    jl["list_id"] = l.list_id;
    jl["task"] = std::string(TaskName(l.task));
    jl["critical_items"] = l.critical_items;
    jl["catch_items"] = l.catch_items;
    lists.push_back(jl);
  }
  j["lists"] = lists;
  Json items = Json::array();
  for (const auto& [id, item] : design.items) {
    Json ji;
    ji["item_id"] = item.item_id;
    ji["subject"] = item.subject;
    ji["verb"] = item.verb;
    ji["object"] = item.object;
    ji["is_catch"] = item.is_catch;
    if (item.animacy) {
      ji["subject_animate"] = item.animacy->subject_animate;
      ji["object_animate"] = item.animacy->object_animate;
    }
    items.push_back(ji);
  }
  j["items"] = items;
  return j.dump(2) + "\n";
}

ExperimentDesign DesignFromJson(std::string_view text) {
  Json j = Json::parse(text);
  ExperimentDesign design;
  design.task = TaskFromName(j.at("task").get<std::string>());
  for (const Json& jl : j.at("lists")) {
    ExperimentList l;
    l.list_id = jl.at("list_id").get<int>();
    l.task = TaskFromName(jl.value("task", std::string(TaskName(design.task))));
    l.critical_items = jl.at("critical_items").get<std::vector<std::string>>();
    l.catch_items = jl.at("catch_items").get<std::vector<std::string>>();
    design.lists.push_back(std::move(l));
  }
  for (const Json& ji : j.at("items")) {
    Item item;
    item.item_id = ji.at("item_id").get<std::string>();
    item.subject = ji.at("subject").get<std::string>();
    item.verb = ji.at("verb").get<std::string>();
    item.object = ji.at("object").get<std::string>();
    item.is_catch = ji.value("is_catch", false);
    if (ji.contains("subject_animate") && ji.contains("object_animate")) {
      item.animacy = AnimacyCondition{ji["subject_animate"].get<bool>(),
                                      ji["object_animate"].get<bool>()};
    }
    design.items.emplace(item.item_id, std::move(item));
  }
  for (const ExperimentList& l : design.lists) {
    for (const auto* ids : {&l.critical_items, &l.catch_items}) {
      for (const std::string& id : *ids) {
        if (!design.items.count(id)) {
          throw std::runtime_error("list " + std::to_string(l.list_id) +
                                   " references unknown item '" + id + "'");
        }
      }
    }
  }
  return design;
}

void SaveDesign(const std::filesystem::path& path, const ExperimentDesign& design) {
  WriteTextFile(path, DesignToJson(design));
}

ExperimentDesign LoadDesign(const std::filesystem::path& path) {
  return DesignFromJson(ReadTextFile(path));
}

bool Session::Answered(const std::string& item_id) const {
  return std::any_of(responses.begin(), responses.end(),
                     [&](const TrialResponse& r) { return r.item_id == item_id; });
}

std::optional<std::size_t> Session::NextUnanswered() const {
  for (std::size_t k = 0; k < trial_order.size(); ++k) {
    if (!Answered(trial_order[k])) return k;
  }
  return std::nullopt;
}

Session LayoutSession(const ExperimentList& list, std::string session_id,
                      std::uint64_t seed) {
  Session s;
  s.session_id = std::move(session_id);
  s.list_id = list.list_id;
  s.task = list.task;
  s.seed = seed;
  s.trial_order = list.critical_items;
  s.trial_order.insert(s.trial_order.end(), list.catch_items.begin(), list.catch_items.end());
  std::mt19937_64 rng(Mix64(seed));
  std::shuffle(s.trial_order.begin(), s.trial_order.end(), rng);
  s.subject_first.resize(s.trial_order.size());
  for (std::size_t k = 0; k < s.trial_order.size(); ++k) {
    s.subject_first[k] = CounterCoin(seed ^ kDisplaySalt, k);
  }
  return s;
}

TrialPayload MakeTrialPayload(const Session& session, std::size_t k,
                              const ItemCatalog& items) {
  if (k >= session.n_trials()) {
    throw UnknownItem("trial index " + std::to_string(k) + " out of range (" +
                      std::to_string(session.n_trials()) + " trials)");
  }
  auto it = items.find(session.trial_order[k]);
  if (it == items.end()) throw UnknownItem("no item '" + session.trial_order[k] + "'");
  const Item& item = it->second;
  TrialPayload p;
  p.item_id = item.item_id;
  p.verb = item.verb;
  p.words = session.subject_first[k] ? std::array{item.subject, item.object}
                                     : std::array{item.object, item.subject};
  p.task = session.task;
  p.index = k;
  p.n_trials = session.n_trials();
  return p;
}

void ValidateResponse(const Session& session, const Item& item,
                      const TrialResponse& response, bool single_page) {
  if (response.item_id != item.item_id) {
    throw UnknownItem("response item '" + response.item_id + "' does not match '" +
                      item.item_id + "'");
  }
  auto pos = std::find(session.trial_order.begin(), session.trial_order.end(),
                       response.item_id);
  if (pos == session.trial_order.end()) {
    throw UnknownItem("item '" + response.item_id + "' is not part of session " +
                      session.session_id);
  }
  if (session.Answered(response.item_id)) {
    throw DuplicateResponse("item '" + response.item_id + "' already answered in session " +
                            session.session_id);
  }
  if (!single_page) {
    auto next = session.NextUnanswered();
    if (next && session.trial_order[*next] != response.item_id) {
      throw OutOfOrder("expected a response for trial " + std::to_string(*next) +
                       " ('" + session.trial_order[*next] + "')");
    }
  }
  if (response.latency_ms < 0) throw InvalidResponse("latency must be >= 0");
  auto is_noun = [&](const std::string& w) { return w == item.subject || w == item.object; };
  if (session.task == Task::kChooseSubject) {
    if (!is_noun(response.choice)) {
      throw ForeignChoice("'" + response.choice + "' is not one of the trial's nouns");
    }
    return;
  }
  if (!is_noun(response.left_word) || !is_noun(response.right_word)) {
    throw ForeignChoice("placed words must be the trial's two nouns");
  }
  if (response.left_word == response.right_word && item.subject != item.object) {
    throw ForeignChoice("both slots hold the same noun");
  }
}

SessionScore ScoreSession(const Session& session, const ItemCatalog& items,
                          const ScoreOptions& options) {
  if (session.responses.size() < session.n_trials() && !options.allow_partial) {
    throw IncompleteSession("session " + session.session_id + " has " +
                            std::to_string(session.responses.size()) + " of " +
                            std::to_string(session.n_trials()) + " responses");
  }
  SessionScore score;
  score.session_id = session.session_id;
  score.list_id = session.list_id;
  std::map<std::string, const TrialResponse*> by_item;
  for (const TrialResponse& r : session.responses) by_item[r.item_id] = &r;

  for (const std::string& id : session.trial_order) {
    auto item_it = items.find(id);
    if (item_it == items.end()) throw UnknownItem("no item '" + id + "'");
    const Item& item = item_it->second;
    if (item.is_catch) ++score.catch_total;
    auto r = by_item.find(id);
    if (r == by_item.end()) continue;
    bool adjudicated = true;
    const bool correct = ResponseCorrect(session, item, *r->second, options, &adjudicated);
    if (!adjudicated) {
      ++score.unadjudicated;
      continue;
    }
    score.items.push_back({id, item.is_catch, correct});
    if (item.is_catch) {
      if (correct) ++score.catch_correct;
    } else {
      ++score.critical_total;
      if (correct) ++score.critical_correct;
    }
  }
  score.included = score.catch_total == 0 || score.catch_correct >= options.catch_threshold;
  score.critical_accuracy =
      score.critical_total == 0
          ? 0.0
          : static_cast<double>(score.critical_correct) /
                static_cast<double>(score.critical_total);
  return score;
}

std::vector<ResponseRecord> ToResponseRecords(std::span<const Session> sessions,
                                              const ItemCatalog& items,
                                              const ScoreOptions& options,
                                              bool included_only) {
  std::vector<ResponseRecord> records;
  for (const Session& s : sessions) {
    SessionScore score = ScoreSession(s, items, options);
    if (included_only && !score.included) continue;
    for (const ItemOutcome& o : score.items) {
      ResponseRecord r;
      r.participant_id = s.session_id;
      r.item_id = o.item_id;
      r.correct = o.correct;
      r.is_catch = o.is_catch;
      r.condition = items.at(o.item_id).animacy;
      records.push_back(std::move(r));
    }
  }
  return records;
}

std::string ExportAdjudication(std::span<const Session> sessions,
                               const ItemCatalog& items) {
  std::string out =
      "session_id\titem_id\ttyped_sentence\tcorrect\tleft_word\tright_word\t"
      "subject\tverb\tobject\n";
  for (const Session& s : sessions) {
    for (const std::string& id : s.trial_order) {
      auto r = std::find_if(s.responses.begin(), s.responses.end(),
                            [&](const TrialResponse& x) { return x.item_id == id; });
      if (r == s.responses.end()) continue;
      const Item& item = items.at(id);
      out += TsvField(s.session_id) + '\t' + TsvField(id) + '\t' +
             TsvField(r->typed_sentence.value_or("")) + "\t\t" + TsvField(r->left_word) +
             '\t' + TsvField(r->right_word) + '\t' + TsvField(item.subject) + '\t' +
             TsvField(item.verb) + '\t' + TsvField(item.object) + '\n';
    }
  }
  return out;
}

Adjudications ParseAdjudication(std::string_view tsv) {
  Adjudications out;
  std::istringstream in{std::string(tsv)};
  std::string line;
  std::size_t line_number = 0;
  while (std::getline(in, line)) {
    ++line_number;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty() || line.rfind("session_id\t", 0) == 0) continue;
    auto fields = SplitTsvLine(line);
    if (fields.size() < 4) {
      throw std::runtime_error("adjudication line " + std::to_string(line_number) +
                               ": expected at least 4 columns");
    }
    std::string v = fields[3];
    std::transform(v.begin(), v.end(), v.begin(), [](unsigned char c) { return std::tolower(c); });
    if (v.empty()) continue;
    bool correct;
    if (v == "1" || v == "true" || v == "yes" || v == "correct" || v == "y") {
      correct = true;
    } else if (v == "0" || v == "false" || v == "no" || v == "incorrect" || v == "n") {
      correct = false;
    } else {
      throw std::runtime_error("adjudication line " + std::to_string(line_number) +
                               ": cannot read '" + fields[3] + "' as correct/incorrect");
    }
    out[{fields[0], fields[1]}] = correct;
  }
  return out;
}

TrialResponse SimulateTrial(const Session& session, std::size_t k,
                            const Item& item, Policy policy,
                            std::mt19937_64& rng) {
  std::bernoulli_distribution coin(0.5);
  bool pick_subject = true;
  switch (policy) {
    case Policy::kOracle:
      pick_subject = true;
      break;
    case Policy::kChance:
      pick_subject = coin(rng);
      break;
    case Policy::kAnimacyHeuristic:
      if (!item.animacy) {
        throw MissingAnimacy("item '" + item.item_id + "' has no animacy annotation");
      }
      if (item.animacy->subject_animate != item.animacy->object_animate) {
        pick_subject = item.animacy->subject_animate;
      } else {
        pick_subject = coin(rng);
      }
      break;
  }
  TrialResponse r;
  r.item_id = session.trial_order.at(k);
  const std::string& chosen = pick_subject ? item.subject : item.object;
  const std::string& other = pick_subject ? item.object : item.subject;
  if (session.task == Task::kChooseSubject) {
    r.choice = chosen;
  } else {
    r.left_word = chosen;
    r.right_word = other;
    r.typed_sentence = chosen + " " + item.verb + " " + other;
  }
  r.latency_ms = 0;
  return r;
}

}  // namespace svolab
