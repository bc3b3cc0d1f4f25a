#include "svolab/triads.h"

#include <algorithm>
#include <charconv>
#include <fstream>
#include <sstream>
#include <stdexcept>

namespace svolab {
namespace {

WordRecord RecordOf(const Token& t) {
  return WordRecord{t.form, t.lemma, t.upos, t.id};
}

bool IsPronoun(const Token& t) { return t.upos == "PRON"; }

}  // namespace

std::string_view WordOrderName(WordOrder order) {
  switch (order) {
    case WordOrder::kSVO: return "SVO";
    case WordOrder::kSOV: return "SOV";
    case WordOrder::kOSV: return "OSV";
    case WordOrder::kOVS: return "OVS";
    case WordOrder::kVSO: return "VSO";
    case WordOrder::kVOS: return "VOS";
  }
  return "SVO";
}

WordOrder WordOrderFromName(std::string_view name) {
  for (WordOrder order : kAllWordOrders) {
    if (WordOrderName(order) == name) return order;
  }
  throw std::invalid_argument("unknown word order '" + std::string(name) + "'");
}

WordOrder OrderOf(int subject_id, int verb_id, int object_id) {
  std::array<std::pair<int, char>, 3> positions = {
      {{subject_id, 'S'}, {verb_id, 'V'}, {object_id, 'O'}}};
  std::sort(positions.begin(), positions.end());
  std::string name = {positions[0].second, positions[1].second,
                      positions[2].second};
  return WordOrderFromName(name);
}

std::string_view SurfaceName(Surface surface) {
  return surface == Surface::kLemma ? "lemma" : "form";
}

Surface SurfaceFromName(std::string_view name) {
  if (name == "lemma") return Surface::kLemma;
  if (name == "form") return Surface::kForm;
  throw std::invalid_argument("unknown surface '" + std::string(name) + "'");
}

std::string Triad::Key() const {
  return corpus + "/" + sent_id + "/" + std::to_string(verb.token_id);
}

ExtractionStats& ExtractionStats::operator+=(const ExtractionStats& other) {
  total_candidates += other.total_candidates;
  pronoun_dropped += other.pronoun_dropped;
  retained += other.retained;
  identical_arguments += other.identical_arguments;
  rejected_non_tree += other.rejected_non_tree;
  retention_fraction =
      total_candidates == 0
          ? 0.0
          : static_cast<double>(retained) / static_cast<double>(total_candidates);
  return *this;
}

ExtractionResult ExtractTriads(const Treebank& treebank,
                               const ExtractionOptions& options) {
  ExtractionResult result;
  ExtractionStats& stats = result.stats;
  stats.rejected_non_tree = treebank.rejected_non_tree;

  for (const Sentence& sentence : treebank.sentences) {
    const int n = sentence.size();
    // Collect nsubj/obj dependents of every head in one pass.
    std::vector<std::vector<int>> subjects(n + 1), objects(n + 1);
    for (const Token& t : sentence.tokens) {
      if (t.deprel == "nsubj") subjects[t.head].push_back(t.id);
      if (t.deprel == "obj") objects[t.head].push_back(t.id);
    }
    for (const Token& verb : sentence.tokens) {
      if (verb.upos != "VERB") continue;
      if (subjects[verb.id].size() != 1 || objects[verb.id].size() != 1)
        continue;
      const Token& subject = sentence.token(subjects[verb.id].front());
      const Token& object = sentence.token(objects[verb.id].front());
      ++stats.total_candidates;

      Triad triad;
      triad.subject = RecordOf(subject);
      triad.verb = RecordOf(verb);
      triad.object = RecordOf(object);
      triad.corpus = treebank.corpus_name;
      triad.sent_id = sentence.sent_id;
      triad.original_order = OrderOf(subject.id, verb.id, object.id);
      triad.subject_is_pron = IsPronoun(subject);
      triad.object_is_pron = IsPronoun(object);

      if (options.exclude_pronouns &&
          (triad.subject_is_pron || triad.object_is_pron)) {
        ++stats.pronoun_dropped;
        continue;
      }
      if (triad.IdenticalArguments(options.surface)) ++stats.identical_arguments;
      result.triads.push_back(std::move(triad));
    }
  }
  stats.retained = result.triads.size();
  stats.retention_fraction =
      stats.total_candidates == 0
          ? 0.0
          : static_cast<double>(stats.retained) /
                static_cast<double>(stats.total_candidates);
  return result;
}

std::vector<std::string> FilterCorpora(
    const std::vector<std::pair<std::string, std::size_t>>& census,
    std::size_t min_triads) {
  std::vector<std::string> kept;
  for (const auto& [corpus, count] : census) {
    if (count >= min_triads) kept.push_back(corpus);
  }
  return kept;
}

std::map<WordOrder, std::size_t> OrderCensus(const std::vector<Triad>& triads) {
  std::map<WordOrder, std::size_t> counts;
  for (WordOrder order : kAllWordOrders) counts[order] = 0;
  for (const Triad& t : triads) ++counts[t.original_order];
  return counts;
}

std::vector<Triad> ReviewListing(const std::vector<Triad>& triads) {
  std::vector<Triad> out;
  std::copy_if(triads.begin(), triads.end(), std::back_inserter(out),
               [](const Triad& t) { return t.original_order != WordOrder::kSVO; });
  return out;
}

ExclusionList ExclusionList::Load(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open exclusion list " + path.string());
  std::ostringstream buffer;
  buffer << in.rdbuf();
  return Parse(buffer.str());
}

ExclusionList ExclusionList::Parse(std::string_view text) {
  ExclusionList list;
  std::istringstream in{std::string(text)};
  std::string line;
  std::size_t line_number = 0;
  while (std::getline(in, line)) {
    ++line_number;
    if (auto hash = line.find('#'); hash != std::string::npos) line.erase(hash);
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.find_first_not_of(" \t") == std::string::npos) continue;
    std::istringstream fields(line);
    std::string corpus, sent_id, verb_id;
    if (!std::getline(fields, corpus, '\t') || !std::getline(fields, sent_id, '\t') ||
        !std::getline(fields, verb_id, '\t')) {
      throw std::runtime_error("exclusion list line " + std::to_string(line_number) +
                               ": expected 3 tab-separated fields");
    }
    while (!verb_id.empty() && (verb_id.back() == ' ' || verb_id.back() == '\t')) verb_id.pop_back();
    int id = 0;
    auto [ptr, ec] = std::from_chars(verb_id.data(), verb_id.data() + verb_id.size(), id);
    if (ec != std::errc() || ptr != verb_id.data() + verb_id.size()) {
      throw std::runtime_error("exclusion list line " + std::to_string(line_number) +
                               ": bad verb token id '" + verb_id + "'");
    }
    list.Add(corpus, sent_id, id);
  }
  return list;
}

void ExclusionList::Add(std::string corpus, std::string sent_id,
                        int verb_token_id) {
  keys_.emplace(std::move(corpus), std::move(sent_id), verb_token_id);
}

bool ExclusionList::Contains(const Triad& triad) const {
  return keys_.count({triad.corpus, triad.sent_id, triad.verb.token_id}) > 0;
}

std::vector<Triad> ExclusionList::Apply(const std::vector<Triad>& triads,
                                        std::size_t* dropped) const {
  std::vector<Triad> kept;
  std::size_t n_dropped = 0;
  for (const Triad& t : triads) {
    if (Contains(t)) {
      ++n_dropped;
    } else {
      kept.push_back(t);
    }
  }
  if (dropped != nullptr) *dropped = n_dropped;
  return kept;
}

}  // namespace svolab
