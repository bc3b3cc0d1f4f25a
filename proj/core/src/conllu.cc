#include "svolab/conllu.h"

#include <charconv>
#include <fstream>
#include <sstream>
#include <unordered_set>
#include <utility>

namespace svolab {
namespace {

constexpr std::size_t kColumns = 10;

std::vector<std::string_view> SplitTabs(std::string_view line) {
  std::vector<std::string_view> fields;
  std::size_t start = 0;
  while (true) {
    std::size_t tab = line.find('\t', start);
    if (tab == std::string_view::npos) {
      fields.push_back(line.substr(start));
      break;
    }
    fields.push_back(line.substr(start, tab - start));
    start = tab + 1;
  }
  return fields;
}

std::optional<int> ParseInt(std::string_view s) {
  int value = 0;
  auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), value);
  if (ec != std::errc() || ptr != s.data() + s.size()) return std::nullopt;
  return value;
}

std::string_view Trim(std::string_view s) {
  while (!s.empty() && (s.front() == ' ' || s.front() == '\t')) s.remove_prefix(1);
  while (!s.empty() && (s.back() == ' ' || s.back() == '\t' || s.back() == '\r'))
    s.remove_suffix(1);
  return s;
}

// "# key = value" -> value if the key matches.
std::optional<std::string> CommentValue(std::string_view comment,
                                        std::string_view key) {
  std::string_view body = comment.substr(1);
  body = Trim(body);
  if (body.substr(0, key.size()) != key) return std::nullopt;
  body.remove_prefix(key.size());
  body = Trim(body);
  if (body.empty() || body.front() != '=') return std::nullopt;
  body.remove_prefix(1);
  return std::string(Trim(body));
}

class DocumentParser {
 public:
  explicit DocumentParser(ParseStats* stats) : stats_(stats) {}

  void Line(std::string_view line, std::size_t line_number) {
    if (!line.empty() && line.back() == '\r') line.remove_suffix(1);
    if (line.empty()) {
      Flush();
      return;
    }
    if (line.front() == '#') {
      std::string comment(line);
      if (auto id = CommentValue(comment, "sent_id")) current_.sent_id = *id;
      if (auto text = CommentValue(comment, "text")) current_.text = *text;
      current_.comments.push_back(std::move(comment));
      open_ = true;
      return;
    }
    open_ = true;
    auto fields = SplitTabs(line);
    if (fields.size() != kColumns) {
      throw ParseError(line_number, "expected 10 tab-separated columns, got " +
                                        std::to_string(fields.size()));
    }
    std::string_view id_field = fields[0];
    if (id_field.find('-') != std::string_view::npos) {
      ++stats_local_.skipped_multiword;
      return;
    }
    if (id_field.find('.') != std::string_view::npos) {
      ++stats_local_.skipped_empty_nodes;
      return;
    }
    auto id = ParseInt(id_field);
    if (!id || *id < 1) {
      throw ParseError(line_number, "non-numeric token id '" +
                                        std::string(id_field) + "'");
    }
    auto head = ParseInt(fields[6]);
    if (!head || *head < 0) {
      throw ParseError(line_number,
                       "non-numeric head '" + std::string(fields[6]) + "'");
    }
    if (!seen_ids_.insert(*id).second) {
      throw ParseError(line_number, "duplicate token id " + std::to_string(*id));
    }
    Token token;
    token.id = *id;
    token.form = fields[1];
    token.lemma = fields[2];
    token.upos = fields[3];
    token.xpos = fields[4];
    token.feats = fields[5];
    token.head = *head;
    token.deprel = fields[7];
    token.deps = fields[8];
    token.misc = fields[9];
    current_.tokens.push_back(std::move(token));
  }

  void Flush() {
    if (!open_) return;
    open_ = false;
    seen_ids_.clear();
    Sentence sentence = std::move(current_);
    current_ = Sentence{};
    if (sentence.tokens.empty()) return;
    ++stats_local_.sentences_read;
    if (!IsTree(sentence)) {
      ++stats_local_.rejected_non_tree;
      return;
    }
    sentences_.push_back(std::move(sentence));
  }

  std::vector<Sentence> Finish() {
    Flush();
    if (stats_ != nullptr) *stats_ = stats_local_;
    return std::move(sentences_);
  }

 private:
  ParseStats* stats_;
  ParseStats stats_local_;
  Sentence current_;
  bool open_ = false;
  std::unordered_set<int> seen_ids_;
  std::vector<Sentence> sentences_;
};

}  // namespace

ParseError::ParseError(std::size_t line_number, std::string reason)
    : std::runtime_error("line " + std::to_string(line_number) + ": " + reason),
      line_number_(line_number),
      reason_(std::move(reason)) {}

UnknownToken::UnknownToken(int id)
    : std::out_of_range("unknown token id " + std::to_string(id)) {}

std::string_view SplitName(Split split) {
  switch (split) {
    case Split::kTrain: return "train";
    case Split::kDev: return "dev";
    case Split::kTest: return "test";
    case Split::kUnsplit: return "unsplit";
  }
  return "unsplit";
}

Split SplitFromName(std::string_view name) {
  if (name == "train") return Split::kTrain;
  if (name == "dev") return Split::kDev;
  if (name == "test") return Split::kTest;
  if (name == "unsplit") return Split::kUnsplit;
  throw std::invalid_argument("unknown split '" + std::string(name) + "'");
}

Split SplitFromPath(const std::filesystem::path& path) {
  std::string stem = path.stem().string();
  auto ends_with = [&](std::string_view suffix) {
    return stem.size() >= suffix.size() &&
           stem.compare(stem.size() - suffix.size(), suffix.size(), suffix) == 0;
  };
  if (ends_with("-train") || ends_with("_train") || ends_with(".train"))
    return Split::kTrain;
  if (ends_with("-dev") || ends_with("_dev") || ends_with(".dev"))
    return Split::kDev;
  if (ends_with("-test") || ends_with("_test") || ends_with(".test"))
    return Split::kTest;
  return Split::kUnsplit;
}

bool IsTree(const Sentence& sentence) {
  const int n = sentence.size();
  int roots = 0;
  for (int i = 0; i < n; ++i) {
    const Token& t = sentence.tokens[i];
    if (t.id != i + 1) return false;
    if (t.head < 0 || t.head > n || t.head == t.id) return false;
    if (t.head == 0) ++roots;
  }
  if (roots != 1) return false;
  // 0 = unvisited, 1 = on current path, 2 = reaches root.
  std::vector<int> state(n + 1, 0);
  state[0] = 2;
  for (int start = 1; start <= n; ++start) {
    std::vector<int> path;
    int cur = start;
    while (state[cur] == 0) {
      state[cur] = 1;
      path.push_back(cur);
      cur = sentence.tokens[cur - 1].head;
    }
    if (state[cur] == 1) return false;
    for (int id : path) state[id] = 2;
  }
  return true;
}

std::vector<Sentence> ParseDocument(std::string_view text, ParseStats* stats) {
  DocumentParser parser(stats);
  std::size_t line_number = 0;
  std::size_t start = 0;
  while (start < text.size()) {
    std::size_t end = text.find('\n', start);
    if (end == std::string_view::npos) end = text.size();
    parser.Line(text.substr(start, end - start), ++line_number);
    start = end + 1;
  }
  return parser.Finish();
}

Treebank LoadTreebank(const std::filesystem::path& path, std::string language,
                      std::string corpus_name) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot open treebank " + path.string());
  std::ostringstream buffer;
  buffer << in.rdbuf();
  ParseStats stats;
  Treebank treebank;
  try {
    treebank.sentences = ParseDocument(buffer.str(), &stats);
  } catch (const ParseError& e) {
    throw ParseError(e.line_number(), path.string() + ": " + e.reason());
  }
  treebank.language = std::move(language);
  treebank.corpus_name = std::move(corpus_name);
  treebank.split = SplitFromPath(path);
  treebank.rejected_non_tree = stats.rejected_non_tree;
  return treebank;
}

std::vector<Token> Dependents(const Sentence& sentence, int head_id,
                              std::string_view deprel) {
  if (head_id < 1 || head_id > sentence.size()) throw UnknownToken(head_id);
  std::vector<Token> out;
  for (const Token& t : sentence.tokens) {
    if (t.head == head_id && t.deprel == deprel) out.push_back(t);
  }
  return out;
}

std::string SerializeSentence(const Sentence& sentence) {
  std::string out;
  for (const std::string& c : sentence.comments) {
    out += c;
    out += '\n';
  }
  for (const Token& t : sentence.tokens) {
    out += std::to_string(t.id);
    for (const std::string* field :
         {&t.form, &t.lemma, &t.upos, &t.xpos, &t.feats}) {
      out += '\t';
      out += *field;
    }
    out += '\t';
    out += std::to_string(t.head);
    for (const std::string* field : {&t.deprel, &t.deps, &t.misc}) {
      out += '\t';
      out += *field;
    }
    out += '\n';
  }
  out += '\n';
  return out;
}

}  // namespace svolab
