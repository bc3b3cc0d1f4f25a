// CoNLL-U reader for Universal Dependencies treebanks.
//
// Only basic dependencies are read: multiword-token range lines ("1-2") and
// empty nodes ("8.1") are skipped. Sentences whose head graph is not a tree
// are dropped and counted in ParseStats instead of failing the whole file.

#ifndef SVOLAB_CONLLU_H_
#define SVOLAB_CONLLU_H_

#include <cstddef>
#include <filesystem>
#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

namespace svolab {

struct Token {
  int id = 0;
  std::string form;
  std::string lemma;
  std::string upos;
  std::string xpos = "_";
  std::string feats = "_";
  int head = 0;
  std::string deprel;
  std::string deps = "_";
  std::string misc = "_";

  bool operator==(const Token&) const = default;
};

struct Sentence {
  std::string sent_id;
  std::optional<std::string> text;
  // Raw '#' lines in file order, including sent_id and text lines.
  std::vector<std::string> comments;
  std::vector<Token> tokens;

  int size() const { return static_cast<int>(tokens.size()); }
  const Token& token(int id) const { return tokens.at(id - 1); }

  bool operator==(const Sentence&) const = default;
};

enum class Split { kTrain, kDev, kTest, kUnsplit };

std::string_view SplitName(Split split);
Split SplitFromName(std::string_view name);
// "en_ewt-ud-train.conllu" -> kTrain; anything without a split marker is
// kUnsplit.
Split SplitFromPath(const std::filesystem::path& path);

struct Treebank {
  std::string language;
  std::string corpus_name;
  Split split = Split::kUnsplit;
  std::vector<Sentence> sentences;
  std::size_t rejected_non_tree = 0;
};

class ParseError : public std::runtime_error {
 public:
  ParseError(std::size_t line_number, std::string reason);
  std::size_t line_number() const { return line_number_; }
  const std::string& reason() const { return reason_; }

 private:
  std::size_t line_number_;
  std::string reason_;
};

class UnknownToken : public std::out_of_range {
 public:
  explicit UnknownToken(int id);
};

struct ParseStats {
  std::size_t sentences_read = 0;
  std::size_t rejected_non_tree = 0;
  std::size_t skipped_multiword = 0;
  std::size_t skipped_empty_nodes = 0;
};

// Parses a whole CoNLL-U document. Throws ParseError on malformed token lines.
std::vector<Sentence> ParseDocument(std::string_view text,
                                    ParseStats* stats = nullptr);

// Loads one treebank file; the split is inferred from the file name.
Treebank LoadTreebank(const std::filesystem::path& path, std::string language,
                      std::string corpus_name);

// True when every token reaches the root (head 0) without a cycle and
// exactly one token attaches to the root.
bool IsTree(const Sentence& sentence);

// Tokens t with t.head == head_id and t.deprel == deprel (exact string
// match, so "nsubj:pass" is not "nsubj"), in linear order.
std::vector<Token> Dependents(const Sentence& sentence, int head_id,
                              std::string_view deprel);

// Serializes back to CoNLL-U: comment lines, token lines, blank line.
std::string SerializeSentence(const Sentence& sentence);

}  // namespace svolab

#endif  // SVOLAB_CONLLU_H_
