#ifndef SVOLAB_EMBEDDINGS_H_
#define SVOLAB_EMBEDDINGS_H_

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

#include "svolab/triads.h"

namespace svolab {

class HeaderError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class FormatError : public std::runtime_error {
 public:
  FormatError(std::size_t line_number, const std::string& reason);
  std::size_t line_number() const { return line_number_; }

 private:
  std::size_t line_number_;
};

class DimMismatch : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Word -> vector map read from a fastText ".vec" text file. Immutable once
// loaded; lookups are safe from many threads.
class EmbeddingTable {
 public:
  explicit EmbeddingTable(int dim);

  int dim() const { return dim_; }
  std::size_t size() const { return words_.size(); }
  std::size_t declared_count() const { return declared_count_; }
  std::size_t duplicate_warnings() const { return duplicate_warnings_; }

  // Returns false (and counts a warning) when the word already exists.
  bool Add(std::string word, std::span<const double> vector);

  // Exact-match lookup. With lowercase_fallback, an ASCII-lowercased retry is
  // made when the exact string is missing.
  std::optional<std::span<const double>> Find(
      std::string_view word, bool lowercase_fallback = false) const;

  const std::vector<std::string>& words() const { return words_; }

 private:
  friend EmbeddingTable ParseVectors(std::string_view text);

  int dim_;
  std::size_t declared_count_ = 0;
  std::size_t duplicate_warnings_ = 0;
  std::vector<std::string> words_;
  std::vector<double> values_;
  std::unordered_map<std::string, std::size_t> index_;
};

EmbeddingTable ParseVectors(std::string_view text);
EmbeddingTable LoadVectors(const std::filesystem::path& path);

struct TriadExample {
  std::vector<double> features;
  bool first_is_subject = true;
  std::string triad_ref;

  bool operator==(const TriadExample&) const = default;
};

struct OovReport {
  std::size_t subject_misses = 0;
  std::size_t verb_misses = 0;
  std::size_t object_misses = 0;
  std::size_t skipped_triads = 0;
};

struct VectorizeOptions {
  std::uint64_t seed = 0;
  Surface surface = Surface::kForm;
  bool lowercase_fallback = false;
  // 0 means "3 * table.dim()"; otherwise it must equal that (DimMismatch).
  std::size_t expected_feature_length = 0;
};

struct VectorizeResult {
  std::vector<TriadExample> examples;
  OovReport oov;
};

// Subject-first draw for triad i under seed; exposed for tests.
bool SubjectFirstDraw(std::uint64_t seed, std::size_t triad_index);

// features = verb ++ first ++ second, where (first, second) is
// (subject, object) or (object, subject) by a seeded coin per triad.
VectorizeResult VectorizeTriads(const EmbeddingTable& table,
                                const std::vector<Triad>& triads,
                                const VectorizeOptions& options);

// Example files: one JSON header line {"dim","n","seed","feature_length"}
// followed by n*feature_length little-endian float64 values (row-major), n
// label bytes (1 = first is subject) and n newline-terminated triad refs.
struct ExampleSet {
  int dim = 0;
  std::uint64_t seed = 0;
  std::vector<TriadExample> examples;
};

void WriteExampleFile(const std::filesystem::path& path, const ExampleSet& set);
ExampleSet ReadExampleFile(const std::filesystem::path& path);

}  // namespace svolab

#endif  // SVOLAB_EMBEDDINGS_H_
