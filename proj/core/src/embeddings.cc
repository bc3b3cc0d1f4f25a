#include "svolab/embeddings.h"

#include <algorithm>
#include <bit>
#include <cctype>
#include <charconv>
#include <cstring>
#include <fstream>
#include <sstream>

#include "json.hpp"
#include "svolab/rng.h"

namespace svolab {
namespace {

static_assert(std::endian::native == std::endian::little,
              "example and weight files are written in host byte order");

std::string_view NextField(std::string_view& rest) {
  std::size_t start = rest.find_first_not_of(' ');
  if (start == std::string_view::npos) {
    rest = {};
    return {};
  }
  rest.remove_prefix(start);
  std::size_t end = rest.find(' ');
  std::string_view field = rest.substr(0, end);
  rest.remove_prefix(end == std::string_view::npos ? rest.size() : end);
  return field;
}

std::string AsciiLower(std::string_view s) {
  std::string out(s);
  std::transform(out.begin(), out.end(), out.begin(),
                 [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
  return out;
}

}  // namespace

FormatError::FormatError(std::size_t line_number, const std::string& reason)
    : std::runtime_error("vector file line " + std::to_string(line_number) +
                         ": " + reason),
      line_number_(line_number) {}

EmbeddingTable::EmbeddingTable(int dim) : dim_(dim) {
  if (dim <= 0) throw HeaderError("embedding dimension must be positive");
}

bool EmbeddingTable::Add(std::string word, std::span<const double> vector) {
  if (vector.size() != static_cast<std::size_t>(dim_)) {
    throw DimMismatch("vector for '" + word + "' has " +
                      std::to_string(vector.size()) + " values, table dim is " +
                      std::to_string(dim_));
  }
  auto [it, inserted] = index_.try_emplace(word, words_.size());
  if (!inserted) {
    ++duplicate_warnings_;
    return false;
  }
  words_.push_back(std::move(word));
  values_.insert(values_.end(), vector.begin(), vector.end());
  return true;
}

std::optional<std::span<const double>> EmbeddingTable::Find(
    std::string_view word, bool lowercase_fallback) const {
  auto it = index_.find(std::string(word));
  if (it == index_.end() && lowercase_fallback) it = index_.find(AsciiLower(word));
  if (it == index_.end()) return std::nullopt;
  return std::span<const double>(values_.data() + it->second * dim_,
                                 static_cast<std::size_t>(dim_));
}

EmbeddingTable ParseVectors(std::string_view text) {
  std::size_t pos = 0;
  std::size_t line_number = 0;
  auto next_line = [&]() -> std::optional<std::string_view> {
    if (pos >= text.size()) return std::nullopt;
    std::size_t end = text.find('\n', pos);
    if (end == std::string_view::npos) end = text.size();
    std::string_view line = text.substr(pos, end - pos);
    pos = end + 1;
    ++line_number;
    if (!line.empty() && line.back() == '\r') line.remove_suffix(1);
    return line;
  };

  auto header = next_line();
  if (!header) throw HeaderError("empty vector file");
  std::string_view rest = *header;
  std::string_view count_field = NextField(rest);
  std::string_view dim_field = NextField(rest);
  std::size_t count = 0;
  int dim = 0;
  auto r1 = std::from_chars(count_field.data(), count_field.data() + count_field.size(), count);
  auto r2 = std::from_chars(dim_field.data(), dim_field.data() + dim_field.size(), dim);
  if (count_field.empty() || dim_field.empty() || r1.ec != std::errc() ||
      r2.ec != std::errc() || r1.ptr != count_field.data() + count_field.size() ||
      r2.ptr != dim_field.data() + dim_field.size() ||
      !NextField(rest).empty() || dim <= 0) {
    throw HeaderError("malformed header '" + std::string(*header) +
                      "', expected '<count> <dim>'");
  }

  EmbeddingTable table(dim);
  table.declared_count_ = count;
  std::vector<double> values(dim);
  while (auto line = next_line()) {
    std::string_view row = *line;
    if (row.find_first_not_of(' ') == std::string_view::npos) continue;
    std::string word(NextField(row));
    for (int i = 0; i < dim; ++i) {
      std::string_view field = NextField(row);
      if (field.empty()) {
        throw FormatError(line_number, "expected " + std::to_string(dim) +
                                           " values, got " + std::to_string(i));
      }
      auto [ptr, ec] = std::from_chars(field.data(), field.data() + field.size(), values[i]);
      if (ec != std::errc() || ptr != field.data() + field.size()) {
        throw FormatError(line_number, "unparsable real '" + std::string(field) + "'");
      }
    }
    if (!NextField(row).empty()) {
      throw FormatError(line_number, "more than " + std::to_string(dim) + " values");
    }
    table.Add(std::move(word), values);
  }
  return table;
}

EmbeddingTable LoadVectors(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot open vector file " + path.string());
  std::ostringstream buffer;
  buffer << in.rdbuf();
  return ParseVectors(buffer.str());
}

bool SubjectFirstDraw(std::uint64_t seed, std::size_t triad_index) {
  return CounterCoin(seed, triad_index);
}

VectorizeResult VectorizeTriads(const EmbeddingTable& table,
                                const std::vector<Triad>& triads,
                                const VectorizeOptions& options) {
  const std::size_t dim = static_cast<std::size_t>(table.dim());
  if (options.expected_feature_length != 0 &&
      options.expected_feature_length != 3 * dim) {
    throw DimMismatch("expected feature length " +
                      std::to_string(options.expected_feature_length) +
                      " but table gives 3 * " + std::to_string(dim));
  }
  VectorizeResult result;
  for (std::size_t i = 0; i < triads.size(); ++i) {
    const Triad& t = triads[i];
    auto verb = table.Find(t.SurfaceOf(t.verb, options.surface), options.lowercase_fallback);
    auto subject = table.Find(t.SurfaceOf(t.subject, options.surface), options.lowercase_fallback);
    auto object = table.Find(t.SurfaceOf(t.object, options.surface), options.lowercase_fallback);
    if (!subject) ++result.oov.subject_misses;
    if (!verb) ++result.oov.verb_misses;
    if (!object) ++result.oov.object_misses;
    if (!subject || !verb || !object) {
      ++result.oov.skipped_triads;
      continue;
    }
    TriadExample example;
    example.first_is_subject = SubjectFirstDraw(options.seed, i);
    example.triad_ref = t.Key();
    example.features.reserve(3 * dim);
    auto append = [&](std::span<const double> v) {
      example.features.insert(example.features.end(), v.begin(), v.end());
    };
    append(*verb);
    if (example.first_is_subject) {
      append(*subject);
      append(*object);
    } else {
      append(*object);
      append(*subject);
    }
    result.examples.push_back(std::move(example));
  }
  return result;
}

void WriteExampleFile(const std::filesystem::path& path, const ExampleSet& set) {
  const std::size_t feature_length = 3 * static_cast<std::size_t>(set.dim);
  nlohmann::ordered_json header;
  header["dim"] = set.dim;
  header["n"] = set.examples.size();
  header["seed"] = set.seed;
  header["feature_length"] = feature_length;

  if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw std::runtime_error("cannot write " + path.string());
  out << header.dump() << '\n';
  for (const TriadExample& e : set.examples) {
    if (e.features.size() != feature_length) {
      throw DimMismatch("example " + e.triad_ref + " has " +
                        std::to_string(e.features.size()) + " features, expected " +
                        std::to_string(feature_length));
    }
    out.write(reinterpret_cast<const char*>(e.features.data()),
              static_cast<std::streamsize>(feature_length * sizeof(double)));
  }
  for (const TriadExample& e : set.examples) {
    out.put(e.first_is_subject ? 1 : 0);
  }
  for (const TriadExample& e : set.examples) out << e.triad_ref << '\n';
  if (!out) throw std::runtime_error("write failed for " + path.string());
}

ExampleSet ReadExampleFile(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot open example file " + path.string());
  std::string header_line;
  std::getline(in, header_line);
  nlohmann::json header = nlohmann::json::parse(header_line);
  ExampleSet set;
  set.dim = header.at("dim").get<int>();
  set.seed = header.at("seed").get<std::uint64_t>();
  const std::size_t n = header.at("n").get<std::size_t>();
  const std::size_t feature_length = header.at("feature_length").get<std::size_t>();
  if (feature_length != 3 * static_cast<std::size_t>(set.dim)) {
    throw DimMismatch("example file header: feature_length != 3 * dim");
  }
  set.examples.resize(n);
  for (TriadExample& e : set.examples) {
    e.features.resize(feature_length);
    in.read(reinterpret_cast<char*>(e.features.data()),
            static_cast<std::streamsize>(feature_length * sizeof(double)));
  }
  for (TriadExample& e : set.examples) {
    char label = 0;
    in.get(label);
    e.first_is_subject = label != 0;
  }
  for (TriadExample& e : set.examples) std::getline(in, e.triad_ref);
  if (!in) throw std::runtime_error("truncated example file " + path.string());
  return set;
}

}  // namespace svolab
