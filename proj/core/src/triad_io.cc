#include "svolab/triad_io.h"

#include <fstream>
#include <sstream>
#include <stdexcept>

#include "json.hpp"

namespace svolab {
namespace {

using Json = nlohmann::ordered_json;

Json WordToJson(const WordRecord& w) {
  Json j;
  j["form"] = w.form;
  j["lemma"] = w.lemma;
  j["upos"] = w.upos;
  j["token_id"] = w.token_id;
  return j;
}

WordRecord WordFromJson(const Json& j) {
  WordRecord w;
  w.form = j.at("form").get<std::string>();
  w.lemma = j.at("lemma").get<std::string>();
  w.upos = j.at("upos").get<std::string>();
  w.token_id = j.value("token_id", 0);
  return w;
}

}  // namespace

std::string TriadToJsonLine(const Triad& t) {
  Json j;
  j["corpus"] = t.corpus;
  j["sent_id"] = t.sent_id;
  j["subject"] = WordToJson(t.subject);
  j["verb"] = WordToJson(t.verb);
  j["object"] = WordToJson(t.object);
  j["original_order"] = std::string(WordOrderName(t.original_order));
  return j.dump();
}

Triad TriadFromJsonLine(std::string_view line) {
  Json j = Json::parse(line);
  Triad t;
  t.corpus = j.at("corpus").get<std::string>();
  t.sent_id = j.at("sent_id").get<std::string>();
  t.subject = WordFromJson(j.at("subject"));
  t.verb = WordFromJson(j.at("verb"));
  t.object = WordFromJson(j.at("object"));
  t.original_order = WordOrderFromName(j.at("original_order").get<std::string>());
  t.subject_is_pron = t.subject.upos == "PRON";
  t.object_is_pron = t.object.upos == "PRON";
  return t;
}

std::string TriadsToJsonLines(const std::vector<Triad>& triads) {
  std::string out;
  for (const Triad& t : triads) {
    out += TriadToJsonLine(t);
    out += '\n';
  }
  return out;
}

std::vector<Triad> TriadsFromJsonLines(std::string_view text) {
  std::vector<Triad> triads;
  std::size_t start = 0;
  std::size_t line_number = 0;
  while (start < text.size()) {
    std::size_t end = text.find('\n', start);
    if (end == std::string_view::npos) end = text.size();
    std::string_view line = text.substr(start, end - start);
    ++line_number;
    if (line.find_first_not_of(" \t\r") != std::string_view::npos) {
      try {
        triads.push_back(TriadFromJsonLine(line));
      } catch (const std::exception& e) {
        throw std::runtime_error("triad line " + std::to_string(line_number) +
                                 ": " + e.what());
      }
    }
    start = end + 1;
  }
  return triads;
}

void WriteTriadFile(const std::filesystem::path& path,
                    const std::vector<Triad>& triads) {
  WriteTextFile(path, TriadsToJsonLines(triads));
}

std::vector<Triad> ReadTriadFile(const std::filesystem::path& path) {
  return TriadsFromJsonLines(ReadTextFile(path));
}

std::string StatsToJson(const ExtractionStats& s) {
  Json j;
  j["total_candidates"] = s.total_candidates;
  j["pronoun_dropped"] = s.pronoun_dropped;
  j["retained"] = s.retained;
  j["retention_fraction"] = s.retention_fraction;
  j["identical_arguments"] = s.identical_arguments;
  j["rejected_non_tree"] = s.rejected_non_tree;
  return j.dump(2) + "\n";
}

ExtractionStats StatsFromJson(std::string_view text) {
  Json j = Json::parse(text);
  ExtractionStats s;
  s.total_candidates = j.at("total_candidates").get<std::size_t>();
  s.pronoun_dropped = j.at("pronoun_dropped").get<std::size_t>();
  s.retained = j.at("retained").get<std::size_t>();
  s.retention_fraction = j.at("retention_fraction").get<double>();
  s.identical_arguments = j.value("identical_arguments", std::size_t{0});
  s.rejected_non_tree = j.value("rejected_non_tree", std::size_t{0});
  return s;
}

std::string ReadTextFile(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot open " + path.string());
  std::ostringstream buffer;
  buffer << in.rdbuf();
  return buffer.str();
}

void WriteTextFile(const std::filesystem::path& path, std::string_view content) {
  if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw std::runtime_error("cannot write " + path.string());
  out.write(content.data(), static_cast<std::streamsize>(content.size()));
  if (!out) throw std::runtime_error("write failed for " + path.string());
}

}  // namespace svolab
