// Triad files: JSON Lines, one triad per line.
//
//   {"corpus":..,"sent_id":..,"subject":{"form","lemma","upos","token_id"},
//    "verb":{..},"object":{..},"original_order":"SVO"}
//
// Keys are written in this fixed order so equal inputs give byte-identical
// files.

#ifndef SVOLAB_TRIAD_IO_H_
#define SVOLAB_TRIAD_IO_H_

#include <filesystem>
#include <string>
#include <string_view>
#include <vector>

#include "svolab/triads.h"

namespace svolab {

std::string TriadToJsonLine(const Triad& triad);
Triad TriadFromJsonLine(std::string_view line);

std::string TriadsToJsonLines(const std::vector<Triad>& triads);
std::vector<Triad> TriadsFromJsonLines(std::string_view text);

void WriteTriadFile(const std::filesystem::path& path,
                    const std::vector<Triad>& triads);
std::vector<Triad> ReadTriadFile(const std::filesystem::path& path);

std::string StatsToJson(const ExtractionStats& stats);
ExtractionStats StatsFromJson(std::string_view text);

// Small file helpers shared by the pipeline.
std::string ReadTextFile(const std::filesystem::path& path);
void WriteTextFile(const std::filesystem::path& path, std::string_view content);

}  // namespace svolab

#endif  // SVOLAB_TRIAD_IO_H_
