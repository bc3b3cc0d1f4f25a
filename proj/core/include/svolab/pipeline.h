// End-to-end runs driven by one JSON config file.
//
// Relative paths in the config resolve against the config file's directory.
// Every command rewrites its outputs with identical bytes when rerun on the
// same config; wall-clock timestamps only go to <output_dir>/run.log.
//
//   {
//     "output_dir": "out",
//     "seed": 1,
//     "workers": 1,
//     "min_triads": 1600,
//     "exclude_pronouns": true,
//     "vector_surface": "form",
//     "lowercase_fallback": false,
//     "exclusion_list": "exclude.tsv",
//     "grid": {"learning_rates": [0.001, 0.0001], "hidden1": [32, 64, 128],
//              "hidden2": [32, 64, 128], "max_epochs": 50, "batch_size": 32,
//              "patience": 10},
//     "vectors": {"en": "vectors/cc.en.300.vec"},
//     "corpora": [{"name": "en_ewt", "language": "en", "cased": false,
//                  "paths": {"train": "...", "dev": "...", "test": "..."}}],
//     "redundancy": [{"label": "ru", "unambiguous_fraction": 0.866,
//                     "lexical_accuracy": 0.867}],
//     "experiment": {"critical_triads": "...", "catch_triads": "...",
//                    "design": "...", "log": "...", "animacy": "...",
//                    "adjudication": "...", "task": "choose_subject",
//                    "n_lists": 5, "catch_per_list": 20, "reuse_catch": true,
//                    "catch_threshold": 15, "single_page": false}
//   }

#ifndef SVOLAB_PIPELINE_H_
#define SVOLAB_PIPELINE_H_

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <map>
#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include "svolab/conllu.h"
#include "svolab/experiment.h"
#include "svolab/training.h"
#include "svolab/triads.h"

namespace svolab {

inline constexpr int kExitOk = 0;
inline constexpr int kExitPartial = 1;
inline constexpr int kExitUsage = 2;

class ConfigError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

class NoResults : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

struct CorpusConfig {
  std::string name;
  std::string language;
  bool cased = false;
  std::map<Split, std::filesystem::path> paths;
};

struct RedundancyInput {
  std::string label;
  double unambiguous_fraction = 0.0;
  double lexical_accuracy = 0.0;
};

struct ExperimentConfig {
  std::optional<std::filesystem::path> critical_triads;
  std::optional<std::filesystem::path> catch_triads;
  std::optional<std::filesystem::path> design;
  std::optional<std::filesystem::path> log;
  std::optional<std::filesystem::path> animacy;
  std::optional<std::filesystem::path> adjudication;
  Task task = Task::kChooseSubject;
  int n_lists = 5;
  int catch_per_list = 20;
  bool reuse_catch = true;
  int catch_threshold = 15;
  bool single_page = false;
};

struct RunConfig {
  std::filesystem::path output_dir = "out";
  std::uint64_t seed = 1;
  int workers = 1;
  std::size_t min_triads = 1600;
  bool exclude_pronouns = true;
  Surface vector_surface = Surface::kForm;
  bool lowercase_fallback = false;
  std::optional<std::filesystem::path> exclusion_list;
  GridSpec grid;
  ClassifierConfig base;
  std::map<std::string, std::filesystem::path> vectors;  // language -> .vec
  std::vector<CorpusConfig> corpora;
  std::vector<RedundancyInput> redundancy;
  ExperimentConfig experiment;
};

RunConfig ParseRunConfig(std::string_view json, const std::filesystem::path& base_dir);
RunConfig LoadRunConfig(const std::filesystem::path& path);

// Seeds derived from the run seed and a corpus name (and split).
std::uint64_t CorpusSeed(std::uint64_t run_seed, std::string_view corpus);
std::uint64_t SplitSeed(std::uint64_t run_seed, std::string_view corpus, Split split);

// Each command writes progress to `out` and returns an exit code.
int CmdExtract(const RunConfig& config, std::ostream& out);
int CmdVectorize(const RunConfig& config, std::ostream& out);
int CmdTrain(const RunConfig& config, std::ostream& out);
int CmdReport(const RunConfig& config, std::ostream& out);
int CmdLists(const RunConfig& config, std::ostream& out);

struct ServeOptions {
  std::string host = "127.0.0.1";
  int port = 8080;
  std::optional<std::filesystem::path> design;  // overrides experiment.design
  std::optional<std::filesystem::path> log;     // overrides experiment.log
  std::optional<Task> task;                     // must match the design
  std::optional<bool> single_page;
  std::optional<std::uint64_t> seed;
  std::optional<std::filesystem::path> static_dir;
};

int CmdServe(const RunConfig& config, const ServeOptions& options, std::ostream& out);

struct SimulateOptions {
  Policy policy = Policy::kOracle;
  int participants = 10;
  std::optional<std::uint64_t> seed;
  std::optional<std::filesystem::path> log;
};

int CmdSimulate(const RunConfig& config, const SimulateOptions& options, std::ostream& out);

int CmdAdjudicateExport(const RunConfig& config,
                        const std::optional<std::filesystem::path>& path, std::ostream& out);
int CmdAdjudicateImport(const RunConfig& config, const std::filesystem::path& path,
                        std::ostream& out);

// Output locations, relative to the output directory.
std::filesystem::path TriadPath(const RunConfig& config, const std::string& corpus, Split split);
std::filesystem::path ExamplePath(const RunConfig& config, const std::string& corpus, Split split);
std::filesystem::path CensusPath(const RunConfig& config);
std::filesystem::path TrainDir(const RunConfig& config);
std::filesystem::path ReportPath(const RunConfig& config);

}  // namespace svolab

#endif  // SVOLAB_PIPELINE_H_
