// Synthetic inputs shared by the unit tests, the acceptance suite and the
// benchmarks.

#ifndef SVOLAB_TESTS_SYNTHETIC_H_
#define SVOLAB_TESTS_SYNTHETIC_H_

#include <cstdint>
#include <filesystem>
#include <string>
#include <string_view>
#include <vector>

#include "svolab/embeddings.h"
#include "svolab/experiment.h"
#include "svolab/triads.h"

namespace svolab::testing {

std::filesystem::path FixturePath(std::string_view name);

// Fresh directory under the system temp dir, removed on destruction.
class TempDir {
 public:
  TempDir();
  ~TempDir();
  TempDir(const TempDir&) = delete;
  TempDir& operator=(const TempDir&) = delete;
  const std::filesystem::path& path() const { return path_; }
  std::filesystem::path operator/(std::string_view name) const { return path_ / name; }

 private:
  std::filesystem::path path_;
};

// Two isotropic unit-variance Gaussians at +/- separation along a random unit
// direction fixed by direction_seed. Labels are fair coins.
std::vector<TriadExample> TwoGaussians(std::size_t n, int dim, double separation,
                                       std::uint64_t direction_seed, std::uint64_t sample_seed);

// Same features, labels permuted at random.
std::vector<TriadExample> ShuffleLabels(std::vector<TriadExample> examples, std::uint64_t seed);

// Triad with distinct lemmas, keyed corpus/sent_id/2.
Triad MakeTriad(const std::string& corpus, const std::string& sent_id, const std::string& subject,
                const std::string& verb, const std::string& object);

// n items with distinct nouns: "s<i>" acts on "o<i>" through "v<i>".
std::vector<Item> SyntheticItems(std::size_t n, const std::string& prefix, bool is_catch);

// n_lists lists, each with critical_per_list critical items and catch_per_list
// shared catch items.
ExperimentDesign SyntheticDesign(int n_lists, std::size_t critical_per_list, int catch_per_list,
                                 Task task, std::uint64_t seed = 7);

// Answer every trial of `session`; catch trials get the true subject exactly
// `catch_correct` times (in trial order), critical trials always get it.
Session AnswerWithCatchScore(Session session, const ItemCatalog& items, int catch_correct);

// A fastText-style text file for the given words. Components are uniform in
// [-0.5, 0.5) and depend only on the word.
std::string VecFileFor(const std::vector<std::string>& words, int dim);

}  // namespace svolab::testing

#endif  // SVOLAB_TESTS_SYNTHETIC_H_
