#include "svolab/pipeline.h"

#include <algorithm>
#include <chrono>
#include <ctime>
#include <fstream>
#include <iomanip>
#include <ostream>
#include <sstream>

#include "json.hpp"
#include "svolab/embeddings.h"
#include "svolab/experiment_server.h"
#include "svolab/experiment_store.h"
#include "svolab/mlp.h"
#include "svolab/rng.h"
#include "svolab/stats.h"
#include "svolab/triad_io.h"

namespace svolab {
namespace {

using Json = nlohmann::ordered_json;
namespace fs = std::filesystem;

constexpr Split kSplits[] = {Split::kTrain, Split::kDev, Split::kTest, Split::kUnsplit};

// Timestamped lines for <output_dir>/run.log. Nothing else in the output
// directory carries wall-clock time.
class RunLog {
 public:
  RunLog(const RunConfig& config, std::string command)
      : path_(config.output_dir / "run.log"), command_(std::move(command)) {
    Write("start");
  }
  ~RunLog() { Write("end"); }

  void Write(const std::string& message) {
    std::error_code ec;
    fs::create_directories(path_.parent_path(), ec);
    std::ofstream log(path_, std::ios::app);
    if (!log) return;
    const std::time_t t = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
    std::tm tm{};
    gmtime_r(&t, &tm);
    log << std::put_time(&tm, "%Y-%m-%dT%H:%M:%SZ") << '\t' << command_ << '\t' << message << '\n';
  }

 private:
  fs::path path_;
  std::string command_;
};

fs::path Resolve(const fs::path& base, const std::string& p) {
  fs::path path(p);
  return path.is_absolute() ? path : (base / path).lexically_normal();
}

std::optional<fs::path> OptionalPath(const Json& j, const char* key, const fs::path& base) {
  if (!j.contains(key) || j[key].is_null()) return std::nullopt;
  return Resolve(base, j[key].get<std::string>());
}

template <typename T>
std::vector<T> AxisOrDefault(const Json& j, const char* key, std::vector<T> fallback) {
  if (!j.contains(key)) return fallback;
  std::vector<T> axis = j[key].get<std::vector<T>>();
  if (axis.empty()) throw ConfigError(std::string("grid.") + key + " is empty");
  return axis;
}

Json ReadJsonFile(const fs::path& path) {
  if (!fs::exists(path)) throw std::runtime_error("missing file " + path.string());
  return Json::parse(ReadTextFile(path));
}

void WriteJsonFile(const fs::path& path, const Json& j) {
  WriteTextFile(path, j.dump(2) + "\n");
}

std::vector<Json> ReadJsonLines(const fs::path& path) {
  std::vector<Json> rows;
  std::istringstream in(ReadTextFile(path));
  std::string line;
  while (std::getline(in, line)) {
    if (!line.empty()) rows.push_back(Json::parse(line));
  }
  return rows;
}

std::string JsonLines(const std::vector<Json>& rows) {
  std::string out;
  for (const Json& row : rows) {
    out += row.dump();
    out += '\n';
  }
  return out;
}

std::string Fixed(double v, int digits = 4) {
  std::ostringstream os;
  os << std::fixed << std::setprecision(digits) << v;
  return os.str();
}

// Corpus names that passed the size filter in the last extract run.
std::vector<std::string> IncludedCorpora(const RunConfig& config) {
  const fs::path path = CensusPath(config);
  if (!fs::exists(path)) throw std::runtime_error("no census at " + path.string() + "; run extract first");
  return ReadJsonFile(path).at("included").get<std::vector<std::string>>();
}

bool Contains(const std::vector<std::string>& names, const std::string& name) {
  return std::find(names.begin(), names.end(), name) != names.end();
}

fs::path DesignPath(const RunConfig& config, const std::optional<fs::path>& override_path) {
  if (override_path) return *override_path;
  if (config.experiment.design) return *config.experiment.design;
  return config.output_dir / "experiment" / "design.json";
}

fs::path LogPath(const RunConfig& config, const std::optional<fs::path>& override_path) {
  if (override_path) return *override_path;
  if (config.experiment.log) return *config.experiment.log;
  return config.output_dir / "experiment" / "responses.jsonl";
}

std::vector<Session> CompleteSessions(std::vector<Session> sessions) {
  std::erase_if(sessions, [](const Session& s) { return s.status != SessionStatus::kComplete; });
  return sessions;
}

Json CiJson(const MeanCi& ci) {
  Json j;
  j["mean"] = ci.mean;
  j["lower"] = ci.lower;
  j["upper"] = ci.upper;
  j["n"] = ci.n;
  return j;
}

Json ExtractionStatsJson(const ExtractionStats& stats) { return Json::parse(StatsToJson(stats)); }

}  // namespace

std::uint64_t CorpusSeed(std::uint64_t run_seed, std::string_view corpus) {
  return Mix64(run_seed ^ HashName(corpus));
}

std::uint64_t SplitSeed(std::uint64_t run_seed, std::string_view corpus, Split split) {
  return Mix64(CorpusSeed(run_seed, corpus) ^ HashName(SplitName(split)));
}

fs::path TriadPath(const RunConfig& config, const std::string& corpus, Split split) {
  return config.output_dir / "triads" / corpus / (std::string(SplitName(split)) + ".jsonl");
}

fs::path ExamplePath(const RunConfig& config, const std::string& corpus, Split split) {
  return config.output_dir / "examples" / corpus / (std::string(SplitName(split)) + ".bin");
}

fs::path CensusPath(const RunConfig& config) { return config.output_dir / "census.json"; }
fs::path TrainDir(const RunConfig& config) { return config.output_dir / "train"; }
fs::path ReportPath(const RunConfig& config) { return config.output_dir / "report" / "report.json"; }

RunConfig ParseRunConfig(std::string_view text, const fs::path& base_dir) {
  RunConfig c;
  try {
    const Json j = Json::parse(text);
    if (!j.is_object()) throw ConfigError("config must be a JSON object");
    if (j.contains("output_dir")) c.output_dir = Resolve(base_dir, j["output_dir"].get<std::string>());
    else c.output_dir = base_dir / "out";
    c.seed = j.value("seed", c.seed);
    c.workers = j.value("workers", c.workers);
    if (c.workers < 1) throw ConfigError("workers must be >= 1");
    c.min_triads = j.value("min_triads", c.min_triads);
    c.exclude_pronouns = j.value("exclude_pronouns", c.exclude_pronouns);
    if (j.contains("vector_surface")) c.vector_surface = SurfaceFromName(j["vector_surface"].get<std::string>());
    c.lowercase_fallback = j.value("lowercase_fallback", c.lowercase_fallback);
    c.exclusion_list = OptionalPath(j, "exclusion_list", base_dir);

    if (j.contains("grid")) {
      const Json& g = j["grid"];
      c.grid.learning_rates = AxisOrDefault(g, "learning_rates", c.grid.learning_rates);
      c.grid.hidden1 = AxisOrDefault(g, "hidden1", c.grid.hidden1);
      c.grid.hidden2 = AxisOrDefault(g, "hidden2", c.grid.hidden2);
      c.base.max_epochs = g.value("max_epochs", c.base.max_epochs);
      c.base.batch_size = g.value("batch_size", c.base.batch_size);
      c.base.patience = g.value("patience", c.base.patience);
      if (c.base.max_epochs < 1 || c.base.batch_size < 1 || c.base.patience < 1) {
        throw ConfigError("grid.max_epochs, grid.batch_size and grid.patience must be >= 1");
      }
    }

    if (j.contains("vectors")) {
      for (const auto& [language, path] : j["vectors"].items()) {
        c.vectors[language] = Resolve(base_dir, path.get<std::string>());
      }
    }

    std::map<std::string, bool> cased_by_language;
    for (const Json& cj : j.value("corpora", Json::array())) {
      CorpusConfig corpus;
      corpus.name = cj.at("name").get<std::string>();
      corpus.language = cj.at("language").get<std::string>();
      if (!cj.contains("cased") || !cj["cased"].is_boolean()) {
        throw ConfigError("corpus '" + corpus.name + "' needs a boolean 'cased' flag");
      }
      corpus.cased = cj["cased"].get<bool>();
      auto [it, fresh] = cased_by_language.emplace(corpus.language, corpus.cased);
      if (!fresh && it->second != corpus.cased) {
        throw ConfigError("language '" + corpus.language + "' has conflicting 'cased' flags");
      }
      for (const auto& [split, path] : cj.at("paths").items()) {
        corpus.paths[SplitFromName(split)] = Resolve(base_dir, path.get<std::string>());
      }
      if (corpus.paths.empty()) throw ConfigError("corpus '" + corpus.name + "' lists no files");
      for (const CorpusConfig& other : c.corpora) {
        if (other.name == corpus.name) throw ConfigError("duplicate corpus '" + corpus.name + "'");
      }
      c.corpora.push_back(std::move(corpus));
    }

    for (const Json& rj : j.value("redundancy", Json::array())) {
      RedundancyInput r;
      r.label = rj.at("label").get<std::string>();
      r.unambiguous_fraction = rj.at("unambiguous_fraction").get<double>();
      r.lexical_accuracy = rj.at("lexical_accuracy").get<double>();
      c.redundancy.push_back(std::move(r));
    }

    if (j.contains("experiment")) {
      const Json& e = j["experiment"];
      ExperimentConfig& x = c.experiment;
      x.critical_triads = OptionalPath(e, "critical_triads", base_dir);
      x.catch_triads = OptionalPath(e, "catch_triads", base_dir);
      x.design = OptionalPath(e, "design", base_dir);
      x.log = OptionalPath(e, "log", base_dir);
      x.animacy = OptionalPath(e, "animacy", base_dir);
      x.adjudication = OptionalPath(e, "adjudication", base_dir);
      if (e.contains("task")) x.task = TaskFromName(e["task"].get<std::string>());
      x.n_lists = e.value("n_lists", x.n_lists);
      x.catch_per_list = e.value("catch_per_list", x.catch_per_list);
      x.reuse_catch = e.value("reuse_catch", x.reuse_catch);
      x.catch_threshold = e.value("catch_threshold", x.catch_threshold);
      x.single_page = e.value("single_page", x.single_page);
      if (x.n_lists < 1 || x.catch_per_list < 0) throw ConfigError("bad list sizes");
    }
  } catch (const nlohmann::json::exception& e) {
    throw ConfigError(std::string("config: ") + e.what());
  } catch (const std::invalid_argument& e) {
    // Name lookups (splits, tasks, surfaces) report unknown names this way.
    if (dynamic_cast<const ConfigError*>(&e) != nullptr) throw;
    throw ConfigError(std::string("config: ") + e.what());
  }
  return c;
}

RunConfig LoadRunConfig(const fs::path& path) {
  if (!fs::exists(path)) throw ConfigError("config file not found: " + path.string());
  fs::path base = fs::absolute(path).parent_path();
  return ParseRunConfig(ReadTextFile(path), base);
}

int CmdExtract(const RunConfig& config, std::ostream& out) {
  RunLog log(config, "extract");
  std::optional<ExclusionList> exclusions;
  if (config.exclusion_list) exclusions = ExclusionList::Load(*config.exclusion_list);

  ExtractionOptions options;
  options.exclude_pronouns = config.exclude_pronouns;

  std::vector<std::pair<std::string, std::size_t>> counts;
  std::vector<std::string> failed;
  Json rows = Json::array();
  for (const CorpusConfig& corpus : config.corpora) {
    Json row;
    row["name"] = corpus.name;
    row["language"] = corpus.language;
    row["cased"] = corpus.cased;
    try {
      ExtractionStats pooled;
      std::size_t listed = 0;
      std::vector<Triad> all;
      Json splits = Json::object();
      for (Split split : kSplits) {
        auto it = corpus.paths.find(split);
        if (it == corpus.paths.end()) continue;
        if (!fs::exists(it->second)) {
          throw std::runtime_error("missing file " + it->second.string());
        }
        Treebank treebank = LoadTreebank(it->second, corpus.language, corpus.name);
        ExtractionResult result = ExtractTriads(treebank, options);
        std::size_t dropped = 0;
        if (exclusions) result.triads = exclusions->Apply(result.triads, &dropped);
        WriteTriadFile(TriadPath(config, corpus.name, split), result.triads);
        fs::path stats_path = TriadPath(config, corpus.name, split);
        stats_path.replace_extension(".stats.json");
        WriteTextFile(stats_path, StatsToJson(result.stats));
        Json s = ExtractionStatsJson(result.stats);
        s["excluded_by_list"] = dropped;
        s["triads"] = result.triads.size();
        splits[std::string(SplitName(split))] = s;
        pooled += result.stats;
        listed += dropped;
        all.insert(all.end(), result.triads.begin(), result.triads.end());
      }
      const fs::path cdir = config.output_dir / "triads" / corpus.name;
      WriteTriadFile(cdir / "all.jsonl", all);
      WriteTriadFile(cdir / "review.jsonl", ReviewListing(all));
      Json orders = Json::object();
      for (const auto& [order, n] : OrderCensus(all)) orders[std::string(WordOrderName(order))] = n;
      row["triads"] = all.size();
      row["stats"] = ExtractionStatsJson(pooled);
      row["stats"]["excluded_by_list"] = listed;
      row["splits"] = splits;
      row["orders"] = orders;
      counts.emplace_back(corpus.name, all.size());
      out << corpus.name << ": " << all.size() << " triads (" << pooled.pronoun_dropped
          << " pronoun triads dropped, retention " << Fixed(pooled.retention_fraction * 100, 1)
          << "%)\n";
      log.Write(corpus.name + " ok");
    } catch (const std::exception& e) {
      failed.push_back(corpus.name);
      row["error"] = e.what();
      out << "error: corpus " << corpus.name << ": " << e.what() << '\n';
      log.Write(corpus.name + " failed: " + e.what());
    }
    rows.push_back(row);
  }

  const std::vector<std::string> included = FilterCorpora(counts, config.min_triads);
  std::vector<std::string> excluded;
  for (const auto& [name, n] : counts) {
    if (!Contains(included, name)) excluded.push_back(name);
  }
  for (Json& row : rows) {
    if (!row.contains("error")) row["included"] = Contains(included, row["name"].get<std::string>());
  }
  Json census;
  census["min_triads"] = config.min_triads;
  census["corpora"] = rows;
  census["included"] = included;
  census["excluded (n<" + std::to_string(config.min_triads) + ")"] = excluded;
  census["failed"] = failed;
  WriteJsonFile(CensusPath(config), census);
  for (const std::string& name : excluded) {
    out << name << ": excluded (n<" << config.min_triads << ")\n";
  }
  return failed.empty() ? kExitOk : kExitPartial;
}

int CmdVectorize(const RunConfig& config, std::ostream& out) {
  RunLog log(config, "vectorize");
  const std::vector<std::string> included = IncludedCorpora(config);
  std::map<std::string, EmbeddingTable> tables;
  std::size_t failures = 0;
  for (const CorpusConfig& corpus : config.corpora) {
    if (!Contains(included, corpus.name)) continue;
    try {
      auto vit = config.vectors.find(corpus.language);
      if (vit == config.vectors.end()) {
        throw std::runtime_error("no vectors configured for language '" + corpus.language + "'");
      }
      auto tit = tables.find(corpus.language);
      if (tit == tables.end()) {
        if (!fs::exists(vit->second)) throw std::runtime_error("missing file " + vit->second.string());
        tit = tables.emplace(corpus.language, LoadVectors(vit->second)).first;
      }
      const EmbeddingTable& table = tit->second;
      Json oov = Json::object();
      for (Split split : kSplits) {
        if (!corpus.paths.contains(split)) continue;
        VectorizeOptions options;
        options.seed = SplitSeed(config.seed, corpus.name, split);
        options.surface = config.vector_surface;
        options.lowercase_fallback = config.lowercase_fallback;
        std::vector<Triad> triads = ReadTriadFile(TriadPath(config, corpus.name, split));
        VectorizeResult result = VectorizeTriads(table, triads, options);
        ExampleSet set;
        set.dim = table.dim();
        set.seed = options.seed;
        set.examples = std::move(result.examples);
        WriteExampleFile(ExamplePath(config, corpus.name, split), set);
        Json o;
        o["triads"] = triads.size();
        o["examples"] = set.examples.size();
        o["skipped_triads"] = result.oov.skipped_triads;
        o["subject_misses"] = result.oov.subject_misses;
        o["verb_misses"] = result.oov.verb_misses;
        o["object_misses"] = result.oov.object_misses;
        oov[std::string(SplitName(split))] = o;
        out << corpus.name << '/' << SplitName(split) << ": " << set.examples.size() << " of "
            << triads.size() << " triads vectorized\n";
      }
      WriteJsonFile(config.output_dir / "examples" / corpus.name / "oov.json", oov);
      log.Write(corpus.name + " ok");
    } catch (const std::exception& e) {
      ++failures;
      out << "error: corpus " << corpus.name << ": " << e.what() << '\n';
      log.Write(corpus.name + " failed: " + e.what());
    }
  }
  return failures == 0 ? kExitOk : kExitPartial;
}

int CmdTrain(const RunConfig& config, std::ostream& out) {
  RunLog log(config, "train");
  const std::vector<std::string> included = IncludedCorpora(config);
  const fs::path dir = TrainDir(config);
  std::vector<Json> summary;
  Json manifest_corpora = Json::array();
  std::size_t attempted = 0, failures = 0;
  for (const CorpusConfig& corpus : config.corpora) {
    if (!Contains(included, corpus.name)) continue;
    ++attempted;
    try {
      auto load = [&](Split split) -> std::optional<Dataset> {
        const fs::path path = ExamplePath(config, corpus.name, split);
        if (!fs::exists(path)) return std::nullopt;
        ExampleSet set = ReadExampleFile(path);
        return Dataset::FromExamples(set.examples);
      };
      std::optional<Dataset> train = load(Split::kTrain);
      std::optional<Dataset> dev = load(Split::kDev);
      std::optional<Dataset> test = load(Split::kTest);
      if (!train || !dev) throw std::runtime_error("train and dev examples are required; run vectorize");

      ClassifierConfig base = config.base;
      base.seed = CorpusSeed(config.seed, corpus.name);
      const std::vector<ClassifierConfig> grid = BuildGrid(config.grid, base);
      GridSearchResult search = GridSearch(grid, *train, *dev, test ? &*test : nullptr, config.workers);
      const TrainedResult& best = search.best();

      std::vector<Json> grid_rows;
      std::size_t failed_configs = 0;
      for (std::size_t i = 0; i < search.entries.size(); ++i) {
        const GridEntry& e = search.entries[i];
        Json row;
        row["corpus"] = corpus.name;
        row["learning_rate"] = e.config.learning_rate;
        row["hidden1"] = e.config.hidden1;
        row["hidden2"] = e.config.hidden2;
        if (e.result) {
          row["dev_accuracy"] = RoundAccuracy(e.result->dev_accuracy);
          row["epochs_run"] = e.result->epochs_run;
          row["best_epoch"] = e.result->best_epoch;
        } else {
          ++failed_configs;
          row["dev_accuracy"] = nullptr;
          row["error"] = e.error;
        }
        row["selected"] = i == search.selected;
        grid_rows.push_back(row);
      }
      const fs::path cdir = dir / corpus.name;
      WriteTextFile(cdir / "grid.jsonl", JsonLines(grid_rows));
      WriteModelFile(cdir / "model.bin", best.model);
      std::string curve = "epoch,train_loss,dev_accuracy\n";
      for (const EpochRecord& r : best.history) {
        curve += std::to_string(r.epoch) + "," + Fixed(r.train_loss, 6) + "," + Fixed(r.dev_accuracy, 4) + "\n";
      }
      WriteTextFile(cdir / "curve.csv", curve);

      Json row;
      row["corpus"] = corpus.name;
      row["language"] = corpus.language;
      row["cased"] = corpus.cased;
      row["n_train"] = train->size();
      row["n_dev"] = dev->size();
      row["n_test"] = test ? test->size() : 0;
      row["learning_rate"] = best.config.learning_rate;
      row["hidden1"] = best.config.hidden1;
      row["hidden2"] = best.config.hidden2;
      row["epochs_run"] = best.epochs_run;
      row["best_epoch"] = best.best_epoch;
      row["dev_accuracy"] = RoundAccuracy(best.dev_accuracy);
      if (best.test_accuracy) row["test_accuracy"] = RoundAccuracy(*best.test_accuracy);
      else row["test_accuracy"] = nullptr;
      row["grid_size"] = grid.size();
      row["failed_configs"] = failed_configs;
      summary.push_back(row);

      Json m;
      m["corpus"] = corpus.name;
      m["seed"] = base.seed;
      manifest_corpora.push_back(m);
      out << corpus.name << ": selected lr=" << best.config.learning_rate << " h1=" << best.config.hidden1
          << " h2=" << best.config.hidden2 << " dev=" << Fixed(best.dev_accuracy);
      if (best.test_accuracy) out << " test=" << Fixed(*best.test_accuracy);
      out << '\n';
      log.Write(corpus.name + " ok");
    } catch (const std::exception& e) {
      ++failures;
      out << "error: corpus " << corpus.name << ": " << e.what() << '\n';
      log.Write(corpus.name + " failed: " + e.what());
    }
  }

  WriteTextFile(dir / "summary.jsonl", JsonLines(summary));

  std::vector<Json> table = summary;
  auto accuracy = [](const Json& r) {
    return r["test_accuracy"].is_null() ? -1.0 : r["test_accuracy"].get<double>();
  };
  std::stable_sort(table.begin(), table.end(), [&](const Json& a, const Json& b) {
    if (a["cased"] != b["cased"]) return a["cased"].get<bool>();
    if (accuracy(a) != accuracy(b)) return accuracy(a) > accuracy(b);
    return a["corpus"].get<std::string>() < b["corpus"].get<std::string>();
  });
  std::string tsv = "group\tcorpus\tlanguage\ttest_accuracy\tdev_accuracy\tlearning_rate\thidden1\thidden2\tn_train\tn_dev\tn_test\n";
  for (const Json& r : table) {
    std::ostringstream line;
    line << (r["cased"].get<bool>() ? "cased" : "uncased") << '\t' << r["corpus"].get<std::string>() << '\t'
         << r["language"].get<std::string>() << '\t'
         << (r["test_accuracy"].is_null() ? std::string("NA") : Fixed(r["test_accuracy"].get<double>())) << '\t'
         << Fixed(r["dev_accuracy"].get<double>()) << '\t' << r["learning_rate"].get<double>() << '\t'
         << r["hidden1"].get<int>() << '\t' << r["hidden2"].get<int>() << '\t' << r["n_train"].get<std::size_t>()
         << '\t' << r["n_dev"].get<std::size_t>() << '\t' << r["n_test"].get<std::size_t>() << '\n';
    tsv += line.str();
  }
  WriteTextFile(dir / "summary.tsv", tsv);

  Json manifest;
  manifest["seed"] = config.seed;
  Json grid;
  grid["learning_rates"] = config.grid.learning_rates;
  grid["hidden1"] = config.grid.hidden1;
  grid["hidden2"] = config.grid.hidden2;
  grid["max_epochs"] = config.base.max_epochs;
  grid["batch_size"] = config.base.batch_size;
  grid["patience"] = config.base.patience;
  manifest["grid"] = grid;
  manifest["corpora"] = manifest_corpora;
  WriteJsonFile(dir / "manifest.json", manifest);

  if (attempted == 0) {
    out << "no corpora passed the size filter\n";
    return kExitPartial;
  }
  return failures == 0 ? kExitOk : kExitPartial;
}

int CmdReport(const RunConfig& config, std::ostream& out) {
  RunLog log(config, "report");
  Json report;
  std::ostringstream text;
  bool any = false;

  const fs::path summary_path = TrainDir(config) / "summary.jsonl";
  if (fs::exists(summary_path)) {
    std::vector<CorpusAccuracy> corpora;
    for (const Json& r : ReadJsonLines(summary_path)) {
      if (r["test_accuracy"].is_null()) continue;
      corpora.push_back({r["corpus"].get<std::string>(), r["language"].get<std::string>(),
                         r["cased"].get<bool>(), r["test_accuracy"].get<double>()});
    }
    if (!corpora.empty()) {
      any = true;
      std::vector<double> acc;
      for (const CorpusAccuracy& c : corpora) acc.push_back(c.accuracy);
      AccuracySummary s = SummarizeAccuracies(acc);
      Json j;
      j["n"] = s.n;
      j["median"] = s.median;
      j["min"] = s.min;
      j["max"] = s.max;
      j["mean"] = CiJson(s.mean);
      Json rows = Json::array();
      for (const CorpusAccuracy& c : corpora) {
        rows.push_back({{"corpus", c.corpus}, {"language", c.language}, {"cased", c.cased}, {"accuracy", c.accuracy}});
      }
      j["corpora"] = rows;
      report["classifiers"] = j;
      text << "classifiers: n=" << s.n << " median=" << Fixed(s.median) << " mean=" << Fixed(s.mean.mean)
           << " 95% CI [" << Fixed(s.mean.lower) << ", " << Fixed(s.mean.upper) << "] min=" << Fixed(s.min)
           << " max=" << Fixed(s.max) << '\n';
      try {
        CaseGroupComparison g = CompareCaseGroups(corpora);
        Json cg;
        cg["method"] = g.method;
        cg["cased_mean"] = g.cased_mean;
        cg["uncased_mean"] = g.uncased_mean;
        cg["difference"] = g.difference;
        cg["intercept"] = g.intercept;
        cg["slope"] = g.slope;
        cg["cased_languages"] = g.cased_languages;
        cg["uncased_languages"] = g.uncased_languages;
        cg["language_means"] = g.language_means;
        report["case_groups"] = cg;
        text << "case groups: cased=" << Fixed(g.cased_mean) << " (" << g.cased_languages
             << " languages) uncased=" << Fixed(g.uncased_mean) << " (" << g.uncased_languages
             << " languages) difference=" << Fixed(g.difference) << '\n';
      } catch (const EmptyGroup& e) {
        report["case_groups"] = {{"skipped", e.what()}};
        text << "case groups: skipped (" << e.what() << ")\n";
      }
    }
  }

  const fs::path design_path = DesignPath(config, std::nullopt);
  const fs::path log_path = LogPath(config, std::nullopt);
  Json human = Json::array();
  if (fs::exists(design_path) && fs::exists(log_path)) {
    ExperimentDesign design = LoadDesign(design_path);
    if (config.experiment.animacy) AttachAnimacy(design, LoadAnimacyTsv(*config.experiment.animacy));
    const std::vector<Session> sessions = CompleteSessions(ReplaySessions(design, log_path));
    Adjudications adjudications;
    std::vector<ScoringMode> modes = {ScoringMode::kOrder};
    if (design.task == Task::kConstructSentence && config.experiment.adjudication &&
        fs::exists(*config.experiment.adjudication)) {
      adjudications = ParseAdjudication(ReadTextFile(*config.experiment.adjudication));
      modes.push_back(ScoringMode::kMorphology);
    }
    std::string tsv = "task\tmode\tsessions\tincluded\tmean\tlower\tupper\titem_median\n";
    for (ScoringMode mode : modes) {
      ScoreOptions options;
      options.catch_threshold = config.experiment.catch_threshold;
      options.mode = mode;
      options.adjudications = &adjudications;
      std::size_t included = 0, unadjudicated = 0;
      for (const Session& s : sessions) {
        SessionScore score = ScoreSession(s, design.items, options);
        included += score.included ? 1 : 0;
        unadjudicated += score.unadjudicated;
      }
      const std::vector<ResponseRecord> records = ToResponseRecords(sessions, design.items, options, true);
      const std::string mode_name =
          design.task == Task::kChooseSubject ? "choice" : std::string(ScoringModeName(mode));
      Json row;
      row["task"] = std::string(TaskName(design.task));
      row["mode"] = mode_name;
      row["sessions"] = sessions.size();
      row["included"] = included;
      row["unadjudicated"] = unadjudicated;
      const bool has_critical = std::any_of(records.begin(), records.end(),
                                            [](const ResponseRecord& r) { return !r.is_catch; });
      if (has_critical) {
        MeanCi p = ParticipantSummary(records);
        ItemSummary items = SummarizeItems(records);
        row["participants"] = CiJson(p);
        row["items"] = {{"n", items.n_items}, {"min", items.min}, {"max", items.max}, {"median", items.median},
                        {"pct_above_80", items.pct_above_80}, {"pct_above_90", items.pct_above_90}};
        try {
          Json cells = Json::array();
          for (const AnimacyCell& cell : AnimacyTable(records)) {
            cells.push_back({{"condition", ConditionLabel(cell.condition)},
                             {"n_items", cell.n_items},
                             {"accuracy", CiJson(cell.accuracy)}});
          }
          row["animacy"] = cells;
          AnimacyRegression reg = FitAnimacyRegression(records);
          row["animacy_lrt"] = {{"chi_sq", reg.lrt.chi_sq}, {"df", reg.lrt.df}, {"p_value", reg.lrt.p_value}};
        } catch (const std::exception& e) {
          row["animacy"] = {{"skipped", e.what()}};
        }
        std::ostringstream line;
        line << row["task"].get<std::string>() << '\t' << mode_name << '\t' << sessions.size() << '\t' << included
             << '\t' << Fixed(p.mean, 2) << '\t' << Fixed(p.lower, 2) << '\t' << Fixed(p.upper, 2) << '\t'
             << Fixed(items.median, 2) << '\n';
        tsv += line.str();
        text << "human " << row["task"].get<std::string>() << " [" << mode_name << "]: " << included << " of "
             << sessions.size() << " sessions included, mean " << Fixed(p.mean, 1) << "% [" << Fixed(p.lower, 1)
             << ", " << Fixed(p.upper, 1) << "], median item " << Fixed(items.median, 1) << "%\n";
      }
      human.push_back(row);
      any = true;
    }
    WriteTextFile(config.output_dir / "report" / "human.tsv", tsv);
  }
  report["human"] = human;

  Json redundancy = Json::array();
  for (const RedundancyInput& r : config.redundancy) {
    const double combined = CombinedRedundancy(r.unambiguous_fraction, r.lexical_accuracy);
    redundancy.push_back({{"label", r.label},
                          {"unambiguous_fraction", r.unambiguous_fraction},
                          {"lexical_accuracy", r.lexical_accuracy},
                          {"combined", combined}});
    text << "combined redundancy " << r.label << ": " << Fixed(combined, 6) << " (" << Fixed(combined * 100, 1)
         << "%)\n";
    any = true;
  }
  report["combined_redundancy"] = redundancy;

  if (!any) throw NoResults("nothing to report: no classifier summaries, sessions or redundancy inputs");
  WriteJsonFile(ReportPath(config), report);
  WriteTextFile(config.output_dir / "report" / "report.txt", text.str());
  out << text.str();
  return kExitOk;
}

int CmdLists(const RunConfig& config, std::ostream& out) {
  RunLog log(config, "lists");
  const ExperimentConfig& x = config.experiment;
  if (!x.critical_triads || !x.catch_triads) {
    throw ConfigError("experiment.critical_triads and experiment.catch_triads are required");
  }
  std::vector<Item> critical, catch_pool;
  for (const Triad& t : ReadTriadFile(*x.critical_triads)) critical.push_back(ItemFromTriad(t, Surface::kLemma));
  for (const Triad& t : ReadTriadFile(*x.catch_triads)) catch_pool.push_back(ItemFromTriad(t, Surface::kLemma, true));
  ListOptions options;
  options.n_lists = x.n_lists;
  options.catch_per_list = x.catch_per_list;
  options.reuse_catch = x.reuse_catch;
  options.seed = config.seed;
  options.task = x.task;
  ExperimentDesign design = MakeDesign(critical, catch_pool, options);
  if (x.animacy) AttachAnimacy(design, LoadAnimacyTsv(*x.animacy));
  const fs::path path = DesignPath(config, std::nullopt);
  SaveDesign(path, design);
  for (const ExperimentList& l : design.lists) {
    out << "list " << l.list_id << ": " << l.critical_items.size() << " critical + " << l.catch_items.size()
        << " catch\n";
  }
  out << "design written to " << path.string() << '\n';
  return kExitOk;
}

int CmdServe(const RunConfig& config, const ServeOptions& options, std::ostream& out) {
  RunLog log(config, "serve");
  ExperimentDesign design = LoadDesign(DesignPath(config, options.design));
  if (options.task && *options.task != design.task) {
    throw ConfigError("--task " + std::string(TaskName(*options.task)) + " does not match the design (" +
                      std::string(TaskName(design.task)) + ")");
  }
  StoreOptions store_options;
  store_options.single_page = options.single_page.value_or(config.experiment.single_page);
  store_options.seed = options.seed.value_or(config.seed);
  ExperimentStore store(std::move(design), LogPath(config, options.log), store_options);
  ServerOptions server_options;
  server_options.host = options.host;
  server_options.port = options.port;
  server_options.static_dir = options.static_dir;
  server_options.scoring.catch_threshold = config.experiment.catch_threshold;
  ExperimentServer server(store, server_options);
  out << "serving " << TaskName(store.design().task) << " on " << options.host << ':' << options.port
      << " (log " << store.log_path().string() << ")" << std::endl;
  log.Write("listening on port " + std::to_string(options.port));
  server.Run();
  return kExitOk;
}

int CmdSimulate(const RunConfig& config, const SimulateOptions& options, std::ostream& out) {
  RunLog log(config, "simulate");
  if (options.participants < 1) throw ConfigError("--participants must be >= 1");
  ExperimentDesign design = LoadDesign(DesignPath(config, std::nullopt));
  if (config.experiment.animacy) AttachAnimacy(design, LoadAnimacyTsv(*config.experiment.animacy));
  const std::uint64_t seed = options.seed.value_or(config.seed);
  StoreOptions store_options;
  store_options.seed = seed;
  ExperimentStore store(design, LogPath(config, options.log), store_options);
  std::mt19937_64 rng(Mix64(seed ^ HashName(PolicyName(options.policy))));
  ScoreOptions scoring;
  scoring.catch_threshold = config.experiment.catch_threshold;
  double total = 0.0;
  std::size_t included = 0;
  for (int p = 0; p < options.participants; ++p) {
    Session s = store.StartSession();
    for (std::size_t k = 0; k < s.n_trials(); ++k) {
      const Item& item = store.design().ItemById(s.trial_order[k]);
      s = store.RecordResponse(s.session_id, SimulateTrial(s, k, item, options.policy, rng));
    }
    SessionScore score = ScoreSession(s, store.design().items, scoring);
    total += score.critical_accuracy;
    included += score.included ? 1 : 0;
  }
  out << options.participants << " " << PolicyName(options.policy) << " participants: mean critical accuracy "
      << Fixed(total / options.participants) << ", " << included << " included\n";
  return kExitOk;
}

int CmdAdjudicateExport(const RunConfig& config, const std::optional<fs::path>& path, std::ostream& out) {
  RunLog log(config, "adjudicate-export");
  const ExperimentDesign design = LoadDesign(DesignPath(config, std::nullopt));
  const fs::path log_path = LogPath(config, std::nullopt);
  std::vector<Session> sessions;
  if (fs::exists(log_path)) sessions = CompleteSessions(ReplaySessions(design, log_path));
  const fs::path target = path.value_or(config.output_dir / "experiment" / "adjudication.tsv");
  const std::string tsv = ExportAdjudication(sessions, design.items);
  WriteTextFile(target, tsv);
  out << "wrote " << std::count(tsv.begin(), tsv.end(), '\n') - 1 << " rows to " << target.string() << '\n';
  return kExitOk;
}

int CmdAdjudicateImport(const RunConfig& config, const fs::path& path, std::ostream& out) {
  RunLog log(config, "adjudicate-import");
  if (!fs::exists(path)) throw std::runtime_error("missing file " + path.string());
  const ExperimentDesign design = LoadDesign(DesignPath(config, std::nullopt));
  const Adjudications adjudications = ParseAdjudication(ReadTextFile(path));
  const std::vector<Session> sessions = CompleteSessions(ReplaySessions(design, LogPath(config, std::nullopt)));
  ScoreOptions options;
  options.catch_threshold = config.experiment.catch_threshold;
  options.mode = ScoringMode::kMorphology;
  options.adjudications = &adjudications;
  std::vector<Json> rows;
  for (const Session& s : sessions) {
    SessionScore score = ScoreSession(s, design.items, options);
    Json row;
    row["session_id"] = score.session_id;
    row["list_id"] = score.list_id;
    row["mode"] = std::string(ScoringModeName(options.mode));
    row["included"] = score.included;
    row["critical_correct"] = score.critical_correct;
    row["critical_total"] = score.critical_total;
    row["critical_accuracy"] = score.critical_accuracy;
    row["unadjudicated"] = score.unadjudicated;
    rows.push_back(row);
    out << score.session_id << ": " << score.critical_correct << '/' << score.critical_total
        << " correct (morphology), " << score.unadjudicated << " unadjudicated\n";
  }
  WriteTextFile(config.output_dir / "experiment" / "morphology_scores.jsonl", JsonLines(rows));
  out << adjudications.size() << " coder decisions read from " << path.string() << '\n';
  return kExitOk;
}

}  // namespace svolab
