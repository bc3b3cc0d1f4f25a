// svolab: command-line driver.
//
//   svolab extract   --config run.json
//   svolab vectorize --config run.json
//   svolab train     --config run.json [--workers N]
//   svolab report    --config run.json
//   svolab lists     --config run.json
//   svolab serve     --config run.json [--port P] [--lists design.json] [--task T]
//                                      [--single-page] [--seed S]
//   svolab simulate  --config run.json --policy oracle|chance|animacy_heuristic [-n N]
//   svolab adjudicate-export --config run.json [--out file.tsv]
//   svolab adjudicate-import --config run.json --in file.tsv
//
// Exit status: 0 success, 1 partial failure, 2 usage error.

#include <iostream>
#include <optional>
#include <string>

#include "CLI11.hpp"
#include "svolab/pipeline.h"

int main(int argc, char** argv) {
  CLI::App app{"svolab: redundancy of word order and case cues in transitive clauses"};
  app.require_subcommand(1);

  std::string config_path;
  auto with_config = [&](CLI::App* sub) {
    sub->add_option("-c,--config", config_path, "run configuration (JSON)")->required()->check(CLI::ExistingFile);
    return sub;
  };

  int workers = 0;
  CLI::App* extract = with_config(app.add_subcommand("extract", "extract triads and write the corpus census"));
  CLI::App* vectorize = with_config(app.add_subcommand("vectorize", "turn triads into feature vectors"));
  CLI::App* train = with_config(app.add_subcommand("train", "run the hyperparameter grid per corpus"));
  train->add_option("-j,--workers", workers, "training threads (overrides config)")->check(CLI::PositiveNumber);
  CLI::App* report = with_config(app.add_subcommand("report", "aggregate classifier and human results"));
  CLI::App* lists = with_config(app.add_subcommand("lists", "build experiment lists"));

  svolab::ServeOptions serve_options;
  std::string lists_path, task_name, static_dir, log_path;
  bool single_page = false;
  std::uint64_t seed = 0;
  CLI::App* serve = with_config(app.add_subcommand("serve", "run the experiment HTTP server"));
  serve->add_option("--host", serve_options.host, "bind address");
  serve->add_option("--port", serve_options.port, "port")->check(CLI::Range(1, 65535));
  CLI::Option* lists_opt = serve->add_option("--lists", lists_path, "experiment design file")->check(CLI::ExistingFile);
  CLI::Option* task_opt = serve->add_option("--task", task_name, "choose_subject or construct_sentence");
  CLI::Option* page_opt = serve->add_flag("--single-page", single_page, "accept responses in any order");
  CLI::Option* seed_opt = serve->add_option("--seed", seed, "seed for session layouts");
  CLI::Option* static_opt = serve->add_option("--static", static_dir, "directory with the participant UI");
  CLI::Option* serve_log_opt = serve->add_option("--log", log_path, "response log (JSON Lines)");

  std::string policy_name = "oracle";
  int participants = 10;
  CLI::App* simulate = with_config(app.add_subcommand("simulate", "run synthetic participants"));
  simulate->add_option("--policy", policy_name, "oracle, chance or animacy_heuristic");
  simulate->add_option("-n,--participants", participants, "number of participants")->check(CLI::PositiveNumber);
  CLI::Option* sim_seed_opt = simulate->add_option("--seed", seed, "simulation seed");
  CLI::Option* sim_log_opt = simulate->add_option("--log", log_path, "response log (JSON Lines)");

  std::string adjudication_path;
  CLI::App* export_cmd = with_config(app.add_subcommand("adjudicate-export", "write typed sentences for coding"));
  CLI::Option* out_opt = export_cmd->add_option("-o,--out", adjudication_path, "output TSV");
  CLI::App* import_cmd = with_config(app.add_subcommand("adjudicate-import", "score coded sentences"));
  import_cmd->add_option("-i,--in", adjudication_path, "coded TSV")->required()->check(CLI::ExistingFile);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? svolab::kExitOk : svolab::kExitUsage;
  }

  svolab::SimulateOptions sim_options;
  try {
    if (*task_opt) serve_options.task = svolab::TaskFromName(task_name);
    sim_options.policy = svolab::PolicyFromName(policy_name);
  } catch (const std::invalid_argument& e) {
    std::cerr << "usage error: " << e.what() << '\n';
    return svolab::kExitUsage;
  }

  try {
    svolab::RunConfig config = svolab::LoadRunConfig(config_path);
    if (workers > 0) config.workers = workers;

    if (*extract) return svolab::CmdExtract(config, std::cout);
    if (*vectorize) return svolab::CmdVectorize(config, std::cout);
    if (*train) return svolab::CmdTrain(config, std::cout);
    if (*report) return svolab::CmdReport(config, std::cout);
    if (*lists) return svolab::CmdLists(config, std::cout);
    if (*serve) {
      if (*lists_opt) serve_options.design = lists_path;
      if (*page_opt) serve_options.single_page = single_page;
      if (*seed_opt) serve_options.seed = seed;
      if (*static_opt) serve_options.static_dir = static_dir;
      if (*serve_log_opt) serve_options.log = log_path;
      return svolab::CmdServe(config, serve_options, std::cout);
    }
    if (*simulate) {
      sim_options.participants = participants;
      if (*sim_seed_opt) sim_options.seed = seed;
      if (*sim_log_opt) sim_options.log = log_path;
      return svolab::CmdSimulate(config, sim_options, std::cout);
    }
    if (*export_cmd) {
      std::optional<std::filesystem::path> out;
      if (*out_opt) out = adjudication_path;
      return svolab::CmdAdjudicateExport(config, out, std::cout);
    }
    if (*import_cmd) return svolab::CmdAdjudicateImport(config, adjudication_path, std::cout);
  } catch (const svolab::ConfigError& e) {
    std::cerr << "usage error: " << e.what() << '\n';
    return svolab::kExitUsage;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return svolab::kExitPartial;
  }
  return svolab::kExitUsage;
}
