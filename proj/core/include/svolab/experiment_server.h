// HTTP front end for ExperimentStore.
//
//   POST /sessions                      {task, seed?, list_id?}
//                                       -> {session_id, list_id, n_trials, task}
//   GET  /sessions/{id}                 -> progress, used to resume after reload
//   GET  /sessions/{id}/trials/{k}      -> {item_id, verb, words:[w1,w2], task, k, n_trials}
//   GET  /sessions/{id}/trials          -> every trial (single-page mode)
//   POST /sessions/{id}/responses       -> {status:"ok", ...} or {error, message}
//   GET  /report                        -> aggregate summaries
//
// Trial payloads carry base forms only and never the source word order.

#ifndef SVOLAB_EXPERIMENT_SERVER_H_
#define SVOLAB_EXPERIMENT_SERVER_H_

#include <filesystem>
#include <memory>
#include <optional>
#include <span>
#include <string>

#include "svolab/experiment.h"
#include "svolab/experiment_store.h"

namespace svolab {

struct ServerOptions {
  std::string host = "127.0.0.1";
  int port = 8080;  // 0 picks a free port
  std::optional<std::filesystem::path> static_dir;  // participant UI build
  ScoreOptions scoring;
};

class ExperimentServer {
 public:
  ExperimentServer(ExperimentStore& store, ServerOptions options);
  ~ExperimentServer();

  ExperimentServer(const ExperimentServer&) = delete;
  ExperimentServer& operator=(const ExperimentServer&) = delete;

  // Binds and serves on a background thread; returns the bound port.
  int Start();
  // Binds and serves on the calling thread until Stop().
  void Run();
  void Stop();
  int port() const;

 private:
  struct Impl;
  std::unique_ptr<Impl> impl_;
};

// Report over complete sessions: participant and item summaries use only
// included sessions. The scoring mode is always reported with the numbers.
std::string SessionReportJson(const ExperimentDesign& design,
                              std::span<const Session> sessions,
                              const ScoreOptions& scoring);

// Payload JSON for one trial (exposed for tests).
std::string TrialPayloadJson(const TrialPayload& payload);

}  // namespace svolab

#endif  // SVOLAB_EXPERIMENT_SERVER_H_
