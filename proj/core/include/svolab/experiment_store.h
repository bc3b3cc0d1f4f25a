// Session state backed by an append-only JSON Lines event log.
//
// Every state change is written (and flushed to disk) before it is
// acknowledged; opening a store replays the log, so sessions survive a
// process restart. A torn final line from a crash mid-write is ignored.
// All methods are thread-safe; writes are serialized under one lock.

#ifndef SVOLAB_EXPERIMENT_STORE_H_
#define SVOLAB_EXPERIMENT_STORE_H_

#include <cstdint>
#include <cstdio>
#include <filesystem>
#include <map>
#include <mutex>
#include <optional>
#include <random>
#include <string>
#include <vector>

#include "svolab/experiment.h"

namespace svolab {

struct StoreOptions {
  bool single_page = false;
  // Seed for sessions started without one.
  std::uint64_t seed = 0;
  std::string clock_override;  // fixed timestamp for tests; empty = wall clock
};

class ExperimentStore {
 public:
  ExperimentStore(ExperimentDesign design, std::filesystem::path log_path,
                  StoreOptions options = {});
  ~ExperimentStore();

  ExperimentStore(const ExperimentStore&) = delete;
  ExperimentStore& operator=(const ExperimentStore&) = delete;

  // Starts a session on the next list in round-robin order (or list_id when
  // given) and logs it before returning.
  Session StartSession(std::optional<std::uint64_t> seed = std::nullopt,
                       std::optional<int> list_id = std::nullopt);

  // Validates, logs, then applies. Returns the updated session.
  Session RecordResponse(const std::string& session_id, TrialResponse response);

  Session GetSession(const std::string& session_id) const;
  std::vector<Session> Sessions() const;  // in start order
  TrialPayload Trial(const std::string& session_id, std::size_t k) const;

  const ExperimentDesign& design() const { return design_; }
  const StoreOptions& options() const { return options_; }
  const std::filesystem::path& log_path() const { return log_path_; }

 private:
  void Replay();
  void Append(const std::string& line);
  void ApplyStart(Session session);
  Session& Find(const std::string& session_id);
  const Session& Find(const std::string& session_id) const;
  std::string Now() const;

  ExperimentDesign design_;
  std::filesystem::path log_path_;
  StoreOptions options_;
  mutable std::mutex mu_;
  std::FILE* log_ = nullptr;
  std::map<std::string, Session> sessions_;
  std::vector<std::string> start_order_;
};

// Reads sessions back from a log without opening it for writing.
std::vector<Session> ReplaySessions(const ExperimentDesign& design,
                                    const std::filesystem::path& log_path);

}  // namespace svolab

#endif  // SVOLAB_EXPERIMENT_STORE_H_
