#include "svolab/experiment_store.h"

#include <unistd.h>

#include <algorithm>
#include <chrono>
#include <cstdio>
#include <ctime>
#include <fstream>
#include <sstream>

#include "json.hpp"
#include "svolab/rng.h"

namespace svolab {
namespace {

using Json = nlohmann::ordered_json;

Json StartEvent(const Session& s) {
  Json j;
  j["event"] = "session_started";
  j["session_id"] = s.session_id;
  j["list_id"] = s.list_id;
  j["task"] = std::string(TaskName(s.task));
  j["seed"] = s.seed;
  j["trial_order"] = s.trial_order;
  std::vector<int> first(s.subject_first.begin(), s.subject_first.end());
  j["subject_first"] = first;
  return j;
}

Json ResponseEvent(const std::string& session_id, const TrialResponse& r) {
  Json j;
  j["event"] = "response";
  j["session_id"] = session_id;
  j["item_id"] = r.item_id;
  j["choice"] = r.choice;
  j["left_word"] = r.left_word;
  j["right_word"] = r.right_word;
  if (r.typed_sentence) {
    j["typed_sentence"] = *r.typed_sentence;
  } else {
    j["typed_sentence"] = nullptr;
  }
  j["latency_ms"] = r.latency_ms;
  j["timestamp"] = r.timestamp;
  return j;
}

TrialResponse ResponseFromEvent(const Json& j) {
  TrialResponse r;
  r.item_id = j.at("item_id").get<std::string>();
  r.choice = j.value("choice", "");
  r.left_word = j.value("left_word", "");
  r.right_word = j.value("right_word", "");
  if (j.contains("typed_sentence") && !j["typed_sentence"].is_null()) {
    r.typed_sentence = j["typed_sentence"].get<std::string>();
  }
  r.latency_ms = j.value("latency_ms", std::int64_t{0});
  r.timestamp = j.value("timestamp", "");
  return r;
}

// Length of the file prefix that ends in a newline.
std::uintmax_t CompleteLength(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  std::string content((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
  auto last = content.rfind('\n');
  return last == std::string::npos ? 0 : last + 1;
}

struct ReplayState {
  std::map<std::string, Session> sessions;
  std::vector<std::string> order;
};

void ApplyEvent(const ExperimentDesign& design, ReplayState& state, const Json& j,
                std::size_t line_number) {
  const std::string type = j.at("event").get<std::string>();
  const std::string id = j.at("session_id").get<std::string>();
  if (type == "session_started") {
    Session s;
    s.session_id = id;
    s.list_id = j.at("list_id").get<int>();
    design.List(s.list_id);
    s.task = TaskFromName(j.at("task").get<std::string>());
    s.seed = j.at("seed").get<std::uint64_t>();
    s.trial_order = j.at("trial_order").get<std::vector<std::string>>();
    for (int f : j.at("subject_first").get<std::vector<int>>()) s.subject_first.push_back(f != 0);
    if (s.subject_first.size() != s.trial_order.size()) {
      throw std::runtime_error("log line " + std::to_string(line_number) +
                               ": display order length mismatch");
    }
    s.status = s.trial_order.empty() ? SessionStatus::kComplete : SessionStatus::kActive;
    if (!state.sessions.emplace(id, s).second) {
      throw std::runtime_error("log line " + std::to_string(line_number) +
                               ": session " + id + " started twice");
    }
    state.order.push_back(id);
  } else if (type == "response") {
    auto it = state.sessions.find(id);
    if (it == state.sessions.end()) {
      throw std::runtime_error("log line " + std::to_string(line_number) +
                               ": response for unknown session " + id);
    }
    Session& s = it->second;
    TrialResponse r = ResponseFromEvent(j);
    ValidateResponse(s, design.ItemById(r.item_id), r, /*single_page=*/true);
    s.responses.push_back(std::move(r));
    if (s.responses.size() == s.n_trials()) s.status = SessionStatus::kComplete;
  } else {
    throw std::runtime_error("log line " + std::to_string(line_number) +
                             ": unknown event '" + type + "'");
  }
}

ReplayState ReplayLog(const ExperimentDesign& design, const std::filesystem::path& path) {
  ReplayState state;
  std::ifstream in(path, std::ios::binary);
  if (!in) return state;
  std::string content((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
  std::size_t start = 0, line_number = 0;
  while (start < content.size()) {
    std::size_t end = content.find('\n', start);
    if (end == std::string::npos) break;  // torn final line
    ++line_number;
    std::string_view line(content.data() + start, end - start);
    start = end + 1;
    if (line.empty()) continue;
    try {
      ApplyEvent(design, state, Json::parse(line), line_number);
    } catch (const ExperimentError& e) {
      throw std::runtime_error("log line " + std::to_string(line_number) + ": " + e.what());
    }
  }
  return state;
}

}  // namespace

ExperimentStore::ExperimentStore(ExperimentDesign design,
                                 std::filesystem::path log_path,
                                 StoreOptions options)
    : design_(std::move(design)), log_path_(std::move(log_path)), options_(options) {
  if (design_.lists.empty()) throw std::invalid_argument("experiment design has no lists");
  Replay();
  if (log_path_.has_parent_path()) std::filesystem::create_directories(log_path_.parent_path());
  if (std::filesystem::exists(log_path_)) {
    // Drop a torn trailing line so new events start on a fresh line.
    const auto keep = CompleteLength(log_path_);
    if (keep != std::filesystem::file_size(log_path_)) {
      std::filesystem::resize_file(log_path_, keep);
    }
  }
  log_ = std::fopen(log_path_.c_str(), "ab");
  if (log_ == nullptr) throw std::runtime_error("cannot open log " + log_path_.string());
}

ExperimentStore::~ExperimentStore() {
  if (log_ != nullptr) std::fclose(log_);
}

void ExperimentStore::Replay() {
  ReplayState state = ReplayLog(design_, log_path_);
  sessions_ = std::move(state.sessions);
  start_order_ = std::move(state.order);
}

void ExperimentStore::Append(const std::string& line) {
  if (std::fwrite(line.data(), 1, line.size(), log_) != line.size() ||
      std::fputc('\n', log_) == EOF || std::fflush(log_) != 0) {
    throw std::runtime_error("failed to append to " + log_path_.string());
  }
  ::fsync(::fileno(log_));
}

std::string ExperimentStore::Now() const {
  if (!options_.clock_override.empty()) return options_.clock_override;
  const auto now = std::chrono::system_clock::now();
  const std::time_t t = std::chrono::system_clock::to_time_t(now);
  const auto ms = std::chrono::duration_cast<std::chrono::milliseconds>(
                      now.time_since_epoch()).count() % 1000;
  std::tm tm{};
  gmtime_r(&t, &tm);
  char buf[32];
  std::strftime(buf, sizeof(buf), "%Y-%m-%dT%H:%M:%S", &tm);
  char out[48];
  std::snprintf(out, sizeof(out), "%s.%03dZ", buf, static_cast<int>(ms));
  return out;
}

Session ExperimentStore::StartSession(std::optional<std::uint64_t> seed,
                                      std::optional<int> list_id) {
  std::lock_guard lock(mu_);
  const std::size_t number = start_order_.size() + 1;
  const ExperimentList& list =
      list_id ? design_.List(*list_id)
              : design_.lists[(number - 1) % design_.lists.size()];
  char id[32];
  std::snprintf(id, sizeof(id), "S%06zu", number);
  const std::uint64_t session_seed =
      seed.value_or(CounterDraw(options_.seed, static_cast<std::uint64_t>(number)));
  Session s = LayoutSession(list, id, session_seed);
  if (s.trial_order.empty()) s.status = SessionStatus::kComplete;
  Append(StartEvent(s).dump());
  sessions_.emplace(s.session_id, s);
  start_order_.push_back(s.session_id);
  return s;
}

Session ExperimentStore::RecordResponse(const std::string& session_id,
                                        TrialResponse response) {
  std::lock_guard lock(mu_);
  Session& s = Find(session_id);
  auto item_it = design_.items.find(response.item_id);
  if (item_it == design_.items.end() ||
      std::find(s.trial_order.begin(), s.trial_order.end(), response.item_id) ==
          s.trial_order.end()) {
    throw UnknownItem("item '" + response.item_id + "' is not part of session " + session_id);
  }
  ValidateResponse(s, item_it->second, response, options_.single_page);
  if (response.timestamp.empty()) response.timestamp = Now();
  Append(ResponseEvent(session_id, response).dump());
  s.responses.push_back(std::move(response));
  if (s.responses.size() == s.n_trials()) s.status = SessionStatus::kComplete;
  return s;
}

Session ExperimentStore::GetSession(const std::string& session_id) const {
  std::lock_guard lock(mu_);
  return Find(session_id);
}

std::vector<Session> ExperimentStore::Sessions() const {
  std::lock_guard lock(mu_);
  std::vector<Session> out;
  out.reserve(start_order_.size());
  for (const std::string& id : start_order_) out.push_back(sessions_.at(id));
  return out;
}

TrialPayload ExperimentStore::Trial(const std::string& session_id, std::size_t k) const {
  std::lock_guard lock(mu_);
  return MakeTrialPayload(Find(session_id), k, design_.items);
}

Session& ExperimentStore::Find(const std::string& session_id) {
  auto it = sessions_.find(session_id);
  if (it == sessions_.end()) throw UnknownSession("no session '" + session_id + "'");
  return it->second;
}

const Session& ExperimentStore::Find(const std::string& session_id) const {
  auto it = sessions_.find(session_id);
  if (it == sessions_.end()) throw UnknownSession("no session '" + session_id + "'");
  return it->second;
}

std::vector<Session> ReplaySessions(const ExperimentDesign& design,
                                    const std::filesystem::path& log_path) {
  ReplayState state = ReplayLog(design, log_path);
  std::vector<Session> out;
  for (const std::string& id : state.order) out.push_back(state.sessions.at(id));
  return out;
}

}  // namespace svolab
