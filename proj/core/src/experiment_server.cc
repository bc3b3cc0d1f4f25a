#include "svolab/experiment_server.h"

#include <thread>

#include "httplib.h"
#include "json.hpp"

namespace svolab {
namespace {

using Json = nlohmann::ordered_json;

int StatusFor(const ExperimentError& e) {
  const std::string& code = e.code();
  if (code == "UnknownSession" || code == "UnknownItem" || code == "UnknownList") return 404;
  if (code == "DuplicateResponse" || code == "OutOfOrder") return 409;
  if (code == "ForeignChoice") return 422;
  return 400;
}

void SendJson(httplib::Response& res, int status, const Json& body) {
  res.status = status;
  res.set_content(body.dump(), "application/json");
}

void SendError(httplib::Response& res, int status, const std::string& code,
               const std::string& message) {
  Json body;
  body["error"] = code;
  body["message"] = message;
  SendJson(res, status, body);
}

Json PayloadToJson(const TrialPayload& p) {
  Json j;
  j["item_id"] = p.item_id;
  j["verb"] = p.verb;
  j["words"] = {p.words[0], p.words[1]};
  j["task"] = std::string(TaskName(p.task));
  j["k"] = p.index;
  j["n_trials"] = p.n_trials;
  return j;
}

Json ProgressJson(const Session& s, bool single_page) {
  Json j;
  j["session_id"] = s.session_id;
  j["list_id"] = s.list_id;
  j["task"] = std::string(TaskName(s.task));
  j["n_trials"] = s.n_trials();
  j["answered"] = s.responses.size();
  Json answered = Json::array();
  for (const TrialResponse& r : s.responses) answered.push_back(r.item_id);
  j["answered_items"] = answered;
  auto next = s.NextUnanswered();
  if (next) {
    j["next_trial"] = *next;
  } else {
    j["next_trial"] = nullptr;
  }
  j["status"] = s.status == SessionStatus::kComplete ? "complete" : "active";
  j["single_page"] = single_page;
  return j;
}

Json CiJson(const MeanCi& ci) {
  Json j;
  j["mean"] = ci.mean;
  j["lower"] = ci.lower;
  j["upper"] = ci.upper;
  j["n"] = ci.n;
  j["degenerate"] = ci.degenerate;
  return j;
}

}  // namespace

std::string TrialPayloadJson(const TrialPayload& payload) {
  return PayloadToJson(payload).dump();
}

std::string SessionReportJson(const ExperimentDesign& design,
                              std::span<const Session> sessions,
                              const ScoreOptions& scoring) {
  Json j;
  j["task"] = std::string(TaskName(design.task));
  j["scoring_mode"] = std::string(ScoringModeName(scoring.mode));
  j["catch_threshold"] = scoring.catch_threshold;
  std::size_t complete = 0, included = 0;
  std::vector<Session> scored;
  Json per_session = Json::array();
  for (const Session& s : sessions) {
    Json row;
    row["session_id"] = s.session_id;
    row["list_id"] = s.list_id;
    row["complete"] = s.status == SessionStatus::kComplete;
    if (s.status == SessionStatus::kComplete) {
      ++complete;
      SessionScore score = ScoreSession(s, design.items, scoring);
      row["catch_correct"] = score.catch_correct;
      row["catch_total"] = score.catch_total;
      row["included"] = score.included;
      row["critical_correct"] = score.critical_correct;
      row["critical_total"] = score.critical_total;
      row["critical_accuracy"] = score.critical_accuracy;
      if (score.included) {
        ++included;
        scored.push_back(s);
      }
    }
    per_session.push_back(row);
  }
  j["sessions"] = sessions.size();
  j["complete"] = complete;
  j["included"] = included;
  j["excluded"] = complete - included;
  std::vector<ResponseRecord> records = ToResponseRecords(scored, design.items, scoring);
  bool has_critical = std::any_of(records.begin(), records.end(),
                                  [](const ResponseRecord& r) { return !r.is_catch; });
  if (has_critical) {
    j["participant_summary"] = CiJson(ParticipantSummary(records));
    ItemSummary items = SummarizeItems(records);
    Json ji;
    ji["n_items"] = items.n_items;
    ji["min"] = items.min;
    ji["max"] = items.max;
    ji["median"] = items.median;
    ji["pct_above_80"] = items.pct_above_80;
    ji["pct_above_90"] = items.pct_above_90;
    j["item_summary"] = ji;
  } else {
    j["participant_summary"] = nullptr;
    j["item_summary"] = nullptr;
  }
  j["per_session"] = per_session;
  return j.dump(2);
}

struct ExperimentServer::Impl {
  ExperimentStore& store;
  ServerOptions options;
  httplib::Server server;
  std::thread thread;
  int port = 0;

  Impl(ExperimentStore& s, ServerOptions o) : store(s), options(std::move(o)) {
    Routes();
  }

  template <typename Handler>
  auto Guard(Handler handler) {
    return [this, handler](const httplib::Request& req, httplib::Response& res) {
      try {
        handler(req, res);
      } catch (const ExperimentError& e) {
        SendError(res, StatusFor(e), e.code(), e.what());
      } catch (const nlohmann::json::exception& e) {
        SendError(res, 400, "BadRequest", e.what());
      } catch (const std::invalid_argument& e) {
        SendError(res, 400, "BadRequest", e.what());
      } catch (const std::exception& e) {
        SendError(res, 500, "InternalError", e.what());
      }
    };
  }

  void Routes() {
    server.Post("/sessions", Guard([this](const httplib::Request& req, httplib::Response& res) {
      Json body = req.body.empty() ? Json::object() : Json::parse(req.body);
      if (body.contains("task")) {
        Task task = TaskFromName(body["task"].get<std::string>());
        if (task != store.design().task) {
          SendError(res, 400, "TaskMismatch",
                    "server runs " + std::string(TaskName(store.design().task)));
          return;
        }
      }
      std::optional<std::uint64_t> seed;
      if (body.contains("seed") && !body["seed"].is_null()) seed = body["seed"].get<std::uint64_t>();
      std::optional<int> list_id;
      if (body.contains("list_id") && !body["list_id"].is_null()) list_id = body["list_id"].get<int>();
      Session s = store.StartSession(seed, list_id);
      Json out;
      out["session_id"] = s.session_id;
      out["list_id"] = s.list_id;
      out["n_trials"] = s.n_trials();
      out["task"] = std::string(TaskName(s.task));
      out["single_page"] = store.options().single_page;
      SendJson(res, 201, out);
    }));

    server.Get(R"(/sessions/([^/]+))",
               Guard([this](const httplib::Request& req, httplib::Response& res) {
                 Session s = store.GetSession(req.matches[1]);
                 SendJson(res, 200, ProgressJson(s, store.options().single_page));
               }));

    server.Get(R"(/sessions/([^/]+)/trials/(\d+))",
               Guard([this](const httplib::Request& req, httplib::Response& res) {
                 const std::size_t k = std::stoul(req.matches[2]);
                 SendJson(res, 200, PayloadToJson(store.Trial(req.matches[1], k)));
               }));

    server.Get(R"(/sessions/([^/]+)/trials)",
               Guard([this](const httplib::Request& req, httplib::Response& res) {
                 Session s = store.GetSession(req.matches[1]);
                 Json trials = Json::array();
                 for (std::size_t k = 0; k < s.n_trials(); ++k) {
                   trials.push_back(PayloadToJson(MakeTrialPayload(s, k, store.design().items)));
                 }
                 Json out;
                 out["session_id"] = s.session_id;
                 out["trials"] = trials;
                 SendJson(res, 200, out);
               }));

    server.Post(R"(/sessions/([^/]+)/responses)",
                Guard([this](const httplib::Request& req, httplib::Response& res) {
                  Json body = Json::parse(req.body);
                  TrialResponse r;
                  r.item_id = body.at("item_id").get<std::string>();
                  r.choice = body.value("choice", "");
                  r.left_word = body.value("left_word", "");
                  r.right_word = body.value("right_word", "");
                  if (body.contains("typed_sentence") && body["typed_sentence"].is_string()) {
                    r.typed_sentence = body["typed_sentence"].get<std::string>();
                  }
                  r.latency_ms = body.value("latency_ms", std::int64_t{0});
                  r.timestamp = body.value("timestamp", "");
                  Session s = store.RecordResponse(req.matches[1], std::move(r));
                  Json out;
                  out["status"] = "ok";
                  out["answered"] = s.responses.size();
                  out["n_trials"] = s.n_trials();
                  out["complete"] = s.status == SessionStatus::kComplete;
                  SendJson(res, 200, out);
                }));

    server.Get("/report", Guard([this](const httplib::Request&, httplib::Response& res) {
      std::vector<Session> sessions = store.Sessions();
      res.status = 200;
      res.set_content(SessionReportJson(store.design(), sessions, options.scoring),
                      "application/json");
    }));

    if (options.static_dir) server.set_mount_point("/", options.static_dir->string());
  }
};

ExperimentServer::ExperimentServer(ExperimentStore& store, ServerOptions options)
    : impl_(std::make_unique<Impl>(store, std::move(options))) {}

ExperimentServer::~ExperimentServer() { Stop(); }

int ExperimentServer::Start() {
  Impl& m = *impl_;
  if (m.options.port == 0) {
    m.port = m.server.bind_to_any_port(m.options.host);
  } else {
    m.port = m.server.bind_to_port(m.options.host, m.options.port) ? m.options.port : -1;
  }
  if (m.port < 0) {
    throw std::runtime_error("cannot bind " + m.options.host + ":" +
                             std::to_string(m.options.port));
  }
  m.thread = std::thread([&m] { m.server.listen_after_bind(); });
  m.server.wait_until_ready();
  return m.port;
}

void ExperimentServer::Run() {
  Impl& m = *impl_;
  m.port = m.options.port;
  if (!m.server.listen(m.options.host, m.options.port)) {
    throw std::runtime_error("cannot listen on " + m.options.host + ":" +
                             std::to_string(m.options.port));
  }
}

void ExperimentServer::Stop() {
  if (!impl_) return;
  impl_->server.stop();
  if (impl_->thread.joinable()) impl_->thread.join();
}

int ExperimentServer::port() const { return impl_->port; }

}  // namespace svolab
