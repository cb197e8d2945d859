#include "ndm/service.hpp"

#include <cstdio>
#include <fstream>
#include <sstream>

#include <httplib.h>

namespace ndm {
namespace {

nlohmann::json pointer_json(const Database& db, const std::optional<std::size_t>& p) {
  if (!p) return nullptr;
  nlohmann::json e = db[*p];
  return {{"index", *p}, {"entity", e}};
}

std::string db_label(const DbBins& bins) {
  static const char* names[] = {"no match", "1 match", "2 matches", "3 matches", "4 matches", "5 or more matches"};
  for (std::size_t i = 0; i < bins.size(); ++i) {
    if (bins[i]) return names[i];
  }
  return "unknown";
}

}  // namespace

Session::Session(std::string id, const Pipeline& pipeline, std::uint64_t seed, DecodeOptions decode)
    : id_(std::move(id)),
      pipeline_(pipeline),
      seed_(seed),
      decode_(std::move(decode)),
      rng_(seed),
      state_(TurnState::initial(pipeline.model)) {}

nlohmann::json Session::snapshot_locked() const {
  const auto& ont = pipeline_.model.ontology;
  nlohmann::json j;
  j["id"] = id_;
  j["t"] = state_.t;
  j["belief"] = state_.belief.to_json(ont);
  j["summary"] = summarize_belief(state_.belief).slots;
  j["bins"] = bins_json(state_.db.bins);
  j["db"] = db_label(state_.db.bins);
  j["pointer"] = pointer_json(pipeline_.db, state_.db.pointer);
  return j;
}

nlohmann::json Session::state() const {
  std::lock_guard<std::mutex> lock(mu_);
  return snapshot_locked();
}

std::size_t Session::turn() const {
  std::lock_guard<std::mutex> lock(mu_);
  return state_.t;
}

nlohmann::json Session::transcript() const {
  std::lock_guard<std::mutex> lock(mu_);
  return transcript_;
}

nlohmann::json Session::handle_turn(const std::string& text) {
  std::lock_guard<std::mutex> lock(mu_);
  // Work on copies so that a failed turn leaves the session untouched.
  TurnState next = state_;
  auto rng = rng_;
  TurnResult r = pipeline_.run_turn(next, text, rng, decode_);
  state_ = std::move(next);
  rng_ = rng;
  nlohmann::json out = snapshot_locked();
  out["user"] = text;
  out["user_delex"] = join_tokens(r.user_delex);
  out["response"] = r.response;
  out["skeletal"] = r.skeletal;
  out["unresolved"] = r.unresolved;
  transcript_.push_back({{"t", state_.t},
                         {"user", text},
                         {"user_delex", out["user_delex"]},
                         {"response", r.response},
                         {"skeletal", join_tokens(r.skeletal)}});
  return out;
}

Engine::Engine(const Model& model, const Database& db, EngineOptions opt)
    : pipeline_(model, db), opt_(std::move(opt)), ids_(std::random_device{}()) {}

std::shared_ptr<Session> Engine::create_session(std::optional<std::uint64_t> seed, const std::string& model_id) {
  if (!model_id.empty() && model_id != opt_.model_id) throw ModelNotFound("unknown model: " + model_id);
  std::lock_guard<std::mutex> lock(mu_);
  const std::uint64_t s = seed ? *seed : ids_();
  char buf[40];
  std::snprintf(buf, sizeof buf, "%06llx%08llx", static_cast<unsigned long long>(++counter_),
                static_cast<unsigned long long>(ids_() & 0xffffffffULL));
  auto session = std::make_shared<Session>(buf, pipeline_, s, opt_.decode);
  sessions_[session->id()] = session;
  return session;
}

std::shared_ptr<Session> Engine::find(const std::string& id) const {
  std::lock_guard<std::mutex> lock(mu_);
  auto it = sessions_.find(id);
  if (it == sessions_.end()) throw SessionNotFound("unknown session: " + id);
  return it->second;
}

bool Engine::remove(const std::string& id) {
  std::lock_guard<std::mutex> lock(mu_);
  return sessions_.erase(id) != 0;
}

std::size_t Engine::size() const {
  std::lock_guard<std::mutex> lock(mu_);
  return sessions_.size();
}

nlohmann::json Engine::handle_turn(const std::string& id, const std::string& text) {
  auto session = find(id);
  auto result = session->handle_turn(text);
  if (!opt_.transcript_path.empty()) {
    nlohmann::json line = {{"session", id},
                           {"seed", session->seed()},
                           {"t", result["t"]},
                           {"user", text},
                           {"response", result["response"]},
                           {"skeletal", join_tokens(result["skeletal"].get<std::vector<std::string>>())}};
    std::lock_guard<std::mutex> lock(log_mu_);
    std::ofstream f(opt_.transcript_path, std::ios::app);
    f << line.dump() << '\n';
  }
  return result;
}

std::map<std::string, bool> Engine::replay(const std::string& transcript_path) {
  std::ifstream f(transcript_path);
  if (!f) throw std::runtime_error("cannot read transcript " + transcript_path);
  std::map<std::string, std::vector<nlohmann::json>> by_session;
  std::vector<std::string> order;
  std::string line;
  while (std::getline(f, line)) {
    if (line.empty()) continue;
    auto j = nlohmann::json::parse(line);
    const auto id = j.at("session").get<std::string>();
    if (!by_session.count(id)) order.push_back(id);
    by_session[id].push_back(std::move(j));
  }
  std::map<std::string, bool> out;
  for (const auto& id : order) {
    auto& turns = by_session[id];
    auto session = std::make_shared<Session>(id, pipeline_, turns.front().at("seed").get<std::uint64_t>(), opt_.decode);
    bool same = true;
    for (const auto& t : turns) {
      auto r = session->handle_turn(t.at("user").get<std::string>());
      same = same && r["response"] == t.at("response");
    }
    {
      std::lock_guard<std::mutex> lock(mu_);
      sessions_[id] = session;
    }
    out[id] = same;
  }
  return out;
}

namespace {

void send_json(httplib::Response& res, int status, const nlohmann::json& body) {
  res.status = status;
  res.set_content(body.dump(), "application/json");
}

void send_error(httplib::Response& res, int status, const std::string& message) {
  send_json(res, status, {{"error", message}});
}

template <typename Fn>
void guarded(httplib::Response& res, Fn&& fn) {
  try {
    fn();
  } catch (const SessionNotFound& e) {
    send_error(res, 404, e.what());
  } catch (const ModelNotFound& e) {
    send_error(res, 404, e.what());
  } catch (const nlohmann::json::exception& e) {
    send_error(res, 400, std::string("bad request: ") + e.what());
  } catch (const std::invalid_argument& e) {
    send_error(res, 400, e.what());
  } catch (const std::exception& e) {
    send_error(res, 500, e.what());
  }
}

nlohmann::json body_json(const httplib::Request& req) {
  if (req.body.empty()) return nlohmann::json::object();
  auto j = nlohmann::json::parse(req.body);
  if (!j.is_object()) throw std::invalid_argument("request body must be a JSON object");
  return j;
}

}  // namespace

void mount_routes(httplib::Server& server, Engine& engine) {
  server.set_default_headers({{"Access-Control-Allow-Origin", "*"}});
  server.Options(R"(/api/.*)", [](const httplib::Request&, httplib::Response& res) {
    res.set_header("Access-Control-Allow-Methods", "GET, POST, DELETE, OPTIONS");
    res.set_header("Access-Control-Allow-Headers", "Content-Type");
    res.status = 204;
  });
  server.Get("/api/health", [&engine](const httplib::Request&, httplib::Response& res) {
    send_json(res, 200, {{"status", "ok"}, {"model", engine.options().model_id}, {"sessions", engine.size()}});
  });
  server.Post("/api/sessions", [&engine](const httplib::Request& req, httplib::Response& res) {
    guarded(res, [&] {
      const auto body = body_json(req);
      std::optional<std::uint64_t> seed;
      if (body.contains("seed")) seed = body.at("seed").get<std::uint64_t>();
      auto s = engine.create_session(seed, body.value("model", std::string{}));
      send_json(res, 201, {{"id", s->id()}, {"seed", s->seed()}, {"t", 0}});
    });
  });
  server.Post("/api/sessions/:id/turns", [&engine](const httplib::Request& req, httplib::Response& res) {
    guarded(res, [&] {
      const auto body = body_json(req);
      const auto text = body.value("text", std::string{});
      send_json(res, 200, engine.handle_turn(req.path_params.at("id"), text));
    });
  });
  server.Get("/api/sessions/:id/state", [&engine](const httplib::Request& req, httplib::Response& res) {
    guarded(res, [&] { send_json(res, 200, engine.find(req.path_params.at("id"))->state()); });
  });
  server.Delete("/api/sessions/:id", [&engine](const httplib::Request& req, httplib::Response& res) {
    guarded(res, [&] {
      if (!engine.remove(req.path_params.at("id"))) throw SessionNotFound("unknown session");
      res.status = 204;
    });
  });
}

}  // namespace ndm
