#pragma once

#include <cstdint>
#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <random>
#include <stdexcept>
#include <string>
#include <vector>

#include <json.hpp>

#include "ndm/pipeline.hpp"

namespace httplib {
class Server;
}

namespace ndm {

struct SessionNotFound : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct ModelNotFound : std::runtime_error {
  using std::runtime_error::runtime_error;
};

/// One live conversation. Turns are serialised by a per-session mutex; a
/// second caller waits for the first to finish.
class Session {
 public:
  Session(std::string id, const Pipeline& pipeline, std::uint64_t seed, DecodeOptions decode);

  const std::string& id() const { return id_; }
  std::uint64_t seed() const { return seed_; }

  /// Runs one user turn and returns the turn result JSON: response,
  /// skeletal tokens, belief snapshot, bins and pointer entity.
  nlohmann::json handle_turn(const std::string& text);
  /// Snapshot of the state left by the most recent turn.
  nlohmann::json state() const;
  std::size_t turn() const;
  /// Raw and delexicalised turns so far.
  nlohmann::json transcript() const;

 private:
  nlohmann::json snapshot_locked() const;

  std::string id_;
  const Pipeline& pipeline_;
  std::uint64_t seed_;
  DecodeOptions decode_;
  mutable std::mutex mu_;
  std::mt19937_64 rng_;
  TurnState state_;
  nlohmann::json transcript_ = nlohmann::json::array();
};

struct EngineOptions {
  std::string model_id = "default";
  DecodeOptions decode{false, "", {}};
  /// Append-only JSON-lines log of every turn; disabled when empty.
  std::string transcript_path;
};

/// Sessions over one frozen model.
class Engine {
 public:
  Engine(const Model& model, const Database& db, EngineOptions opt = {});

  const Pipeline& pipeline() const { return pipeline_; }
  const EngineOptions& options() const { return opt_; }

  /// Throws ModelNotFound when `model_id` names another model.
  std::shared_ptr<Session> create_session(std::optional<std::uint64_t> seed = std::nullopt,
                                          const std::string& model_id = "");
  std::shared_ptr<Session> find(const std::string& id) const;
  bool remove(const std::string& id);
  std::size_t size() const;

  /// Session turn with the transcript log written under the same lock.
  nlohmann::json handle_turn(const std::string& id, const std::string& text);

  /// Rebuilds sessions from a transcript log by replaying each session's
  /// user turns with its stored seed. Returns, per session, whether every
  /// regenerated response equals the logged one.
  std::map<std::string, bool> replay(const std::string& transcript_path);

 private:
  Pipeline pipeline_;
  EngineOptions opt_;
  mutable std::mutex mu_;
  std::mutex log_mu_;
  std::map<std::string, std::shared_ptr<Session>> sessions_;
  std::mt19937_64 ids_;
  std::uint64_t counter_ = 0;
};

/// REST routes:
///   POST   /api/sessions              {"seed"?, "model"?}      -> 201 {"id", "seed", "t"}
///   POST   /api/sessions/{id}/turns   {"text"}                 -> 200 turn result
///   GET    /api/sessions/{id}/state                            -> 200 snapshot
///   DELETE /api/sessions/{id}                                  -> 204
///   GET    /api/health                                         -> 200 {"status": "ok", ...}
/// Errors are {"error": message} with 400 (bad request), 404 (unknown
/// session or model) or 500.
void mount_routes(httplib::Server& server, Engine& engine);

}  // namespace ndm
