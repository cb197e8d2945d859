#pragma once

#include <cstddef>
#include <optional>
#include <random>
#include <string>
#include <vector>

#include <json.hpp>

#include "ndm/decoder.hpp"
#include "ndm/model.hpp"

namespace ndm {

/// Longest user turn accepted by the engine, in tokens.
inline constexpr std::size_t kMaxUserTokens = 200;

/// Decoding settings for one turn.
struct DecodeOptions {
  /// Top candidate instead of sampling among the n best.
  bool evaluation = true;
  /// "ml" or "weighted"; empty means the model configuration.
  std::string decoding;
  RewardConfig reward;
};

/// Everything carried from one turn to the next.
struct TurnState {
  BeliefState belief;
  DbState db;
  /// Previous machine turn as read by the trackers (text, lexicalised).
  std::string machine;
  std::size_t t = 0;

  static TurnState initial(const Model& model);
};

struct TurnResult {
  std::string response;
  std::vector<std::string> skeletal;
  std::vector<std::string> user_delex;
  /// Completed candidates in final ranking order.
  std::vector<Candidate> candidates;
  std::size_t chosen = 0;
  BeliefState belief;
  SummaryBelief summary;
  DbBins bins{};
  std::optional<std::size_t> pointer;
  /// o_t, or the first-step conditioning vector when attention is on.
  std::vector<float> action;
  /// A value token had no entity to draw from and was left literal.
  bool unresolved = false;
};

/// Everything needed to run turns over a trained model. The model is read
/// only; concurrent calls on distinct TurnStates are safe.
struct Pipeline {
  const Model& model;
  const Database& db;
  Lexicon lexicon;

  Pipeline(const Model& m, const Database& d) : model(m), db(d), lexicon(m.ontology, &d) {}

  /// delexicalise -> trackers -> DB -> intent -> policy -> beam -> rerank ->
  /// choose -> lexicalise. `machine_override` replaces the machine turn the
  /// trackers read (evaluation feeds the reference turn). Throws
  /// std::invalid_argument for user turns over kMaxUserTokens.
  TurnResult run_turn(TurnState& state, const std::string& user, std::mt19937_64& rng, const DecodeOptions& opt,
                      const std::string* machine_override = nullptr) const;

  /// Beam candidates for a fixed belief/DB context (no state change).
  std::vector<Candidate> decode(const std::vector<std::size_t>& user_ids, const BeliefState& belief,
                                const DbBins& bins, std::vector<float>* action) const;
};

nlohmann::json bins_json(const DbBins& bins);

}  // namespace ndm
