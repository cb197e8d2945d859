#pragma once

#include <cstddef>
#include <cstdint>
#include <map>
#include <set>
#include <stdexcept>
#include <string>
#include <unordered_map>
#include <vector>

#include <json.hpp>

#include "ndm/delex.hpp"
#include "ndm/ontology.hpp"

namespace ndm {

struct CorpusError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct TurnLabels {
  /// Every informable slot -> concrete value, "dontcare" or "none".
  std::map<std::string, std::string> informable;
  /// Requestable slots asked for in this turn.
  std::set<std::string> requested;
};

struct Turn {
  std::string user;
  std::string machine;
  /// Delexicalised machine response (the generation target).
  std::vector<std::string> machine_delex;
  TurnLabels labels;
};

struct Goal {
  /// Informable constraints; "dontcare" is allowed and never filters.
  std::map<std::string, std::string> constraints;
  std::set<std::string> requests;
};

struct Dialogue {
  std::string id;
  bool finished = true;
  Goal goal;
  std::vector<Turn> turns;
};

/// Corpus file: JSON array of
///   {"id", "finished", "goal": {"constraints": {slot: value}, "requests": [slot]},
///    "turns": [{"user", "machine", "machine_delex": "space separated tokens",
///               "labels": {"informable": {slot: value|dontcare|none},
///                          "requestable": [slot]}}]}
nlohmann::json corpus_to_json(const std::vector<Dialogue>& dialogues);
/// Validates against the ontology; CorpusError names the dialogue, turn and slot.
std::vector<Dialogue> corpus_from_json(const nlohmann::json& j, const Ontology& ontology);
std::vector<Dialogue> load_corpus(const std::string& path, const Ontology& ontology);
void save_corpus(const std::string& path, const std::vector<Dialogue>& dialogues);

/// Converts the public CamRest676-style layout ({"dial": [{"usr": {"transcript",
/// "slu"}, "sys": {"sent"}}], "goal": {"constraints", "request-slots"}, "finished"})
/// into the corpus schema. Machine turns are delexicalised with `lexicon`.
std::vector<Dialogue> convert_camrest(const nlohmann::json& j, const Ontology& ontology, const Lexicon& lexicon);

struct Split {
  std::vector<Dialogue> train;
  std::vector<Dialogue> valid;
  std::vector<Dialogue> test;
};

/// Seeded 3:1:1 partition by dialogue: valid and test get floor(n/5) each.
Split split_corpus(const std::vector<Dialogue>& dialogues, std::uint64_t seed);

class Vocabulary {
 public:
  static constexpr std::size_t kUnk = 0;
  static constexpr std::size_t kBos = 1;
  static constexpr std::size_t kEos = 2;
  static constexpr std::size_t kNull = 3;
  static const std::vector<std::string>& specials();

  Vocabulary();
  explicit Vocabulary(std::vector<std::string> tokens);

  std::size_t size() const { return tokens_.size(); }
  std::size_t id(const std::string& token) const;
  bool contains(const std::string& token) const { return index_.count(token) != 0; }
  const std::string& token(std::size_t id) const { return tokens_.at(id); }
  const std::vector<std::string>& tokens() const { return tokens_; }
  std::vector<std::size_t> encode(const std::vector<std::string>& tokens) const;

  void add(const std::string& token);

 private:
  std::vector<std::string> tokens_;
  std::unordered_map<std::string, std::size_t> index_;
};

/// Generic tokens every model vocabulary carries (<v.*>, <s.*>, <dontcare>).
std::vector<std::string> generic_tokens(const Ontology& ontology);

/// Specials, then generic tokens, then corpus tokens seen at least
/// `min_count` times in delexicalised user and machine turns (by descending
/// count, then alphabetically). Raw tokens that are themselves surface forms
/// are dropped.
Vocabulary build_vocab(const std::vector<Dialogue>& train, const Lexicon& lexicon, const Ontology& ontology,
                       std::size_t min_count = 2);

/// Template-grammar dialogues with labels and goals known by construction.
/// Covers greeting, constraint, offer, request (explicit and implicit "yes"),
/// no-match and unfinished flows.
std::vector<Dialogue> generate_synthetic(const Ontology& ontology, const Database& db, std::size_t n_dialogues,
                                         std::uint64_t seed);

}  // namespace ndm
