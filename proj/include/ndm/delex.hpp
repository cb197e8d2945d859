#pragma once

#include <cstddef>
#include <optional>
#include <random>
#include <string>
#include <vector>

#include "ndm/ontology.hpp"

namespace ndm {

/// Lowercases and splits on whitespace; the characters . , ! ? ; : " ( )
/// become tokens of their own. Generic tokens such as <v.food> stay whole.
std::vector<std::string> tokenize(const std::string& text);
std::string join_tokens(const std::vector<std::string>& tokens);

std::string value_token(const std::string& slot);  // <v.slot>
std::string slot_token(const std::string& slot);   // <s.slot>
inline const std::string kDontCareToken = "<dontcare>";

enum class MatchKind { Value, SlotName, DontCare };

struct GenericToken {
  MatchKind kind;
  std::string slot;  // empty for DontCare
};
/// Parses <v.x>, <s.x> and <dontcare>.
std::optional<GenericToken> parse_generic(const std::string& token);

struct Match {
  std::string slot;   // empty for dontcare mentions
  std::string value;  // empty for slot-name mentions and re-delexicalised tokens
  MatchKind kind = MatchKind::Value;
  std::size_t index = 0;

  bool operator==(const Match&) const = default;
};

struct DelexUtterance {
  std::vector<std::string> tokens;
  std::vector<Match> matches;
};

/// Surface-form lexicon compiled from the ontology and, optionally, the
/// database attribute values of requestable slots that are not informable
/// (names, addresses, phone numbers, postcodes).
class Lexicon {
 public:
  Lexicon(const Ontology& ontology, const Database* db = nullptr);

  struct Entry {
    std::vector<std::string> form;
    MatchKind kind;
    std::string slot;
    std::string value;
    std::size_t order;
  };

  const std::vector<Entry>& entries() const { return entries_; }
  /// True when `token` on its own is a complete surface form.
  bool is_surface_token(const std::string& token) const;

  /// Longest-match replacement; ties go to the earlier declaration.
  DelexUtterance delexicalise(const std::string& text) const;
  DelexUtterance delexicalise_tokens(const std::vector<std::string>& tokens) const;

 private:
  std::vector<Entry> entries_;
};

/// Convenience wrapper: lexicon from the ontology alone.
DelexUtterance delexicalise(const std::string& text, const Ontology& ontology);

/// Replaces <v.slot> by the entity's attribute and <s.slot> (and <dontcare>)
/// by a uniformly sampled surface form. Throws "no entity selected" when a
/// value token needs an absent entity, unless `unresolved` is given, in which
/// case the literal token is kept and *unresolved is set.
std::string lexicalise(const std::vector<std::string>& skeletal, const Entity* entity, const Ontology& ontology,
                       std::mt19937_64& rng, bool* unresolved = nullptr);

}  // namespace ndm
