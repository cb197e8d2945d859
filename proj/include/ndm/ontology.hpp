#pragma once

#include <array>
#include <cstddef>
#include <cstdint>
#include <map>
#include <optional>
#include <random>
#include <string>
#include <vector>

#include <json.hpp>

#include "ndm/parallel.hpp"

namespace ndm {

inline constexpr const char* kDontCare = "dontcare";
inline constexpr const char* kNotMentioned = "none";

/// Lowercases and trims surrounding whitespace.
std::string normalize(const std::string& s);

struct InformableSlot {
  std::string name;
  std::vector<std::string> values;
};

/// Slots, value sets and surface-form lexicon of a domain.
///
/// JSON form: {"informable": {slot: [values]}, "requestable": [slots],
/// "surface_forms": {key: [strings]}} where a key is a slot name, "slot=value",
/// or "dontcare". Values without an entry are realised by their own string.
/// Informable slots keep their JSON declaration order.
class Ontology {
 public:
  static Ontology from_json(const nlohmann::ordered_json& j);
  static Ontology load(const std::string& path);
  nlohmann::ordered_json to_json() const;

  const std::vector<InformableSlot>& informable() const { return informable_; }
  const std::vector<std::string>& requestable() const { return requestable_; }

  std::optional<std::size_t> informable_index(const std::string& slot) const;
  std::optional<std::size_t> requestable_index(const std::string& slot) const;
  std::optional<std::size_t> value_index(std::size_t slot, const std::string& value) const;
  bool is_informable(const std::string& slot) const { return informable_index(slot).has_value(); }
  bool is_requestable(const std::string& slot) const { return requestable_index(slot).has_value(); }

  /// Surface forms of a slot name; empty when none are declared.
  std::vector<std::string> slot_forms(const std::string& slot) const;
  /// Surface forms of a value (always at least the value itself).
  std::vector<std::string> value_forms(const std::string& slot, const std::string& value) const;
  std::vector<std::string> dontcare_forms() const;

  /// Every slot name that appears as informable or requestable, informable
  /// first, in declaration order, without duplicates.
  std::vector<std::string> all_slots() const;

 private:
  std::vector<InformableSlot> informable_;
  std::vector<std::string> requestable_;
  std::map<std::string, std::vector<std::string>> surface_forms_;
};

using Entity = std::map<std::string, std::string>;

class Database {
 public:
  Database() = default;
  /// Validates informable attributes against the ontology.
  static Database from_json(const nlohmann::json& j, const Ontology& ontology);
  static Database load(const std::string& path, const Ontology& ontology);
  nlohmann::json to_json() const;

  std::size_t size() const { return entities_.size(); }
  const Entity& operator[](std::size_t i) const { return entities_[i]; }
  const std::vector<Entity>& entities() const { return entities_; }
  /// Entity attribute, or empty string.
  std::string attribute(std::size_t i, const std::string& slot) const;

 private:
  std::vector<Entity> entities_;
};

/// Informable slot -> required value.
using DbQuery = std::map<std::string, std::string>;
/// One-hot match-count bins for {0, 1, 2, 3, 4, >=5} matches.
using DbBins = std::array<int, 6>;

struct DbState {
  std::vector<std::uint8_t> truth;
  std::optional<std::size_t> pointer;
  DbBins bins{1, 0, 0, 0, 0, 0};
};

struct BeliefState;

/// Argmax over each informable slot's full distribution; only slots whose
/// argmax is a concrete value become constraints.
DbQuery form_query(const BeliefState& belief, const Ontology& ontology);

/// Entity i gets 1 iff it agrees with every constraint. Throws
/// std::invalid_argument("query outside ontology") for unknown slots/values.
std::vector<std::uint8_t> apply_query(const Database& db, const Ontology& ontology, const DbQuery& q,
                                      ExecPolicy policy = ExecPolicy::Serial);

DbBins compress_count(const std::vector<std::uint8_t>& truth);
std::size_t bin_index(std::size_t count);

/// Keeps the pointer while its entity still matches, else draws uniformly
/// among matching entities; absent when nothing matches.
DbState update_pointer(const DbState& state, const std::vector<std::uint8_t>& truth, std::mt19937_64& rng);

}  // namespace ndm
