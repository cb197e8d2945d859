#pragma once

#include <cstddef>
#include <vector>

#include <json.hpp>

#include "ndm/ontology.hpp"

namespace ndm {

enum class SlotStatus { Value, DontCare, NotMentioned };

/// Per-slot tracker outputs for one turn.
///
/// informable[s] has |V_s| + 2 entries: the slot's values in ontology order,
/// then dontcare, then not-mentioned. requestable[r] is the probability that
/// requestable slot r was asked for this turn; it is empty when the
/// requestable trackers are disabled.
struct BeliefState {
  std::vector<std::vector<double>> informable;
  std::vector<double> requestable;

  /// Fresh dialogue: all mass on not-mentioned, nothing requested.
  static BeliefState initial(const Ontology& ontology, bool with_requestable);

  static std::size_t dontcare_index(std::size_t n_values) { return n_values; }
  static std::size_t none_index(std::size_t n_values) { return n_values + 1; }

  /// Index of the largest entry; ties go to the later index.
  std::size_t argmax(std::size_t slot) const;
  SlotStatus status(std::size_t slot) const;
  bool requested(std::size_t slot, double threshold = 0.5) const {
    return slot < requestable.size() && requestable[slot] > threshold;
  }

  nlohmann::json to_json(const Ontology& ontology) const;
};

}  // namespace ndm
