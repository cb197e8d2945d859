#include "ndm/tracker.hpp"

#include <stdexcept>

namespace ndm {

TurnInput prepare_turn(const Lexicon& lexicon, const Vocabulary& vocab, const std::string& text, bool null_if_empty) {
  auto du = lexicon.delexicalise(text);
  TurnInput t;
  if (du.tokens.empty()) {
    if (null_if_empty) t.ids.push_back(Vocabulary::kNull);
    return t;
  }
  t.ids = vocab.encode(du.tokens);
  t.matches = std::move(du.matches);
  return t;
}

MentionPositions mention_positions(const std::vector<Match>& matches, const std::string& slot,
                                   const std::vector<std::string>& values) {
  MentionPositions m;
  m.values.resize(values.size() + 1);
  for (const auto& x : matches) {
    switch (x.kind) {
      case MatchKind::SlotName:
        if (x.slot == slot) m.slot.push_back(x.index);
        break;
      case MatchKind::DontCare:
        m.values.back().push_back(x.index);
        break;
      case MatchKind::Value:
        if (x.slot != slot) break;
        m.any_value.push_back(x.index);
        for (std::size_t v = 0; v < values.size(); ++v) {
          if (values[v] == x.value) m.values[v].push_back(x.index);
        }
        break;
    }
  }
  return m;
}

std::string informable_key(const std::string& slot) { return "trk.inf." + slot; }
std::string requestable_key(const std::string& slot) { return "trk.req." + slot; }

TrackerTargets tracker_targets(const TurnLabels& labels, const Ontology& ontology) {
  TrackerTargets t;
  for (std::size_t s = 0; s < ontology.informable().size(); ++s) {
    const auto& slot = ontology.informable()[s];
    auto it = labels.informable.find(slot.name);
    if (it == labels.informable.end()) throw std::invalid_argument("missing tracker label for slot " + slot.name);
    const std::size_t n = slot.values.size();
    if (it->second == kNotMentioned) {
      t.informable.push_back(BeliefState::none_index(n));
    } else if (it->second == kDontCare) {
      t.informable.push_back(BeliefState::dontcare_index(n));
    } else {
      auto v = ontology.value_index(s, it->second);
      if (!v) throw std::invalid_argument("label value '" + it->second + "' outside ontology for slot " + slot.name);
      t.informable.push_back(*v);
    }
  }
  for (const auto& r : ontology.requestable()) t.requested.push_back(labels.requested.count(r) ? 1 : 0);
  return t;
}

PreparedDialogue prepare_dialogue(const Dialogue& d, const Lexicon& lexicon, const Vocabulary& vocab,
                                  const Ontology& ontology) {
  PreparedDialogue p;
  for (const auto& t : d.turns) {
    p.user.push_back(prepare_turn(lexicon, vocab, t.user, true));
    p.machine.push_back(prepare_turn(lexicon, vocab, t.machine.empty() ? join_tokens(t.machine_delex) : t.machine, false));
    p.targets.push_back(tracker_targets(t.labels, ontology));
    p.response.push_back(vocab.encode(t.machine_delex));
  }
  return p;
}

}  // namespace ndm
