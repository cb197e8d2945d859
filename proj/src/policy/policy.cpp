#include "ndm/policy.hpp"

namespace ndm {

std::vector<double> SummaryBelief::flat() const {
  std::vector<double> out;
  for (const auto& s : slots) out.insert(out.end(), s.begin(), s.end());
  return out;
}

SummaryBelief summarize_belief(const BeliefState& belief) {
  SummaryBelief out;
  for (const auto& p : belief.informable) {
    const std::size_t n = p.size() - 2;
    double mass = 0.0;
    for (std::size_t v = 0; v < n; ++v) mass += p[v];
    out.slots.push_back({mass, p[BeliefState::dontcare_index(n)], p[BeliefState::none_index(n)]});
  }
  for (double r : belief.requestable) out.slots.push_back({r, 1.0 - r});
  return out;
}

std::size_t summary_size(const Ontology& ontology, bool requestable) {
  return 3 * ontology.informable().size() + (requestable ? 2 * ontology.requestable().size() : 0);
}

std::size_t summary_slots(const Ontology& ontology, bool requestable) {
  return ontology.informable().size() + (requestable ? ontology.requestable().size() : 0);
}

}  // namespace ndm
