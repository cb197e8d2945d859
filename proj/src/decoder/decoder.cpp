#include "ndm/decoder.hpp"

#include <fstream>

#include "ndm/delex.hpp"

namespace ndm {
namespace {

nlohmann::json cell_json(const RewardCell& c) { return {{"observed", c.observed}, {"not_observed", c.not_observed}}; }

void read_cell(const nlohmann::json& j, const char* key, RewardCell& c) {
  if (!j.contains(key)) return;
  const auto& v = j.at(key);
  c.observed = v.value("observed", c.observed);
  c.not_observed = v.value("not_observed", c.not_observed);
}

}  // namespace

nlohmann::json RewardConfig::to_json() const {
  return {{"informable_slot", cell_json(informable_slot)},
          {"informable_value", cell_json(informable_value)},
          {"requestable_slot", cell_json(requestable_slot)},
          {"requestable_value", cell_json(requestable_value)}};
}

RewardConfig RewardConfig::from_json(const nlohmann::json& j) {
  RewardConfig r;
  for (const auto& [k, v] : j.items()) {
    if (k != "informable_slot" && k != "informable_value" && k != "requestable_slot" && k != "requestable_value") {
      throw std::invalid_argument("unknown reward row: " + k);
    }
  }
  read_cell(j, "informable_slot", r.informable_slot);
  read_cell(j, "informable_value", r.informable_value);
  read_cell(j, "requestable_slot", r.requestable_slot);
  read_cell(j, "requestable_value", r.requestable_value);
  return r;
}

RewardConfig RewardConfig::load(const std::string& path) {
  std::ifstream f(path);
  if (!f) throw std::runtime_error("cannot read reward table " + path);
  return from_json(nlohmann::json::parse(f));
}

double response_reward(const std::vector<std::string>& tokens, const BeliefState& belief, const Ontology& ontology,
                       const RewardConfig& cfg) {
  double r = 0.0;
  for (const auto& tok : tokens) {
    auto g = parse_generic(tok);
    if (!g || g->kind == MatchKind::DontCare) continue;
    const bool value = g->kind == MatchKind::Value;
    if (auto s = ontology.informable_index(g->slot)) {
      const bool observed = belief.status(*s) == SlotStatus::Value;
      const auto& cell = value ? cfg.informable_value : cfg.informable_slot;
      r += observed ? cell.observed : cell.not_observed;
    }
    if (auto q = ontology.requestable_index(g->slot)) {
      const bool observed = belief.requested(*q);
      const auto& cell = value ? cfg.requestable_value : cfg.requestable_slot;
      r += observed ? cell.observed : cell.not_observed;
    }
  }
  return r;
}

std::vector<std::string> candidate_tokens(const Candidate& c, const Vocabulary& vocab) {
  std::vector<std::string> out;
  for (auto id : c.tokens) {
    if (id == Vocabulary::kEos) break;
    out.push_back(vocab.token(id));
  }
  return out;
}

double score_weighted(Candidate& cand, double lambda, double gamma,
                      const std::function<double(const std::vector<std::size_t>&)>& lm, const RewardConfig& reward,
                      const BeliefState& belief, const Ontology& ontology, const Vocabulary& vocab) {
  if (lambda < 0 || gamma < 0) throw std::invalid_argument("lambda and gamma must be non-negative");
  const double J = static_cast<double>(std::max<std::size_t>(cand.tokens.size(), 1));
  cand.lm_logprob = lambda != 0.0 && lm ? lm(cand.tokens) : 0.0;
  cand.reward = response_reward(candidate_tokens(cand, vocab), belief, ontology, reward);
  cand.score = cand.logprob / J - lambda * cand.lm_logprob / J + gamma * cand.reward;
  return cand.score;
}

void rank_by_score(std::vector<Candidate>& cands) {
  std::stable_sort(cands.begin(), cands.end(), [](const Candidate& a, const Candidate& b) {
    return candidate_before(a.score, a.tokens, b.score, b.tokens);
  });
}

const Candidate& sample_response(const std::vector<Candidate>& cands, std::mt19937_64& rng, bool evaluation,
                                 std::size_t n) {
  if (cands.empty()) throw std::runtime_error("decoding produced nothing");
  if (evaluation) return cands.front();
  const std::size_t k = std::min(std::max<std::size_t>(n, 1), cands.size());
  return cands[std::uniform_int_distribution<std::size_t>(0, k - 1)(rng)];
}

}  // namespace ndm
