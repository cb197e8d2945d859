#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <functional>
#include <random>
#include <stdexcept>
#include <string>
#include <vector>

#include <json.hpp>

#include "ndm/belief.hpp"
#include "ndm/corpus.hpp"
#include "ndm/ontology.hpp"
#include "ndm/tensor.hpp"

namespace ndm {

/// A completed hypothesis. `tokens` ends with the end-of-sentence id.
struct Candidate {
  std::vector<std::size_t> tokens;
  double logprob = 0.0;
  double lm_logprob = 0.0;
  double reward = 0.0;
  double score = 0.0;

  /// Average token log-probability; the length counts the end token.
  double average() const { return tokens.empty() ? 0.0 : logprob / static_cast<double>(tokens.size()); }
};

struct BeamOptions {
  std::size_t width = 10;
  std::size_t n_best = 5;
  std::size_t max_length = 40;
  std::size_t eos = Vocabulary::kEos;
  /// Token ids never generated.
  std::vector<std::size_t> banned;
};

/// Higher score first; equal scores fall back to lexicographic token ids.
inline bool candidate_before(double sa, const std::vector<std::size_t>& a, double sb,
                             const std::vector<std::size_t>& b) {
  if (sa != sb) return sa > sb;
  return a < b;
}

/// Beam search over a step function returning log-probabilities of the next
/// token. Each step keeps the `width` best expansions by cumulative
/// log-probability; expansions ending in eos move to the finished list, which
/// stops the search once it holds `n_best` entries or the beam empties. At
/// the final allowed position only eos may be chosen, so every hypothesis
/// terminates. Finished hypotheses are ranked by average log-probability.
template <typename State>
std::vector<Candidate> beam_search(
    const State& initial, std::size_t bos,
    const std::function<std::vector<double>(const State&, std::size_t word, State& next)>& step,
    const BeamOptions& opt) {
  if (opt.width == 0) throw std::invalid_argument("beam width must be at least 1");
  if (opt.max_length == 0) throw std::invalid_argument("length cap must be at least 1");
  struct Hyp {
    std::vector<std::size_t> tokens;
    double logprob;
    State state;
  };
  struct Expansion {
    std::size_t hyp;
    std::size_t word;
    double logprob;
    std::vector<std::size_t> tokens;
  };
  std::vector<Hyp> beam{{{}, 0.0, initial}};
  std::vector<Candidate> finished;
  for (std::size_t pos = 0; pos < opt.max_length && !beam.empty(); ++pos) {
    const bool last = pos + 1 == opt.max_length;
    std::vector<Expansion> ex;
    std::vector<State> next_states(beam.size());
    for (std::size_t h = 0; h < beam.size(); ++h) {
      const std::size_t word = beam[h].tokens.empty() ? bos : beam[h].tokens.back();
      const auto lp = step(beam[h].state, word, next_states[h]);
      for (std::size_t w = 0; w < lp.size(); ++w) {
        if (last && w != opt.eos) continue;
        if (std::find(opt.banned.begin(), opt.banned.end(), w) != opt.banned.end()) continue;
        auto toks = beam[h].tokens;
        toks.push_back(w);
        ex.push_back({h, w, beam[h].logprob + lp[w], std::move(toks)});
      }
    }
    const std::size_t keep = std::min(opt.width, ex.size());
    std::partial_sort(ex.begin(), ex.begin() + static_cast<std::ptrdiff_t>(keep), ex.end(),
                      [](const Expansion& a, const Expansion& b) {
                        return candidate_before(a.logprob, a.tokens, b.logprob, b.tokens);
                      });
    std::vector<Hyp> next;
    for (std::size_t k = 0; k < keep; ++k) {
      auto& e = ex[k];
      if (e.word == opt.eos) {
        Candidate c;
        c.tokens = std::move(e.tokens);
        c.logprob = e.logprob;
        c.score = c.average();
        finished.push_back(std::move(c));
      } else {
        next.push_back({std::move(e.tokens), e.logprob, next_states[e.hyp]});
      }
    }
    beam = std::move(next);
    if (finished.size() >= opt.n_best) break;
  }
  std::stable_sort(finished.begin(), finished.end(), [](const Candidate& a, const Candidate& b) {
    return candidate_before(a.average(), a.tokens, b.average(), b.tokens);
  });
  return finished;
}

/// Reward for one delexicalised token class under one tracker condition.
struct RewardCell {
  double observed = 0.0;
  double not_observed = 0.0;
};

/// R_t table: token class x tracker condition. Defaults reproduce the
/// published values.
struct RewardConfig {
  RewardCell informable_slot{0.0, 0.0};
  RewardCell informable_value{0.05, -0.5};
  RewardCell requestable_slot{0.2, 0.0};
  RewardCell requestable_value{0.2, 0.0};

  nlohmann::json to_json() const;
  static RewardConfig from_json(const nlohmann::json& j);
  static RewardConfig load(const std::string& path);
};

/// Sum of table entries over the candidate's generic tokens. An informable
/// slot is observed when its argmax is a concrete value; a requestable slot
/// when p_requested > 0.5. Slots that are both informable and requestable
/// collect both rewards.
double response_reward(const std::vector<std::string>& tokens, const BeliefState& belief, const Ontology& ontology,
                       const RewardConfig& cfg);

/// score = logprob/J - lambda * lm_logprob/J + gamma * R. Fills the
/// candidate's lm_logprob, reward and score fields. `lm` returns
/// log p_LM(tokens) and is skipped when lambda is 0.
double score_weighted(Candidate& cand, double lambda, double gamma,
                      const std::function<double(const std::vector<std::size_t>&)>& lm, const RewardConfig& reward,
                      const BeliefState& belief, const Ontology& ontology, const Vocabulary& vocab);

/// Stable reorder by `score` (ties by token ids).
void rank_by_score(std::vector<Candidate>& cands);

/// Evaluation mode returns the top candidate; otherwise a uniform draw among
/// the (up to) n best.
const Candidate& sample_response(const std::vector<Candidate>& cands, std::mt19937_64& rng, bool evaluation,
                                 std::size_t n = 5);

/// Skeletal tokens of a candidate without the end token.
std::vector<std::string> candidate_tokens(const Candidate& c, const Vocabulary& vocab);

}  // namespace ndm
