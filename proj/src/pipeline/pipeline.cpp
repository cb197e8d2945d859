#include "ndm/pipeline.hpp"

#include <stdexcept>

namespace ndm {
namespace {

// Graph construction takes parameters by non-const reference so that the
// recording path can accumulate gradients. Evaluation graphs never write.
ParameterStore<float>& frozen(const Model& m) { return const_cast<ParameterStore<float>&>(m.params); }

std::vector<double> log_softmax(const std::vector<float>& logits) {
  const auto p = Graph<float>::softmax_values(logits);
  std::vector<double> out(p.size());
  for (std::size_t i = 0; i < p.size(); ++i) out[i] = std::log(std::max(static_cast<double>(p[i]), 1e-30));
  return out;
}

}  // namespace

TurnState TurnState::initial(const Model& model) {
  TurnState s;
  s.belief = BeliefState::initial(model.ontology, model.cfg.requestable);
  return s;
}

nlohmann::json bins_json(const DbBins& bins) { return std::vector<int>(bins.begin(), bins.end()); }

std::vector<Candidate> Pipeline::decode(const std::vector<std::size_t>& user_ids, const BeliefState& belief,
                                        const DbBins& bins, std::vector<float>* action) const {
  auto& ps = frozen(model);
  const auto& cfg = model.cfg;
  Graph<float> g(false);
  Var z = encode_intent(g, ps, cfg, user_ids);
  auto ctx = make_context(g, ps, cfg, z, summarize_belief(belief), bins);
  Lstm<float> cell(ps, "gen.lstm");
  const auto start = cell.initial(g);
  if (action) {
    Var o = conditioning(g, ps, ctx, g.row(ps.get("gen.emb"), Vocabulary::kBos), start.h);
    *action = g.value(o);
  }
  BeamOptions bo;
  bo.width = cfg.beam_width;
  bo.n_best = cfg.n_best;
  bo.max_length = cfg.max_length;
  bo.banned = {Vocabulary::kUnk, Vocabulary::kBos, Vocabulary::kNull};
  std::function<std::vector<double>(const LstmState<float>&, std::size_t, LstmState<float>&)> step =
      [&](const LstmState<float>& s, std::size_t word, LstmState<float>& next) {
        auto out = decode_step(g, ps, ctx, word, s);
        next = out.state;
        return log_softmax(g.value(out.logits));
      };
  return beam_search<LstmState<float>>(start, Vocabulary::kBos, step, bo);
}

TurnResult Pipeline::run_turn(TurnState& state, const std::string& user, std::mt19937_64& rng,
                              const DecodeOptions& opt, const std::string* machine_override) const {
  if (tokenize(user).size() > kMaxUserTokens) throw std::invalid_argument("user turn longer than 200 tokens");
  auto& ps = frozen(model);
  const auto& cfg = model.cfg;
  TurnResult r;

  const TurnInput u = prepare_turn(lexicon, model.vocab, user, true);
  r.user_delex = lexicon.delexicalise(user).tokens;
  if (r.user_delex.empty()) r.user_delex = {model.vocab.token(Vocabulary::kNull)};

  const std::string& machine_text = machine_override ? *machine_override : state.machine;
  std::optional<TurnInput> m;
  if (state.t > 0) m = prepare_turn(lexicon, model.vocab, machine_text, false);
  r.belief = track_turn(ps, model.ontology, cfg, u, m ? &*m : nullptr, state.belief);

  const auto truth = apply_query(db, model.ontology, form_query(r.belief, model.ontology));
  const DbState dbs = update_pointer(state.db, truth, rng);
  r.bins = dbs.bins;
  r.pointer = dbs.pointer;
  r.summary = summarize_belief(r.belief);

  r.candidates = decode(u.ids, r.belief, r.bins, &r.action);
  const std::string mode = opt.decoding.empty() ? cfg.decoding : opt.decoding;
  if (mode == "weighted") {
    const std::function<double(const std::vector<std::size_t>&)> lm = [&](const std::vector<std::size_t>& toks) {
      return lm_logprob(ps, toks);
    };
    for (auto& c : r.candidates) {
      score_weighted(c, cfg.lambda, cfg.gamma, lm, opt.reward, r.belief, model.ontology, model.vocab);
    }
    rank_by_score(r.candidates);
  } else if (mode != "ml") {
    throw std::invalid_argument("unknown decoding strategy: " + mode);
  }
  const Candidate& pick = sample_response(r.candidates, rng, opt.evaluation, cfg.n_best);
  r.chosen = static_cast<std::size_t>(&pick - r.candidates.data());
  r.skeletal = candidate_tokens(pick, model.vocab);
  const Entity* entity = r.pointer ? &db[*r.pointer] : nullptr;
  r.response = lexicalise(r.skeletal, entity, model.ontology, rng, &r.unresolved);

  state.belief = r.belief;
  state.db = dbs;
  state.machine = r.response;
  ++state.t;
  return r;
}

}  // namespace ndm
