#include <algorithm>
#include <cmath>
#include <numeric>
#include <random>

#include "ndm/evaluator.hpp"

namespace ndm {

struct NgramTracker::Turn {
  std::vector<std::vector<std::size_t>> shared;              // per informable slot
  std::vector<std::vector<std::vector<std::size_t>>> value;  // per informable slot, per value then dontcare
  std::vector<std::vector<std::size_t>> requestable;         // per requestable slot
  TrackerTargets targets;
};

namespace {

constexpr std::size_t kMaxOrder = 3;
const std::string kTarget = "<T>";

/// Rewrites the delexicalised tokens for one view: `target` decides which
/// matches become the <T> marker; everything else keeps its generic form.
template <typename Pred>
std::vector<std::string> marked(const DelexUtterance& u, Pred target) {
  auto toks = u.tokens;
  for (const auto& m : u.matches) {
    if (m.index < toks.size() && target(m)) toks[m.index] = kTarget;
  }
  return toks;
}

/// n-grams up to kMaxOrder with a channel prefix; `need_target` keeps only
/// those containing the marker.
void ngrams(const std::vector<std::string>& toks, const std::string& prefix, bool need_target,
            std::vector<std::string>& out) {
  for (std::size_t n = 1; n <= kMaxOrder; ++n) {
    for (std::size_t i = 0; i + n <= toks.size(); ++i) {
      bool has = false;
      std::string g = prefix;
      for (std::size_t k = i; k < i + n; ++k) {
        has = has || toks[k] == kTarget;
        g += ' ';
        g += toks[k];
      }
      if (!need_target || has) out.push_back(std::move(g));
    }
  }
}

double sigmoid(double x) { return 1.0 / (1.0 + std::exp(-x)); }

}  // namespace

NgramTracker::NgramTracker(const Ontology& ontology, const Lexicon& lexicon) : ontology_(ontology), lexicon_(lexicon) {}

std::vector<NgramTracker::Turn> NgramTracker::featurise(const Dialogue& d, bool grow) {
  std::vector<Turn> out;
  for (std::size_t t = 0; t < d.turns.size(); ++t) {
    const auto u = lexicon_.delexicalise(d.turns[t].user);
    const auto m = t ? lexicon_.delexicalise(d.turns[t - 1].machine) : DelexUtterance{};
    auto index = [&](const std::vector<std::string>& grams) {
      std::vector<std::size_t> ids;
      for (const auto& g : grams) {
        auto it = features_.find(g);
        if (it == features_.end()) {
          if (!grow) continue;
          it = features_.emplace(g, features_.size()).first;
        }
        ids.push_back(it->second);
      }
      std::sort(ids.begin(), ids.end());
      return ids;
    };
    auto both = [&](auto pred, bool need_target) {
      std::vector<std::string> grams;
      ngrams(marked(u, pred), "u:", need_target, grams);
      ngrams(marked(m, pred), "m:", need_target, grams);
      return index(grams);
    };
    Turn turn;
    for (const auto& slot : ontology_.informable()) {
      turn.shared.push_back(both([&](const Match& x) { return x.slot == slot.name; }, false));
      std::vector<std::vector<std::size_t>> per;
      for (std::size_t v = 0; v <= slot.values.size(); ++v) {
        if (v < slot.values.size()) {
          const auto& value = slot.values[v];
          per.push_back(both(
              [&](const Match& x) { return x.kind == MatchKind::Value && x.slot == slot.name && x.value == value; },
              true));
        } else {
          per.push_back(both([](const Match& x) { return x.kind == MatchKind::DontCare; }, true));
        }
      }
      turn.value.push_back(std::move(per));
    }
    for (const auto& r : ontology_.requestable()) {
      turn.requestable.push_back(both([&](const Match& x) { return x.slot == r; }, false));
    }
    turn.targets = tracker_targets(d.turns[t].labels, ontology_);
    out.push_back(std::move(turn));
  }
  return out;
}

std::vector<NgramTracker::Turn> NgramTracker::featurise(const Dialogue& d) const {
  return const_cast<NgramTracker*>(this)->featurise(d, false);
}

std::vector<double> NgramTracker::informable_step(const Turn& t, std::size_t s, const std::vector<double>& prev) const {
  const auto& w = inf_[s];
  const std::size_t n = prev.size() - 2;
  std::vector<double> logits(n + 2);
  for (std::size_t v = 0; v <= n; ++v) {
    double z = w.b_value + w.a_value * prev[v];
    for (auto f : t.value[s][v]) z += w.value[f];
    logits[v] = z;
  }
  double z = w.b_none + w.a_none * prev[n + 1];
  for (auto f : t.shared[s]) z += w.none[f];
  logits[n + 1] = z;
  const double mx = *std::max_element(logits.begin(), logits.end());
  double sum = 0.0;
  for (auto& l : logits) sum += (l = std::exp(l - mx));
  for (auto& l : logits) l /= sum;
  return logits;
}

double NgramTracker::requestable_step(const Turn& t, std::size_t r) const {
  double z = req_[r].b;
  for (auto f : t.requestable[r]) z += req_[r].w[f];
  return sigmoid(z);
}

void NgramTracker::train(const std::vector<Dialogue>& dialogues, std::size_t epochs, double learning_rate,
                         std::uint64_t seed) {
  std::vector<std::vector<Turn>> data;
  for (const auto& d : dialogues) data.push_back(featurise(d, true));
  const std::size_t F = features_.size();
  inf_.assign(ontology_.informable().size(), SlotWeights{std::vector<double>(F, 0.0), std::vector<double>(F, 0.0)});
  req_.assign(ontology_.requestable().size(), ReqWeights{std::vector<double>(F, 0.0)});
  std::vector<std::size_t> order(data.size());
  std::iota(order.begin(), order.end(), 0);
  std::mt19937_64 rng(seed);
  const double lr = learning_rate;
  for (std::size_t e = 0; e < epochs; ++e) {
    std::shuffle(order.begin(), order.end(), rng);
    for (auto i : order) {
      for (std::size_t s = 0; s < inf_.size(); ++s) {
        const std::size_t n = ontology_.informable()[s].values.size();
        std::vector<double> prev(n + 2, 0.0);
        prev.back() = 1.0;
        for (const auto& t : data[i]) {
          const auto p = informable_step(t, s, prev);
          auto& w = inf_[s];
          for (std::size_t v = 0; v < n + 2; ++v) {
            const double g = p[v] - (t.targets.informable[s] == v ? 1.0 : 0.0);
            if (v <= n) {
              for (auto f : t.value[s][v]) w.value[f] -= lr * g;
              w.a_value -= lr * g * prev[v];
              w.b_value -= lr * g;
            } else {
              for (auto f : t.shared[s]) w.none[f] -= lr * g;
              w.a_none -= lr * g * prev[v];
              w.b_none -= lr * g;
            }
          }
          prev = p;
        }
      }
      for (std::size_t r = 0; r < req_.size(); ++r) {
        for (const auto& t : data[i]) {
          const double g = requestable_step(t, r) - (t.targets.requested[r] ? 1.0 : 0.0);
          for (auto f : t.requestable[r]) req_[r].w[f] -= lr * g;
          req_[r].b -= lr * g;
        }
      }
    }
  }
}

std::vector<TurnLabels> NgramTracker::predict(const Dialogue& d) const {
  const auto turns = featurise(d);
  BeliefState belief = BeliefState::initial(ontology_, true);
  std::vector<TurnLabels> out;
  for (const auto& t : turns) {
    for (std::size_t s = 0; s < inf_.size(); ++s) belief.informable[s] = informable_step(t, s, belief.informable[s]);
    for (std::size_t r = 0; r < req_.size(); ++r) belief.requestable[r] = requestable_step(t, r);
    out.push_back(belief_labels(belief, ontology_));
  }
  return out;
}

TrackerPrf evaluate_ngram_tracker(const NgramTracker& tracker, const std::vector<Dialogue>& dialogues,
                                  const Ontology& ontology) {
  std::vector<TurnLabels> pred, gold;
  for (const auto& d : dialogues) {
    auto p = tracker.predict(d);
    pred.insert(pred.end(), p.begin(), p.end());
    for (const auto& t : d.turns) gold.push_back(t.labels);
  }
  return tracker_prf(pred, gold, ontology);
}

}  // namespace ndm
