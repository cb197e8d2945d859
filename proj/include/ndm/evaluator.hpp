#pragma once

#include <array>
#include <cstddef>
#include <cstdint>
#include <optional>
#include <ostream>
#include <string>
#include <vector>

#include <json.hpp>

#include "ndm/parallel.hpp"
#include "ndm/pipeline.hpp"

namespace ndm {

/// Micro-averaged counts of slot decisions.
struct Prf {
  std::size_t tp = 0;
  std::size_t fp = 0;
  std::size_t fn = 0;
  double precision() const { return tp + fp ? static_cast<double>(tp) / static_cast<double>(tp + fp) : 1.0; }
  double recall() const { return tp + fn ? static_cast<double>(tp) / static_cast<double>(tp + fn) : 1.0; }
  double f1() const {
    const double p = precision(), r = recall();
    return p + r > 0 ? 2 * p * r / (p + r) : 0.0;
  }
  nlohmann::json to_json() const;
};

struct TrackerPrf {
  Prf informable;
  Prf requestable;
};

/// An informable slot is predicted when its label is a concrete value or
/// dontcare; a prediction is a true positive when it equals the reference.
/// A wrong value counts as one false positive and one false negative.
/// Requestable slots are set membership. Throws on length mismatch.
TrackerPrf tracker_prf(const std::vector<TurnLabels>& predictions, const std::vector<TurnLabels>& labels,
                       const Ontology& ontology);

/// Argmax labels of a belief state (requested when p > 0.5).
TurnLabels belief_labels(const BeliefState& belief, const Ontology& ontology);

using Tokens = std::vector<std::string>;

/// Clipped n-gram matches and totals for n = 1..4 plus lengths.
struct BleuStats {
  std::array<std::size_t, 4> match{};
  std::array<std::size_t, 4> total{};
  std::size_t candidate_length = 0;
  std::size_t reference_length = 0;
  BleuStats& operator+=(const BleuStats& o);
};

BleuStats bleu_stats(const Tokens& candidate, const Tokens& reference);
/// Geometric mean of the four modified precisions times the brevity penalty.
double bleu_score(const BleuStats& s);
double corpus_bleu(const std::vector<Tokens>& candidates, const std::vector<Tokens>& references);
/// Sentence BLEU with add-one smoothing of the 2- to 4-gram counts.
double sentence_bleu(const Tokens& candidate, const Tokens& reference);

struct BleuResult {
  double t1 = 0.0;
  double t5 = 0.0;
  std::size_t turns = 0;
  std::size_t skipped = 0;
};

/// `ranked[i]` holds turn i's candidates best first. T1 scores the first
/// candidate; T5 picks, per turn, the best of the first five by smoothed
/// sentence BLEU and aggregates those at corpus level. Turns with an empty
/// reference are skipped and counted.
BleuResult bleu(const std::vector<std::vector<Tokens>>& ranked, const std::vector<Tokens>& references);

/// What one decoded dialogue left behind for the task metrics.
struct DialogueOutcome {
  Goal goal;
  bool finished = true;
  std::optional<std::size_t> final_pointer;
  std::vector<Tokens> skeletal;
  std::vector<std::string> responses;
};

struct TaskResult {
  std::size_t dialogues = 0;
  std::size_t matched = 0;
  std::size_t succeeded = 0;
  double match_rate() const { return dialogues ? static_cast<double>(matched) / static_cast<double>(dialogues) : 0.0; }
  double success_rate() const {
    return dialogues ? static_cast<double>(succeeded) / static_cast<double>(dialogues) : 0.0;
  }
};

/// Entity satisfies every non-dontcare constraint.
bool satisfies(const Entity& entity, const std::map<std::string, std::string>& constraints);

/// Match: the final pointer satisfies the goal, or, when no entity can, the
/// pointer is absent. Success: match and every requested slot was answered
/// by a <v.slot> token or the entity's value in some response. Unfinished
/// dialogues are left out.
TaskResult match_and_success(const std::vector<DialogueOutcome>& outcomes, const Database& db);

struct EvalReport {
  TrackerPrf trackers;
  BleuResult bleu;
  TaskResult task;
  std::size_t dialogues = 0;
  std::size_t turns = 0;
  std::size_t unresolved = 0;
  std::string decoding;
  bool attention = false;
  bool requestable = true;
  nlohmann::json to_json() const;
};

struct EvalOptions {
  DecodeOptions decode;
  ExecPolicy policy = ExecPolicy::Parallel;
  /// Per-dialogue streams for sampled decoding; evaluation mode ignores it.
  std::uint64_t seed = 1;
  /// Skip decoding and report tracker metrics only.
  bool trackers_only = false;
};

/// Runs every dialogue through the pipeline with the reference machine turn
/// fed to the trackers. Dialogues are independent (per-dialogue RNG stream),
/// so serial and parallel runs agree exactly.
EvalReport evaluate(const Pipeline& pipeline, const std::vector<Dialogue>& dialogues, const EvalOptions& opt = {});

struct EmbeddingRow {
  std::string id;
  std::vector<float> action;
  std::array<std::string, 3> words;
};

/// o_t and the first three generated tokens of every turn (evaluation mode).
std::vector<EmbeddingRow> export_action_embeddings(const Pipeline& pipeline, const std::vector<Dialogue>& dialogues,
                                                   ExecPolicy policy = ExecPolicy::Parallel);
void write_embeddings_csv(std::ostream& out, const std::vector<EmbeddingRow>& rows);

/// Linear tracker over delexicalised n-gram indicators, the comparison point
/// for the convolutional trackers. Same output layout and the same
/// previous-turn recurrence, trained by SGD on the cross entropy.
class NgramTracker {
 public:
  NgramTracker(const Ontology& ontology, const Lexicon& lexicon);

  void train(const std::vector<Dialogue>& dialogues, std::size_t epochs = 10, double learning_rate = 0.1,
             std::uint64_t seed = 1);
  /// Predicted labels for every turn, reading the reference machine turns.
  std::vector<TurnLabels> predict(const Dialogue& d) const;

 private:
  struct Turn;
  std::vector<Turn> featurise(const Dialogue& d, bool grow);
  std::vector<Turn> featurise(const Dialogue& d) const;
  std::vector<double> informable_step(const Turn& t, std::size_t s, const std::vector<double>& prev) const;
  double requestable_step(const Turn& t, std::size_t r) const;

  const Ontology& ontology_;
  const Lexicon& lexicon_;
  std::map<std::string, std::size_t> features_;
  // Per informable slot: value weights, none weights, recurrence and biases.
  struct SlotWeights {
    std::vector<double> value;
    std::vector<double> none;
    double a_value = 0.0, a_none = 0.0, b_value = 0.0, b_none = 0.0;
  };
  std::vector<SlotWeights> inf_;
  struct ReqWeights {
    std::vector<double> w;
    double b = 0.0;
  };
  std::vector<ReqWeights> req_;
};

TrackerPrf evaluate_ngram_tracker(const NgramTracker& tracker, const std::vector<Dialogue>& dialogues,
                                  const Ontology& ontology);

}  // namespace ndm
