#pragma once

#include <cstddef>
#include <functional>
#include <limits>
#include <map>
#include <string>
#include <vector>

#include <json.hpp>

#include "ndm/model.hpp"
#include "ndm/parallel.hpp"

namespace ndm {

struct EarlyStopDecision {
  bool stop = false;
  /// 1-based epoch with the lowest loss so far (0 for an empty history).
  std::size_t best_epoch = 0;
};

/// Stop once the loss has failed to improve on the best value for
/// `patience` consecutive epochs (patience 0: at the first failure).
EarlyStopDecision early_stop(const std::vector<double>& history, std::size_t patience);

/// Incremental form of early_stop, also driving the learning-rate decay.
class EarlyStopper {
 public:
  explicit EarlyStopper(std::size_t patience) : patience_(patience) {}
  /// Records one epoch; true when it is the new best.
  bool observe(double loss);
  bool should_stop() const { return bad_ > 0 && bad_ >= patience_; }
  std::size_t best_epoch() const { return best_epoch_; }
  double best() const { return best_; }

 private:
  std::size_t patience_;
  std::size_t epoch_ = 0;
  std::size_t best_epoch_ = 0;
  std::size_t bad_ = 0;
  double best_ = std::numeric_limits<double>::infinity();
};

struct TrainLog {
  std::vector<double> train_loss;
  std::vector<double> valid_loss;
  std::vector<double> learning_rate;
  std::size_t best_epoch = 0;
  double seconds = 0.0;
  nlohmann::json to_json() const;
};

struct TrainOptions {
  ExecPolicy policy = ExecPolicy::Parallel;
  /// Progress lines; silent when empty.
  std::function<void(const std::string&)> log;
};

/// Phase 1: every tracker minimises its share of the cross entropy over
/// per-dialogue batches with early stopping on its validation loss. Trackers
/// share no parameters, so they train independently (in parallel under
/// ExecPolicy::Parallel) with per-tracker shuffling streams; the result does
/// not depend on the policy. Returns one log per tracker key.
std::map<std::string, TrainLog> train_trackers(Model& model, const Lexicon& lexicon, const std::vector<Dialogue>& train,
                                               const std::vector<Dialogue>& valid, const TrainOptions& opt = {});

/// Frozen-tracker inputs of one turn for phase 2.
struct GenerationTurn {
  std::vector<std::size_t> user;
  SummaryBelief summary;
  DbBins bins{};
  std::vector<std::size_t> response;  // without </s>
};

/// Runs the frozen trackers (reading the reference machine turns) and the DB
/// lookup over each dialogue.
std::vector<std::vector<GenerationTurn>> generation_inputs(const Model& model, const Lexicon& lexicon,
                                                           const Database& db, const std::vector<Dialogue>& dialogues,
                                                           ExecPolicy policy = ExecPolicy::Parallel);

/// Summed teacher-forced loss of one dialogue and its token count (</s> included).
double generation_loss(Model& model, const std::vector<GenerationTurn>& dialogue, bool accumulate,
                       std::size_t* tokens = nullptr);

/// Phase 2: intent encoder, policy and generator on the response loss with
/// the trackers frozen. Throws when the trackers have not been trained.
TrainLog train_generation(Model& model, const Lexicon& lexicon, const Database& db, const std::vector<Dialogue>& train,
                          const std::vector<Dialogue>& valid, const TrainOptions& opt = {});

/// Unconditional LM over the skeletal responses. Throws on an empty corpus.
TrainLog train_lm(Model& model, const std::vector<Dialogue>& train, const std::vector<Dialogue>& valid,
                  const TrainOptions& opt = {});

/// Per-token perplexity of the LM over the skeletal responses.
double lm_perplexity(Model& model, const std::vector<Dialogue>& dialogues);

}  // namespace ndm
