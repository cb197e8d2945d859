#pragma once

#include <string>

#include <json.hpp>

#include "ndm/checkpoint.hpp"
#include "ndm/config.hpp"
#include "ndm/corpus.hpp"
#include "ndm/generator.hpp"
#include "ndm/intent.hpp"
#include "ndm/ontology.hpp"
#include "ndm/policy.hpp"
#include "ndm/tracker.hpp"

namespace ndm {

/// Declares every parameter of the model in a fixed order: trackers
/// ("trk.*"), intent encoder, policy, generator, then the LM ("lm.*").
template <typename Real>
void declare_model(ParameterStore<Real>& ps, const Ontology& ontology, std::size_t vocab, const TrainConfig& cfg) {
  for (const auto& s : ontology.informable()) declare_informable_tracker(ps, informable_key(s.name), vocab, cfg);
  if (cfg.requestable) {
    for (const auto& r : ontology.requestable()) declare_requestable_tracker(ps, requestable_key(r), vocab, cfg);
  }
  declare_intent(ps, vocab, cfg);
  declare_policy(ps, ontology, cfg);
  declare_generator(ps, vocab, cfg);
  declare_lm(ps, vocab, cfg);
}

inline bool is_tracker_param(const std::string& name) { return name.rfind("trk.", 0) == 0; }
inline bool is_lm_param(const std::string& name) { return name.rfind("lm.", 0) == 0; }
/// Parameters trained in the generation phase (everything but trackers and LM).
inline bool is_generation_param(const std::string& name) { return !is_tracker_param(name) && !is_lm_param(name); }

/// Configuration, ontology, vocabulary and parameters of one model.
struct Model {
  TrainConfig cfg;
  Ontology ontology;
  Vocabulary vocab;
  ParameterStore<float> params;
  /// Which training phases have run: {"trackers", "generation", "lm"}.
  nlohmann::json phases = {{"trackers", false}, {"generation", false}, {"lm", false}};

  static Model create(const TrainConfig& cfg, const Ontology& ontology, const Vocabulary& vocab);

  Checkpoint to_checkpoint() const;
  static Model from_checkpoint(const Checkpoint& ckpt);
  void save(const std::string& path) const;
  static Model load(const std::string& path);
};

}  // namespace ndm
