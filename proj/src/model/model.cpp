#include "ndm/model.hpp"

#include <stdexcept>

namespace ndm {

Model Model::create(const TrainConfig& cfg, const Ontology& ontology, const Vocabulary& vocab) {
  cfg.validate();
  Model m;
  m.cfg = cfg;
  m.ontology = ontology;
  m.vocab = vocab;
  m.params = ParameterStore<float>(cfg.seed);
  declare_model(m.params, ontology, vocab.size(), cfg);
  return m;
}

Checkpoint Model::to_checkpoint() const {
  Checkpoint c;
  c.meta["format"] = "ndm-model";
  c.meta["config"] = cfg.to_json();
  // Stored as text so that slot declaration order survives sorted-key dumps.
  c.meta["ontology"] = ontology.to_json().dump();
  c.meta["vocab"] = vocab.tokens();
  c.meta["phases"] = phases;
  c.params = params;
  return c;
}

Model Model::from_checkpoint(const Checkpoint& ckpt) {
  if (ckpt.meta.value("format", std::string{}) != "ndm-model") throw std::runtime_error("checkpoint is not a model");
  Model m;
  m.cfg = TrainConfig::from_json(ckpt.meta.at("config"));
  m.ontology = Ontology::from_json(nlohmann::ordered_json::parse(ckpt.meta.at("ontology").get<std::string>()));
  m.vocab = Vocabulary(ckpt.meta.at("vocab").get<std::vector<std::string>>());
  m.phases = ckpt.meta.at("phases");
  // Validate the parameter set against a freshly declared model.
  ParameterStore<float> expected(m.cfg.seed);
  declare_model(expected, m.ontology, m.vocab.size(), m.cfg);
  for (const auto& [name, p] : expected.entries()) {
    if (!ckpt.params.contains(name)) throw std::runtime_error("checkpoint is missing parameter " + name);
    if (ckpt.params.get(name).value.shape != p.value.shape) throw std::runtime_error("shape mismatch for parameter " + name);
  }
  if (ckpt.params.entries().size() != expected.entries().size()) {
    throw std::runtime_error("checkpoint has parameters the configuration does not declare");
  }
  m.params = ckpt.params;
  return m;
}

void Model::save(const std::string& path) const { save_checkpoint(path, to_checkpoint()); }

Model Model::load(const std::string& path) { return from_checkpoint(load_checkpoint(path)); }

}  // namespace ndm
