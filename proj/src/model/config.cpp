#include "ndm/config.hpp"

#include <fstream>
#include <stdexcept>

namespace ndm {

#define NDM_CONFIG_FIELDS(X)                                                                                    \
  X(hidden) X(embed) X(conv_layers) X(filter_width) X(encoder) X(attention) X(requestable) X(learning_rate)      \
  X(lr_decay) X(l2) X(clip) X(max_epochs) X(patience) X(seed) X(min_count) X(decoding) X(beam_width) X(n_best) \
  X(max_length) X(lambda) X(gamma)

void TrainConfig::validate() const {
  if (hidden == 0 || embed == 0) throw std::invalid_argument("hidden and embed sizes must be positive");
  if (conv_layers == 0) throw std::invalid_argument("conv_layers must be at least 1");
  if (filter_width % 2 == 0) throw std::invalid_argument("conv filter width must be odd");
  if (encoder != "lstm" && encoder != "cnn") throw std::invalid_argument("encoder must be lstm or cnn");
  if (decoding != "ml" && decoding != "weighted") throw std::invalid_argument("decoding must be ml or weighted");
  if (learning_rate <= 0) throw std::invalid_argument("learning_rate must be positive");
  if (lr_decay <= 0 || lr_decay > 1) throw std::invalid_argument("lr_decay must be in (0, 1]");
  if (l2 < 0 || clip <= 0) throw std::invalid_argument("l2 must be non-negative and clip positive");
  if (beam_width == 0 || n_best == 0 || max_length == 0) throw std::invalid_argument("beam settings must be positive");
  if (lambda < 0 || gamma < 0) throw std::invalid_argument("lambda and gamma must be non-negative");
}

nlohmann::json TrainConfig::to_json() const {
  nlohmann::json j;
#define X(f) j[#f] = f;
  NDM_CONFIG_FIELDS(X)
#undef X
  return j;
}

TrainConfig TrainConfig::from_json(const nlohmann::json& j) {
  TrainConfig c;
  if (!j.is_object()) throw std::invalid_argument("config must be a JSON object");
  const auto known = c.to_json();
  for (const auto& [k, v] : j.items()) {
    if (!known.contains(k)) throw std::invalid_argument("unknown config key: " + k);
  }
#define X(f) \
  if (j.contains(#f)) j.at(#f).get_to(c.f);
  NDM_CONFIG_FIELDS(X)
#undef X
  c.validate();
  return c;
}

TrainConfig TrainConfig::load(const std::string& path) {
  std::ifstream f(path);
  if (!f) throw std::runtime_error("cannot read config " + path);
  return from_json(nlohmann::json::parse(f));
}

}  // namespace ndm
