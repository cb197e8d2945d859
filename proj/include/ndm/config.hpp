#pragma once

#include <cstddef>
#include <cstdint>
#include <string>

#include <json.hpp>

namespace ndm {

/// Architecture, training and decoding settings. Defaults follow the model
/// description; JSON keys match the field names.
struct TrainConfig {
  // architecture
  std::size_t hidden = 50;
  std::size_t embed = 50;
  std::size_t conv_layers = 3;
  std::size_t filter_width = 3;
  std::string encoder = "lstm";  // "lstm" | "cnn"
  bool attention = false;
  bool requestable = true;

  // optimisation
  double learning_rate = 0.5;
  double lr_decay = 0.5;  // applied when validation loss fails to improve
  double l2 = 1e-5;
  double clip = 1.0;
  std::size_t max_epochs = 30;
  std::size_t patience = 5;
  std::uint64_t seed = 1;
  std::size_t min_count = 2;

  // decoding
  std::string decoding = "ml";  // "ml" | "weighted"
  std::size_t beam_width = 10;
  std::size_t n_best = 5;
  std::size_t max_length = 40;
  double lambda = 0.1;
  double gamma = 1.0;

  /// Throws std::invalid_argument on inconsistent settings.
  void validate() const;

  nlohmann::json to_json() const;
  /// Unknown keys are rejected so that typos do not pass silently.
  static TrainConfig from_json(const nlohmann::json& j);
  static TrainConfig load(const std::string& path);
};

}  // namespace ndm
