#pragma once

#include <string>
#include <vector>

#include <json.hpp>

#include "ndm/corpus.hpp"
#include "ndm/model.hpp"
#include "ndm/ontology.hpp"
#include "ndm/trainer.hpp"

namespace ndm::test {

inline const Ontology& restaurant() {
  static const Ontology o = Ontology::load(std::string(NDM_DATA_DIR) + "/restaurant/ontology.json");
  return o;
}

inline const Database& restaurant_db() {
  static const Database d = Database::load(std::string(NDM_DATA_DIR) + "/restaurant/db.json", restaurant());
  return d;
}

/// Two informable slots with two values each, plus a phone slot.
inline const Ontology& tiny() {
  static const Ontology o = Ontology::from_json(nlohmann::ordered_json::parse(R"({
    "informable": {"food": ["chinese", "indian"], "area": ["north", "south"]},
    "requestable": ["food", "area", "phone"],
    "surface_forms": {"food": ["food", "type of food"], "area": ["area", "part of town"], "phone": ["phone"],
                      "dontcare": ["any", "dont care"]}
  })"));
  return o;
}

inline const Database& tiny_db() {
  static const Database d = Database::from_json(nlohmann::json::parse(R"([
    {"name": "golden wok", "food": "chinese", "area": "north", "phone": "01223 111111"},
    {"name": "curry hut", "food": "indian", "area": "north", "phone": "01223 222222"},
    {"name": "spice box", "food": "indian", "area": "south", "phone": "01223 333333"}
  ])"),
                                                tiny());
  return d;
}

/// Small dimensions for finite-difference checks.
inline TrainConfig small_config(bool attention = false, const std::string& encoder = "lstm") {
  TrainConfig c;
  c.hidden = 4;
  c.embed = 3;
  c.conv_layers = 2;
  c.filter_width = 3;
  c.attention = attention;
  c.encoder = encoder;
  c.max_epochs = 2;
  return c;
}

/// Vocabulary of the specials, generic tokens and a handful of words.
inline Vocabulary small_vocab(const Ontology& o) {
  Vocabulary v;
  for (const auto& t : generic_tokens(o)) v.add(t);
  for (const char* w : {"i", "want", "food", "in", "the", "what", "is", "there", "are", "no", "serves", "?", "."}) {
    if (!v.contains(w)) v.add(w);
  }
  return v;
}

/// A two-turn dialogue over the tiny ontology.
inline Dialogue tiny_dialogue() {
  Dialogue d;
  d.id = "d0";
  d.goal.constraints = {{"food", "indian"}, {"area", "north"}};
  d.goal.requests = {"phone"};
  Turn t1;
  t1.user = "i want indian food in the north";
  t1.machine = "there is indian food in the north";
  t1.machine_delex = {"there", "is", "<v.food>", "food", "in", "the", "<v.area>"};
  t1.labels.informable = {{"food", "indian"}, {"area", "north"}};
  Turn t2;
  t2.user = "what is the phone";
  t2.machine = "the phone is 01223 222222";
  t2.machine_delex = {"the", "<s.phone>", "is", "<v.phone>"};
  t2.labels.informable = {{"food", "indian"}, {"area", "north"}};
  t2.labels.requested = {"phone"};
  d.turns = {t1, t2};
  return d;
}

/// Synthetic restaurant dialogues with a small model trained through every
/// phase. Built once; tests must not modify it.
struct Trained {
  std::vector<Dialogue> train, valid;
  Lexicon lexicon{restaurant(), &restaurant_db()};
  Model model;
};

inline Trained make_trained(bool attention = false) {
  Trained t;
  auto all = generate_synthetic(restaurant(), restaurant_db(), 24, 5);
  t.train.assign(all.begin(), all.begin() + 18);
  t.valid.assign(all.begin() + 18, all.end());
  auto cfg = small_config(attention);
  cfg.hidden = 8;
  cfg.embed = 6;
  t.model = Model::create(cfg, restaurant(), build_vocab(t.train, t.lexicon, restaurant(), 1));
  train_trackers(t.model, t.lexicon, t.train, t.valid);
  train_generation(t.model, t.lexicon, restaurant_db(), t.train, t.valid);
  train_lm(t.model, t.train, t.valid);
  return t;
}

inline const Trained& trained() {
  static const Trained t = make_trained();
  return t;
}

}  // namespace ndm::test
