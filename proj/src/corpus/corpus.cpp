#include "ndm/corpus.hpp"

#include <algorithm>
#include <fstream>
#include <random>

namespace ndm {
namespace {

std::string where(std::size_t d, const std::string& id) {
  return "dialogue " + std::to_string(d) + (id.empty() ? "" : " (" + id + ")");
}

}  // namespace

nlohmann::json corpus_to_json(const std::vector<Dialogue>& dialogues) {
  nlohmann::json out = nlohmann::json::array();
  for (const auto& d : dialogues) {
    nlohmann::json jd;
    jd["id"] = d.id;
    jd["finished"] = d.finished;
    jd["goal"]["constraints"] = d.goal.constraints;
    jd["goal"]["requests"] = d.goal.requests;
    jd["turns"] = nlohmann::json::array();
    for (const auto& t : d.turns) {
      nlohmann::json jt;
      jt["user"] = t.user;
      jt["machine"] = t.machine;
      jt["machine_delex"] = join_tokens(t.machine_delex);
      jt["labels"]["informable"] = t.labels.informable;
      jt["labels"]["requestable"] = t.labels.requested;
      jd["turns"].push_back(std::move(jt));
    }
    out.push_back(std::move(jd));
  }
  return out;
}

std::vector<Dialogue> corpus_from_json(const nlohmann::json& j, const Ontology& ontology) {
  if (!j.is_array()) throw CorpusError("corpus must be a JSON array of dialogues");
  std::vector<Dialogue> out;
  for (std::size_t di = 0; di < j.size(); ++di) {
    const auto& jd = j[di];
    Dialogue d;
    d.id = jd.value("id", std::string{});
    const auto at = where(di, d.id);
    try {
      d.finished = jd.value("finished", true);
      if (jd.contains("goal")) {
        const auto constraints = jd["goal"].value("constraints", nlohmann::json::object());
        for (const auto& [slot, value] : constraints.items()) {
          auto s = ontology.informable_index(normalize(slot));
          const auto v = normalize(value.get<std::string>());
          if (!s) throw CorpusError(at + ": goal constraint on unknown slot " + slot);
          if (v != kDontCare && !ontology.value_index(*s, v)) {
            throw CorpusError(at + ": goal value '" + v + "' outside ontology for slot " + slot);
          }
          d.goal.constraints[normalize(slot)] = v;
        }
        for (const auto& r : jd["goal"].value("requests", nlohmann::json::array())) {
          const auto slot = normalize(r.get<std::string>());
          if (!ontology.is_requestable(slot)) throw CorpusError(at + ": goal requests unknown slot " + slot);
          d.goal.requests.insert(slot);
        }
      }
      const auto& turns = jd.at("turns");
      for (std::size_t ti = 0; ti < turns.size(); ++ti) {
        const auto& jt = turns[ti];
        const auto tat = at + " turn " + std::to_string(ti);
        Turn t;
        t.user = jt.value("user", std::string{});
        t.machine = jt.value("machine", std::string{});
        if (jt.contains("machine_delex")) {
          const auto& md = jt["machine_delex"];
          t.machine_delex = md.is_array() ? md.get<std::vector<std::string>>() : tokenize(md.get<std::string>());
        }
        if (!jt.contains("labels")) throw CorpusError(tat + ": missing labels");
        const auto& lab = jt["labels"];
        const auto inf = lab.value("informable", nlohmann::json::object());
        for (const auto& slot : ontology.informable()) {
          if (!inf.contains(slot.name)) throw CorpusError(tat + ": missing label for slot " + slot.name);
        }
        for (const auto& [slot, value] : inf.items()) {
          auto s = ontology.informable_index(normalize(slot));
          if (!s) throw CorpusError(tat + ": label for unknown slot " + slot);
          const auto v = normalize(value.get<std::string>());
          if (v != kDontCare && v != kNotMentioned && !ontology.value_index(*s, v)) {
            throw CorpusError(tat + ": label value '" + v + "' outside ontology for slot " + slot);
          }
          t.labels.informable[normalize(slot)] = v;
        }
        for (const auto& r : lab.value("requestable", nlohmann::json::array())) {
          const auto slot = normalize(r.get<std::string>());
          if (!ontology.is_requestable(slot)) throw CorpusError(tat + ": request label for unknown slot " + slot);
          t.labels.requested.insert(slot);
        }
        d.turns.push_back(std::move(t));
      }
    } catch (const CorpusError&) {
      throw;
    } catch (const std::exception& e) {
      throw CorpusError(at + ": " + e.what());
    }
    out.push_back(std::move(d));
  }
  return out;
}

std::vector<Dialogue> load_corpus(const std::string& path, const Ontology& ontology) {
  std::ifstream f(path);
  if (!f) throw CorpusError("cannot read corpus " + path);
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(f);
  } catch (const std::exception& e) {
    throw CorpusError("corpus " + path + " is not valid JSON: " + e.what());
  }
  return corpus_from_json(j, ontology);
}

void save_corpus(const std::string& path, const std::vector<Dialogue>& dialogues) {
  std::ofstream f(path);
  if (!f) throw CorpusError("cannot write corpus " + path);
  f << corpus_to_json(dialogues).dump(1) << "\n";
}

std::vector<Dialogue> convert_camrest(const nlohmann::json& j, const Ontology& ontology, const Lexicon& lexicon) {
  std::vector<Dialogue> out;
  for (std::size_t di = 0; di < j.size(); ++di) {
    const auto& jd = j[di];
    Dialogue d;
    d.id = jd.contains("dialogue_id") ? jd["dialogue_id"].dump() : std::to_string(di);
    d.finished = jd.value("finished", true);
    auto canon = [&](const std::string& slot, std::string v) {
      v = normalize(v);
      if (v == "dontcare" || v == "any" || v == "this") return std::string(kDontCare);
      auto s = ontology.informable_index(slot);
      if (!s || !ontology.value_index(*s, v)) return std::string{};
      return v;
    };
    if (jd.contains("goal")) {
      for (const auto& c : jd["goal"].value("constraints", nlohmann::json::array())) {
        const auto slot = normalize(c.at(0).get<std::string>());
        const auto v = canon(slot, c.at(1).get<std::string>());
        if (!v.empty()) d.goal.constraints[slot] = v;
      }
      for (const auto& r : jd["goal"].value("request-slots", nlohmann::json::array())) {
        const auto slot = normalize(r.get<std::string>());
        if (ontology.is_requestable(slot)) d.goal.requests.insert(slot);
      }
    }
    std::map<std::string, std::string> state;
    for (const auto& s : ontology.informable()) state[s.name] = kNotMentioned;
    for (const auto& turn : jd.at("dial")) {
      Turn t;
      t.user = turn.at("usr").value("transcript", std::string{});
      t.machine = turn.at("sys").value("sent", std::string{});
      t.machine_delex = lexicon.delexicalise(t.machine).tokens;
      for (const auto& act : turn.at("usr").value("slu", nlohmann::json::array())) {
        const auto kind = act.value("act", std::string{});
        for (const auto& sv : act.value("slots", nlohmann::json::array())) {
          const auto a = normalize(sv.at(0).get<std::string>());
          const auto b = normalize(sv.at(1).get<std::string>());
          if (kind == "inform" && ontology.is_informable(a)) {
            const auto v = canon(a, b);
            if (!v.empty()) state[a] = v;
          } else if (kind == "request") {
            const auto slot = a == "slot" ? b : a;
            if (ontology.is_requestable(slot)) t.labels.requested.insert(slot);
          }
        }
      }
      t.labels.informable = state;
      d.turns.push_back(std::move(t));
    }
    out.push_back(std::move(d));
  }
  return out;
}

Split split_corpus(const std::vector<Dialogue>& dialogues, std::uint64_t seed) {
  if (dialogues.size() < 5) throw std::invalid_argument("split needs at least 5 dialogues");
  std::vector<std::size_t> order(dialogues.size());
  for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
  std::mt19937_64 rng(seed);
  std::shuffle(order.begin(), order.end(), rng);
  const std::size_t n_valid = dialogues.size() / 5;
  const std::size_t n_test = dialogues.size() / 5;
  const std::size_t n_train = dialogues.size() - n_valid - n_test;
  Split s;
  for (std::size_t k = 0; k < order.size(); ++k) {
    const auto& d = dialogues[order[k]];
    if (k < n_train) {
      s.train.push_back(d);
    } else if (k < n_train + n_valid) {
      s.valid.push_back(d);
    } else {
      s.test.push_back(d);
    }
  }
  return s;
}

const std::vector<std::string>& Vocabulary::specials() {
  static const std::vector<std::string> s{"<unk>", "<s>", "</s>", "<null>"};
  return s;
}

Vocabulary::Vocabulary() {
  for (const auto& t : specials()) add(t);
}

Vocabulary::Vocabulary(std::vector<std::string> tokens) {
  for (const auto& t : tokens) add(t);
  for (std::size_t i = 0; i < specials().size(); ++i) {
    if (i >= tokens_.size() || tokens_[i] != specials()[i]) throw std::invalid_argument("vocabulary must start with the special tokens");
  }
}

void Vocabulary::add(const std::string& token) {
  if (index_.count(token)) return;
  index_[token] = tokens_.size();
  tokens_.push_back(token);
}

std::size_t Vocabulary::id(const std::string& token) const {
  auto it = index_.find(token);
  return it == index_.end() ? kUnk : it->second;
}

std::vector<std::size_t> Vocabulary::encode(const std::vector<std::string>& tokens) const {
  std::vector<std::size_t> out;
  out.reserve(tokens.size());
  for (const auto& t : tokens) out.push_back(id(t));
  return out;
}

std::vector<std::string> generic_tokens(const Ontology& ontology) {
  std::vector<std::string> out;
  for (const auto& slot : ontology.all_slots()) {
    out.push_back(value_token(slot));
    out.push_back(slot_token(slot));
  }
  out.push_back(kDontCareToken);
  return out;
}

Vocabulary build_vocab(const std::vector<Dialogue>& train, const Lexicon& lexicon, const Ontology& ontology,
                       std::size_t min_count) {
  std::map<std::string, std::size_t> counts;
  auto count = [&](const std::vector<std::string>& toks) {
    for (const auto& t : toks) ++counts[t];
  };
  for (const auto& d : train) {
    for (const auto& t : d.turns) {
      count(lexicon.delexicalise(t.user).tokens);
      count(t.machine_delex);
    }
  }
  Vocabulary v;
  for (const auto& g : generic_tokens(ontology)) v.add(g);
  std::vector<std::pair<std::string, std::size_t>> kept;
  for (const auto& [tok, n] : counts) {
    if (n < min_count || v.contains(tok) || parse_generic(tok) || lexicon.is_surface_token(tok)) continue;
    kept.emplace_back(tok, n);
  }
  std::stable_sort(kept.begin(), kept.end(), [](const auto& a, const auto& b) { return a.second > b.second; });
  for (const auto& [tok, n] : kept) v.add(tok);
  return v;
}

}  // namespace ndm
