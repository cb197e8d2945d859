#include "ndm/ontology.hpp"

#include <algorithm>
#include <cctype>
#include <fstream>
#include <stdexcept>

#include "ndm/belief.hpp"

namespace ndm {

std::string normalize(const std::string& s) {
  std::size_t b = 0, e = s.size();
  while (b < e && std::isspace(static_cast<unsigned char>(s[b]))) ++b;
  while (e > b && std::isspace(static_cast<unsigned char>(s[e - 1]))) --e;
  std::string out = s.substr(b, e - b);
  for (auto& c : out) c = static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
  return out;
}

Ontology Ontology::from_json(const nlohmann::ordered_json& j) {
  Ontology o;
  for (const auto& [slot, values] : j.at("informable").items()) {
    InformableSlot s{normalize(slot), {}};
    for (const auto& v : values) {
      auto nv = normalize(v.get<std::string>());
      if (nv == kDontCare || nv == kNotMentioned) throw std::invalid_argument("reserved value name in slot " + s.name);
      if (std::find(s.values.begin(), s.values.end(), nv) != s.values.end()) {
        throw std::invalid_argument("duplicate value '" + nv + "' in slot " + s.name);
      }
      s.values.push_back(nv);
    }
    if (s.values.empty()) throw std::invalid_argument("informable slot without values: " + s.name);
    o.informable_.push_back(std::move(s));
  }
  for (const auto& r : j.at("requestable")) o.requestable_.push_back(normalize(r.get<std::string>()));
  if (j.contains("surface_forms")) {
    for (const auto& [key, forms] : j.at("surface_forms").items()) {
      auto& dst = o.surface_forms_[normalize(key)];
      for (const auto& f : forms) dst.push_back(normalize(f.get<std::string>()));
    }
  }
  return o;
}

Ontology Ontology::load(const std::string& path) {
  std::ifstream f(path);
  if (!f) throw std::runtime_error("cannot read ontology " + path);
  return from_json(nlohmann::ordered_json::parse(f));
}

nlohmann::ordered_json Ontology::to_json() const {
  nlohmann::ordered_json j;
  j["informable"] = nlohmann::ordered_json::object();
  for (const auto& s : informable_) j["informable"][s.name] = s.values;
  j["requestable"] = requestable_;
  j["surface_forms"] = nlohmann::ordered_json::object();
  for (const auto& [k, v] : surface_forms_) j["surface_forms"][k] = v;
  return j;
}

std::optional<std::size_t> Ontology::informable_index(const std::string& slot) const {
  for (std::size_t i = 0; i < informable_.size(); ++i) {
    if (informable_[i].name == slot) return i;
  }
  return std::nullopt;
}

std::optional<std::size_t> Ontology::requestable_index(const std::string& slot) const {
  for (std::size_t i = 0; i < requestable_.size(); ++i) {
    if (requestable_[i] == slot) return i;
  }
  return std::nullopt;
}

std::optional<std::size_t> Ontology::value_index(std::size_t slot, const std::string& value) const {
  const auto v = normalize(value);
  const auto& vals = informable_.at(slot).values;
  for (std::size_t i = 0; i < vals.size(); ++i) {
    if (vals[i] == v) return i;
  }
  return std::nullopt;
}

std::vector<std::string> Ontology::slot_forms(const std::string& slot) const {
  auto it = surface_forms_.find(slot);
  return it == surface_forms_.end() ? std::vector<std::string>{} : it->second;
}

std::vector<std::string> Ontology::value_forms(const std::string& slot, const std::string& value) const {
  auto it = surface_forms_.find(slot + "=" + value);
  if (it == surface_forms_.end() || it->second.empty()) return {value};
  return it->second;
}

std::vector<std::string> Ontology::dontcare_forms() const { return slot_forms(kDontCare); }

std::vector<std::string> Ontology::all_slots() const {
  std::vector<std::string> out;
  for (const auto& s : informable_) out.push_back(s.name);
  for (const auto& r : requestable_) {
    if (std::find(out.begin(), out.end(), r) == out.end()) out.push_back(r);
  }
  return out;
}

Database Database::from_json(const nlohmann::json& j, const Ontology& ontology) {
  Database db;
  std::size_t idx = 0;
  for (const auto& rec : j) {
    Entity e;
    for (const auto& [k, v] : rec.items()) e[normalize(k)] = normalize(v.get<std::string>());
    for (std::size_t s = 0; s < ontology.informable().size(); ++s) {
      const auto& slot = ontology.informable()[s].name;
      auto it = e.find(slot);
      if (it != e.end() && !ontology.value_index(s, it->second)) {
        throw std::invalid_argument("entity " + std::to_string(idx) + ": value '" + it->second +
                                    "' not in ontology for slot " + slot);
      }
    }
    db.entities_.push_back(std::move(e));
    ++idx;
  }
  return db;
}

Database Database::load(const std::string& path, const Ontology& ontology) {
  std::ifstream f(path);
  if (!f) throw std::runtime_error("cannot read database " + path);
  return from_json(nlohmann::json::parse(f), ontology);
}

nlohmann::json Database::to_json() const {
  nlohmann::json j = nlohmann::json::array();
  for (const auto& e : entities_) j.push_back(e);
  return j;
}

std::string Database::attribute(std::size_t i, const std::string& slot) const {
  const auto& e = entities_.at(i);
  auto it = e.find(slot);
  return it == e.end() ? std::string{} : it->second;
}

DbQuery form_query(const BeliefState& belief, const Ontology& ontology) {
  DbQuery q;
  for (std::size_t s = 0; s < ontology.informable().size(); ++s) {
    if (belief.status(s) != SlotStatus::Value) continue;
    const auto& slot = ontology.informable()[s];
    q[slot.name] = slot.values[belief.argmax(s)];
  }
  return q;
}

std::vector<std::uint8_t> apply_query(const Database& db, const Ontology& ontology, const DbQuery& q,
                                      ExecPolicy policy) {
  std::vector<std::pair<std::string, std::string>> constraints;
  for (const auto& [slot, value] : q) {
    auto s = ontology.informable_index(normalize(slot));
    if (!s || !ontology.value_index(*s, value)) throw std::invalid_argument("query outside ontology");
    constraints.emplace_back(normalize(slot), normalize(value));
  }
  std::vector<std::uint8_t> truth(db.size(), 0);
  parallel_for(db.size(), policy, [&](std::size_t i) {
    const auto& e = db[i];
    bool ok = true;
    for (const auto& [slot, value] : constraints) {
      auto it = e.find(slot);
      if (it == e.end() || it->second != value) {
        ok = false;
        break;
      }
    }
    truth[i] = ok ? 1 : 0;
  });
  return truth;
}

std::size_t bin_index(std::size_t count) { return std::min<std::size_t>(count, 5); }

DbBins compress_count(const std::vector<std::uint8_t>& truth) {
  std::size_t n = 0;
  for (auto t : truth) n += t ? 1 : 0;
  DbBins bins{};
  bins[bin_index(n)] = 1;
  return bins;
}

DbState update_pointer(const DbState& state, const std::vector<std::uint8_t>& truth, std::mt19937_64& rng) {
  DbState next;
  next.truth = truth;
  next.bins = compress_count(truth);
  if (state.pointer && *state.pointer < truth.size() && truth[*state.pointer]) {
    next.pointer = state.pointer;
    return next;
  }
  std::vector<std::size_t> candidates;
  for (std::size_t i = 0; i < truth.size(); ++i) {
    if (truth[i]) candidates.push_back(i);
  }
  if (!candidates.empty()) {
    std::uniform_int_distribution<std::size_t> pick(0, candidates.size() - 1);
    next.pointer = candidates[pick(rng)];
  }
  return next;
}

BeliefState BeliefState::initial(const Ontology& ontology, bool with_requestable) {
  BeliefState b;
  for (const auto& s : ontology.informable()) {
    std::vector<double> p(s.values.size() + 2, 0.0);
    p[none_index(s.values.size())] = 1.0;
    b.informable.push_back(std::move(p));
  }
  if (with_requestable) b.requestable.assign(ontology.requestable().size(), 0.0);
  return b;
}

std::size_t BeliefState::argmax(std::size_t slot) const {
  // Ties resolve towards the end of the layout (not-mentioned, then dontcare).
  const auto& p = informable.at(slot);
  std::size_t best = 0;
  for (std::size_t i = 1; i < p.size(); ++i) {
    if (p[i] >= p[best]) best = i;
  }
  return best;
}

SlotStatus BeliefState::status(std::size_t slot) const {
  const std::size_t n = informable.at(slot).size() - 2;
  const std::size_t a = argmax(slot);
  if (a == none_index(n)) return SlotStatus::NotMentioned;
  if (a == dontcare_index(n)) return SlotStatus::DontCare;
  return SlotStatus::Value;
}

nlohmann::json BeliefState::to_json(const Ontology& ontology) const {
  nlohmann::json j;
  for (std::size_t s = 0; s < ontology.informable().size(); ++s) {
    const auto& slot = ontology.informable()[s];
    nlohmann::json dist = nlohmann::json::object();
    for (std::size_t v = 0; v < slot.values.size(); ++v) dist[slot.values[v]] = informable[s][v];
    dist[kDontCare] = informable[s][dontcare_index(slot.values.size())];
    dist[kNotMentioned] = informable[s][none_index(slot.values.size())];
    j["informable"][slot.name] = dist;
  }
  j["requestable"] = nlohmann::json::object();
  for (std::size_t r = 0; r < requestable.size(); ++r) j["requestable"][ontology.requestable()[r]] = requestable[r];
  return j;
}

}  // namespace ndm
