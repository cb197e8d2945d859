#include "ndm/delex.hpp"

#include <algorithm>
#include <cctype>
#include <stdexcept>

namespace ndm {
namespace {

bool is_split_char(char c) {
  switch (c) {
    case '.': case ',': case '!': case '?': case ';': case ':': case '"': case '(': case ')':
      return true;
    default:
      return false;
  }
}

}  // namespace

std::vector<std::string> tokenize(const std::string& text) {
  std::vector<std::string> out;
  std::string cur;
  auto flush = [&] {
    if (!cur.empty()) out.push_back(std::move(cur));
    cur.clear();
  };
  for (std::size_t i = 0; i < text.size(); ++i) {
    const char c = static_cast<char>(std::tolower(static_cast<unsigned char>(text[i])));
    if (c == '<') {
      const auto close = text.find('>', i);
      if (close != std::string::npos) {
        const auto candidate = normalize(text.substr(i, close - i + 1));
        if (parse_generic(candidate)) {
          flush();
          out.push_back(candidate);
          i = close;
          continue;
        }
      }
    }
    if (std::isspace(static_cast<unsigned char>(c))) {
      flush();
    } else if (is_split_char(c)) {
      flush();
      out.emplace_back(1, c);
    } else {
      cur.push_back(c);
    }
  }
  flush();
  return out;
}

std::string join_tokens(const std::vector<std::string>& tokens) {
  std::string out;
  for (std::size_t i = 0; i < tokens.size(); ++i) {
    if (i) out.push_back(' ');
    out += tokens[i];
  }
  return out;
}

std::string value_token(const std::string& slot) { return "<v." + slot + ">"; }
std::string slot_token(const std::string& slot) { return "<s." + slot + ">"; }

std::optional<GenericToken> parse_generic(const std::string& token) {
  if (token == kDontCareToken) return GenericToken{MatchKind::DontCare, {}};
  if (token.size() < 6 || token.front() != '<' || token.back() != '>' || token[2] != '.') return std::nullopt;
  const std::string slot = token.substr(3, token.size() - 4);
  if (slot.empty()) return std::nullopt;
  for (char c : slot) {
    if (!(std::isalnum(static_cast<unsigned char>(c)) || c == '_')) return std::nullopt;
  }
  if (token[1] == 'v') return GenericToken{MatchKind::Value, slot};
  if (token[1] == 's') return GenericToken{MatchKind::SlotName, slot};
  return std::nullopt;
}

Lexicon::Lexicon(const Ontology& ontology, const Database* db) {
  std::size_t order = 0;
  auto add = [&](const std::string& form, MatchKind kind, const std::string& slot, const std::string& value) {
    auto toks = tokenize(form);
    if (toks.empty()) return;
    entries_.push_back({std::move(toks), kind, slot, value, order++});
  };
  for (const auto& s : ontology.informable()) {
    for (const auto& v : s.values) {
      for (const auto& f : ontology.value_forms(s.name, v)) add(f, MatchKind::Value, s.name, v);
    }
  }
  for (const auto& slot : ontology.all_slots()) {
    for (const auto& f : ontology.slot_forms(slot)) add(f, MatchKind::SlotName, slot, {});
  }
  for (const auto& f : ontology.dontcare_forms()) add(f, MatchKind::DontCare, {}, {});
  if (db) {
    for (const auto& slot : ontology.requestable()) {
      if (ontology.is_informable(slot)) continue;
      for (std::size_t i = 0; i < db->size(); ++i) {
        const auto v = db->attribute(i, slot);
        if (!v.empty()) add(v, MatchKind::Value, slot, v);
      }
    }
  }
}

bool Lexicon::is_surface_token(const std::string& token) const {
  return std::any_of(entries_.begin(), entries_.end(),
                     [&](const Entry& e) { return e.form.size() == 1 && e.form[0] == token; });
}

DelexUtterance Lexicon::delexicalise_tokens(const std::vector<std::string>& in) const {
  DelexUtterance out;
  std::size_t i = 0;
  while (i < in.size()) {
    if (auto g = parse_generic(in[i])) {
      out.matches.push_back({g->slot, {}, g->kind, out.tokens.size()});
      out.tokens.push_back(in[i]);
      ++i;
      continue;
    }
    const Entry* best = nullptr;
    for (const auto& e : entries_) {
      const std::size_t n = e.form.size();
      if (i + n > in.size()) continue;
      if (best && (n < best->form.size() || (n == best->form.size() && e.order > best->order))) continue;
      if (std::equal(e.form.begin(), e.form.end(), in.begin() + static_cast<std::ptrdiff_t>(i))) best = &e;
    }
    if (!best) {
      out.tokens.push_back(in[i]);
      ++i;
      continue;
    }
    std::string tok;
    switch (best->kind) {
      case MatchKind::Value: tok = value_token(best->slot); break;
      case MatchKind::SlotName: tok = slot_token(best->slot); break;
      case MatchKind::DontCare: tok = kDontCareToken; break;
    }
    out.matches.push_back({best->slot, best->value, best->kind, out.tokens.size()});
    out.tokens.push_back(tok);
    i += best->form.size();
  }
  return out;
}

DelexUtterance Lexicon::delexicalise(const std::string& text) const { return delexicalise_tokens(tokenize(text)); }

DelexUtterance delexicalise(const std::string& text, const Ontology& ontology) {
  return Lexicon(ontology).delexicalise(text);
}

std::string lexicalise(const std::vector<std::string>& skeletal, const Entity* entity, const Ontology& ontology,
                       std::mt19937_64& rng, bool* unresolved) {
  auto sample = [&](const std::vector<std::string>& forms, const std::string& fallback) {
    if (forms.empty()) return fallback;
    std::uniform_int_distribution<std::size_t> pick(0, forms.size() - 1);
    return forms[pick(rng)];
  };
  std::vector<std::string> out;
  out.reserve(skeletal.size());
  for (const auto& tok : skeletal) {
    auto g = parse_generic(tok);
    if (!g) {
      out.push_back(tok);
      continue;
    }
    switch (g->kind) {
      case MatchKind::SlotName:
        out.push_back(sample(ontology.slot_forms(g->slot), g->slot));
        break;
      case MatchKind::DontCare:
        out.push_back(sample(ontology.dontcare_forms(), kDontCare));
        break;
      case MatchKind::Value: {
        const std::string* v = nullptr;
        if (entity) {
          auto it = entity->find(g->slot);
          if (it != entity->end()) v = &it->second;
        }
        if (v) {
          out.push_back(*v);
        } else if (unresolved) {
          *unresolved = true;
          out.push_back(tok);
        } else {
          throw std::runtime_error(entity ? "entity has no attribute " + g->slot : "no entity selected");
        }
        break;
      }
    }
  }
  return join_tokens(out);
}

}  // namespace ndm
