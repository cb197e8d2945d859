// Template-grammar corpus generator.
//
// System behaviour is a function of what a model can observe: the dialogue
// act follows the belief state and the DB match count, and every template
// variant is chosen by a hash of the delexicalised user turn. User phrasing,
// goals and fillers are random.

#include <algorithm>
#include <random>
#include <stdexcept>

#include "ndm/corpus.hpp"

namespace ndm {
namespace {

using Strs = std::vector<std::string>;

const Strs kUserOpeners{"well ,", "ok ,", "um ,", "hmm ,", "alright ,", "so ,", "right ,", "hi ,", "hello ,",
                        "good evening ,", "excuse me ,", "okay ,", "uh ,", "hey ,", "good afternoon ,",
                        "erm ,", "oh ,", "great ,", "cool ,", "thanks ,"};

// Extra sentences appended to user turns. They carry most of the lexical
// variety and must not contain any surface form of the lexicon.
const Strs kUserTails{
    "it is for my birthday .", "it is for our anniversary .", "i am meeting a friend there .",
    "we are celebrating tonight .", "my parents are visiting this weekend .", "i am new in cambridge .",
    "i am visiting from london .", "we will be a group of six .", "it is a business lunch .",
    "i want to take my wife out .", "i want to take my husband somewhere nice .",
    "my colleagues are coming along .", "we have a table booking later .", "i will be there around seven .",
    "my kids are very hungry .", "we just arrived by train .", "i am staying at a hotel nearby .",
    "my sister recommended this service .", "it is a surprise for my girlfriend .",
    "it is a surprise for my boyfriend .", "we are students on a small allowance .",
    "i have been walking all day .", "my friends are waiting outside .", "it is a farewell dinner .",
    "it is a graduation celebration .", "we would like to sit outside if possible .",
    "we need somewhere quiet to talk .", "i am in a bit of a hurry .", "it should be easy to reach by bus .",
    "i hope they have vegetarian options .", "i am meeting my team after work .",
    "it is my first time in this city .", "i heard great things about the local restaurants .",
    "we want to try something new tonight .", "my grandmother is joining us .",
    "it is raining so we do not want to walk far .", "i forgot to book earlier .",
    "we are going to the cinema afterwards .", "i need to impress a client .",
    "it is a reunion with old school friends .", "we are on holiday here .",
    "my brother is flying in tomorrow .", "the weather is lovely today .", "i am really starving .",
    "we would like a romantic evening .", "we are a couple of tourists .",
    "my daughter is turning ten .", "i just finished a long meeting .", "we are coming after the theatre .",
    "i would like to bring my dog .", "we prefer somewhere lively .", "somewhere with good music would be nice .",
    "my uncle is paying tonight .", "we finished our exams today .", "i am writing a travel blog .",
    "it has been a long week .", "my cousin is getting married soon .", "we need parking nearby .",
    "my flight leaves early tomorrow .", "i am meeting someone from work .", "i want to celebrate a promotion .",
    "my neighbours are coming with us .", "we are looking forward to a good meal .",
    "it is for a small party .", "i am new to this service .", "we are bringing a baby .",
    "my partner loves trying different dishes .", "i have a voucher to use .",
    "we will probably stay late .", "a friend told me to ask here .",
    "my boss wants to come too .",
    "we are planning a quiet night out .",
    "i am organising a team dinner .",
    "the children love noodles and pizza .",
    "we will arrive by taxi .",
    "i walked past the river earlier .",
    "we are attending a conference this week .",
    "my mother is very picky .",
    "my father just retired .",
    "we want to watch the football afterwards .",
    "it is a leaving party for a colleague .",
    "we are vegetarians mostly .",
    "my friend is allergic to nuts .",
    "we would like to book for eight people .",
    "i am hosting some guests from abroad .",
    "we are exploring the city today .",
    "i finished work early today .",
    "we have tickets for a concert later .",
    "my housemates are hungry too .",
    "we are doing a food tour .",
    "it is a christmas party .",
    "we are celebrating a new job .",
    "my aunt is visiting from scotland .",
    "i would rather avoid crowded places .",
    "we want somewhere with friendly staff .",
    "i am meeting my tutor .",
    "we are cycling around town today .",
    "it is a charity event afterwards .",
    "i need to eat before my lecture .",
    "we spent the morning at the museum .",
    "my battery is almost dead .",
    "we have been shopping all afternoon .",
    "my grandparents are celebrating fifty years together .",
    "we are hoping for a nice view .",
    "we would love good desserts .",
    "i am meeting an old colleague .",
    "we are on a tight schedule .",
    "my wife is pregnant so nothing too spicy .",
    "we are coming straight from the airport .",
    "it is a rehearsal dinner .",
    "we want a relaxed atmosphere .",
    "my sons are playing rugby nearby .",
    "we are from out of town .",
    "i am researching places for a guidebook .",
    "my teammates won the match today .",
    "we would like decent wine .",
    "i prefer somewhere with big portions .",
    "it is a late supper .",
    "the kids finished school today .",
    "we are meeting after the lecture ."};

const Strs kFoodPhrases{"serving {F} food", "that serves {F} food", "with {F} food", "that does {F} food",
                        "offering {F} food"};
const Strs kPricePhrases{"in the {P} {SP}", "that is {P}", "with a {P} {SP}", "which is {P}"};
const Strs kAreaPhrases{"in the {A} of town", "in the {A} {SA}", "somewhere in the {A}", "located in the {A}",
                        "on the {A} {SA}"};
const Strs kDontCareClauses{"and i don't care about the {S}", ". any {S} is fine", ". the {S} does not matter",
                            "and the {S} doesn't matter", ". i do not care about the {S}",
                            "and any {S} will do"};
const Strs kRestaurantOpeners{"i am looking for a restaurant", "i need a restaurant", "i want to find a restaurant",
                              "can you help me find a restaurant", "i would like to find a place to eat",
                              "i am looking for somewhere to eat", "please find me a restaurant",
                              "i want a restaurant", "could you recommend a restaurant"};
const Strs kAdjOpeners{"i want a", "i am looking for a", "i need a", "find me a", "i would like a",
                       "is there a", "can you find me a"};

const Strs kFoodAnswers{"{F} food please", "{F}", "i would like {F} food", "{F} food", "i want {F} food",
                        "let us try {F}", "something {F} please"};
const Strs kPriceAnswers{"{P}", "{P} please", "something in the {P} {SP}", "i want something {P}",
                         "the {P} {SP}", "{P} would be good"};
const Strs kAreaAnswers{"{A}", "the {A} please", "in the {A} of town", "i would prefer the {A}", "{A} please",
                        "the {A} {SA}"};
const Strs kDontCareAnswers{"i don't care", "it doesn't matter", "any {S} is fine", "whatever", "i do not care",
                            "it does not matter", "any will do", "i dont care", "any {S}"};
const Strs kChangeFood{"how about {F} food then", "ok , what about {F}", "then i would like {F} food",
                       "can you try {F} food instead", "what about {F} food", "{F} food then"};
const Strs kGreetings{"hello", "hi there", "hello , i need some help", "good evening", "hi",
                      "hello , can you help me"};
const Strs kAccept{"yes please", "yes", "sure", "yes , that would be great", "yes please , thank you",
                   "sure , thanks", "yes i would", "yeah please"};
const Strs kDecline{"no thanks", "no , thank you", "not now", "no"};
const Strs kExplicit1{"what is the {S} ?", "could i get the {S} please ?", "can you tell me the {S} ?",
                      "i would like to know the {S}", "may i have their {S} ?", "what is their {S} ?"};
const Strs kExplicit2{"what is the {S} and {S2} ?", "can you give me the {S} and the {S2} ?",
                      "could i have their {S} and {S2} please ?", "i need the {S} and {S2}"};
const Strs kAddressNatural{"where is it ?", "where is it located ?", "where can i find it ?",
                           "how do i get there ?"};
const Strs kAlsoRequest{"and the {S} too", ", and what is their {S} ?", ", and can i have the {S} ?"};
const Strs kPriceRequest{"what is their {S} ?", "what {S} is it in ?", "is it within my {S} ?"};
const Strs kThanksBye{"thank you , goodbye", "thanks , bye", "that is all , thank you", "great , thank you very much . goodbye",
                      "ok thank you , good bye", "thank you so much , bye", "perfect , thanks . goodbye",
                      "that will be all , thanks"};
const Strs kGiveUp{"ok , thank you anyway . goodbye", "never mind then , bye", "oh well , thanks anyway",
                   "that is a shame . goodbye"};

// Machine skeletons.
const Strs kGreetPrefix{"hello , welcome to the cambridge restaurant system .", "hello , how can i help you ?",
                        "welcome ! i can help you find a restaurant ."};
const Strs kAskPrefix{"", "sure .", "ok .", "i can help with that ."};
const Strs kAskFood{"what <s.food> would you like ?", "do you have a <s.food> preference ?",
                    "which <s.food> are you interested in ?"};
const Strs kAskPrice{"what <s.pricerange> are you looking for ?", "do you have a <s.pricerange> in mind ?",
                     "which <s.pricerange> would you prefer ?"};
const Strs kAskArea{"what <s.area> would you like ?", "which <s.area> do you prefer ?",
                    "is there a <s.area> you would like ?"};
const Strs kNoMatch{"i am sorry , there is no restaurant matching your request . would you like a different <s.food> ?",
                    "sorry , i could not find a restaurant like that . would you like to try another <s.food> ?",
                    "unfortunately there is no such restaurant . can i help you with a different <s.food> ?"};
const Strs kOfferAdj{"nice", "great", "lovely", "popular"};
const Strs kOfferQuestion{"would you like their <s.{X}> ?", "would you like the <s.{X}> ?",
                          "do you want their <s.{X}> ?"};
const Strs kAnswerSlot{"the <s.{Y}> of <v.name> is <v.{Y}>", "their <s.{Y}> is <v.{Y}>",
                       "the <s.{Y}> is <v.{Y}>"};
const Strs kAnythingElse{"is there anything else i can help you with ?", "anything else ?",
                         "can i help you with anything else ?"};
const Strs kBye{"thank you for using our system . goodbye .", "you are welcome , goodbye .",
                "enjoy your meal ! goodbye .", "have a nice day . goodbye ."};
const Strs kGiveUpBye{"sorry i could not help . goodbye .", "goodbye ."};

void replace_all(std::string& s, const std::string& from, const std::string& to) {
  for (auto p = s.find(from); p != std::string::npos; p = s.find(from, p + to.size())) s.replace(p, from.size(), to);
}

std::uint64_t fnv1a(const std::string& s, std::uint64_t salt) {
  std::uint64_t h = 1469598103934665603ULL ^ (salt * 0x9E3779B97F4A7C15ULL);
  for (unsigned char c : s) {
    h ^= c;
    h *= 1099511628211ULL;
  }
  return h;
}

class Builder {
 public:
  Builder(const Ontology& o, const Database& db, std::uint64_t seed) : o_(o), db_(db), lex_(o, &db), rng_(seed) {
    for (const auto& v : o.informable().at(food()).values) {
      bool served = false;
      for (const auto& e : db.entities()) served = served || e.at("food") == v;
      (served ? served_ : unserved_).push_back(v);
    }
    if (unserved_.empty()) throw std::invalid_argument("ontology has no food without a restaurant");
  }

  Dialogue make(std::size_t index);

 private:
  std::size_t food() const { return *o_.informable_index("food"); }
  double uniform() { return std::uniform_real_distribution<double>(0.0, 1.0)(rng_); }
  std::size_t below(std::size_t n) { return std::uniform_int_distribution<std::size_t>(0, n - 1)(rng_); }
  const std::string& pick(const Strs& v) { return v[below(v.size())]; }
  std::string slot_form(const std::string& slot) {
    const auto f = o_.slot_forms(slot);
    return f.empty() ? slot : pick(f);
  }
  std::string value_form(const std::string& slot, const std::string& value) { return pick(o_.value_forms(slot, value)); }

  std::string fill(std::string t, const std::map<std::string, std::string>& values) {
    replace_all(t, "{SP}", slot_form("pricerange"));
    replace_all(t, "{SA}", slot_form("area"));
    for (const auto& [k, v] : values) replace_all(t, "{" + k + "}", v);
    return t;
  }
  std::string clause(const std::string& slot, const std::string& value);
  std::string answer(const std::string& slot, const std::string& value);
  std::string decorate(std::string core);

  std::size_t count_matches() const;
  std::string first_open_slot() const;

  // Machine helpers, all keyed on the delexicalised user turn.
  std::uint64_t key_ = 0;
  const std::string& choose(const Strs& v, std::uint64_t salt) const { return v[fnv1a(std::to_string(key_), salt) % v.size()]; }
  std::string ask(const std::string& slot) const;
  std::string offer_skeleton(std::string* asked) const;
  std::string answer_skeleton(const std::set<std::string>& slots) const;

  void push(std::string user, const std::string& skeleton, std::set<std::string> requested);
  void set_key(const std::string& user) { key_ = fnv1a(join_tokens(lex_.delexicalise(user).tokens), 0); }

  const Ontology& o_;
  const Database& db_;
  Lexicon lex_;
  std::mt19937_64 rng_;
  Strs served_, unserved_;

  Dialogue d_;
  std::map<std::string, std::string> labels_;
  const Entity* entity_ = nullptr;
};

std::string Builder::clause(const std::string& slot, const std::string& value) {
  if (value == kDontCare) return fill(pick(kDontCareClauses), {{"S", slot_form(slot)}});
  const auto form = value_form(slot, value);
  if (slot == "food") return fill(pick(kFoodPhrases), {{"F", form}});
  if (slot == "pricerange") return fill(pick(kPricePhrases), {{"P", form}});
  return fill(pick(kAreaPhrases), {{"A", form}});
}

std::string Builder::answer(const std::string& slot, const std::string& value) {
  if (value == kDontCare) return fill(pick(kDontCareAnswers), {{"S", slot_form(slot)}});
  const auto form = value_form(slot, value);
  if (slot == "food") return fill(pick(kFoodAnswers), {{"F", form}});
  if (slot == "pricerange") return fill(pick(kPriceAnswers), {{"P", form}});
  return fill(pick(kAreaAnswers), {{"A", form}});
}

std::string Builder::decorate(std::string core) {
  if (uniform() < 0.3) core = pick(kUserOpeners) + " " + core;
  if (uniform() < 0.5) {
    if (core.back() != '.' && core.back() != '?') core += " .";
    core += " " + pick(kUserTails);
  }
  return core;
}

std::size_t Builder::count_matches() const {
  std::size_t n = 0;
  for (const auto& e : db_.entities()) {
    bool ok = true;
    for (const auto& [slot, value] : labels_) {
      if (value != kDontCare && value != kNotMentioned && e.at(slot) != value) ok = false;
    }
    n += ok ? 1 : 0;
  }
  return n;
}

std::string Builder::first_open_slot() const {
  for (const auto& s : o_.informable()) {
    if (labels_.at(s.name) == kNotMentioned) return s.name;
  }
  return {};
}

std::string Builder::ask(const std::string& slot) const {
  const Strs& bank = slot == "food" ? kAskFood : slot == "pricerange" ? kAskPrice : kAskArea;
  const auto& prefix = choose(kAskPrefix, 1);
  return (prefix.empty() ? "" : prefix + " ") + choose(bank, 2);
}

std::string Builder::offer_skeleton(std::string* asked) const {
  static const Strs kAskable{"address", "phone", "postcode"};
  std::string s = "<v.name> is a " + choose(kOfferAdj, 3) + " <v.food> restaurant in the <v.area> of town";
  if (fnv1a(std::to_string(key_), 4) % 2 == 0) s += " in the <v.pricerange> <s.pricerange>";
  *asked = choose(kAskable, 5);
  std::string q = choose(kOfferQuestion, 6);
  replace_all(q, "{X}", *asked);
  return s + " . " + q;
}

std::string Builder::answer_skeleton(const std::set<std::string>& slots) const {
  std::string out;
  std::uint64_t salt = 7;
  for (const auto& s : o_.requestable()) {
    if (!slots.count(s)) continue;
    std::string part = choose(kAnswerSlot, salt++);
    replace_all(part, "{Y}", s);
    out += (out.empty() ? "" : " and ") + part;
  }
  return out + " . " + choose(kAnythingElse, 20);
}

void Builder::push(std::string user, const std::string& skeleton, std::set<std::string> requested) {
  Turn t;
  t.user = std::move(user);
  t.machine_delex = tokenize(skeleton);
  t.machine = lexicalise(t.machine_delex, entity_, o_, rng_);
  if (lex_.delexicalise(t.machine).tokens != t.machine_delex) {
    throw std::logic_error("synthetic machine turn does not round-trip: " + t.machine);
  }
  t.labels.informable = labels_;
  t.labels.requested = std::move(requested);
  d_.turns.push_back(std::move(t));
}

Dialogue Builder::make(std::size_t index) {
  d_ = Dialogue{};
  d_.id = "syn-" + std::to_string(index);
  labels_.clear();
  for (const auto& s : o_.informable()) labels_[s.name] = kNotMentioned;
  const Entity& target = db_[below(db_.size())];
  entity_ = nullptr;

  // Goal constraints: food usually, price and area sometimes; the rest are
  // left to dontcare when the system asks.
  std::map<std::string, std::string> goal;
  const double p_constrain[] = {0.9, 0.6, 0.6};
  for (std::size_t s = 0; s < o_.informable().size(); ++s) {
    const auto& slot = o_.informable()[s].name;
    goal[slot] = uniform() < p_constrain[std::min<std::size_t>(s, 2)] ? target.at(slot) : std::string(kDontCare);
  }
  if (std::all_of(goal.begin(), goal.end(), [](const auto& kv) { return kv.second == kDontCare; })) {
    goal["food"] = target.at("food");
  }
  const double mode = uniform();
  const bool impossible = mode < 0.05;
  const bool wrong_first = !impossible && mode < 0.25 && goal["food"] != kDontCare;
  if (impossible) goal["food"] = pick(unserved_);
  d_.goal.constraints = goal;

  // First user turn: optional greeting, then a chunk of constraints.
  std::string user;
  std::set<std::string> volunteered;
  if (uniform() < 0.25) {
    user = decorate(pick(kGreetings));
    set_key(user);
    push(user, choose(kGreetPrefix, 8) + " " + ask(first_open_slot()), {});
  }
  {
    std::map<std::string, std::string> chunk;
    for (const auto& [slot, value] : goal) {
      if (value != kDontCare ? uniform() < 0.7 : uniform() < 0.2) chunk[slot] = value;
    }
    if (wrong_first) chunk["food"] = pick(unserved_);
    if (chunk.empty()) {
      for (const auto& [slot, value] : goal) {
        if (value != kDontCare) {
          chunk[slot] = value;
          break;
        }
      }
    }
    const bool all_values = std::none_of(chunk.begin(), chunk.end(), [](const auto& kv) { return kv.second == kDontCare; });
    if (all_values && uniform() < 0.4) {
      user = pick(kAdjOpeners);
      if (chunk.count("pricerange")) user += " " + value_form("pricerange", chunk["pricerange"]);
      if (chunk.count("food")) user += " " + value_form("food", chunk["food"]);
      user += " restaurant";
      if (chunk.count("area")) user += " " + clause("area", chunk["area"]);
    } else {
      user = pick(kRestaurantOpeners);
      bool first = true;
      for (const auto& [slot, value] : chunk) {
        if (value == kDontCare) continue;
        user += (first ? " " : " and ") + clause(slot, value);
        first = false;
      }
      for (const auto& [slot, value] : chunk) {
        if (value == kDontCare) user += " " + clause(slot, value);
      }
    }
    for (const auto& [slot, value] : chunk) labels_[slot] = value;
    user = decorate(user);
  }

  // Constraint phase: the system asks for open slots until one entity is
  // pinned down or every slot is filled.
  std::string offered_slot;
  for (int guard = 0; guard < 12; ++guard) {
    set_key(user);
    const auto n = count_matches();
    const auto open = first_open_slot();
    if (n == 0) {
      push(user, choose(kNoMatch, 9), {});
      if (impossible) {
        user = decorate(pick(kGiveUp));
        set_key(user);
        push(user, choose(kGiveUpBye, 10), {});
        return d_;
      }
      labels_["food"] = goal["food"];
      user = decorate(fill(pick(kChangeFood), {{"F", value_form("food", goal["food"])}}));
      continue;
    }
    if (n == 1 || open.empty()) {
      entity_ = &target;
      push(user, offer_skeleton(&offered_slot), {});
      break;
    }
    push(user, ask(open), {});
    user = answer(open, goal[open]);
    labels_[open] = goal[open];
    for (const auto& [slot, value] : goal) {
      if (labels_[slot] == kNotMentioned && value != kDontCare && uniform() < 0.25) {
        user += " " + clause(slot, value);
        labels_[slot] = value;
      }
    }
    user = decorate(user);
  }
  if (!entity_) throw std::logic_error("synthetic dialogue never reached an offer");

  // Request phase.
  static const Strs kOthers{"address", "phone", "postcode"};
  Strs rest;
  for (const auto& s : kOthers) {
    if (s != offered_slot) rest.push_back(s);
  }
  std::shuffle(rest.begin(), rest.end(), rng_);
  std::vector<std::set<std::string>> rounds;
  if (uniform() < 0.75) {
    d_.goal.requests.insert(offered_slot);
    std::set<std::string> first{offered_slot};
    std::string u = pick(kAccept);
    if (uniform() < 0.3) {
      u += " " + fill(pick(kAlsoRequest), {{"S", slot_form(rest[0])}});
      first.insert(rest[0]);
      d_.goal.requests.insert(rest[0]);
    }
    user = decorate(u);
    rounds.push_back(first);
  } else {
    const std::size_t k = uniform() < 0.4 ? 2 : 1;
    std::set<std::string> first(rest.begin(), rest.begin() + static_cast<std::ptrdiff_t>(k));
    d_.goal.requests.insert(first.begin(), first.end());
    std::string u = pick(kDecline) + " . ";
    if (k == 2) {
      u += fill(pick(kExplicit2), {{"S2", slot_form(rest[1])}, {"S", slot_form(rest[0])}});
    } else if (rest[0] == "address" && uniform() < 0.5) {
      u += pick(kAddressNatural);
    } else {
      u += fill(pick(kExplicit1), {{"S", slot_form(rest[0])}});
    }
    user = decorate(u);
    rounds.push_back(first);
  }
  for (const auto& r : rounds.front()) d_.goal.requests.insert(r);
  // Occasional follow-up request for something not yet given.
  std::string follow;
  for (const auto& s : kOthers) {
    if (!d_.goal.requests.count(s)) follow = s;
  }
  std::set<std::string> second;
  std::string second_text;
  if (!follow.empty() && uniform() < 0.3) {
    second = {follow};
    second_text = follow == "address" && uniform() < 0.5 ? pick(kAddressNatural) : fill(pick(kExplicit1), {{"S", slot_form(follow)}});
  } else if (uniform() < 0.12) {
    second = {"pricerange"};
    second_text = fill(pick(kPriceRequest), {{"S", slot_form("pricerange")}});
  }

  set_key(user);
  push(user, answer_skeleton(rounds.front()), rounds.front());
  if (!second.empty()) {
    d_.goal.requests.insert(second.begin(), second.end());
    user = decorate(second_text);
    set_key(user);
    push(user, answer_skeleton(second), second);
  }
  user = decorate(pick(kThanksBye));
  set_key(user);
  push(user, choose(kBye, 11), {});

  if (uniform() < 0.06) {
    const std::size_t keep = 1 + below(d_.turns.size() - 1);
    d_.turns.resize(keep);
    d_.finished = false;
  }
  return d_;
}

}  // namespace

std::vector<Dialogue> generate_synthetic(const Ontology& ontology, const Database& db, std::size_t n_dialogues,
                                         std::uint64_t seed) {
  for (const auto* slot : {"food", "pricerange", "area"}) {
    if (!ontology.is_informable(slot)) throw std::invalid_argument(std::string("synthetic grammar needs slot ") + slot);
  }
  Builder b(ontology, db, seed);
  std::vector<Dialogue> out;
  out.reserve(n_dialogues);
  for (std::size_t i = 0; i < n_dialogues; ++i) out.push_back(b.make(i));
  return out;
}

}  // namespace ndm
