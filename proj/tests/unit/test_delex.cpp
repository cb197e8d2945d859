#include <doctest.h>

#include <random>
#include <set>

#include "helpers.hpp"
#include "ndm/delex.hpp"

using namespace ndm;
using ndm::test::restaurant;
using ndm::test::restaurant_db;

TEST_CASE("tokenize splits punctuation and keeps generic tokens") {
  CHECK(tokenize("Hello, World!") == std::vector<std::string>{"hello", ",", "world", "!"});
  CHECK(tokenize("  <v.food>  food?") == std::vector<std::string>{"<v.food>", "food", "?"});
  CHECK(tokenize("a <b c") == std::vector<std::string>{"a", "<b", "c"});
  CHECK(tokenize("").empty());
}

TEST_CASE("generic token parsing") {
  CHECK(value_token("food") == "<v.food>");
  CHECK(slot_token("area") == "<s.area>");
  auto v = parse_generic("<v.phone>");
  REQUIRE(v);
  CHECK(v->kind == MatchKind::Value);
  CHECK(v->slot == "phone");
  CHECK(parse_generic("<dontcare>")->kind == MatchKind::DontCare);
  CHECK_FALSE(parse_generic("<x.food>"));
  CHECK_FALSE(parse_generic("food"));
}

TEST_CASE("delexicalise a single value") {
  const auto d = delexicalise("I want Chinese food", restaurant());
  CHECK(join_tokens(d.tokens) == "i want <v.food> food");
  REQUIRE(d.matches.size() == 1);
  CHECK(d.matches[0].slot == "food");
  CHECK(d.matches[0].value == "chinese");
  CHECK(d.matches[0].kind == MatchKind::Value);
  CHECK(d.matches[0].index == 2);
}

TEST_CASE("delexicalise slot names, dontcare and values together") {
  const auto d = delexicalise("Restaurant in any area that serves Vietnamese food", restaurant());
  CHECK(join_tokens(d.tokens) == "restaurant in <dontcare> <s.area> that serves <v.food> food");
  REQUIRE(d.matches.size() == 3);
  CHECK(d.matches[0].kind == MatchKind::DontCare);
  CHECK(d.matches[1] == Match{"area", "", MatchKind::SlotName, 3});
  CHECK(d.matches[2] == Match{"food", "vietnamese", MatchKind::Value, 6});
}

TEST_CASE("longest match wins") {
  const auto d = delexicalise("modern european or european please", restaurant());
  REQUIRE(d.matches.size() == 2);
  CHECK(d.matches[0].value == "modern european");
  CHECK(d.matches[1].value == "european");
  CHECK(join_tokens(d.tokens) == "<v.food> or <v.food> please");
}

TEST_CASE("every generic token is recorded once, against a brute-force scan") {
  const auto& o = restaurant();
  std::mt19937_64 rng(2);
  const std::vector<std::string> filler{"i", "want", "a", "the", "in", "please", "and", "or", "food"};
  std::vector<std::string> pool = filler;
  for (const auto& s : o.informable()) {
    for (const auto& v : s.values) pool.push_back(v);
  }
  for (int k = 0; k < 300; ++k) {
    std::string text;
    const int n = 1 + static_cast<int>(rng() % 8);
    for (int i = 0; i < n; ++i) text += pool[rng() % pool.size()] + " ";
    const auto d = delexicalise(text, o);
    std::size_t generic = 0;
    for (std::size_t i = 0; i < d.tokens.size(); ++i) {
      if (!parse_generic(d.tokens[i])) continue;
      ++generic;
      std::size_t hits = 0;
      for (const auto& m : d.matches) hits += m.index == i;
      CHECK(hits == 1);
    }
    CHECK(generic == d.matches.size());
    // Idempotence.
    CHECK(delexicalise(join_tokens(d.tokens), o).tokens == d.tokens);
  }
}

TEST_CASE("database attributes delexicalise with the DB lexicon") {
  const Lexicon lex(restaurant(), &restaurant_db());
  const auto d = lex.delexicalise("thanh binh is at 189 histon road romsey , phone 01223 286154");
  CHECK(join_tokens(d.tokens) == "<v.name> is at <v.address> , <s.phone> <v.phone>");
}

TEST_CASE("lexicalise fills values from the entity") {
  const auto& o = restaurant();
  std::mt19937_64 rng(1);
  const Entity e{{"name", "thanh binh"}, {"food", "vietnamese"}};
  CHECK(lexicalise(tokenize("<v.name> serves <v.food> food"), &e, o, rng) == "thanh binh serves vietnamese food");
  CHECK(lexicalise(tokenize("hello , how can i help ?"), nullptr, o, rng) == "hello , how can i help ?");
}

TEST_CASE("lexicalise samples slot forms deterministically") {
  const auto& o = ndm::test::tiny();
  const std::set<std::string> forms{"food", "type of food"};
  std::set<std::string> seen;
  for (std::uint64_t seed = 0; seed < 40; ++seed) {
    std::mt19937_64 a(seed), b(seed);
    const auto x = lexicalise({"<s.food>"}, nullptr, o, a);
    CHECK(x == lexicalise({"<s.food>"}, nullptr, o, b));
    CHECK(forms.count(x) == 1);
    seen.insert(x);
  }
  CHECK(seen == forms);
}

TEST_CASE("value token without an entity") {
  const auto& o = restaurant();
  std::mt19937_64 rng(1);
  CHECK_THROWS_WITH(lexicalise({"<v.name>"}, nullptr, o, rng), "no entity selected");
  bool unresolved = false;
  CHECK(lexicalise({"<v.name>", "is", "nice"}, nullptr, o, rng, &unresolved) == "<v.name> is nice");
  CHECK(unresolved);
}

TEST_CASE("round trip with identity forms") {
  const auto& o = restaurant();
  const Entity e = restaurant_db()[0];
  const Lexicon lex(o, &restaurant_db());
  std::mt19937_64 rng(3);
  const std::string s = e.at("name") + " serves " + e.at("food") + " food in the " + e.at("area");
  const auto d = lex.delexicalise(s);
  CHECK(lexicalise(d.tokens, &e, o, rng) == join_tokens(tokenize(s)));
}
