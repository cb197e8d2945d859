#include <doctest.h>

#include <algorithm>
#include <numeric>
#include <random>
#include <set>

#include "helpers.hpp"
#include "ndm/belief.hpp"
#include "ndm/ontology.hpp"

using namespace ndm;
using ndm::test::restaurant;
using ndm::test::restaurant_db;

namespace {

BeliefState peaked(const Ontology& o, const std::map<std::string, std::string>& peaks) {
  auto b = BeliefState::initial(o, true);
  for (std::size_t s = 0; s < o.informable().size(); ++s) {
    const auto& slot = o.informable()[s];
    auto it = peaks.find(slot.name);
    if (it == peaks.end()) continue;
    const std::size_t n = slot.values.size();
    auto& p = b.informable[s];
    std::fill(p.begin(), p.end(), 0.1 / static_cast<double>(n + 1));
    const std::size_t k = it->second == kDontCare ? BeliefState::dontcare_index(n) : *o.value_index(s, it->second);
    p[k] = 0.9;
  }
  return b;
}

std::vector<std::uint8_t> brute_force(const Database& db, const DbQuery& q) {
  std::vector<std::uint8_t> out;
  for (const auto& e : db.entities()) {
    bool ok = true;
    for (const auto& [slot, value] : q) {
      auto it = e.find(slot);
      if (it == e.end() || it->second != value) ok = false;
    }
    out.push_back(ok ? 1 : 0);
  }
  return out;
}

}  // namespace

TEST_CASE("restaurant ontology and database load") {
  const auto& o = restaurant();
  CHECK(o.informable().size() == 3);
  CHECK(o.requestable().size() == 7);
  for (const char* s : {"food", "pricerange", "area"}) {
    CHECK(o.is_informable(s));
    CHECK(o.is_requestable(s));
  }
  CHECK(restaurant_db().size() == 99);
  for (const auto& s : o.informable()) {
    for (const auto& v : s.values) CHECK_FALSE(o.value_forms(s.name, v).empty());
  }
}

TEST_CASE("form_query examples") {
  const auto& o = restaurant();
  CHECK(form_query(BeliefState::initial(o, true), o).empty());
  CHECK(form_query(peaked(o, {{"food", "vietnamese"}}), o) == DbQuery{{"food", "vietnamese"}});
  CHECK(form_query(peaked(o, {{"food", kDontCare}, {"area", "north"}}), o) == DbQuery{{"area", "north"}});
}

TEST_CASE("apply_query examples") {
  const auto& o = restaurant();
  const auto& db = restaurant_db();
  const auto all = apply_query(db, o, {});
  CHECK(all.size() == 99);
  CHECK(std::count(all.begin(), all.end(), 1) == 99);
  const auto none = apply_query(db, o, {{"food", "polish"}, {"area", "north"}, {"pricerange", "expensive"}});
  CHECK(std::count(none.begin(), none.end(), 1) == 0);
  const auto tb = apply_query(db, o, {{"food", "vietnamese"}, {"area", "west"}});
  REQUIRE(std::count(tb.begin(), tb.end(), 1) >= 1);
  CHECK_THROWS_WITH(apply_query(db, o, {{"food", "martian"}}), "query outside ontology");
  CHECK_THROWS_WITH(apply_query(db, o, {{"colour", "red"}}), "query outside ontology");
  CHECK(apply_query(db, o, {{"area", "north"}}, ExecPolicy::Parallel) == apply_query(db, o, {{"area", "north"}}));
}

TEST_CASE("apply_query agrees with a linear scan and is monotone") {
  const auto& o = restaurant();
  std::mt19937_64 rng(5);
  const auto& ents = restaurant_db().entities();
  for (int k = 0; k < 200; ++k) {
    nlohmann::json j = nlohmann::json::array();
    const std::size_t n = 1 + rng() % 20;
    for (std::size_t i = 0; i < n; ++i) j.push_back(ents[rng() % ents.size()]);
    const auto db = Database::from_json(j, o);
    DbQuery q;
    for (const auto& s : o.informable()) {
      if (rng() % 2) q[s.name] = s.values[rng() % s.values.size()];
    }
    const auto truth = apply_query(db, o, q);
    CHECK(truth == brute_force(db, q));
    if (!q.empty()) {
      auto looser = q;
      looser.erase(looser.begin());
      const auto wide = apply_query(db, o, looser);
      for (std::size_t i = 0; i < n; ++i) CHECK(truth[i] <= wide[i]);
    }
  }
}

TEST_CASE("compress_count is the six-bin piecewise map") {
  CHECK(compress_count({}) == DbBins{1, 0, 0, 0, 0, 0});
  CHECK(compress_count({0, 1, 0}) == DbBins{0, 1, 0, 0, 0, 0});
  CHECK(compress_count(std::vector<std::uint8_t>(7, 1)) == DbBins{0, 0, 0, 0, 0, 1});
  for (std::size_t c = 0; c <= 10000; ++c) {
    const std::size_t expect = c < 5 ? c : 5;
    CHECK(bin_index(c) == expect);
  }
  std::vector<std::uint8_t> truth(10000, 0);
  for (std::size_t c = 0; c <= 10000; c += 997) {
    std::fill(truth.begin(), truth.end(), 0);
    std::fill(truth.begin(), truth.begin() + static_cast<std::ptrdiff_t>(c), 1);
    const auto bins = compress_count(truth);
    CHECK(std::accumulate(bins.begin(), bins.end(), 0) == 1);
    CHECK(bins[c < 5 ? c : 5] == 1);
  }
}

TEST_CASE("update_pointer keeps, moves or drops the entity") {
  std::mt19937_64 rng(1);
  DbState s;
  s.pointer = 5;
  std::vector<std::uint8_t> truth(10, 0);
  truth[5] = 1;
  truth[2] = 1;
  CHECK(update_pointer(s, truth, rng).pointer == 5u);

  truth[5] = 0;
  truth[7] = 1;
  std::set<std::size_t> seen;
  for (int k = 0; k < 50; ++k) {
    const auto next = update_pointer(s, truth, rng);
    REQUIRE(next.pointer.has_value());
    seen.insert(*next.pointer);
  }
  CHECK(seen == std::set<std::size_t>{2, 7});

  const auto empty = update_pointer(s, std::vector<std::uint8_t>(10, 0), rng);
  CHECK_FALSE(empty.pointer.has_value());
  CHECK(empty.bins == DbBins{1, 0, 0, 0, 0, 0});

  std::mt19937_64 a(9), b(9);
  DbState fresh;
  CHECK(update_pointer(fresh, truth, a).pointer == update_pointer(fresh, truth, b).pointer);
}

TEST_CASE("database rejects informable values outside the ontology") {
  CHECK_THROWS(Database::from_json(nlohmann::json::parse(R"([{"name": "x", "food": "martian"}])"), restaurant()));
}

TEST_CASE("belief argmax and status") {
  const auto& o = ndm::test::tiny();
  auto b = BeliefState::initial(o, true);
  CHECK(b.status(0) == SlotStatus::NotMentioned);
  CHECK(b.requestable.size() == 3);
  b.informable[0] = {0.1, 0.1, 0.7, 0.1};
  CHECK(b.status(0) == SlotStatus::DontCare);
  b.informable[0] = {0.6, 0.2, 0.1, 0.1};
  CHECK(b.status(0) == SlotStatus::Value);
  CHECK(b.argmax(0) == 0);
  b.requestable[2] = 0.51;
  CHECK(b.requested(2));
  CHECK_FALSE(b.requested(1));
}
