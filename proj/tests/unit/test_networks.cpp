#include <doctest.h>

#include <cmath>
#include <random>

#include "helpers.hpp"
#include "ndm/model.hpp"
#include "ndm/optim.hpp"

using namespace ndm;
using ndm::test::small_config;
using ndm::test::small_vocab;
using ndm::test::tiny;

namespace {

constexpr double kGradTol = 1e-4;

double sum(const std::vector<double>& v) {
  double s = 0;
  for (double x : v) s += x;
  return s;
}

const Ontology& one_slot() {
  static const Ontology o = Ontology::from_json(nlohmann::ordered_json::parse(R"({
    "informable": {"food": ["chinese", "indian"]}, "requestable": []})"));
  return o;
}

/// Generation-side parameters only (intent, policy, generator) in 64-bit.
ParameterStore<double> generation_store(const Ontology& o, std::size_t vocab, const TrainConfig& cfg,
                                        std::uint64_t seed) {
  ParameterStore<double> ps(seed);
  declare_intent(ps, vocab, cfg);
  declare_policy(ps, o, cfg);
  declare_generator(ps, vocab, cfg);
  return ps;
}

SummaryBelief random_summary(const Ontology& o, bool requestable, std::mt19937_64& rng) {
  auto b = BeliefState::initial(o, requestable);
  std::uniform_real_distribution<double> u(0.05, 1.0);
  for (auto& p : b.informable) {
    for (auto& x : p) x = u(rng);
    const double s = sum(p);
    for (auto& x : p) x /= s;
  }
  for (auto& r : b.requestable) r = u(rng);
  return summarize_belief(b);
}

}  // namespace

// ---------------------------------------------------------------- intent

TEST_CASE("intent encoder") {
  const auto& o = tiny();
  const auto vocab = small_vocab(o);
  const Lexicon lex(o);
  auto cfg = small_config();
  ParameterStore<double> ps(3);
  declare_intent(ps, vocab.size(), cfg);

  const auto a = prepare_turn(lex, vocab, "i want chinese food", true);
  const auto b = prepare_turn(lex, vocab, "i want indian food", true);
  CHECK(a.ids == b.ids);
  Graph<double> g(false);
  Var za = encode_intent(g, ps, cfg, a.ids), zb = encode_intent(g, ps, cfg, b.ids);
  CHECK(g.value(za) == g.value(zb));
  CHECK(g.dim(za) == cfg.hidden);
  CHECK_THROWS_WITH(encode_intent(g, ps, cfg, {}), "empty user turn");

  SUBCASE("zero parameters give the zero vector") {
    ps.fill(0.0);
    for (double v : g.value(encode_intent(g, ps, cfg, a.ids))) CHECK(v == 0.0);
  }
  SUBCASE("cnn variant pools to the hidden size") {
    auto c = small_config(false, "cnn");
    ParameterStore<double> pc(3);
    declare_intent(pc, vocab.size(), c);
    CHECK(g.dim(encode_intent(g, pc, c, a.ids)) == c.hidden);
  }
  SUBCASE("empty text becomes the null token") {
    const auto n = prepare_turn(lex, vocab, "   ", true);
    CHECK(n.ids == std::vector<std::size_t>{Vocabulary::kNull});
    CHECK(prepare_turn(lex, vocab, "", false).empty());
  }
}

TEST_CASE("default sizes") {
  const TrainConfig cfg;
  CHECK(cfg.hidden == 50);
  CHECK(cfg.conv_layers == 3);
  CHECK(cfg.filter_width == 3);
  CHECK(cfg.clip == 1.0);
  CHECK(cfg.beam_width == 10);
  const auto& o = ndm::test::restaurant();
  const auto vocab = small_vocab(o);
  auto m = Model::create(cfg, o, vocab);
  Graph<float> g(false);
  Var z = encode_intent(g, m.params, cfg, {4, 5, 6});
  CHECK(g.dim(z) == 50);
  // Seven requestable trackers.
  std::size_t req = 0;
  for (const auto& n : m.params.names()) req += n.rfind("trk.req.", 0) == 0 && n.find(".g_none") != std::string::npos;
  CHECK(req == 7);
}

// ---------------------------------------------------------------- trackers

TEST_CASE("tracker feature extraction") {
  const auto& o = tiny();
  const auto vocab = small_vocab(o);
  const Lexicon lex(o);
  auto cfg = small_config();
  ParameterStore<double> ps(4);
  const auto key = informable_key("food");
  declare_informable_tracker(ps, key, vocab.size(), cfg);
  const auto& slot = o.informable()[0];
  Graph<double> g(false);

  SUBCASE("absent value leaves its positional block empty") {
    const auto u = prepare_turn(lex, vocab, "i want indian food", true);
    auto f = extract_informable(g, ps, key, slot, u, nullptr, cfg);
    CHECK_FALSE(f.values[0].has_value());  // chinese
    REQUIRE(f.values[1].has_value());      // indian
    CHECK_FALSE(f.values[2].has_value());  // dontcare
    // shared = pooled + slot positions, per channel; the machine channel is empty at t = 1.
    const auto& shared = g.value(f.shared);
    const std::size_t block = cfg.hidden * (1 + cfg.conv_layers);
    for (std::size_t i = block; i < 2 * block; ++i) CHECK(shared[i] == 0.0);
  }
  SUBCASE("two occurrences sum") {
    const auto u = prepare_turn(lex, vocab, "indian or indian", true);
    auto cu = run_channel(g, ps, key, "cnn_u", &u, cfg);
    const auto both = g.value(positional(g, cu, {0, 2}));
    const auto first = g.value(positional(g, cu, {0}));
    const auto second = g.value(positional(g, cu, {2}));
    for (std::size_t i = 0; i < both.size(); ++i) CHECK(both[i] == doctest::Approx(first[i] + second[i]));
  }
}

TEST_CASE("informable tracker outputs") {
  const auto& o = tiny();
  const auto vocab = small_vocab(o);
  const Lexicon lex(o);
  auto cfg = small_config();
  ParameterStore<double> ps(5);
  declare_informable_tracker(ps, informable_key("food"), vocab.size(), cfg);
  const auto& slot = o.informable()[0];
  const std::vector<double> init{0, 0, 0, 1};

  SUBCASE("symmetric evidence gives equal value probabilities") {
    const auto u = prepare_turn(lex, vocab, "i want food in the south", true);
    const auto p = informable_step(ps, slot, u, nullptr, init, cfg);
    CHECK(p[0] == doctest::Approx(p[1]).epsilon(1e-12));
    CHECK(sum(p) == doctest::Approx(1.0).epsilon(1e-12));
  }
  SUBCASE("tied toy closed form") {
    ps.fill(0.0);
    ps.get(informable_key("food") + ".b_out").value[0] = std::log(3.0);
    const auto u = prepare_turn(lex, vocab, "hello", true);
    const auto p = informable_step(ps, slot, u, nullptr, init, cfg);
    // Logits (ln 3, ln 3, ln 3, 0).
    CHECK(p[0] == doctest::Approx(0.3));
    CHECK(p[2] == doctest::Approx(0.3));
    CHECK(p[3] == doctest::Approx(0.1));
    const auto s = softmax<double>({0.0, std::log(3.0)});
    CHECK(s[1] == doctest::Approx(0.75));
  }
  SUBCASE("no evidence keeps not-mentioned on top under zero weights") {
    ps.fill(0.0);
    ps.get(informable_key("food") + ".g_none").value[0] = 0.5;
    std::vector<double> prev = init;
    for (const char* text : {"hello", "thank you", "what is there"}) {
      prev = informable_step(ps, slot, prepare_turn(lex, vocab, text, true), nullptr, prev, cfg);
      CHECK(prev.back() > prev[0]);
    }
  }
  SUBCASE("parameter count does not depend on the number of values") {
    const auto& r = ndm::test::restaurant();
    auto m = Model::create(TrainConfig{}, r, small_vocab(r));
    std::size_t food = 0, price = 0;
    for (const auto& n : m.params.names_with_prefix("trk.inf.food.")) food += m.params.get(n).size();
    for (const auto& n : m.params.names_with_prefix("trk.inf.pricerange.")) price += m.params.get(n).size();
    CHECK(food == price);
  }
}

TEST_CASE("requestable tracker") {
  const auto& o = tiny();
  const auto vocab = small_vocab(o);
  const Lexicon lex(o);
  auto cfg = small_config();
  ParameterStore<double> ps(6);
  declare_requestable_tracker(ps, requestable_key("phone"), vocab.size(), cfg);
  const auto u = prepare_turn(lex, vocab, "what is the phone", true);
  const double p = requestable_step(ps, "phone", u, nullptr, cfg);
  CHECK(p > 0.0);
  CHECK(p < 1.0);

  ps.fill(0.0);
  CHECK(requestable_step(ps, "phone", u, nullptr, cfg) == doctest::Approx(0.5));

  // One turn at p = 0.5 costs ln 2.
  Dialogue d;
  Turn t;
  t.user = "what is the phone";
  t.labels.informable = {{"food", "none"}, {"area", "none"}};
  t.labels.requested = {"phone"};
  d.turns = {t};
  const auto prepared = prepare_dialogue(d, lex, vocab, o);
  Graph<double> g(false);
  Var l = requestable_dialogue_loss(g, ps, "phone", 2, prepared, cfg);
  CHECK(g.scalar(l) == doctest::Approx(0.6931471805599453).epsilon(1e-12));
}

TEST_CASE("tracker losses pass finite differences") {
  const auto& o = tiny();
  const auto vocab = small_vocab(o);
  const Lexicon lex(o);
  auto cfg = small_config();
  const auto d = prepare_dialogue(ndm::test::tiny_dialogue(), lex, vocab, o);
  ParameterStore<double> ps(7);
  declare_informable_tracker(ps, informable_key("food"), vocab.size(), cfg);
  declare_requestable_tracker(ps, requestable_key("phone"), vocab.size(), cfg);
  LossFn loss = [&](ParameterStore<double>& s, bool acc) {
    Graph<double> g(acc);
    Var l = g.total({informable_dialogue_loss(g, s, o.informable()[0], 0, d, cfg),
                     requestable_dialogue_loss(g, s, "phone", 2, d, cfg)});
    if (acc) g.backward(l);
    return g.scalar(l);
  };
  const auto r = grad_check(loss, ps);
  INFO(r.worst_parameter, " ", r.worst_index, " ", r.worst_analytic, " ", r.worst_numeric);
  CHECK(r.max_relative_error < kGradTol);
  CHECK(r.checked == ps.total_size());
}

// ---------------------------------------------------------------- policy

TEST_CASE("summary belief") {
  const auto& o = tiny();
  auto b = BeliefState::initial(o, true);
  auto s = summarize_belief(b);
  CHECK(s.slots[0] == std::vector<double>{0, 0, 1});
  CHECK(s.slots.size() == 5);
  b.informable[0] = {0.5, 0.2, 0.2, 0.1};
  b.requestable[1] = 0.3;
  s = summarize_belief(b);
  CHECK(s.slots[0][0] == doctest::Approx(0.7));
  CHECK(s.slots[0][1] == doctest::Approx(0.2));
  CHECK(s.slots[0][2] == doctest::Approx(0.1));
  CHECK(s.slots[3][0] == doctest::Approx(0.3));
  CHECK(s.slots[3][1] == doctest::Approx(0.7));
  CHECK(s.slots[4] == std::vector<double>{0.0, 1.0});
  CHECK(s.flat().size() == summary_size(o, true));
}

TEST_CASE("action vector") {
  SUBCASE("scalar toy") {
    ParameterStore<double> ps;
    for (const char* n : {"policy.W_zo", "policy.W_po", "policy.W_xo"}) ps.add_zero(n, {1, 1}).value[0] = 1.0;
    Graph<double> g(false);
    Var o = action_vector(g, ps, g.constant({0.5}), g.constant({0.25}), g.constant({0.25}));
    CHECK(g.scalar(o) == doctest::Approx(0.7615941559557649).epsilon(1e-12));
  }
  const auto& o = tiny();
  auto cfg = small_config();
  ParameterStore<double> ps(8);
  declare_policy(ps, o, cfg);
  std::mt19937_64 rng(1);
  SUBCASE("bounded and zero under zero weights") {
    for (int k = 0; k < 20; ++k) {
      Graph<double> g(false);
      std::vector<double> z(cfg.hidden);
      for (auto& v : z) v = std::uniform_real_distribution<double>(-3, 3)(rng);
      auto ctx = make_context(g, ps, cfg, g.constant(z), random_summary(o, true, rng), DbBins{0, 0, 1, 0, 0, 0});
      for (double v : g.value(ctx.action)) {
        CHECK(v > -1.0);
        CHECK(v < 1.0);
      }
    }
    ps.fill(0.0);
    Graph<double> g(false);
    auto ctx = make_context(g, ps, cfg, g.constant(std::vector<double>(cfg.hidden, 1.0)),
                            random_summary(o, true, rng), DbBins{1, 0, 0, 0, 0, 0});
    for (double v : g.value(ctx.action)) CHECK(v == 0.0);
  }
  SUBCASE("DB enters only through the bins") {
    const auto& r = ndm::test::restaurant();
    const auto& db = ndm::test::restaurant_db();
    const auto north = apply_query(db, r, {{"area", "north"}});
    const auto other = apply_query(db, r, {{"food", "british"}, {"area", "south"}});
    auto rc = small_config();
    ParameterStore<double> pr(9);
    declare_policy(pr, r, rc);
    Graph<double> g(false);
    const auto summary = random_summary(r, true, rng);
    Var z = g.constant(std::vector<double>(rc.hidden, 0.2));
    const auto bn = compress_count(north), bc = compress_count(other);
    CHECK(bn == bc);  // both at least five matches
    const auto first = g.value(make_context(g, pr, rc, z, summary, bn).action);
    CHECK(first == g.value(make_context(g, pr, rc, z, summary, bc).action));
  }
}

TEST_CASE("slot attention weights") {
  std::mt19937_64 rng(2);
  SUBCASE("one slot takes all the weight") {
    auto cfg = small_config(true);
    ParameterStore<double> ps(10);
    declare_policy(ps, one_slot(), cfg);
    for (int k = 0; k < 10; ++k) {
      Graph<double> g(false);
      auto ctx = make_context(g, ps, cfg, g.constant(std::vector<double>(cfg.hidden, 0.1 * k)),
                              random_summary(one_slot(), false, rng), DbBins{0, 1, 0, 0, 0, 0});
      Var a = attention_weights(g, ps, ctx, g.constant(std::vector<double>(cfg.embed, 0.3)),
                                g.constant(std::vector<double>(cfg.hidden, -0.2)));
      CHECK(g.value(a) == std::vector<double>{1.0});
    }
  }
  SUBCASE("identical slot inputs share the weight evenly") {
    const auto two = Ontology::from_json(nlohmann::ordered_json::parse(R"({
      "informable": {"food": ["a", "b"], "area": ["c", "d"]}, "requestable": []})"));
    auto cfg = small_config(true);
    ParameterStore<double> ps(11);
    declare_policy(ps, two, cfg);
    auto b = BeliefState::initial(two, false);
    b.informable[0] = {0.2, 0.3, 0.1, 0.4};
    b.informable[1] = {0.4, 0.1, 0.1, 0.4};  // same summary (0.5, 0.1, 0.4)
    Graph<double> g(false);
    auto ctx = make_context(g, ps, cfg, g.constant(std::vector<double>(cfg.hidden, 0.5)), summarize_belief(b),
                            DbBins{0, 0, 0, 1, 0, 0});
    Var a = attention_weights(g, ps, ctx, g.constant(std::vector<double>(cfg.embed, 0.1)),
                              g.constant(std::vector<double>(cfg.hidden, 0.0)));
    CHECK(g.value(a)[0] == doctest::Approx(0.5).epsilon(1e-12));
    CHECK(g.value(a)[1] == doctest::Approx(0.5).epsilon(1e-12));
  }
  SUBCASE("weights normalise on the full ontology") {
    const auto& r = ndm::test::restaurant();
    auto cfg = small_config(true);
    ParameterStore<double> ps(12);
    declare_policy(ps, r, cfg);
    Graph<double> g(false);
    auto ctx = make_context(g, ps, cfg, g.constant(std::vector<double>(cfg.hidden, 0.5)),
                            random_summary(r, true, rng), DbBins{0, 0, 0, 0, 0, 1});
    Var a = attention_weights(g, ps, ctx, g.constant(std::vector<double>(cfg.embed, 0.1)),
                              g.constant(std::vector<double>(cfg.hidden, 0.7)));
    CHECK(g.dim(a) == summary_slots(r, true));
    CHECK(sum(g.value(a)) == doctest::Approx(1.0).epsilon(1e-12));
  }
}

// ---------------------------------------------------------------- generator

TEST_CASE("decode step distribution") {
  const auto& o = tiny();
  const auto vocab = small_vocab(o);
  for (bool att : {false, true}) {
    auto cfg = small_config(att);
    auto ps = generation_store(o, vocab.size(), cfg, 13);
    std::mt19937_64 rng(4);
    Graph<double> g(false);
    auto ctx = make_context(g, ps, cfg, g.constant(std::vector<double>(cfg.hidden, 0.3)),
                            random_summary(o, true, rng), DbBins{0, 1, 0, 0, 0, 0});
    Lstm<double> cell(ps, "gen.lstm");
    auto step = decode_step(g, ps, ctx, Vocabulary::kBos, cell.initial(g));
    const auto p = softmax(g.value(step.logits));
    CHECK(p.size() == vocab.size());
    CHECK(sum(p) == doctest::Approx(1.0).epsilon(1e-12));
    CHECK(p[Vocabulary::kEos] > 0.0);

    ps.fill(0.0);
    Graph<double> g0(false);
    auto ctx0 = make_context(g0, ps, cfg, g0.constant(std::vector<double>(cfg.hidden, 0.3)),
                             random_summary(o, true, rng), DbBins{0, 1, 0, 0, 0, 0});
    auto s0 = decode_step(g0, ps, ctx0, 5, cell.initial(g0));
    for (double v : softmax(g0.value(s0.logits))) CHECK(v == doctest::Approx(1.0 / vocab.size()));
  }
}

TEST_CASE("teacher-forced likelihood, hand oracle") {
  TrainConfig cfg;
  cfg.hidden = 1;
  cfg.embed = 1;
  ParameterStore<double> ps;
  declare_generator(ps, 5, cfg);
  auto& emb = ps.get("gen.emb");
  for (int w = 0; w < 5; ++w) emb.value[w] = 0.1 * (w + 1);
  const double W[12] = {0.5, -0.25, 0.3, 0.3, 0.2, -0.1, -0.4, 0.6, 0.2, 0.7, 0.1, 0.4};
  for (int i = 0; i < 12; ++i) ps.get("gen.lstm.W").value[i] = W[i];
  const double b[4] = {0.1, 0.0, -0.1, 0.05};
  for (int i = 0; i < 4; ++i) ps.get("gen.lstm.b").value[i] = b[i];
  const double wo[5] = {0.2, -0.1, 0.3, 0.5, -0.4}, bo[5] = {0.0, 0.1, 0.0, -0.1, 0.2};
  for (int i = 0; i < 5; ++i) {
    ps.get("gen.W_out").value[i] = wo[i];
    ps.get("gen.b_out").value[i] = bo[i];
  }
  Graph<double> g(false);
  PolicyContext<double> ctx;
  ctx.action = g.constant({0.5});
  Var l = response_loss(g, ps, ctx, {4, 0, 4});
  CHECK(g.scalar(l) == doctest::Approx(6.256834306842702).epsilon(1e-12));
}

TEST_CASE("generation loss passes finite differences") {
  const auto& o = tiny();
  const auto vocab = small_vocab(o);
  for (bool att : {false, true}) {
    for (const char* enc : {"lstm", "cnn"}) {
      CAPTURE(att);
      CAPTURE(enc);
      auto cfg = small_config(att, enc);
      auto ps = generation_store(o, vocab.size(), cfg, 14);
      std::mt19937_64 rng(5);
      const auto summary = random_summary(o, true, rng);
      const std::vector<std::size_t> user{4, 5, 6, 7};
      const std::vector<std::size_t> target{8, 9, 10};
      LossFn loss = [&](ParameterStore<double>& s, bool acc) {
        Graph<double> g(acc);
        Var z = encode_intent(g, s, cfg, user);
        auto ctx = make_context(g, s, cfg, z, summary, DbBins{0, 0, 1, 0, 0, 0});
        Var l = response_loss(g, s, ctx, target);
        if (acc) g.backward(l);
        return g.scalar(l);
      };
      GradCheckOptions opt;
      opt.max_per_param = 40;
      const auto r = grad_check(loss, ps, opt);
      INFO(r.worst_parameter);
      CHECK(r.max_relative_error < kGradTol);
    }
  }
}

TEST_CASE("language model") {
  const auto& o = tiny();
  const auto vocab = small_vocab(o);
  auto cfg = small_config();
  ParameterStore<double> ps(15);
  declare_lm(ps, vocab.size(), cfg);
  const std::vector<std::size_t> seq{5, 6, 7};
  auto with_eos = seq;
  with_eos.push_back(Vocabulary::kEos);
  const double lp = lm_logprob(ps, with_eos);
  CHECK(lp < 0.0);
  CHECK(std::exp(lp) > 0.0);
  Graph<double> g(false);
  CHECK(-g.scalar(lm_loss(g, ps, seq, true)) == doctest::Approx(lp).epsilon(1e-12));

  LossFn loss = [&](ParameterStore<double>& s, bool acc) {
    Graph<double> gg(acc);
    Var l = lm_loss(gg, s, seq, true);
    if (acc) gg.backward(l);
    return gg.scalar(l);
  };
  GradCheckOptions opt;
  opt.max_per_param = 40;
  CHECK(grad_check(loss, ps, opt).max_relative_error < kGradTol);
}

// ---------------------------------------------------------------- model and config

TEST_CASE("model checkpoint round trip") {
  const auto& o = ndm::test::tiny();
  auto m = Model::create(small_config(true), o, small_vocab(o));
  m.phases["trackers"] = true;
  const auto bytes = serialize_checkpoint(m.to_checkpoint());
  const auto back = Model::from_checkpoint(deserialize_checkpoint(bytes));
  CHECK(serialize_checkpoint(back.to_checkpoint()) == bytes);
  CHECK(back.cfg.attention);
  CHECK(back.vocab.tokens() == m.vocab.tokens());
  CHECK(back.ontology.to_json() == o.to_json());
  CHECK(back.phases["trackers"] == true);
}

TEST_CASE("config JSON") {
  TrainConfig c;
  c.attention = true;
  c.learning_rate = 0.05;
  c.encoder = "cnn";
  const auto back = TrainConfig::from_json(c.to_json());
  CHECK(back.to_json() == c.to_json());
  CHECK_THROWS(TrainConfig::from_json({{"hiden", 10}}));
  CHECK_THROWS(TrainConfig::from_json({{"filter_width", 4}}));
  CHECK_THROWS(TrainConfig::from_json({{"encoder", "gru"}}));
  CHECK_THROWS(TrainConfig::from_json({{"decoding", "greedy"}}));
}
