#include <doctest.h>

#include <stdexcept>

#include "helpers.hpp"
#include "ndm/trainer.hpp"

using namespace ndm;
using ndm::test::restaurant;
using ndm::test::restaurant_db;

namespace {

struct Setup {
  std::vector<Dialogue> train, valid;
  Lexicon lexicon{restaurant(), &restaurant_db()};
  Model model;
};

Setup setup(std::uint64_t seed = 1, bool attention = false) {
  Setup s;
  auto all = generate_synthetic(restaurant(), restaurant_db(), 10, 11);
  s.train.assign(all.begin(), all.begin() + 7);
  s.valid.assign(all.begin() + 7, all.end());
  auto cfg = ndm::test::small_config(attention);
  cfg.seed = seed;
  s.model = Model::create(cfg, restaurant(), build_vocab(s.train, s.lexicon, restaurant(), 1));
  return s;
}

std::map<std::string, std::vector<float>> values(const ParameterStore<float>& ps, bool (*filter)(const std::string&)) {
  std::map<std::string, std::vector<float>> out;
  for (const auto& [name, p] : ps.entries()) {
    if (filter(name)) out[name] = p.value.data;
  }
  return out;
}

bool everything(const std::string&) { return true; }

}  // namespace

TEST_CASE("early stopping traces") {
  auto d = early_stop({1.0, 0.9, 0.95, 0.96}, 2);
  CHECK(d.stop);
  CHECK(d.best_epoch == 2);

  d = early_stop({1.0, 0.9, 0.95}, 2);
  CHECK_FALSE(d.stop);
  CHECK(d.best_epoch == 2);

  d = early_stop({1.0, 1.0}, 0);
  CHECK(d.stop);
  CHECK(d.best_epoch == 1);

  d = early_stop({5, 4, 3, 2, 1}, 0);
  CHECK_FALSE(d.stop);
  CHECK(d.best_epoch == 5);

  CHECK(early_stop({}, 3).best_epoch == 0);

  // A stall that recovers resets the count.
  d = early_stop({1.0, 1.1, 0.8, 0.9, 0.7, 0.75}, 2);
  CHECK_FALSE(d.stop);
  CHECK(d.best_epoch == 5);
}

TEST_CASE("generation requires trained trackers") {
  auto s = setup();
  CHECK_THROWS_AS(train_generation(s.model, s.lexicon, restaurant_db(), s.train, s.valid), std::logic_error);
}

TEST_CASE("language model guards and progress") {
  auto s = setup();
  CHECK_THROWS(train_lm(s.model, {}, s.valid));
  Dialogue empty;
  CHECK_THROWS(train_lm(s.model, {empty}, s.valid));
  CHECK_THROWS(lm_perplexity(s.model, {}));

  const double before = lm_perplexity(s.model, s.valid);
  s.model.cfg.max_epochs = 3;
  s.model.cfg.patience = 5;
  const auto log = train_lm(s.model, s.train, s.valid);
  REQUIRE(log.valid_loss.size() == 3);
  CHECK(log.valid_loss[1] < log.valid_loss[0]);
  CHECK(log.valid_loss[2] < log.valid_loss[1]);
  CHECK(lm_perplexity(s.model, s.valid) < before);
  CHECK(s.model.phases["lm"] == true);
}

TEST_CASE("each phase touches only its own parameters") {
  auto s = setup();
  const auto gen0 = values(s.model.params, is_generation_param);
  const auto lm0 = values(s.model.params, is_lm_param);
  const auto logs = train_trackers(s.model, s.lexicon, s.train, s.valid);
  CHECK(logs.size() == restaurant().informable().size() + restaurant().requestable().size());
  CHECK(values(s.model.params, is_generation_param) == gen0);
  CHECK(values(s.model.params, is_lm_param) == lm0);

  const auto trk = values(s.model.params, is_tracker_param);
  train_generation(s.model, s.lexicon, restaurant_db(), s.train, s.valid);
  CHECK(values(s.model.params, is_tracker_param) == trk);
  CHECK(values(s.model.params, is_lm_param) == lm0);
  CHECK(values(s.model.params, is_generation_param) != gen0);

  const auto gen1 = values(s.model.params, is_generation_param);
  train_lm(s.model, s.train, s.valid);
  CHECK(values(s.model.params, is_tracker_param) == trk);
  CHECK(values(s.model.params, is_generation_param) == gen1);
}

TEST_CASE("the response loss sends no gradient into the trackers") {
  auto s = setup();
  s.model.phases["trackers"] = true;
  const auto inputs = generation_inputs(s.model, s.lexicon, restaurant_db(), s.train);
  s.model.params.zero_grad();
  std::size_t tokens = 0;
  const double loss = generation_loss(s.model, inputs[0], true, &tokens);
  CHECK(loss > 0.0);
  CHECK(tokens > 0);
  bool some_generation_grad = false;
  for (const auto& [name, p] : s.model.params.entries()) {
    for (float g : p.grad.data) {
      if (is_tracker_param(name) || is_lm_param(name)) {
        REQUIRE(g == 0.0f);
      } else if (g != 0.0f) {
        some_generation_grad = true;
      }
    }
  }
  CHECK(some_generation_grad);
}

TEST_CASE("training is deterministic and independent of the execution policy") {
  auto a = setup(3), b = setup(3), c = setup(4);
  TrainOptions serial;
  serial.policy = ExecPolicy::Serial;
  train_trackers(a.model, a.lexicon, a.train, a.valid, serial);
  train_trackers(b.model, b.lexicon, b.train, b.valid);
  train_trackers(c.model, c.lexicon, c.train, c.valid);
  CHECK(values(a.model.params, everything) == values(b.model.params, everything));
  CHECK(values(a.model.params, everything) != values(c.model.params, everything));

  const auto ia = generation_inputs(a.model, a.lexicon, restaurant_db(), a.valid, ExecPolicy::Serial);
  const auto ib = generation_inputs(b.model, b.lexicon, restaurant_db(), b.valid, ExecPolicy::Parallel);
  REQUIRE(ia.size() == ib.size());
  for (std::size_t i = 0; i < ia.size(); ++i) {
    REQUIRE(ia[i].size() == ib[i].size());
    for (std::size_t t = 0; t < ia[i].size(); ++t) {
      CHECK(ia[i][t].summary.slots == ib[i][t].summary.slots);
      CHECK(ia[i][t].bins == ib[i][t].bins);
    }
  }

  train_generation(a.model, a.lexicon, restaurant_db(), a.train, a.valid, serial);
  train_generation(b.model, b.lexicon, restaurant_db(), b.train, b.valid);
  CHECK(values(a.model.params, everything) == values(b.model.params, everything));
}

TEST_CASE("training logs") {
  auto s = setup();
  std::vector<std::string> lines;
  TrainOptions opt;
  opt.policy = ExecPolicy::Serial;
  opt.log = [&](const std::string& l) { lines.push_back(l); };
  const auto logs = train_trackers(s.model, s.lexicon, s.train, s.valid, opt);
  CHECK_FALSE(lines.empty());
  for (const auto& [key, log] : logs) {
    CHECK(log.train_loss.size() == log.valid_loss.size());
    CHECK(log.best_epoch >= 1);
    CHECK(log.best_epoch <= log.valid_loss.size());
    CHECK(log.learning_rate.front() == doctest::Approx(s.model.cfg.learning_rate));
    const auto j = log.to_json();
    CHECK(j.contains("best_epoch"));
  }
}
