#include "ndm/trainer.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <mutex>
#include <numeric>
#include <random>
#include <stdexcept>

#include "ndm/optim.hpp"

namespace ndm {

EarlyStopDecision early_stop(const std::vector<double>& history, std::size_t patience) {
  EarlyStopper s(patience);
  EarlyStopDecision d;
  for (double v : history) {
    s.observe(v);
    if (s.should_stop()) {
      d.stop = true;
      break;
    }
  }
  d.best_epoch = s.best_epoch();
  return d;
}

bool EarlyStopper::observe(double loss) {
  ++epoch_;
  if (loss < best_) {
    best_ = loss;
    best_epoch_ = epoch_;
    bad_ = 0;
    return true;
  }
  ++bad_;
  return false;
}

nlohmann::json TrainLog::to_json() const {
  return {{"train_loss", train_loss},
          {"valid_loss", valid_loss},
          {"learning_rate", learning_rate},
          {"best_epoch", best_epoch},
          {"seconds", seconds}};
}

namespace {

using Clock = std::chrono::steady_clock;

double elapsed(Clock::time_point t0) { return std::chrono::duration<double>(Clock::now() - t0).count(); }

using Snapshot = std::map<std::string, std::vector<float>>;

Snapshot snapshot(const ParameterStore<float>& ps, const ParamFilter& filter) {
  Snapshot s;
  for (const auto& [name, p] : ps.entries()) {
    if (!filter || filter(name)) s[name] = p.value.data;
  }
  return s;
}

void restore(ParameterStore<float>& ps, const Snapshot& s) {
  for (const auto& [name, v] : s) ps.get(name).value.data = v;
}

/// Shared epoch loop: shuffled per-item SGD steps, validation after each
/// epoch, learning rate decay on a stall and early stopping with the best
/// epoch restored. `step(i)` must accumulate gradients and return the loss.
TrainLog run_epochs(ParameterStore<float>& ps, const ParamFilter& filter, std::size_t n, const TrainConfig& cfg,
                    std::uint64_t stream, const std::function<double(std::size_t)>& step,
                    const std::function<double()>& validate, const std::string& name, const TrainOptions& opt) {
  const auto t0 = Clock::now();
  TrainLog log;
  std::seed_seq seq{static_cast<std::uint32_t>(cfg.seed), static_cast<std::uint32_t>(cfg.seed >> 32),
                    static_cast<std::uint32_t>(stream)};
  std::mt19937_64 rng(seq);
  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), 0);
  EarlyStopper stopper(cfg.patience);
  double lr = cfg.learning_rate;
  Snapshot best = snapshot(ps, filter);
  for (std::size_t epoch = 1; epoch <= cfg.max_epochs; ++epoch) {
    std::shuffle(order.begin(), order.end(), rng);
    double total = 0.0;
    for (auto i : order) {
      if (filter) {
        ps.zero_grad_if(filter);
      } else {
        ps.zero_grad();
      }
      total += step(i);
      sgd_step(ps, SgdOptions{lr, cfg.l2, cfg.clip}, filter);
    }
    const double v = validate();
    log.train_loss.push_back(total);
    log.valid_loss.push_back(v);
    log.learning_rate.push_back(lr);
    const bool improved = stopper.observe(v);
    if (improved) {
      best = snapshot(ps, filter);
    } else {
      lr *= cfg.lr_decay;
    }
    if (opt.log) {
      char buf[160];
      std::snprintf(buf, sizeof buf, "%s epoch %zu train %.4f valid %.4f%s", name.c_str(), epoch, total, v,
                    improved ? " *" : "");
      opt.log(buf);
    }
    if (stopper.should_stop()) break;
  }
  restore(ps, best);
  ps.zero_grad();
  log.best_epoch = stopper.best_epoch();
  log.seconds = elapsed(t0);
  return log;
}

ParameterStore<float> extract(const ParameterStore<float>& ps, const std::string& prefix) {
  ParameterStore<float> out(ps.seed());
  for (const auto& [name, p] : ps.entries()) {
    if (name.rfind(prefix, 0) == 0) out.add_zero(name, p.value.shape).value = p.value;
  }
  return out;
}

std::vector<PreparedDialogue> prepare_all(const Model& model, const Lexicon& lexicon,
                                          const std::vector<Dialogue>& dialogues) {
  std::vector<PreparedDialogue> out;
  out.reserve(dialogues.size());
  for (const auto& d : dialogues) {
    if (d.turns.empty()) throw CorpusError("dialogue " + d.id + " has no turns");
    out.push_back(prepare_dialogue(d, lexicon, model.vocab, model.ontology));
  }
  return out;
}

struct TrackerJob {
  std::string key;
  bool informable;
  std::size_t index;
};

double tracker_loss(ParameterStore<float>& ps, const Model& model, const TrackerJob& job, const PreparedDialogue& d,
                    bool accumulate) {
  Graph<float> g(accumulate);
  Var loss = job.informable
                 ? informable_dialogue_loss(g, ps, model.ontology.informable()[job.index], job.index, d, model.cfg)
                 : requestable_dialogue_loss(g, ps, model.ontology.requestable()[job.index], job.index, d, model.cfg);
  if (accumulate) g.backward(loss);
  return g.scalar(loss);
}

}  // namespace

std::map<std::string, TrainLog> train_trackers(Model& model, const Lexicon& lexicon, const std::vector<Dialogue>& train,
                                               const std::vector<Dialogue>& valid, const TrainOptions& opt) {
  if (train.empty()) throw std::invalid_argument("empty training corpus");
  const auto tr = prepare_all(model, lexicon, train);
  const auto va = prepare_all(model, lexicon, valid);
  std::vector<TrackerJob> jobs;
  for (std::size_t s = 0; s < model.ontology.informable().size(); ++s) {
    jobs.push_back({informable_key(model.ontology.informable()[s].name), true, s});
  }
  if (model.cfg.requestable) {
    for (std::size_t r = 0; r < model.ontology.requestable().size(); ++r) {
      jobs.push_back({requestable_key(model.ontology.requestable()[r]), false, r});
    }
  }
  std::vector<ParameterStore<float>> stores;
  for (const auto& j : jobs) stores.push_back(extract(model.params, j.key + "."));
  std::vector<TrainLog> logs(jobs.size());
  // Trackers report from worker threads; keep their lines whole.
  std::mutex log_mu;
  TrainOptions job_opt = opt;
  if (opt.log) {
    job_opt.log = [&](const std::string& line) {
      std::lock_guard<std::mutex> lock(log_mu);
      opt.log(line);
    };
  }
  parallel_for(jobs.size(), opt.policy, [&](std::size_t k) {
    auto& ps = stores[k];
    const auto& job = jobs[k];
    const auto& val = va.empty() ? tr : va;
    logs[k] = run_epochs(
        ps, {}, tr.size(), model.cfg, k + 1, [&](std::size_t i) { return tracker_loss(ps, model, job, tr[i], true); },
        [&] {
          double v = 0.0;
          for (const auto& d : val) v += tracker_loss(ps, model, job, d, false);
          return v;
        },
        job.key, job_opt);
  });
  std::map<std::string, TrainLog> out;
  for (std::size_t k = 0; k < jobs.size(); ++k) {
    model.params.assign_from(stores[k]);
    out[jobs[k].key] = logs[k];
  }
  model.phases["trackers"] = true;
  return out;
}

std::vector<std::vector<GenerationTurn>> generation_inputs(const Model& model, const Lexicon& lexicon,
                                                           const Database& db, const std::vector<Dialogue>& dialogues,
                                                           ExecPolicy policy) {
  auto& ps = const_cast<ParameterStore<float>&>(model.params);
  std::vector<std::vector<GenerationTurn>> out(dialogues.size());
  parallel_for(dialogues.size(), policy, [&](std::size_t i) {
    const auto p = prepare_dialogue(dialogues[i], lexicon, model.vocab, model.ontology);
    BeliefState belief = BeliefState::initial(model.ontology, model.cfg.requestable);
    for (std::size_t t = 0; t < p.user.size(); ++t) {
      belief = track_turn(ps, model.ontology, model.cfg, p.user[t], t ? &p.machine[t - 1] : nullptr, belief);
      GenerationTurn g;
      g.user = p.user[t].ids;
      g.summary = summarize_belief(belief);
      g.bins = compress_count(apply_query(db, model.ontology, form_query(belief, model.ontology)));
      g.response = p.response[t];
      out[i].push_back(std::move(g));
    }
  });
  return out;
}

double generation_loss(Model& model, const std::vector<GenerationTurn>& dialogue, bool accumulate,
                       std::size_t* tokens) {
  auto& ps = model.params;
  Graph<float> g(accumulate);
  std::vector<Var> losses;
  std::size_t n = 0;
  for (const auto& t : dialogue) {
    Var z = encode_intent(g, ps, model.cfg, t.user);
    auto ctx = make_context(g, ps, model.cfg, z, t.summary, t.bins);
    losses.push_back(response_loss(g, ps, ctx, t.response));
    n += t.response.size() + 1;
  }
  if (tokens) *tokens = n;
  if (losses.empty()) return 0.0;
  Var loss = g.total(losses);
  if (accumulate) g.backward(loss);
  return g.scalar(loss);
}

TrainLog train_generation(Model& model, const Lexicon& lexicon, const Database& db, const std::vector<Dialogue>& train,
                          const std::vector<Dialogue>& valid, const TrainOptions& opt) {
  if (!model.phases.value("trackers", false)) throw std::logic_error("trackers must be trained first");
  if (train.empty()) throw std::invalid_argument("empty training corpus");
  const auto tr = generation_inputs(model, lexicon, db, train, opt.policy);
  const auto va = valid.empty() ? tr : generation_inputs(model, lexicon, db, valid, opt.policy);
  auto log = run_epochs(
      model.params, is_generation_param, tr.size(), model.cfg, 1000,
      [&](std::size_t i) { return generation_loss(model, tr[i], true); },
      [&] {
        double v = 0.0;
        for (const auto& d : va) v += generation_loss(model, d, false);
        return v;
      },
      "generation", opt);
  model.phases["generation"] = true;
  return log;
}

namespace {

std::vector<std::vector<std::size_t>> responses_of(const Model& model, const Dialogue& d) {
  std::vector<std::vector<std::size_t>> out;
  for (const auto& t : d.turns) out.push_back(model.vocab.encode(t.machine_delex));
  return out;
}

double lm_dialogue_loss(Model& model, const std::vector<std::vector<std::size_t>>& responses, bool accumulate,
                        std::size_t* tokens = nullptr) {
  Graph<float> g(accumulate);
  std::vector<Var> losses;
  std::size_t n = 0;
  for (const auto& r : responses) {
    losses.push_back(lm_loss(g, model.params, r, true));
    n += r.size() + 1;
  }
  if (tokens) *tokens = n;
  if (losses.empty()) return 0.0;
  Var loss = g.total(losses);
  if (accumulate) g.backward(loss);
  return g.scalar(loss);
}

}  // namespace

TrainLog train_lm(Model& model, const std::vector<Dialogue>& train, const std::vector<Dialogue>& valid,
                  const TrainOptions& opt) {
  std::vector<std::vector<std::vector<std::size_t>>> tr, va;
  for (const auto& d : train) {
    if (!d.turns.empty()) tr.push_back(responses_of(model, d));
  }
  if (tr.empty()) throw std::invalid_argument("no responses to train the language model on");
  for (const auto& d : valid) va.push_back(responses_of(model, d));
  const auto& val = va.empty() ? tr : va;
  auto log = run_epochs(
      model.params, is_lm_param, tr.size(), model.cfg, 2000,
      [&](std::size_t i) { return lm_dialogue_loss(model, tr[i], true); },
      [&] {
        double v = 0.0;
        for (const auto& d : val) v += lm_dialogue_loss(model, d, false);
        return v;
      },
      "lm", opt);
  model.phases["lm"] = true;
  return log;
}

double lm_perplexity(Model& model, const std::vector<Dialogue>& dialogues) {
  double loss = 0.0;
  std::size_t tokens = 0;
  for (const auto& d : dialogues) {
    std::size_t n = 0;
    loss += lm_dialogue_loss(model, responses_of(model, d), false, &n);
    tokens += n;
  }
  if (tokens == 0) throw std::invalid_argument("no responses to score");
  return std::exp(loss / static_cast<double>(tokens));
}

}  // namespace ndm
