// Serial reference vs OpenMP path for the parallel kernels: DB lookup,
// per-dialogue evaluation and per-tracker training. Each pair must agree
// exactly; the timings show what the threads buy on this machine.

#include <chrono>
#include <cstdlib>
#include <iostream>
#include <string>

#include "ndm/evaluator.hpp"
#include "ndm/trainer.hpp"

using namespace ndm;

namespace {

template <typename Fn>
double seconds(Fn&& fn) {
  const auto t0 = std::chrono::steady_clock::now();
  fn();
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

void row(const std::string& name, double serial, double parallel, bool same) {
  std::printf("%-22s serial %8.3fs  parallel %8.3fs  speedup %5.2fx  %s\n", name.c_str(), serial, parallel,
              parallel > 0 ? serial / parallel : 0.0, same ? "identical" : "MISMATCH");
}

}  // namespace

int main(int argc, char** argv) {
  const std::size_t n_dialogues = argc > 1 ? std::strtoul(argv[1], nullptr, 10) : 40;
  std::printf("threads: %d\n", max_threads());
  const auto ont = Ontology::load(std::string(NDM_DATA_DIR) + "/restaurant/ontology.json");
  const auto db = Database::load(std::string(NDM_DATA_DIR) + "/restaurant/db.json", ont);
  bool ok = true;

  // DB lookup over a replicated table.
  nlohmann::json big = nlohmann::json::array();
  const auto base = db.to_json();
  for (int k = 0; k < 2000; ++k) {
    for (const auto& e : base) big.push_back(e);
  }
  const auto large = Database::from_json(big, ont);
  DbQuery q{{"area", "centre"}};
  std::vector<std::uint8_t> ts, tp;
  const double s1 = seconds([&] {
    for (int i = 0; i < 20; ++i) ts = apply_query(large, ont, q, ExecPolicy::Serial);
  });
  const double p1 = seconds([&] {
    for (int i = 0; i < 20; ++i) tp = apply_query(large, ont, q, ExecPolicy::Parallel);
  });
  row("apply_query x20", s1, p1, ts == tp);
  ok = ok && ts == tp;

  const auto corpus = generate_synthetic(ont, db, n_dialogues, 7);
  const auto sp = split_corpus(corpus, 1);
  const Lexicon lex(ont, &db);
  TrainConfig cfg;
  cfg.max_epochs = 1;
  const auto vocab = build_vocab(sp.train, lex, ont, 1);

  // Tracker training (one epoch each).
  auto ms = Model::create(cfg, ont, vocab);
  auto mp = ms;
  TrainOptions so, po;
  so.policy = ExecPolicy::Serial;
  po.policy = ExecPolicy::Parallel;
  const double s2 = seconds([&] { train_trackers(ms, lex, sp.train, sp.valid, so); });
  const double p2 = seconds([&] { train_trackers(mp, lex, sp.train, sp.valid, po); });
  const bool same2 = serialize_checkpoint(ms.to_checkpoint()) == serialize_checkpoint(mp.to_checkpoint());
  row("train_trackers epoch", s2, p2, same2);
  ok = ok && same2;

  // Full-pipeline evaluation.
  const Pipeline pipe(ms, db);
  EvalOptions es, ep;
  es.policy = ExecPolicy::Serial;
  ep.policy = ExecPolicy::Parallel;
  EvalReport rs, rp;
  const double s3 = seconds([&] { rs = evaluate(pipe, corpus, es); });
  const double p3 = seconds([&] { rp = evaluate(pipe, corpus, ep); });
  const bool same3 = rs.to_json() == rp.to_json();
  row("evaluate", s3, p3, same3);
  ok = ok && same3;

  return ok ? 0 : 1;
}
