// Command-line front end: corpus preparation, training, evaluation and the
// live dialogue service.

#include <CLI11.hpp>
#include <httplib.h>

#include <fstream>
#include <iostream>
#include <optional>
#include <string>

#include "ndm/evaluator.hpp"
#include "ndm/service.hpp"
#include "ndm/trainer.hpp"

using namespace ndm;

namespace {

const std::string kDefaultOntology = std::string(NDM_DATA_DIR) + "/restaurant/ontology.json";
const std::string kDefaultDb = std::string(NDM_DATA_DIR) + "/restaurant/db.json";

struct Domain {
  std::string ontology_path = kDefaultOntology;
  std::string db_path = kDefaultDb;
};

void add_domain(CLI::App* cmd, Domain& d) {
  cmd->add_option("--ontology", d.ontology_path, "Ontology JSON")->capture_default_str();
  cmd->add_option("--db", d.db_path, "Database JSON")->capture_default_str();
}

void log_line(const std::string& s) { std::cerr << s << std::endl; }

TrainOptions train_options(bool serial) {
  TrainOptions o;
  o.policy = serial ? ExecPolicy::Serial : ExecPolicy::Parallel;
  o.log = log_line;
  return o;
}

void write_json(const std::string& path, const nlohmann::json& j) {
  if (path.empty() || path == "-") {
    std::cout << j.dump(2) << std::endl;
    return;
  }
  std::ofstream f(path);
  if (!f) throw std::runtime_error("cannot write " + path);
  f << j.dump(2) << '\n';
}

std::vector<Dialogue> pick_split(const std::vector<Dialogue>& all, const std::string& split, std::uint64_t seed) {
  if (split == "all") return all;
  auto sp = split_corpus(all, seed);
  if (split == "train") return sp.train;
  if (split == "valid") return sp.valid;
  if (split == "test") return sp.test;
  throw std::invalid_argument("unknown split: " + split);
}

void chat_loop(Engine& engine, std::optional<std::uint64_t> seed) {
  auto session = engine.create_session(seed);
  std::cout << "session " << session->id() << " (empty line or :quit to leave, :state for the belief)\n";
  std::string line;
  while (std::cout << "> " << std::flush, std::getline(std::cin, line)) {
    if (line == ":quit" || line == ":q") break;
    if (line == ":state") {
      std::cout << session->state().dump(2) << '\n';
      continue;
    }
    try {
      const auto r = engine.handle_turn(session->id(), line);
      std::cout << r["response"].get<std::string>() << "\n  [" << r["db"].get<std::string>() << "]\n";
    } catch (const std::exception& e) {
      std::cout << "error: " << e.what() << '\n';
    }
  }
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Network-based task-oriented dialogue model"};
  app.require_subcommand(1);

  // generate
  Domain gen_domain;
  std::size_t gen_n = 300;
  std::uint64_t gen_seed = 7;
  std::string gen_out;
  auto* gen = app.add_subcommand("generate", "Write a synthetic labelled corpus");
  add_domain(gen, gen_domain);
  gen->add_option("--n", gen_n, "Number of dialogues")->capture_default_str();
  gen->add_option("--seed", gen_seed, "Generator seed")->capture_default_str();
  gen->add_option("--out", gen_out, "Output corpus JSON")->required();

  // convert-camrest
  Domain conv_domain;
  std::string conv_in, conv_out;
  auto* conv = app.add_subcommand("convert-camrest", "Convert a CamRest-style corpus");
  add_domain(conv, conv_domain);
  conv->add_option("--in", conv_in, "Input JSON")->required();
  conv->add_option("--out", conv_out, "Output corpus JSON")->required();

  // train-trackers / train
  struct TrainArgs {
    Domain domain;
    std::string config, corpus, out, trackers;
    std::optional<std::uint64_t> seed;
    bool serial = false;
    bool lm = false;
  };
  TrainArgs tt, tg;
  auto add_train = [](CLI::App* cmd, TrainArgs& a) {
    add_domain(cmd, a.domain);
    cmd->add_option("--config", a.config, "TrainConfig JSON");
    cmd->add_option("--corpus", a.corpus, "Corpus JSON")->required();
    cmd->add_option("--out", a.out, "Output checkpoint")->required();
    cmd->add_option("--seed", a.seed, "Overrides the configuration seed");
    cmd->add_flag("--serial", a.serial, "Use the serial reference path");
  };
  auto* train_trk = app.add_subcommand("train-trackers", "Phase 1: belief trackers");
  add_train(train_trk, tt);
  auto* train_all = app.add_subcommand("train", "Phase 2 (and phase 1 unless --trackers is given)");
  add_train(train_all, tg);
  train_all->add_option("--trackers", tg.trackers, "Checkpoint with trained trackers");
  train_all->add_flag("--lm", tg.lm, "Also train the language model used by weighted decoding");

  // train-lm
  Domain lm_domain;
  std::string lm_corpus, lm_ckpt, lm_out;
  std::uint64_t lm_split_seed = 0;
  bool lm_serial = false;
  auto* train_lm_cmd = app.add_subcommand("train-lm", "Standalone language model over skeletal responses");
  add_domain(train_lm_cmd, lm_domain);
  train_lm_cmd->add_option("--corpus", lm_corpus, "Corpus JSON")->required();
  train_lm_cmd->add_option("--checkpoint", lm_ckpt, "Model checkpoint to extend")->required();
  train_lm_cmd->add_option("--out", lm_out, "Output checkpoint (defaults to --checkpoint)");
  train_lm_cmd->add_option("--seed", lm_split_seed, "Split seed (defaults to the model seed)");
  train_lm_cmd->add_flag("--serial", lm_serial, "Use the serial reference path");

  // eval
  Domain ev_domain;
  std::string ev_corpus, ev_ckpt, ev_report, ev_decoding, ev_attention, ev_split = "test", ev_rewards;
  std::uint64_t ev_seed = 1;
  bool ev_serial = false, ev_trackers_only = false;
  auto* ev = app.add_subcommand("eval", "Tracker, BLEU and task metrics");
  add_domain(ev, ev_domain);
  ev->add_option("--corpus", ev_corpus, "Corpus JSON")->required();
  ev->add_option("--checkpoint", ev_ckpt, "Model checkpoint")->required();
  ev->add_option("--decoding", ev_decoding, "ml or weighted (default: model setting)")
      ->check(CLI::IsMember({"ml", "weighted"}));
  ev->add_option("--attention", ev_attention, "Expected attention setting of the checkpoint")
      ->check(CLI::IsMember({"on", "off"}));
  ev->add_option("--rewards", ev_rewards, "Reward table JSON for weighted decoding");
  ev->add_option("--split", ev_split, "train, valid, test or all")->capture_default_str();
  ev->add_option("--seed", ev_seed, "Split seed and decoding seed")->capture_default_str();
  ev->add_option("--report", ev_report, "Output report JSON (stdout when omitted)");
  ev->add_flag("--trackers-only", ev_trackers_only, "Skip decoding");
  ev->add_flag("--serial", ev_serial, "Use the serial reference path");

  // baseline
  Domain bl_domain;
  std::string bl_corpus, bl_report;
  std::uint64_t bl_seed = 1;
  std::size_t bl_epochs = 10;
  auto* bl = app.add_subcommand("baseline", "n-gram tracker baseline");
  add_domain(bl, bl_domain);
  bl->add_option("--corpus", bl_corpus, "Corpus JSON")->required();
  bl->add_option("--seed", bl_seed, "Split and training seed")->capture_default_str();
  bl->add_option("--epochs", bl_epochs, "Training epochs")->capture_default_str();
  bl->add_option("--report", bl_report, "Output report JSON (stdout when omitted)");

  // export-embeddings
  Domain ex_domain;
  std::string ex_corpus, ex_ckpt, ex_out, ex_split = "test";
  std::uint64_t ex_seed = 1;
  auto* ex = app.add_subcommand("export-embeddings", "Action vectors with their first three output words (CSV)");
  add_domain(ex, ex_domain);
  ex->add_option("--corpus", ex_corpus, "Corpus JSON")->required();
  ex->add_option("--checkpoint", ex_ckpt, "Model checkpoint")->required();
  ex->add_option("--split", ex_split, "train, valid, test or all")->capture_default_str();
  ex->add_option("--seed", ex_seed, "Split seed")->capture_default_str();
  ex->add_option("--out", ex_out, "Output CSV")->required();

  // serve / chat
  Domain sv_domain;
  std::string sv_ckpt, sv_host = "127.0.0.1", sv_transcript, sv_decoding;
  int sv_port = 8080;
  bool sv_eval = false;
  auto* serve = app.add_subcommand("serve", "HTTP JSON API");
  add_domain(serve, sv_domain);
  serve->add_option("--checkpoint", sv_ckpt, "Model checkpoint")->required();
  serve->add_option("--host", sv_host, "Bind address")->capture_default_str();
  serve->add_option("--port", sv_port, "Port")->capture_default_str();
  serve->add_option("--transcript", sv_transcript, "Append-only JSON-lines turn log");
  serve->add_option("--decoding", sv_decoding, "ml or weighted")->check(CLI::IsMember({"ml", "weighted"}));
  serve->add_flag("--evaluation", sv_eval, "Always answer with the top candidate");

  Domain ch_domain;
  std::string ch_ckpt, ch_decoding;
  std::optional<std::uint64_t> ch_seed;
  auto* chat = app.add_subcommand("chat", "Terminal conversation with a model");
  add_domain(chat, ch_domain);
  chat->add_option("--checkpoint", ch_ckpt, "Model checkpoint")->required();
  chat->add_option("--seed", ch_seed, "Session seed");
  chat->add_option("--decoding", ch_decoding, "ml or weighted")->check(CLI::IsMember({"ml", "weighted"}));

  CLI11_PARSE(app, argc, argv);

  try {
    if (*gen) {
      const auto ont = Ontology::load(gen_domain.ontology_path);
      const auto db = Database::load(gen_domain.db_path, ont);
      save_corpus(gen_out, generate_synthetic(ont, db, gen_n, gen_seed));
      std::cerr << "wrote " << gen_n << " dialogues to " << gen_out << '\n';
    } else if (*conv) {
      const auto ont = Ontology::load(conv_domain.ontology_path);
      const auto db = Database::load(conv_domain.db_path, ont);
      std::ifstream f(conv_in);
      if (!f) throw std::runtime_error("cannot read " + conv_in);
      const auto dialogues = convert_camrest(nlohmann::json::parse(f), ont, Lexicon(ont, &db));
      save_corpus(conv_out, dialogues);
      std::cerr << "converted " << dialogues.size() << " dialogues\n";
    } else if (*train_trk || *train_all) {
      auto& a = *train_trk ? tt : tg;
      const auto ont = Ontology::load(a.domain.ontology_path);
      const auto db = Database::load(a.domain.db_path, ont);
      const Lexicon lex(ont, &db);
      TrainConfig cfg = a.config.empty() ? TrainConfig{} : TrainConfig::load(a.config);
      if (a.seed) cfg.seed = *a.seed;
      cfg.validate();
      const auto corpus = load_corpus(a.corpus, ont);
      const auto sp = split_corpus(corpus, cfg.seed);
      std::optional<Model> model;
      if (!a.trackers.empty()) {
        auto base = Model::load(a.trackers);
        if (!base.phases.value("trackers", false)) throw std::runtime_error(a.trackers + " has no trained trackers");
        model = Model::create(cfg, base.ontology, base.vocab);
        for (auto& [name, p] : model->params.entries()) {
          if (is_tracker_param(name) && base.params.contains(name)) p.value = base.params.get(name).value;
        }
        model->phases["trackers"] = true;
      } else {
        model = Model::create(cfg, ont, build_vocab(sp.train, lex, ont, cfg.min_count));
      }
      const auto opt = train_options(a.serial);
      nlohmann::json logs;
      if (a.trackers.empty()) {
        for (const auto& [k, v] : train_trackers(*model, lex, sp.train, sp.valid, opt)) logs["trackers"][k] = v.to_json();
      }
      if (*train_all) {
        logs["generation"] = train_generation(*model, lex, db, sp.train, sp.valid, opt).to_json();
        if (a.lm) logs["lm"] = train_lm(*model, sp.train, sp.valid, opt).to_json();
      }
      model->save(a.out);
      write_json(a.out + ".log.json", logs);
      std::cerr << "saved " << a.out << '\n';
    } else if (*train_lm_cmd) {
      auto model = Model::load(lm_ckpt);
      const auto corpus = load_corpus(lm_corpus, model.ontology);
      const auto sp = split_corpus(corpus, lm_split_seed ? lm_split_seed : model.cfg.seed);
      auto log = train_lm(model, sp.train, sp.valid, train_options(lm_serial));
      model.save(lm_out.empty() ? lm_ckpt : lm_out);
      std::cerr << "lm perplexity (valid) " << lm_perplexity(model, sp.valid.empty() ? sp.train : sp.valid) << '\n';
    } else if (*ev) {
      const auto model = Model::load(ev_ckpt);
      if (!ev_attention.empty() && (ev_attention == "on") != model.cfg.attention) {
        throw std::invalid_argument("checkpoint was trained with attention " +
                                    std::string(model.cfg.attention ? "on" : "off"));
      }
      const auto db = Database::load(ev_domain.db_path, model.ontology);
      const auto corpus = load_corpus(ev_corpus, model.ontology);
      const Pipeline pipeline(model, db);
      EvalOptions opt;
      opt.decode.evaluation = true;
      opt.decode.decoding = ev_decoding;
      if (!ev_rewards.empty()) opt.decode.reward = RewardConfig::load(ev_rewards);
      if ((ev_decoding.empty() ? model.cfg.decoding : ev_decoding) == "weighted" && !model.phases.value("lm", false)) {
        throw std::runtime_error("weighted decoding needs a trained language model (ndm train-lm)");
      }
      opt.policy = ev_serial ? ExecPolicy::Serial : ExecPolicy::Parallel;
      opt.seed = ev_seed;
      opt.trackers_only = ev_trackers_only;
      write_json(ev_report, evaluate(pipeline, pick_split(corpus, ev_split, ev_seed), opt).to_json());
    } else if (*bl) {
      const auto ont = Ontology::load(bl_domain.ontology_path);
      const auto db = Database::load(bl_domain.db_path, ont);
      const Lexicon lex(ont, &db);
      const auto sp = split_corpus(load_corpus(bl_corpus, ont), bl_seed);
      NgramTracker tracker(ont, lex);
      tracker.train(sp.train, bl_epochs, 0.1, bl_seed);
      const auto r = evaluate_ngram_tracker(tracker, sp.test, ont);
      write_json(bl_report, {{"informable", r.informable.to_json()}, {"requestable", r.requestable.to_json()}});
    } else if (*ex) {
      const auto model = Model::load(ex_ckpt);
      const auto db = Database::load(ex_domain.db_path, model.ontology);
      const auto corpus = load_corpus(ex_corpus, model.ontology);
      const Pipeline pipeline(model, db);
      std::ofstream f(ex_out);
      if (!f) throw std::runtime_error("cannot write " + ex_out);
      write_embeddings_csv(f, export_action_embeddings(pipeline, pick_split(corpus, ex_split, ex_seed)));
    } else if (*serve) {
      const auto model = Model::load(sv_ckpt);
      const auto db = Database::load(sv_domain.db_path, model.ontology);
      EngineOptions eo;
      eo.decode.evaluation = sv_eval;
      eo.decode.decoding = sv_decoding;
      eo.transcript_path = sv_transcript;
      Engine engine(model, db, eo);
      httplib::Server server;
      mount_routes(server, engine);
      std::cerr << "listening on " << sv_host << ':' << sv_port << '\n';
      if (!server.listen(sv_host, sv_port)) throw std::runtime_error("cannot bind " + sv_host);
    } else if (*chat) {
      const auto model = Model::load(ch_ckpt);
      const auto db = Database::load(ch_domain.db_path, model.ontology);
      EngineOptions eo;
      eo.decode.decoding = ch_decoding;
      Engine engine(model, db, eo);
      chat_loop(engine, ch_seed);
    }
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  }
  return 0;
}
