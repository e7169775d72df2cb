#include <CLI11.hpp>
#include <json.hpp>

#include <iostream>
#include <optional>

#include "kagrmn/config.hpp"
#include "kagrmn/dataset.hpp"
#include "kagrmn/prepare.hpp"
#include "kagrmn/retrieval.hpp"
#include "kagrmn/toygen.hpp"
#include "kagrmn/trainer.hpp"
#include "kagrmn/verify.hpp"

namespace {

struct CommonOpts {
  std::string config_path;
  std::optional<uint64_t> seed;
  std::optional<std::string> variant;
  std::optional<int> time_steps;
  std::vector<std::string> overrides;  // key=value
};

void add_common(CLI::App* cmd, CommonOpts& opts) {
  cmd->add_option("--config", opts.config_path, "flat key = value config file");
  cmd->add_option("--seed", opts.seed, "RNG seed (overrides config)");
  cmd->add_option("--variant", opts.variant, "model variant M0..M12");
  cmd->add_option("--time-steps", opts.time_steps, "recurrence steps T");
  cmd->add_option("--set", opts.overrides, "extra config overrides, key=value")
      ->type_name("KEY=VALUE");
}

kagrmn::ModelConfig resolve_config(const CommonOpts& opts) {
  kagrmn::ModelConfig cfg;
  if (!opts.config_path.empty()) cfg = kagrmn::load_config_file(opts.config_path);
  if (opts.seed) cfg.seed = *opts.seed;
  if (opts.variant) kagrmn::apply_config_kv(cfg, "variant", *opts.variant);
  if (opts.time_steps) cfg.time_steps = *opts.time_steps;
  for (const auto& kv : opts.overrides) {
    const size_t eq = kv.find('=');
    if (eq == std::string::npos) throw std::runtime_error("--set expects key=value, got " + kv);
    kagrmn::apply_config_kv(cfg, kv.substr(0, eq), kv.substr(eq + 1));
  }
  cfg.validate();
  return cfg;
}

struct RetrievalFiles {
  std::string kb_path, embeddings_path, stopwords_path;

  void add_flags(CLI::App* cmd) {
    cmd->add_option("--kb", kb_path, "knowledge store JSON");
    cmd->add_option("--embeddings", embeddings_path, "static embedding text file");
    cmd->add_option("--stopwords", stopwords_path, "stop-word list (default: built-in)");
  }

  bool enabled() const { return !kb_path.empty(); }
};

// Owns the loaded retrieval data for the duration of a command.
struct LoadedRetrieval {
  kagrmn::KnowledgeStore store;
  kagrmn::EmbeddingTable embeddings;
  kagrmn::StopWords stops;
  kagrmn::RetrievalAssets assets;

  static LoadedRetrieval load(const RetrievalFiles& files, const kagrmn::ModelConfig& cfg) {
    LoadedRetrieval r;
    r.stops = files.stopwords_path.empty() ? kagrmn::StopWords::builtin()
                                           : kagrmn::StopWords::load(files.stopwords_path);
    if (files.enabled()) {
      if (files.embeddings_path.empty())
        throw std::runtime_error("--kb requires --embeddings for disambiguation");
      r.store = kagrmn::KnowledgeStore::load(files.kb_path, r.stops);
      r.embeddings = kagrmn::EmbeddingTable::load(files.embeddings_path);
      r.assets.store = &r.store;
      r.assets.embeddings = &r.embeddings;
      r.assets.stops = &r.stops;
    }
    r.assets.config.alpha = cfg.alpha;
    r.assets.config.domain_label = cfg.domain_label;
    return r;
  }
};

int cmd_retrieve(const CommonOpts& common, const RetrievalFiles& files,
                 const std::string& data_path, const std::string& out_path) {
  kagrmn::ModelConfig cfg = resolve_config(common);
  if (!files.enabled()) throw std::runtime_error("retrieve requires --kb and --embeddings");
  LoadedRetrieval retrieval = LoadedRetrieval::load(files, cfg);
  std::vector<kagrmn::Sample> samples = kagrmn::load_dataset(data_path);

  size_t resolved_count = 0;
  for (auto& s : samples) {
    kagrmn::Resolution res = kagrmn::resolve(s.aspect_tokens(), s.tokens, retrieval.store,
                                             retrieval.embeddings, retrieval.stops,
                                             retrieval.assets.config);
    nlohmann::json j;
    j["id"] = s.id;
    j["resolved"] = res.resolved;
    j["key"] = res.key;
    if (res.resolved) {
      ++resolved_count;
      j["candidate_index"] = res.candidate_index;
      j["score"] = res.score;
      j["description_tokens"] = res.description;
      s.description_tokens = res.description;
    }
    std::cout << j.dump() << "\n";
  }
  std::cerr << "resolved " << resolved_count << "/" << samples.size() << " aspects ("
            << (samples.empty() ? 0.0 : 100.0 * resolved_count / samples.size()) << "%)\n";
  if (!out_path.empty()) kagrmn::save_dataset(samples, out_path);
  return 0;
}

int cmd_build_graphs(const CommonOpts& common, const std::string& data_path) {
  kagrmn::ModelConfig cfg = resolve_config(common);
  std::vector<kagrmn::Sample> samples = kagrmn::load_dataset(data_path);
  kagrmn::RelationVocab relations = kagrmn::build_relation_vocab(samples, cfg.distance_cap);
  for (const auto& s : samples) {
    kagrmn::SparseGraph sparse = kagrmn::build_sparse(s.parse, s.aspect_span);
    kagrmn::DenseGraph dense = kagrmn::build_dense(s.parse, s.aspect_span, relations);
    std::vector<double> wp = kagrmn::position_weights(sparse.node_count, sparse.aspect_node);

    nlohmann::json j;
    j["id"] = s.id;
    nlohmann::json edges = nlohmann::json::array();
    for (int i = 0; i < sparse.node_count; ++i)
      for (int k : sparse.adjacency[static_cast<size_t>(i)])
        if (i < k) edges.push_back({i, k});
    j["sparse"] = {{"node_count", sparse.node_count},
                   {"aspect_node", sparse.aspect_node},
                   {"edges", edges}};
    nlohmann::json rels = nlohmann::json::array();
    for (int i = 0; i < dense.node_count; ++i) {
      const int id = dense.relation_ids[static_cast<size_t>(i)];
      rels.push_back(id < 0 ? "aspect" : relations.label(id));
    }
    j["dense"] = {{"aspect_node", dense.aspect_node}, {"relations", rels}};
    j["position_weights"] = wp;
    std::cout << j.dump() << "\n";
  }
  return 0;
}

int cmd_train(const CommonOpts& common, const RetrievalFiles& files, const std::string& data_path,
              const std::string& eval_path, const std::string& out_path) {
  kagrmn::ModelConfig cfg = resolve_config(common);
  LoadedRetrieval retrieval = LoadedRetrieval::load(files, cfg);
  std::vector<kagrmn::Sample> train_samples = kagrmn::load_dataset(data_path);
  std::optional<std::vector<kagrmn::Sample>> eval_samples;
  if (!eval_path.empty()) eval_samples = kagrmn::load_dataset(eval_path);

  kagrmn::TrainResult result =
      kagrmn::train_model(cfg, train_samples, eval_samples ? &*eval_samples : nullptr,
                          retrieval.assets, out_path, &std::cout);
  nlohmann::json done;
  done["event"] = "done";
  done["checkpoint"] = result.checkpoint_path;
  done["train_accuracy"] = result.train_metrics.accuracy;
  done["train_macro_f1"] = result.train_metrics.macro_f1;
  if (result.eval_metrics) {
    done["eval_accuracy"] = result.eval_metrics->accuracy;
    done["eval_macro_f1"] = result.eval_metrics->macro_f1;
  }
  std::cout << done.dump() << "\n";
  return 0;
}

int cmd_eval(const CommonOpts& common, const RetrievalFiles& files,
             const std::string& checkpoint, const std::string& data_path) {
  kagrmn::ModelConfig cfg = resolve_config(common);
  LoadedRetrieval retrieval = LoadedRetrieval::load(files, cfg);
  kagrmn::ModelBundle bundle = kagrmn::load_model_bundle(cfg, checkpoint);
  std::vector<kagrmn::Sample> samples = kagrmn::load_dataset(data_path);
  kagrmn::MetricsResult metrics = kagrmn::evaluate_model(bundle, samples, retrieval.assets);
  std::cout << kagrmn::metrics_to_json(metrics) << "\n";
  return 0;
}

int cmd_predict(const CommonOpts& common, const RetrievalFiles& files,
                const std::string& checkpoint, const std::string& data_path) {
  kagrmn::ModelConfig cfg = resolve_config(common);
  LoadedRetrieval retrieval = LoadedRetrieval::load(files, cfg);
  kagrmn::ModelBundle bundle = kagrmn::load_model_bundle(cfg, checkpoint);
  std::vector<kagrmn::Sample> samples = kagrmn::load_dataset(data_path);
  for (const auto& pred : kagrmn::predict_model(bundle, samples, retrieval.assets)) {
    nlohmann::json j;
    j["id"] = pred.id;
    j["distribution"] = pred.distribution;
    j["label"] = kagrmn::label_to_string(pred.label);
    std::cout << j.dump() << "\n";
  }
  return 0;
}

int cmd_gradcheck(const CommonOpts& common, int entries, double tolerance) {
  kagrmn::ModelGradCheckOptions options;
  if (common.seed) options.seed = *common.seed;
  options.entries_per_param = entries;
  options.tolerance = tolerance;
  kagrmn::ModelGradCheckReport report = kagrmn::run_model_gradcheck(options);

  for (const auto& g : report.groups) {
    nlohmann::json j;
    j["event"] = "group";
    j["group"] = g.group;
    j["parameters"] = g.parameters;
    j["entries_checked"] = g.entries;
    j["max_rel_err"] = g.max_rel_err;
    j["pass"] = g.max_rel_err <= options.tolerance;
    std::cout << j.dump() << "\n";
  }
  nlohmann::json summary;
  summary["event"] = "summary";
  summary["max_rel_err"] = report.max_rel_err;
  summary["tolerance"] = options.tolerance;
  summary["seconds"] = report.seconds;
  summary["pass"] = report.passed(options.tolerance);
  if (report.vacuous) summary["warning"] = "no parameters to check";
  std::cout << summary.dump() << "\n";
  return report.passed(options.tolerance) ? 0 : 1;
}

int cmd_gen_toy(const CommonOpts& common, const std::string& out_dir) {
  const uint64_t seed = common.seed.value_or(42);
  kagrmn::ToyCorpus corpus = kagrmn::generate_toy_corpus(seed);
  kagrmn::write_toy_corpus(corpus, out_dir, seed);
  nlohmann::json j;
  j["event"] = "gen-toy";
  j["out_dir"] = out_dir;
  j["train_samples"] = corpus.train.size();
  j["test_samples"] = corpus.test.size();
  j["knowledge_test_samples"] = corpus.test_knowledge.size();
  j["vocabulary_size"] = corpus.vocabulary_size;
  std::cout << j.dump() << "\n";
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"aspect-level sentiment classifier with knowledge retrieval and syntax graphs"};
  app.require_subcommand(1);

  CommonOpts common;
  RetrievalFiles files;
  std::string data_path, eval_path, out_path, checkpoint;
  int entries = 10;
  double tolerance = 1e-4;

  auto* retrieve = app.add_subcommand("retrieve", "resolve aspect descriptions against the KB");
  add_common(retrieve, common);
  files.add_flags(retrieve);
  retrieve->add_option("--data", data_path, "dataset JSONL")->required();
  retrieve->add_option("--out", out_path, "write the dataset enriched with descriptions");

  auto* graphs = app.add_subcommand("build-graphs", "dump merged and star syntax graphs");
  add_common(graphs, common);
  graphs->add_option("--data", data_path, "dataset JSONL")->required();

  auto* train = app.add_subcommand("train", "train a model");
  add_common(train, common);
  files.add_flags(train);
  train->add_option("--data", data_path, "training JSONL")->required();
  train->add_option("--eval", eval_path, "optional eval JSONL");
  train->add_option("--out", out_path, "checkpoint output path")->required();

  auto* eval = app.add_subcommand("eval", "evaluate a checkpoint");
  add_common(eval, common);
  files.add_flags(eval);
  eval->add_option("--checkpoint", checkpoint, "checkpoint path")->required();
  eval->add_option("--data", data_path, "dataset JSONL")->required();

  auto* predict = app.add_subcommand("predict", "emit per-sample distributions");
  add_common(predict, common);
  files.add_flags(predict);
  predict->add_option("--checkpoint", checkpoint, "checkpoint path")->required();
  predict->add_option("--data", data_path, "dataset JSONL")->required();

  auto* gradcheck = app.add_subcommand("gradcheck", "finite-difference gradient validation");
  add_common(gradcheck, common);
  gradcheck->add_option("--entries", entries, "entries checked per parameter");
  gradcheck->add_option("--tolerance", tolerance, "max relative error allowed");

  auto* gen_toy = app.add_subcommand("gen-toy", "generate the synthetic toy corpus");
  add_common(gen_toy, common);
  gen_toy->add_option("--out-dir", out_path, "output directory")->required();

  CLI11_PARSE(app, argc, argv);

  try {
    if (retrieve->parsed()) return cmd_retrieve(common, files, data_path, out_path);
    if (graphs->parsed()) return cmd_build_graphs(common, data_path);
    if (train->parsed()) return cmd_train(common, files, data_path, eval_path, out_path);
    if (eval->parsed()) return cmd_eval(common, files, checkpoint, data_path);
    if (predict->parsed()) return cmd_predict(common, files, checkpoint, data_path);
    if (gradcheck->parsed()) return cmd_gradcheck(common, entries, tolerance);
    if (gen_toy->parsed()) return cmd_gen_toy(common, out_path);
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  }
  return 0;
}
