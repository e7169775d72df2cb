#include "kagrmn/verify.hpp"

#include <chrono>
#include <map>

#include "kagrmn/model.hpp"

namespace kagrmn {

namespace {

Sample gradcheck_sample() {
  Sample s;
  s.id = "gradcheck";
  s.tokens = {"a", "b", "c", "d", "e"};  // N_C = 5, single-token aspect -> N = 5
  s.aspect_span = {2, 3};
  s.label = Label::Positive;
  s.parse.heads = {1, 2, -1, 2, 3};
  s.parse.rels = {"det", "nsubj", "root", "obj", "amod"};
  s.description_tokens = {{"x", "y", "z"}};  // N_D = 3
  return s;
}

ModelConfig gradcheck_config(uint64_t seed) {
  ModelConfig cfg;
  cfg.seed = seed;
  cfg.variant = 0;
  cfg.d_e = 8;
  cfg.encoder_layers = 2;
  cfg.encoder_heads = 2;
  cfg.ffn_mult = 2;
  cfg.max_seq_len = 16;
  cfg.time_steps = 2;
  cfg.self_heads = 2;
  cfg.rel_heads = 2;
  cfg.d_r = 4;
  cfg.gcn_layers = 2;
  cfg.dropout = 0.0;
  return cfg;
}

std::string group_of(const std::string& name) {
  const size_t dot = name.find('.');
  return dot == std::string::npos ? name : name.substr(0, dot);
}

}  // namespace

ModelGradCheckReport run_model_gradcheck(const ModelGradCheckOptions& options) {
  const auto started = std::chrono::steady_clock::now();

  const Sample sample = gradcheck_sample();
  const ModelConfig cfg = gradcheck_config(options.seed);

  Vocabulary vocab = build_vocabulary({sample}, {*sample.description_tokens});
  RelationVocab relations = build_relation_vocab({sample}, cfg.distance_cap);
  Model<double> model(cfg, vocab.size(), relations.size());
  SamplePreparer preparer(vocab, relations, cfg);
  const PreparedSample prepared = preparer.prepare(sample);

  RunContext<double> ctx;  // eval mode: the forward must be deterministic
  auto loss_builder = [&]() { return model.loss(prepared, ctx); };

  std::mt19937 rng(static_cast<uint32_t>(options.seed) ^ 0xC0FFEEu);
  GradCheckReport raw = check_gradients<double>(model.params(), loss_builder,
                                                options.entries_per_param, options.step, rng);

  ModelGradCheckReport report;
  report.vacuous = raw.vacuous;
  report.max_rel_err = raw.max_rel_err;
  report.parameters = raw.per_parameter;

  std::map<std::string, GroupReport> groups;
  for (const auto& entry : raw.per_parameter) {
    GroupReport& g = groups[group_of(entry.name)];
    g.group = group_of(entry.name);
    g.max_rel_err = std::max(g.max_rel_err, entry.max_rel_err);
    g.parameters += 1;
    g.entries += entry.entries_checked;
  }
  for (auto& [_, g] : groups) report.groups.push_back(g);

  report.seconds =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - started).count();
  return report;
}

}  // namespace kagrmn
