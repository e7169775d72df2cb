#include "kagrmn/trainer.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <numeric>
#include <ostream>
#include <random>

#include <json.hpp>

#include "kagrmn/adam.hpp"
#include "kagrmn/checkpoint.hpp"

namespace kagrmn {

namespace {

// Named RNG streams derived from the run seed, so adding a consumer never
// shifts another stream.
std::mt19937 seeded_rng(uint64_t seed, uint32_t stream, uint32_t index = 0) {
  std::seed_seq seq{static_cast<uint32_t>(seed), static_cast<uint32_t>(seed >> 32), stream, index};
  return std::mt19937(seq);
}

[[noreturn]] void abort_non_finite(ParameterStore<float>& store, int epoch) {
  for (const auto& p : store.all()) {
    if (!p.tensor.value().allFinite())
      throw std::runtime_error("training aborted at epoch " + std::to_string(epoch) +
                               ": non-finite value in parameter " + p.name);
    if (p.tensor.has_grad() && !p.tensor.grad().allFinite())
      throw std::runtime_error("training aborted at epoch " + std::to_string(epoch) +
                               ": non-finite gradient in parameter " + p.name);
  }
  throw std::runtime_error("training aborted at epoch " + std::to_string(epoch) +
                           ": non-finite loss");
}

// A forward-pass failure after parameters have diverged should name the
// culprit parameter rather than the op that noticed.
[[noreturn]] void rethrow_with_diagnostic(ParameterStore<float>& store, int epoch) {
  for (const auto& p : store.all())
    if (!p.tensor.value().allFinite())
      throw std::runtime_error("training aborted at epoch " + std::to_string(epoch) +
                               ": non-finite value in parameter " + p.name);
  throw;
}

MetricsResult eval_prepared(Model<float>& model, const std::vector<PreparedSample>& samples) {
  NoGradGuard no_grad;
  RunContext<float> ctx;  // eval mode
  ConfusionMatrix confusion;
  for (const auto& s : samples) {
    ForwardResult<float> fwd = model.forward(s, ctx);
    confusion.record(static_cast<Label>(s.label), static_cast<Label>(fwd.predicted));
  }
  return compute_metrics(confusion);
}

}  // namespace

std::string epoch_log_to_json(const EpochLog& log) {
  nlohmann::json j;
  j["event"] = "epoch";
  j["epoch"] = log.epoch;
  j["loss"] = log.loss;
  j["train_accuracy"] = log.train_accuracy;
  if (log.eval_accuracy >= 0.0) j["eval_accuracy"] = log.eval_accuracy;
  return j.dump();
}

TrainResult train_model(const ModelConfig& cfg, const std::vector<Sample>& train_samples,
                        const std::vector<Sample>* eval_samples,
                        const RetrievalAssets& retrieval, const std::string& checkpoint_out,
                        std::ostream* log_stream) {
  cfg.validate();
  if (train_samples.empty()) throw std::runtime_error("train: no samples");
  const VariantSwitch switches = cfg.switches();

  std::vector<std::vector<std::string>> descriptions;
  descriptions.reserve(train_samples.size());
  for (const auto& s : train_samples)
    descriptions.push_back(resolve_description(s, switches.use_knowledge, retrieval));

  Vocabulary vocab = build_vocabulary(train_samples, descriptions);
  RelationVocab relations = build_relation_vocab(train_samples, cfg.distance_cap);

  Model<float> model(cfg, vocab.size(), relations.size());
  SamplePreparer preparer(vocab, relations, cfg, retrieval);
  std::vector<PreparedSample> prepared = preparer.prepare_all(train_samples);
  std::vector<PreparedSample> eval_prepared_samples;
  if (eval_samples) eval_prepared_samples = preparer.prepare_all(*eval_samples);

  Adam<float> optimizer({static_cast<float>(cfg.learning_rate)});
  std::mt19937 dropout_rng = seeded_rng(cfg.seed, 0xD0u);

  TrainResult result;
  double best_eval = -1.0;
  std::vector<size_t> order(prepared.size());
  std::iota(order.begin(), order.end(), 0);

  for (int epoch = 1; epoch <= cfg.epochs; ++epoch) {
    std::mt19937 shuffle_rng = seeded_rng(cfg.seed, 0x5Fu, static_cast<uint32_t>(epoch));
    std::shuffle(order.begin(), order.end(), shuffle_rng);

    RunContext<float> ctx{true, static_cast<float>(cfg.dropout), &dropout_rng};
    double loss_sum = 0.0;
    for (size_t start = 0; start < order.size(); start += static_cast<size_t>(cfg.batch_size)) {
      const size_t stop = std::min(order.size(), start + static_cast<size_t>(cfg.batch_size));
      Tensor<float> batch_loss;
      try {
        for (size_t k = start; k < stop; ++k) {
          Tensor<float> sample_loss = model.loss(prepared[order[k]], ctx);
          batch_loss = k == start ? sample_loss : add(batch_loss, sample_loss);
        }
      } catch (const std::runtime_error&) {
        rethrow_with_diagnostic(model.params(), epoch);
      }
      batch_loss = scalar_mul(batch_loss, 1.0f / static_cast<float>(stop - start));
      const double value = batch_loss.item();
      if (!std::isfinite(value)) abort_non_finite(model.params(), epoch);
      loss_sum += value * static_cast<double>(stop - start);
      backward(batch_loss);
      for (const auto& p : model.params().all())
        if (p.tensor.has_grad() && !p.tensor.grad().allFinite())
          abort_non_finite(model.params(), epoch);
      optimizer.step(model.params());
    }

    EpochLog log;
    log.epoch = epoch;
    log.loss = loss_sum / static_cast<double>(prepared.size());
    result.train_metrics = eval_prepared(model, prepared);
    log.train_accuracy = result.train_metrics.accuracy;
    if (eval_samples) {
      result.eval_metrics = eval_prepared(model, eval_prepared_samples);
      log.eval_accuracy = result.eval_metrics->accuracy;
      if (!checkpoint_out.empty() && log.eval_accuracy > best_eval) {
        best_eval = log.eval_accuracy;
        save_checkpoint(model.params(), checkpoint_out + ".best");
      }
    }
    if (log_stream) *log_stream << epoch_log_to_json(log) << "\n";
    result.epochs.push_back(log);
  }

  if (cfg.epochs == 0) result.train_metrics = eval_prepared(model, prepared);

  if (!checkpoint_out.empty()) {
    save_checkpoint(model.params(), checkpoint_out);
    vocab.save(checkpoint_out + ".vocab");
    save_lines(relations.labels(), checkpoint_out + ".relations");
    std::ofstream metrics_os(checkpoint_out + ".metrics.json", std::ios::trunc);
    metrics_os << metrics_to_json(result.train_metrics) << "\n";
    if (result.eval_metrics) metrics_os << metrics_to_json(*result.eval_metrics) << "\n";
    result.checkpoint_path = checkpoint_out;
  }
  return result;
}

ModelBundle load_model_bundle(const ModelConfig& cfg, const std::string& checkpoint_path) {
  ModelBundle bundle;
  bundle.config = cfg;
  bundle.config.validate();
  bundle.vocab = Vocabulary::load(checkpoint_path + ".vocab");
  bundle.relations =
      RelationVocab::from_lines(load_lines(checkpoint_path + ".relations"), cfg.distance_cap);
  bundle.model =
      std::make_unique<Model<float>>(bundle.config, bundle.vocab.size(), bundle.relations.size());
  load_checkpoint(bundle.model->params(), checkpoint_path);
  return bundle;
}

MetricsResult evaluate_model(ModelBundle& bundle, const std::vector<Sample>& samples,
                             const RetrievalAssets& retrieval) {
  if (samples.empty()) throw std::runtime_error("evaluate: no samples");
  SamplePreparer preparer(bundle.vocab, bundle.relations, bundle.config, retrieval);
  return eval_prepared(*bundle.model, preparer.prepare_all(samples));
}

std::vector<Prediction> predict_model(ModelBundle& bundle, const std::vector<Sample>& samples,
                                      const RetrievalAssets& retrieval) {
  SamplePreparer preparer(bundle.vocab, bundle.relations, bundle.config, retrieval);
  NoGradGuard no_grad;
  RunContext<float> ctx;
  std::vector<Prediction> out;
  out.reserve(samples.size());
  for (const auto& s : samples) {
    PreparedSample p = preparer.prepare(s);
    ForwardResult<float> fwd = bundle.model->forward(p, ctx);
    Prediction pred;
    pred.id = s.id;
    for (int c = 0; c < 3; ++c) pred.distribution[static_cast<size_t>(c)] = fwd.probs.value()(0, c);
    pred.label = static_cast<Label>(fwd.predicted);
    out.push_back(std::move(pred));
  }
  return out;
}

}  // namespace kagrmn
