#pragma once

#include <array>
#include <iosfwd>
#include <memory>
#include <optional>

#include "kagrmn/metrics.hpp"
#include "kagrmn/model.hpp"

namespace kagrmn {

struct EpochLog {
  int epoch = 0;
  double loss = 0.0;            // mean training loss over the epoch
  double train_accuracy = 0.0;  // eval-mode pass over the training set
  double eval_accuracy = -1.0;  // -1 when no eval split was given
};

struct TrainResult {
  std::vector<EpochLog> epochs;
  MetricsResult train_metrics;  // eval-mode metrics on the training set, final epoch
  std::optional<MetricsResult> eval_metrics;
  std::string checkpoint_path;
};

// Trained model plus the vocabularies it was trained with. The vocabularies
// live beside the checkpoint (<path>.vocab, <path>.relations).
struct ModelBundle {
  ModelConfig config;
  Vocabulary vocab;
  RelationVocab relations;
  std::unique_ptr<Model<float>> model;
};

// Seeded, single-threaded training loop: per-epoch shuffling, fixed-size
// mini-batches (last partial batch kept), Adam updates on the mean batch
// loss. Writes the final checkpoint to `checkpoint_out` (plus the best-eval
// checkpoint at <path>.best when an eval split is given) and JSONL epoch
// lines to `log_stream`. Aborts on a non-finite loss, naming the first
// parameter carrying a non-finite value or gradient.
TrainResult train_model(const ModelConfig& cfg, const std::vector<Sample>& train_samples,
                        const std::vector<Sample>* eval_samples,
                        const RetrievalAssets& retrieval, const std::string& checkpoint_out,
                        std::ostream* log_stream);

ModelBundle load_model_bundle(const ModelConfig& cfg, const std::string& checkpoint_path);

MetricsResult evaluate_model(ModelBundle& bundle, const std::vector<Sample>& samples,
                             const RetrievalAssets& retrieval);

struct Prediction {
  std::string id;
  std::array<double, 3> distribution{};  // [negative, positive, neutral]
  Label label = Label::Neutral;
};

std::vector<Prediction> predict_model(ModelBundle& bundle, const std::vector<Sample>& samples,
                                      const RetrievalAssets& retrieval);

std::string epoch_log_to_json(const EpochLog& log);

}  // namespace kagrmn
