#pragma once

#include <optional>
#include <string>
#include <vector>

#include "kagrmn/config.hpp"
#include "kagrmn/dataset.hpp"
#include "kagrmn/retrieval.hpp"
#include "kagrmn/syntaxgraph.hpp"
#include "kagrmn/vocab.hpp"

namespace kagrmn {

// Everything the model consumes per sample, resolved ahead of training:
// token ids, the description (retrieved, carried in the file, or the aspect
// itself), both syntax graphs and the position weights.
struct PreparedSample {
  std::string id;
  std::vector<int> context_ids;
  std::vector<int> aspect_ids;
  std::vector<int> description_ids;
  std::vector<std::string> description_tokens;
  bool description_from_kb = false;
  Span aspect_span;
  SparseGraph sparse;
  DenseGraph dense;
  std::vector<double> position;
  int label = -1;
};

// Retrieval assets are optional: without a knowledge store every description
// falls back to the aspect tokens (the no-knowledge variant forces that
// fallback regardless).
struct RetrievalAssets {
  const KnowledgeStore* store = nullptr;
  const EmbeddingTable* embeddings = nullptr;
  const StopWords* stops = nullptr;
  RetrievalConfig config;
};

// Description used for one sample: the carried tokens, a knowledge-store hit,
// or the aspect tokens as fallback (always the aspect when knowledge is off).
std::vector<std::string> resolve_description(const Sample& sample, bool use_knowledge,
                                             const RetrievalAssets& retrieval,
                                             bool* from_kb = nullptr);

class SamplePreparer {
 public:
  SamplePreparer(const Vocabulary& vocab, const RelationVocab& relations, const ModelConfig& cfg,
                 RetrievalAssets retrieval = {});

  PreparedSample prepare(const Sample& sample) const;
  std::vector<PreparedSample> prepare_all(const std::vector<Sample>& samples) const;

  // Resolved description for one sample, before vocabulary encoding.
  std::vector<std::string> description_for(const Sample& sample, bool* from_kb = nullptr) const;

 private:
  const Vocabulary& vocab_;
  const RelationVocab& relations_;
  ModelConfig cfg_;
  RetrievalAssets retrieval_;
  bool use_knowledge_;
};

// Scans samples: dependency labels for the relation vocabulary and tokens
// (including resolvable descriptions) for the token vocabulary.
Vocabulary build_vocabulary(const std::vector<Sample>& samples,
                            const std::vector<std::vector<std::string>>& descriptions);
RelationVocab build_relation_vocab(const std::vector<Sample>& samples, int distance_cap);

}  // namespace kagrmn
