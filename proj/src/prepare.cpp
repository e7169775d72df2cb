#include "kagrmn/prepare.hpp"

#include <set>
#include <stdexcept>

namespace kagrmn {

SamplePreparer::SamplePreparer(const Vocabulary& vocab, const RelationVocab& relations,
                               const ModelConfig& cfg, RetrievalAssets retrieval)
    : vocab_(vocab), relations_(relations), cfg_(cfg), retrieval_(retrieval) {
  use_knowledge_ = cfg.switches().use_knowledge;
}

std::vector<std::string> resolve_description(const Sample& sample, bool use_knowledge,
                                              const RetrievalAssets& retrieval, bool* from_kb) {
  if (from_kb) *from_kb = false;
  if (!use_knowledge) return sample.aspect_tokens();
  if (sample.description_tokens) {
    if (from_kb) *from_kb = true;
    return *sample.description_tokens;
  }
  if (retrieval.store && retrieval.embeddings && retrieval.stops) {
    Resolution res = resolve(sample.aspect_tokens(), sample.tokens, *retrieval.store,
                             *retrieval.embeddings, *retrieval.stops, retrieval.config);
    if (res.resolved) {
      if (from_kb) *from_kb = true;
      return res.description;
    }
  }
  return sample.aspect_tokens();  // miss: the aspect stands in for its description
}

std::vector<std::string> SamplePreparer::description_for(const Sample& sample,
                                                         bool* from_kb) const {
  return resolve_description(sample, use_knowledge_, retrieval_, from_kb);
}

PreparedSample SamplePreparer::prepare(const Sample& sample) const {
  PreparedSample p;
  p.id = sample.id;
  p.label = static_cast<int>(sample.label);
  p.aspect_span = sample.aspect_span;
  p.context_ids = vocab_.encode(sample.tokens);
  p.aspect_ids = vocab_.encode(sample.aspect_tokens());

  p.description_tokens = description_for(sample, &p.description_from_kb);
  const int max_desc = cfg_.max_seq_len - 2;
  if (static_cast<int>(p.description_tokens.size()) > max_desc)
    p.description_tokens.resize(static_cast<size_t>(max_desc));
  p.description_ids = vocab_.encode(p.description_tokens);

  p.sparse = build_sparse(sample.parse, sample.aspect_span);
  p.dense = build_dense(sample.parse, sample.aspect_span, relations_);
  p.position = position_weights(p.sparse.node_count, p.sparse.aspect_node);
  return p;
}

std::vector<PreparedSample> SamplePreparer::prepare_all(
    const std::vector<Sample>& samples) const {
  std::vector<PreparedSample> out;
  out.reserve(samples.size());
  for (const auto& s : samples) out.push_back(prepare(s));
  return out;
}

Vocabulary build_vocabulary(const std::vector<Sample>& samples,
                            const std::vector<std::vector<std::string>>& descriptions) {
  Vocabulary v;
  for (const auto& s : samples)
    for (const auto& t : s.tokens) v.add(t);
  for (const auto& desc : descriptions)
    for (const auto& t : desc) v.add(t);
  return v;
}

RelationVocab build_relation_vocab(const std::vector<Sample>& samples, int distance_cap) {
  std::set<std::string> labels;
  for (const auto& s : samples)
    for (const auto& r : s.parse.rels) labels.insert(r);
  return RelationVocab(std::vector<std::string>(labels.begin(), labels.end()), distance_cap);
}

}  // namespace kagrmn
