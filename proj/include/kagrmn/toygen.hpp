#pragma once

#include <string>
#include <vector>

#include "kagrmn/config.hpp"
#include "kagrmn/dataset.hpp"
#include "kagrmn/retrieval.hpp"

namespace kagrmn {

// Synthetic corpus exercising both classification pathways:
//  - "basic" samples plant an explicit cue word near the aspect,
//  - "knowledge" samples use homonym aspects whose polarity is only decided
//    by the knowledge-store description; a steering context word picks the
//    right description candidate via embedding similarity, and the test-set
//    homonyms never occur in training, so context alone cannot predict them.
struct ToyCorpus {
  std::vector<Sample> train;
  std::vector<Sample> test;            // basic + knowledge mix
  std::vector<Sample> test_knowledge;  // the knowledge-dependent split
  KnowledgeStore kb;
  EmbeddingTable embeddings;
  std::string domain_label;
  int vocabulary_size = 0;  // distinct corpus tokens
};

ToyCorpus generate_toy_corpus(uint64_t seed);

// Training configuration the corpus is tuned for (desk-scale dimensions).
ModelConfig toy_config(uint64_t seed);

// Writes train.jsonl, test.jsonl, test_knowledge.jsonl, kb.json,
// embeddings.txt and toy.cfg under `dir`.
void write_toy_corpus(const ToyCorpus& corpus, const std::string& dir, uint64_t seed);

}  // namespace kagrmn
