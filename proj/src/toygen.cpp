#include "kagrmn/toygen.hpp"

#include <algorithm>
#include <filesystem>
#include <fstream>
#include <random>
#include <set>
#include <stdexcept>

#include "kagrmn/params.hpp"

namespace kagrmn {

namespace {

const std::vector<std::string> kCues = {"awful", "superb", "okay"};  // label order N, P, O
const std::vector<std::string> kBasicAspects = {"table", "router", "salad",
                                                "screen", "phone", "touch screen"};
const std::vector<std::string> kTrainHomonyms = {"tango", "mambo", "waltz", "polka", "samba",
                                                 "rumba", "salsa", "conga", "bolero", "chacha"};
const std::vector<std::string> kTestHomonyms = {"jig", "reel", "gigue", "hornpipe", "minuet",
                                                "bourree"};
constexpr const char* kMusicSteer = "onstage";
constexpr const char* kKitchenSteer = "stovetop";
constexpr const char* kPositiveKnowledge = "classic";
constexpr const char* kNegativeKnowledge = "notorious";

std::vector<std::string> split_tokens(const std::string& s) {
  std::vector<std::string> out;
  std::string cur;
  for (char c : s) {
    if (c == ' ') {
      if (!cur.empty()) out.push_back(cur);
      cur.clear();
    } else {
      cur += c;
    }
  }
  if (!cur.empty()) out.push_back(cur);
  return out;
}

// "the ASP is CUE today ."-family templates with hand-built parses.
Sample basic_sample(const std::string& id, const std::string& aspect, int label, int variant,
                    bool flip_tense) {
  const std::vector<std::string> asp = split_tokens(aspect);
  const std::string be = flip_tense ? "was" : "is";
  const std::string adv = flip_tense ? "here" : "today";
  const std::string cue = kCues[static_cast<size_t>(label)];
  Sample s;
  s.id = id;
  s.label = static_cast<Label>(label);
  const int n_a = static_cast<int>(asp.size());
  if (variant == 0) {
    // the ASP be CUE adv .   root = CUE
    s.tokens = {"the"};
    s.tokens.insert(s.tokens.end(), asp.begin(), asp.end());
    s.tokens.insert(s.tokens.end(), {be, cue, adv, "."});
    s.aspect_span = {1, 1 + n_a};
    const int head_tok = n_a;      // last aspect token
    const int cue_tok = n_a + 2;   // cue position
    s.parse.heads.assign(s.tokens.size(), 0);
    s.parse.rels.assign(s.tokens.size(), "");
    s.parse.heads[0] = head_tok;
    s.parse.rels[0] = "det";
    for (int k = 1; k < n_a; ++k) {  // aspect-internal compounds
      s.parse.heads[static_cast<size_t>(k)] = head_tok;
      s.parse.rels[static_cast<size_t>(k)] = "compound";
    }
    s.parse.heads[static_cast<size_t>(head_tok)] = cue_tok;
    s.parse.rels[static_cast<size_t>(head_tok)] = "nsubj";
    s.parse.heads[static_cast<size_t>(n_a + 1)] = cue_tok;
    s.parse.rels[static_cast<size_t>(n_a + 1)] = "cop";
    s.parse.heads[static_cast<size_t>(cue_tok)] = -1;
    s.parse.rels[static_cast<size_t>(cue_tok)] = "root";
    s.parse.heads[static_cast<size_t>(n_a + 3)] = cue_tok;
    s.parse.rels[static_cast<size_t>(n_a + 3)] = "advmod";
    s.parse.heads[static_cast<size_t>(n_a + 4)] = cue_tok;
    s.parse.rels[static_cast<size_t>(n_a + 4)] = "punct";
  } else if (variant == 1) {
    // a CUE ASP be adv .   root = last aspect token
    s.tokens = {"a", cue};
    s.tokens.insert(s.tokens.end(), asp.begin(), asp.end());
    s.tokens.insert(s.tokens.end(), {be, adv, "."});
    s.aspect_span = {2, 2 + n_a};
    const int head_tok = 1 + n_a;
    s.parse.heads.assign(s.tokens.size(), head_tok);
    s.parse.rels.assign(s.tokens.size(), "");
    s.parse.rels[0] = "det";
    s.parse.rels[1] = "amod";
    for (int k = 0; k + 1 < n_a; ++k) s.parse.rels[static_cast<size_t>(2 + k)] = "compound";
    s.parse.heads[static_cast<size_t>(head_tok)] = -1;
    s.parse.rels[static_cast<size_t>(head_tok)] = "root";
    s.parse.rels[static_cast<size_t>(head_tok + 1)] = "cop";
    s.parse.rels[static_cast<size_t>(head_tok + 2)] = "advmod";
    s.parse.rels[static_cast<size_t>(head_tok + 3)] = "punct";
  } else {
    // it be a CUE ASP .   root = last aspect token
    s.tokens = {"it", be, "a", cue};
    s.tokens.insert(s.tokens.end(), asp.begin(), asp.end());
    s.tokens.push_back(".");
    s.aspect_span = {4, 4 + n_a};
    const int head_tok = 3 + n_a;
    s.parse.heads.assign(s.tokens.size(), head_tok);
    s.parse.rels.assign(s.tokens.size(), "");
    s.parse.rels[0] = "nsubj";
    s.parse.rels[1] = "cop";
    s.parse.rels[2] = "det";
    s.parse.rels[3] = "amod";
    for (int k = 0; k + 1 < n_a; ++k) s.parse.rels[static_cast<size_t>(4 + k)] = "compound";
    s.parse.heads[static_cast<size_t>(head_tok)] = -1;
    s.parse.rels[static_cast<size_t>(head_tok)] = "root";
    s.parse.rels[static_cast<size_t>(head_tok + 1)] = "punct";
  }
  return s;
}

// "the HOM be STEER adv ." — polarity decided only by the description.
Sample knowledge_sample(const std::string& id, const std::string& homonym, bool music_sense,
                        int label, bool flip_tense) {
  const std::string be = flip_tense ? "was" : "is";
  const std::string adv = flip_tense ? "here" : "today";
  const std::string steer = music_sense ? kMusicSteer : kKitchenSteer;
  Sample s;
  s.id = id;
  s.label = static_cast<Label>(label);
  s.tokens = {"the", homonym, be, steer, adv, "."};
  s.aspect_span = {1, 2};
  s.parse.heads = {1, 3, 3, -1, 3, 3};
  s.parse.rels = {"det", "nsubj", "cop", "root", "advmod", "punct"};
  return s;
}

// Music sense of even-indexed homonyms is positive; kitchen is the opposite.
int music_label(int homonym_index) { return homonym_index % 2 == 0 ? 1 : 0; }

std::vector<std::string> description_for_sense(bool music_sense, int label) {
  const std::string knowledge = label == 1 ? kPositiveKnowledge : kNegativeKnowledge;
  if (music_sense) return {knowledge, "melody", kMusicSteer};
  return {knowledge, "skillet", kKitchenSteer};
}

Eigen::VectorXd noise_vector(const std::string& token, int dim) {
  std::seed_seq seq{static_cast<uint32_t>(fnv1a(token)),
                    static_cast<uint32_t>(fnv1a(token) >> 32)};
  std::mt19937 rng(seq);
  std::uniform_real_distribution<double> d(-0.05, 0.05);
  Eigen::VectorXd v = Eigen::VectorXd::Zero(dim);
  for (int i = 2; i <= 6; ++i) v[i] = d(rng);
  return v;
}

}  // namespace

ToyCorpus generate_toy_corpus(uint64_t seed) {
  ToyCorpus corpus;
  corpus.domain_label = "toy";

  std::vector<std::string> homonyms = kTrainHomonyms;
  homonyms.insert(homonyms.end(), kTestHomonyms.begin(), kTestHomonyms.end());

  // knowledge store: two senses per homonym, the candidate order fixed
  StopWords stops = StopWords::builtin();
  for (size_t h = 0; h < homonyms.size(); ++h) {
    const int m_label = music_label(static_cast<int>(h));
    std::vector<std::vector<std::string>> candidates = {
        description_for_sense(true, m_label), description_for_sense(false, 1 - m_label)};
    corpus.kb.add(normalize_key({homonyms[h]}, stops), std::move(candidates));
  }
  {  // two basic aspects with single-candidate entries; the rest miss
    std::vector<std::vector<std::string>> t = {{"it", "is", "a", "table"}};
    corpus.kb.add(normalize_key({"table"}, stops), t);
    std::vector<std::vector<std::string>> r = {{"it", "is", "a", "router"}};
    corpus.kb.add(normalize_key({"router"}, stops), r);
  }

  // train: 120 cue-labelled basic samples + 80 knowledge samples
  int counter = 0;
  for (int i = 0; i < 120; ++i) {
    const int label = i % 3;
    const auto& aspect = kBasicAspects[static_cast<size_t>((i / 3) % kBasicAspects.size())];
    const int variant = (i / 18) % 3;
    corpus.train.push_back(basic_sample("train-" + std::to_string(counter++), aspect, label,
                                        variant, (i / 9) % 2 == 1));
  }
  for (size_t h = 0; h < kTrainHomonyms.size(); ++h) {
    const int m_label = music_label(static_cast<int>(h));
    for (int sense = 0; sense < 2; ++sense) {
      const bool music = sense == 0;
      const int label = music ? m_label : 1 - m_label;
      for (int rep = 0; rep < 4; ++rep)
        corpus.train.push_back(knowledge_sample("train-" + std::to_string(counter++),
                                                kTrainHomonyms[h], music, label, rep % 2 == 1));
    }
  }

  // test: 24 basic + 36 knowledge over unseen homonyms
  counter = 0;
  for (int i = 0; i < 24; ++i) {
    const int label = i % 3;
    const auto& aspect = kBasicAspects[static_cast<size_t>((i / 3) % kBasicAspects.size())];
    corpus.test.push_back(basic_sample("test-basic-" + std::to_string(counter++), aspect, label,
                                       (i / 3) % 3, (i / 6) % 2 == 1));
  }
  counter = 0;
  for (size_t h = 0; h < kTestHomonyms.size(); ++h) {
    const int m_label = music_label(static_cast<int>(kTrainHomonyms.size() + h));
    for (int sense = 0; sense < 2; ++sense) {
      const bool music = sense == 0;
      const int label = music ? m_label : 1 - m_label;
      for (int rep = 0; rep < 3; ++rep) {
        Sample s = knowledge_sample("test-know-" + std::to_string(counter++), kTestHomonyms[h],
                                    music, label, rep % 2 == 1);
        corpus.test.push_back(s);
        corpus.test_knowledge.push_back(s);
      }
    }
  }

  std::mt19937 rng(static_cast<uint32_t>(seed));
  std::shuffle(corpus.train.begin(), corpus.train.end(), rng);
  std::shuffle(corpus.test.begin(), corpus.test.end(), rng);

  // embeddings: designed axes plus per-token noise away from them
  std::set<std::string> vocab;
  for (const auto& split : {corpus.train, corpus.test})
    for (const auto& s : split)
      for (const auto& t : s.tokens) vocab.insert(t);
  for (const auto& [key, candidates] : corpus.kb.entries())
    for (const auto& cand : candidates)
      for (const auto& t : cand) vocab.insert(t);
  corpus.vocabulary_size = static_cast<int>(vocab.size());

  const int d_w = 8;
  vocab.insert(corpus.domain_label);
  for (const auto& token : vocab) {
    Eigen::VectorXd v = noise_vector(token, d_w);
    if (token == kMusicSteer) v[0] += 2.0;
    if (token == kKitchenSteer) v[0] -= 2.0;
    if (token == "melody") v[0] += 1.0;
    if (token == "skillet") v[0] -= 1.0;
    if (token == kPositiveKnowledge) v[1] += 1.0;
    if (token == kNegativeKnowledge) v[1] -= 1.0;
    if (token == corpus.domain_label) v[7] = 1.0;
    corpus.embeddings.insert(token, std::move(v));
  }
  return corpus;
}

ModelConfig toy_config(uint64_t seed) {
  ModelConfig cfg;
  cfg.seed = seed;
  cfg.variant = 0;
  cfg.epochs = 50;
  cfg.batch_size = 32;
  cfg.learning_rate = 2e-3;
  cfg.dropout = 0.3;
  cfg.d_e = 32;
  cfg.encoder_layers = 2;
  cfg.encoder_heads = 4;
  cfg.ffn_mult = 2;
  cfg.max_seq_len = 32;
  cfg.time_steps = 2;
  cfg.self_heads = 4;
  cfg.rel_heads = 2;
  cfg.d_r = 16;
  cfg.gcn_layers = 2;
  cfg.distance_cap = 4;
  cfg.alpha = 0.5;
  cfg.domain_label = "toy";
  return cfg;
}

void write_toy_corpus(const ToyCorpus& corpus, const std::string& dir, uint64_t seed) {
  std::filesystem::create_directories(dir);
  const std::filesystem::path base(dir);
  save_dataset(corpus.train, (base / "train.jsonl").string());
  save_dataset(corpus.test, (base / "test.jsonl").string());
  save_dataset(corpus.test_knowledge, (base / "test_knowledge.jsonl").string());
  corpus.kb.save((base / "kb.json").string());
  corpus.embeddings.save((base / "embeddings.txt").string());
  std::ofstream cfg_os(base / "toy.cfg", std::ios::trunc);
  cfg_os << config_to_string(toy_config(seed));
}

}  // namespace kagrmn
