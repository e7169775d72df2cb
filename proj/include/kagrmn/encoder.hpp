#pragma once

#include <numeric>
#include <string>
#include <vector>

#include "kagrmn/attention.hpp"
#include "kagrmn/params.hpp"
#include "kagrmn/syntaxgraph.hpp"
#include "kagrmn/vocab.hpp"

namespace kagrmn {

struct EncoderConfig {
  int vocab_size = 0;
  int d_e = 64;
  int layers = 2;
  int heads = 4;
  int ffn_mult = 2;
  int max_seq_len = 64;
};

// Trainable substitute for a pretrained sentence encoder: token + learned
// positional + segment embeddings, then self-attention blocks with residuals
// and a feed-forward sublayer. Exposes the same surface the model needs —
// per-token states and a leading summary (CLS) state, with the context-aspect
// pair packed as <CLS; C; SEP; A; SEP>.
template <typename Scalar>
struct EncoderWeights {
  Tensor<Scalar> token_emb, pos_emb, seg_emb;
  struct Block {
    std::vector<HeadProjections<Scalar>> heads;
    Tensor<Scalar> wo, bo;
    Tensor<Scalar> w1, b1, w2, b2;
  };
  std::vector<Block> blocks;
};

template <typename Scalar>
EncoderWeights<Scalar> register_encoder(ParameterStore<Scalar>& store, const EncoderConfig& cfg) {
  if (cfg.d_e % cfg.heads != 0)
    throw std::runtime_error("encoder: d_e must be divisible by head count");
  const int d_h = cfg.d_e / cfg.heads;
  EncoderWeights<Scalar> w;
  w.token_emb = store.create("encoder.token_emb", cfg.vocab_size, cfg.d_e, Init::Normal002);
  w.pos_emb = store.create("encoder.pos_emb", cfg.max_seq_len, cfg.d_e, Init::Normal002);
  w.seg_emb = store.create("encoder.seg_emb", 2, cfg.d_e, Init::Normal002);
  for (int l = 0; l < cfg.layers; ++l) {
    typename EncoderWeights<Scalar>::Block blk;
    const std::string p = "encoder.block" + std::to_string(l) + ".";
    for (int m = 0; m < cfg.heads; ++m) {
      const std::string hp = p + "head" + std::to_string(m) + ".";
      blk.heads.push_back({store.create(hp + "wq", cfg.d_e, d_h, Init::XavierUniform),
                           store.create(hp + "wk", cfg.d_e, d_h, Init::XavierUniform),
                           store.create(hp + "wv", cfg.d_e, d_h, Init::XavierUniform)});
    }
    blk.wo = store.create(p + "wo", cfg.d_e, cfg.d_e, Init::XavierUniform);
    blk.bo = store.create(p + "bo", 1, cfg.d_e, Init::Zeros);
    blk.w1 = store.create(p + "ffn.w1", cfg.d_e, cfg.ffn_mult * cfg.d_e, Init::XavierUniform);
    blk.b1 = store.create(p + "ffn.b1", 1, cfg.ffn_mult * cfg.d_e, Init::Zeros);
    blk.w2 = store.create(p + "ffn.w2", cfg.ffn_mult * cfg.d_e, cfg.d_e, Init::XavierUniform);
    blk.b2 = store.create(p + "ffn.b2", 1, cfg.d_e, Init::Zeros);
    w.blocks.push_back(std::move(blk));
  }
  return w;
}

namespace detail {

template <typename Scalar>
Tensor<Scalar> run_blocks(Tensor<Scalar> x, const EncoderWeights<Scalar>& w,
                          const RunContext<Scalar>& ctx) {
  for (const auto& blk : w.blocks) {
    Tensor<Scalar> attn = multi_head_self_attention(x, blk.heads, ctx);
    x = add(x, add(matmul(attn, blk.wo), blk.bo));
    Tensor<Scalar> hidden = relu(add(matmul(x, blk.w1), blk.b1));
    x = add(x, add(matmul(hidden, blk.w2), blk.b2));
  }
  return x;
}

template <typename Scalar>
Tensor<Scalar> embed(const std::vector<int>& ids, const std::vector<int>& segments,
                     const EncoderWeights<Scalar>& w) {
  std::vector<int> positions(ids.size());
  std::iota(positions.begin(), positions.end(), 0);
  Tensor<Scalar> x = gather_rows(w.token_emb, ids);
  x = add(x, gather_rows(w.pos_emb, positions));
  x = add(x, gather_rows(w.seg_emb, segments));
  return x;
}

}  // namespace detail

template <typename Scalar>
struct PairEncoding {
  Tensor<Scalar> h_cls;           // 1 x d_e
  Tensor<Scalar> context_states;  // N_C x d_e
};

// <CLS; C; SEP; A; SEP> with segment 1 from the aspect tokens onward.
template <typename Scalar>
PairEncoding<Scalar> encode_pair(const std::vector<int>& context_ids,
                                 const std::vector<int>& aspect_ids,
                                 const EncoderWeights<Scalar>& w, const EncoderConfig& cfg,
                                 const RunContext<Scalar>& ctx) {
  if (context_ids.empty()) throw std::runtime_error("encode_pair: empty context");
  if (aspect_ids.empty()) throw std::runtime_error("encode_pair: empty aspect");
  const size_t total = context_ids.size() + aspect_ids.size() + 3;
  if (total > static_cast<size_t>(cfg.max_seq_len))
    throw std::runtime_error("encode_pair: sequence length " + std::to_string(total) +
                             " exceeds max " + std::to_string(cfg.max_seq_len) + " (context " +
                             std::to_string(context_ids.size()) + ", aspect " +
                             std::to_string(aspect_ids.size()) + ")");
  std::vector<int> ids, segments;
  ids.reserve(total);
  ids.push_back(Vocabulary::kCls);
  ids.insert(ids.end(), context_ids.begin(), context_ids.end());
  ids.push_back(Vocabulary::kSep);
  segments.assign(ids.size(), 0);
  for (int a : aspect_ids) {
    ids.push_back(a);
    segments.push_back(1);
  }
  ids.push_back(Vocabulary::kSep);
  segments.push_back(1);

  Tensor<Scalar> states = detail::run_blocks(detail::embed(ids, segments, w), w, ctx);
  PairEncoding<Scalar> out;
  out.h_cls = row(states, 0);
  out.context_states = slice_rows(states, 1, static_cast<Eigen::Index>(context_ids.size()));
  return out;
}

// <CLS; D; SEP> in the single-sentence manner; returns the description-token
// states only.
template <typename Scalar>
Tensor<Scalar> encode_single(const std::vector<int>& description_ids,
                             const EncoderWeights<Scalar>& w, const EncoderConfig& cfg,
                             const RunContext<Scalar>& ctx) {
  if (description_ids.empty()) throw std::runtime_error("encode_single: empty description");
  const size_t total = description_ids.size() + 2;
  if (total > static_cast<size_t>(cfg.max_seq_len))
    throw std::runtime_error("encode_single: sequence length " + std::to_string(total) +
                             " exceeds max " + std::to_string(cfg.max_seq_len));
  std::vector<int> ids;
  ids.reserve(total);
  ids.push_back(Vocabulary::kCls);
  ids.insert(ids.end(), description_ids.begin(), description_ids.end());
  ids.push_back(Vocabulary::kSep);
  std::vector<int> segments(ids.size(), 0);

  Tensor<Scalar> states = detail::run_blocks(detail::embed(ids, segments, w), w, ctx);
  return slice_rows(states, 1, static_cast<Eigen::Index>(description_ids.size()));
}

// Paired memory banks: the description bank stays fixed over the recurrence
// while the context bank is rewritten each step.
template <typename Scalar>
struct MemoryBanks {
  Tensor<Scalar> description;  // M_D, N_D x d_e
  Tensor<Scalar> context;      // M_C, N x d_e with N = N_C - N_A + 1
  int aspect_index = 0;
  Tensor<Scalar> h_cls;
};

// Collapses the aspect rows of the context states into one slot holding
// h_cls (the initial aspect representation); all other rows pass through.
template <typename Scalar>
MemoryBanks<Scalar> build_memory_banks(const Tensor<Scalar>& h_cls,
                                       const Tensor<Scalar>& context_states, Span aspect_span,
                                       const Tensor<Scalar>& description_states) {
  const Eigen::Index n_c = context_states.rows();
  if (aspect_span.start < 0 || aspect_span.end > n_c || aspect_span.start >= aspect_span.end)
    throw std::runtime_error("build_memory_banks: aspect span [" +
                             std::to_string(aspect_span.start) + ", " +
                             std::to_string(aspect_span.end) + ") invalid for " +
                             std::to_string(n_c) + " context rows");
  Tensor<Scalar> bank = h_cls;
  if (aspect_span.start > 0)
    bank = concat_rows(slice_rows(context_states, 0, aspect_span.start), bank);
  if (aspect_span.end < n_c)
    bank = concat_rows(bank, slice_rows(context_states, aspect_span.end, n_c - aspect_span.end));

  MemoryBanks<Scalar> banks;
  banks.description = description_states;
  banks.context = bank;
  banks.aspect_index = aspect_span.start;
  banks.h_cls = h_cls;
  return banks;
}

}  // namespace kagrmn
