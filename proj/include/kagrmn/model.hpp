#pragma once

#include "kagrmn/config.hpp"
#include "kagrmn/dsgnet.hpp"
#include "kagrmn/encoder.hpp"
#include "kagrmn/heads.hpp"
#include "kagrmn/kagrmn.hpp"
#include "kagrmn/prepare.hpp"

namespace kagrmn {

template <typename Scalar>
struct ForwardResult {
  Tensor<Scalar> probs;  // 1 x 3 over [negative, positive, neutral]
  int predicted = -1;

  // intermediate views, kept for inspection and tests
  Tensor<Scalar> h_cls, r_a_final, r_k_final, r_a_tilde, r_a_enhanced, r_f;
  std::vector<Tensor<Scalar>> a2d_alphas;
  std::vector<Tensor<Scalar>> rel_betas;
  Tensor<Scalar> a2c_beta;
};

// Full classifier: encoder -> recurrent knowledge integration -> dual syntax
// graphs -> re-enhancement -> aspect-to-context aggregation -> softmax head,
// with every ablation variant compiled in through the config switchboard.
// Parameters for disabled components are not registered.
template <typename Scalar>
class Model {
 public:
  Model(const ModelConfig& cfg, int vocab_size, int relation_vocab_size)
      : cfg_(cfg), switches_(cfg.switches()), store_(cfg.seed) {
    cfg_.validate();
    encoder_cfg_ = {vocab_size, cfg_.d_e,       cfg_.encoder_layers,
                    cfg_.encoder_heads, cfg_.ffn_mult, cfg_.max_seq_len};
    encoder_ = register_encoder(store_, encoder_cfg_);

    kag_cfg_.d_e = cfg_.d_e;
    kag_cfg_.time_steps = cfg_.time_steps;
    kag_cfg_.self_heads = cfg_.self_heads;
    kag_cfg_.per_step_projections = cfg_.per_step_projections;
    kag_cfg_.use_a2d = switches_.use_a2d;
    kag_cfg_.use_self_mha = switches_.use_self_mha;
    kag_cfg_.gate1 = switches_.gate1;
    kag_cfg_.sigmoid_gate = cfg_.gate_activation == "sigmoid";
    kag_ = register_kagrmn(store_, kag_cfg_);

    const bool full_heads = !switches_.only_kagrmn;
    if (full_heads && switches_.use_dsg) {
      dsg_cfg_.d_e = cfg_.d_e;
      dsg_cfg_.gcn_layers = cfg_.gcn_layers;
      dsg_cfg_.rel_heads = cfg_.rel_heads;
      dsg_cfg_.d_r = cfg_.d_r;
      dsg_cfg_.relation_vocab_size = relation_vocab_size;
      dsg_cfg_.use_pgcn = switches_.use_pgcn;
      dsg_cfg_.use_relational = switches_.use_relational;
      dsg_ = register_dsg(store_, dsg_cfg_);
    }

    heads_cfg_.d_e = cfg_.d_e;
    heads_cfg_.use_ki_gate = switches_.use_ki_gate;
    heads_cfg_.use_a2c = switches_.use_a2c;
    heads_cfg_.gate2 = switches_.gate2;
    heads_cfg_.sigmoid_gate = cfg_.gate_activation == "sigmoid";
    heads_ = register_heads(store_, heads_cfg_, /*classifier_only=*/switches_.only_kagrmn);
  }

  ForwardResult<Scalar> forward(const PreparedSample& sample, const RunContext<Scalar>& ctx) {
    PairEncoding<Scalar> enc =
        encode_pair(sample.context_ids, sample.aspect_ids, encoder_, encoder_cfg_, ctx);
    Tensor<Scalar> h_d = encode_single(sample.description_ids, encoder_, encoder_cfg_, ctx);
    MemoryBanks<Scalar> banks =
        build_memory_banks(enc.h_cls, enc.context_states, sample.aspect_span, h_d);
    if (banks.context.rows() != sample.sparse.node_count)
      throw std::runtime_error("model: memory bank and syntax graph disagree on node count");

    KagrmnResult<Scalar> kag = kagrmn_run(banks, kag_cfg_, kag_, ctx);

    ForwardResult<Scalar> out;
    out.h_cls = enc.h_cls;
    out.r_a_final = kag.r_a;
    out.r_k_final = kag.r_k;
    out.a2d_alphas = kag.alphas;

    if (switches_.only_kagrmn) {
      out.r_f = kag.r_a;
      out.probs = classify(enc.h_cls, out.r_f, heads_.w_p, heads_.b_p);
    } else {
      Tensor<Scalar> fused_seq;
      if (switches_.use_dsg) {
        DsgResult<Scalar> dsg =
            dsg_run(kag.m_c, sample.sparse, sample.dense, sample.position, dsg_cfg_, dsg_);
        out.r_a_tilde = dsg.r_a_tilde;
        out.rel_betas = dsg.rel_betas;
        fused_seq = dsg.fused;
      } else {
        out.r_a_tilde = kag.r_a;
      }

      out.r_a_enhanced =
          switches_.use_ki_gate
              ? ki_gate(out.r_a_tilde, kag.r_k, heads_.w_gate2, switches_.gate2,
                        heads_cfg_.sigmoid_gate)
              : out.r_a_tilde;

      if (switches_.use_a2c) {
        Tensor<Scalar> source =
            (cfg_.a2c_source == "fused" && switches_.use_dsg) ? fused_seq : kag.m_c;
        Tensor<Scalar> states =
            scatter_row_replace(source, banks.aspect_index, out.r_a_enhanced);
        A2CResult<Scalar> a2c = a2c_attention(states, out.r_a_enhanced, heads_.w_ac, heads_.b_ac);
        out.a2c_beta = a2c.beta;
        out.r_f = a2c.r_f;
      } else {
        out.r_f = out.r_a_enhanced;
      }
      out.probs = classify(enc.h_cls, out.r_f, heads_.w_p, heads_.b_p);
    }

    Eigen::Index argmax = 0;
    out.probs.value().row(0).maxCoeff(&argmax);
    out.predicted = static_cast<int>(argmax);
    return out;
  }

  Tensor<Scalar> loss(const PreparedSample& sample, const RunContext<Scalar>& ctx) {
    ForwardResult<Scalar> fwd = forward(sample, ctx);
    return classification_loss(fwd.probs, sample.label);
  }

  ParameterStore<Scalar>& params() { return store_; }
  const ModelConfig& config() const { return cfg_; }
  const VariantSwitch& switches() const { return switches_; }
  const EncoderConfig& encoder_config() const { return encoder_cfg_; }

 private:
  ModelConfig cfg_;
  VariantSwitch switches_;
  ParameterStore<Scalar> store_;
  EncoderConfig encoder_cfg_;
  EncoderWeights<Scalar> encoder_;
  KagrmnConfig kag_cfg_;
  KagrmnWeights<Scalar> kag_;
  DsgConfig dsg_cfg_;
  DsgWeights<Scalar> dsg_;
  HeadsConfig heads_cfg_;
  HeadsWeights<Scalar> heads_;
};

}  // namespace kagrmn
