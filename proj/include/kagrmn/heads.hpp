#pragma once

#include "kagrmn/kagrmn.hpp"

namespace kagrmn {

template <typename Scalar>
struct HeadsWeights {
  Tensor<Scalar> w_gate2;       // 2*d_e -> 1 (scalar gate) or 2*d_e -> d_e (vector gate)
  Tensor<Scalar> w_ac, b_ac;    // aspect-to-context scorer
  Tensor<Scalar> w_p, b_p;      // classifier, 2*d_e -> 3
};

struct HeadsConfig {
  int d_e = 64;
  bool use_ki_gate = true;
  bool use_a2c = true;
  GateKind gate2 = GateKind::KI;
  bool sigmoid_gate = false;
};

template <typename Scalar>
HeadsWeights<Scalar> register_heads(ParameterStore<Scalar>& store, const HeadsConfig& cfg,
                                    bool classifier_only) {
  HeadsWeights<Scalar> w;
  if (!classifier_only) {
    if (cfg.use_ki_gate) {
      const int gate_out = cfg.gate2 == GateKind::AdaKI ? cfg.d_e : 1;
      w.w_gate2 = store.create("heads.gate2.w_k", 2 * cfg.d_e, gate_out, Init::XavierUniform);
    }
    if (cfg.use_a2c) {
      w.w_ac = store.create("heads.a2c.w_ac", cfg.d_e, cfg.d_e, Init::XavierUniform);
      w.b_ac = store.create("heads.a2c.b_ac", 1, cfg.d_e, Init::Zeros);
    }
  }
  w.w_p = store.create("heads.classifier.w_p", 2 * cfg.d_e, 3, Init::XavierUniform);
  w.b_p = store.create("heads.classifier.b_p", 1, 3, Init::Zeros);
  return w;
}

// Knowledge re-enhancement after graph modeling. The default scalar gate
// multiplies r_k^T uniformly: R_a = R~_a + r_k^T * (W [R~_a, r_k^T]).
template <typename Scalar>
Tensor<Scalar> ki_gate(const Tensor<Scalar>& r_a_tilde, const Tensor<Scalar>& r_k_final,
                       const Tensor<Scalar>& w, GateKind kind = GateKind::KI,
                       bool sigmoid_gate = false) {
  return apply_knowledge_gate(r_a_tilde, r_k_final, w, kind, sigmoid_gate);
}

template <typename Scalar>
struct A2CResult {
  Tensor<Scalar> beta;  // 1 x N
  Tensor<Scalar> r_f;   // 1 x d_e
};

// Aggregates aspect-related semantics from the hidden states: the score of
// state h_i is (W_ac h_i + b_ac) . R_a^T, softmax-normalized.
template <typename Scalar>
A2CResult<Scalar> a2c_attention(const Tensor<Scalar>& states, const Tensor<Scalar>& r_a,
                                const Tensor<Scalar>& w_ac, const Tensor<Scalar>& b_ac) {
  if (states.rows() < 1) throw std::runtime_error("a2c_attention: empty hidden states");
  Tensor<Scalar> keys = add(matmul(states, w_ac), b_ac);
  Tensor<Scalar> scores = matmul(keys, transpose(r_a));  // N x 1
  A2CResult<Scalar> out;
  out.beta = softmax_rows(transpose(scores));
  out.r_f = matmul(out.beta, states);
  return out;
}

// P = softmax(W_p [h_cls, R_f] + b_p) over [negative, positive, neutral].
// h_cls rides along as a skip connection in every configuration.
template <typename Scalar>
Tensor<Scalar> classify(const Tensor<Scalar>& h_cls, const Tensor<Scalar>& r_f,
                        const Tensor<Scalar>& w_p, const Tensor<Scalar>& b_p) {
  return softmax_rows(add(matmul(concat_cols(h_cls, r_f), w_p), b_p));
}

// Cross-entropy on the predicted distribution, -log P[gold], with the
// probability clamped at 1e-12 before the log.
template <typename Scalar>
Tensor<Scalar> classification_loss(const Tensor<Scalar>& probs, int gold_label) {
  return nll_from_probs(probs, gold_label, Scalar(1e-12));
}

}  // namespace kagrmn
