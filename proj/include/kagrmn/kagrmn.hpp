#pragma once

#include <string>
#include <vector>

#include "kagrmn/attention.hpp"
#include "kagrmn/config.hpp"
#include "kagrmn/encoder.hpp"
#include "kagrmn/params.hpp"

namespace kagrmn {

// Knowledge-aware gated recurrent memory network: T steps, each summarizing
// knowledge from the description bank, gating it into the aspect slot and
// re-contextualizing the context bank with in-cell self attention.
struct KagrmnConfig {
  int d_e = 64;
  int time_steps = 2;
  int self_heads = 4;
  bool per_step_projections = false;
  bool use_a2d = true;
  bool use_self_mha = true;
  GateKind gate1 = GateKind::AdaKI;
  bool sigmoid_gate = false;
};

template <typename Scalar>
struct KagrmnWeights {
  Tensor<Scalar> w_d, b_d;   // description score projection
  Tensor<Scalar> w_gate1;    // 2*d_e -> d_e (vector gate) or 2*d_e -> 1 (scalar gate)
  std::vector<std::vector<HeadProjections<Scalar>>> step_heads;  // one set, or one per step
};

template <typename Scalar>
KagrmnWeights<Scalar> register_kagrmn(ParameterStore<Scalar>& store, const KagrmnConfig& cfg) {
  if (cfg.use_self_mha && cfg.d_e % cfg.self_heads != 0)
    throw std::runtime_error("kagrmn: d_e must be divisible by self_heads");
  KagrmnWeights<Scalar> w;
  if (cfg.use_a2d) {
    w.w_d = store.create("kagrmn.a2d.w_d", cfg.d_e, cfg.d_e, Init::XavierUniform);
    w.b_d = store.create("kagrmn.a2d.b_d", 1, cfg.d_e, Init::Zeros);
  }
  const int gate_out = cfg.gate1 == GateKind::AdaKI ? cfg.d_e : 1;
  w.w_gate1 = store.create("kagrmn.gate1.w_k", 2 * cfg.d_e, gate_out, Init::XavierUniform);
  if (cfg.use_self_mha) {
    const int d_s = cfg.d_e / cfg.self_heads;
    const int sets = cfg.per_step_projections ? cfg.time_steps : 1;
    for (int s = 0; s < sets; ++s) {
      std::vector<HeadProjections<Scalar>> heads;
      const std::string sp = cfg.per_step_projections
                                 ? "kagrmn.mha.step" + std::to_string(s) + "."
                                 : "kagrmn.mha.";
      for (int m = 0; m < cfg.self_heads; ++m) {
        const std::string hp = sp + "head" + std::to_string(m) + ".";
        heads.push_back({store.create(hp + "wq", cfg.d_e, d_s, Init::XavierUniform),
                         store.create(hp + "wk", cfg.d_e, d_s, Init::XavierUniform),
                         store.create(hp + "wv", cfg.d_e, d_s, Init::XavierUniform)});
      }
      w.step_heads.push_back(std::move(heads));
    }
  }
  return w;
}

template <typename Scalar>
struct A2DResult {
  Tensor<Scalar> alpha;  // 1 x N_D, sums to 1
  Tensor<Scalar> r_k;    // 1 x d_e, convex combination of description rows
};

// Attention over the description bank queried by the current aspect state:
// score_i = (h_d^i W_d + b_d) . r_a^T, alpha = softmax, r_k = sum alpha_i h_d^i.
template <typename Scalar>
A2DResult<Scalar> a2d_attention(const Tensor<Scalar>& m_d, const Tensor<Scalar>& r_a_prev,
                                const Tensor<Scalar>& w_d, const Tensor<Scalar>& b_d) {
  if (m_d.rows() < 1) throw std::runtime_error("a2d_attention: empty description bank");
  Tensor<Scalar> keys = add(matmul(m_d, w_d), b_d);       // N_D x d_e
  Tensor<Scalar> scores = matmul(keys, transpose(r_a_prev));  // N_D x 1
  A2DResult<Scalar> out;
  out.alpha = softmax_rows(transpose(scores));
  out.r_k = matmul(out.alpha, m_d);
  return out;
}

// Both knowledge gates share one shape: out = r_a + r_k (*) g where g is the
// projection of [r_a, r_k]. The vector gate scales each dimension of r_k, the
// scalar gate scales it uniformly. The optional sigmoid squashes g first.
template <typename Scalar>
Tensor<Scalar> apply_knowledge_gate(const Tensor<Scalar>& r_a, const Tensor<Scalar>& r_k,
                                    const Tensor<Scalar>& w, GateKind kind, bool sigmoid_gate) {
  Tensor<Scalar> gate = matmul(concat_cols(r_a, r_k), w);
  if (sigmoid_gate) gate = sigmoid(gate);
  if (kind == GateKind::AdaKI) return add(r_a, hadamard(r_k, gate));
  return add(r_a, mul_by_scalar_tensor(r_k, gate));
}

template <typename Scalar>
Tensor<Scalar> adaki_gate(const Tensor<Scalar>& r_a, const Tensor<Scalar>& r_k,
                          const Tensor<Scalar>& w_k, bool sigmoid_gate = false) {
  return apply_knowledge_gate(r_a, r_k, w_k, GateKind::AdaKI, sigmoid_gate);
}

// Literal in-cell update: per-head scaled dot-product attention over the bank,
// heads concatenated. No output projection, residual or normalization.
template <typename Scalar>
Tensor<Scalar> self_mha_update(const Tensor<Scalar>& m_c_star,
                               const std::vector<HeadProjections<Scalar>>& heads,
                               const RunContext<Scalar>& ctx) {
  return multi_head_self_attention(m_c_star, heads, ctx);
}

template <typename Scalar>
struct KagrmnResult {
  Tensor<Scalar> m_c;  // final context bank
  Tensor<Scalar> r_a;  // final aspect representation == m_c[aspect_index]
  Tensor<Scalar> r_k;  // last summarized knowledge vector
  std::vector<Tensor<Scalar>> alphas;  // per-step A2D weights (when A2D is on)
};

template <typename Scalar>
KagrmnResult<Scalar> kagrmn_run(const MemoryBanks<Scalar>& banks, const KagrmnConfig& cfg,
                                const KagrmnWeights<Scalar>& w, const RunContext<Scalar>& ctx) {
  KagrmnResult<Scalar> state;
  state.m_c = banks.context;
  state.r_a = row(banks.context, banks.aspect_index);
  state.r_k = mean_over_rows(banks.description);  // degenerate T=0 fallback

  for (int t = 0; t < cfg.time_steps; ++t) {
    if (cfg.use_a2d) {
      A2DResult<Scalar> a2d = a2d_attention(banks.description, state.r_a, w.w_d, w.b_d);
      state.r_k = a2d.r_k;
      state.alphas.push_back(a2d.alpha);
    } else {
      state.r_k = mean_over_rows(banks.description);
    }
    Tensor<Scalar> r_a_star =
        apply_knowledge_gate(state.r_a, state.r_k, w.w_gate1, cfg.gate1, cfg.sigmoid_gate);
    Tensor<Scalar> m_c_star = scatter_row_replace(state.m_c, banks.aspect_index, r_a_star);
    if (cfg.use_self_mha) {
      const auto& heads = cfg.per_step_projections ? w.step_heads[static_cast<size_t>(t)]
                                                   : w.step_heads.front();
      state.m_c = self_mha_update(m_c_star, heads, ctx);
    } else {
      state.m_c = m_c_star;
    }
    state.r_a = row(state.m_c, banks.aspect_index);
  }
  return state;
}

}  // namespace kagrmn
