#pragma once

#include <string>
#include <vector>

#include "kagrmn/attention.hpp"
#include "kagrmn/params.hpp"
#include "kagrmn/syntaxgraph.hpp"

namespace kagrmn {

// Dual syntax graph network: position-aware GCN over the merged dependency
// graph and relational multi-head attention over the star graph, fused by an
// MLP into a unified node sequence.
struct DsgConfig {
  int d_e = 64;
  int gcn_layers = 2;
  int rel_heads = 2;
  int d_r = 16;
  int relation_vocab_size = 0;
  bool use_pgcn = true;
  bool use_relational = true;
};

template <typename Scalar>
struct DsgWeights {
  struct GcnLayer {
    Tensor<Scalar> w, b;
  };
  struct RelHead {
    Tensor<Scalar> w1;      // d_e x d_e value projection
    Tensor<Scalar> w2, b1;  // relation scorer hidden layer, d_r x d_r
    Tensor<Scalar> w3, b2;  // relation scorer output, d_r x 1
  };
  std::vector<GcnLayer> gcn;
  std::vector<RelHead> rel;
  Tensor<Scalar> rel_emb;  // relation_vocab_size x d_r
  Tensor<Scalar> wf1, bf1, wf2, bf2;  // fusion MLP, 2*d_e -> d_e -> d_e
};

template <typename Scalar>
DsgWeights<Scalar> register_dsg(ParameterStore<Scalar>& store, const DsgConfig& cfg) {
  DsgWeights<Scalar> w;
  if (cfg.use_pgcn) {
    for (int l = 0; l < cfg.gcn_layers; ++l) {
      const std::string p = "dsg.gcn" + std::to_string(l) + ".";
      w.gcn.push_back({store.create(p + "w", cfg.d_e, cfg.d_e, Init::XavierUniform),
                       store.create(p + "b", 1, cfg.d_e, Init::Zeros)});
    }
  }
  if (cfg.use_relational) {
    if (cfg.relation_vocab_size <= 0)
      throw std::runtime_error("dsg: relation vocabulary is empty");
    w.rel_emb = store.create("dsg.rel_emb", cfg.relation_vocab_size, cfg.d_r, Init::Normal002);
    for (int m = 0; m < cfg.rel_heads; ++m) {
      const std::string p = "dsg.rel" + std::to_string(m) + ".";
      w.rel.push_back({store.create(p + "w1", cfg.d_e, cfg.d_e, Init::XavierUniform),
                       store.create(p + "w2", cfg.d_r, cfg.d_r, Init::XavierUniform),
                       store.create(p + "b1", 1, cfg.d_r, Init::Zeros),
                       store.create(p + "w3", cfg.d_r, 1, Init::XavierUniform),
                       store.create(p + "b2", 1, 1, Init::Zeros)});
    }
  }
  w.wf1 = store.create("dsg.fuse.w1", 2 * cfg.d_e, cfg.d_e, Init::XavierUniform);
  w.bf1 = store.create("dsg.fuse.b1", 1, cfg.d_e, Init::Zeros);
  w.wf2 = store.create("dsg.fuse.w2", cfg.d_e, cfg.d_e, Init::XavierUniform);
  w.bf2 = store.create("dsg.fuse.b2", 1, cfg.d_e, Init::Zeros);
  return w;
}

// One aggregation step: h_i = sum_{j in N(i) + i} W (w_p^j h_j) / (d_i + 1) + b.
// Implemented as Ahat (Wp . H) W + b with constant Ahat and position scaling;
// no nonlinearity here, stacking adds ReLU between layers.
template <typename Scalar>
Tensor<Scalar> pgcn_layer(const Tensor<Scalar>& h_in, const SparseGraph& graph,
                          const std::vector<double>& w_p, const Tensor<Scalar>& w,
                          const Tensor<Scalar>& b) {
  const int n = graph.node_count;
  if (h_in.rows() != n || static_cast<int>(w_p.size()) != n)
    throw std::runtime_error("pgcn_layer: node count mismatch");
  Mat<Scalar> scale(n, h_in.cols());
  for (int i = 0; i < n; ++i)
    scale.row(i).setConstant(static_cast<Scalar>(w_p[static_cast<size_t>(i)]));
  Mat<Scalar> ahat = Mat<Scalar>::Zero(n, n);
  for (int i = 0; i < n; ++i) {
    const Scalar inv = Scalar(1) / static_cast<Scalar>(graph.degrees[static_cast<size_t>(i)] + 1);
    ahat(i, i) = inv;
    for (int j : graph.adjacency[static_cast<size_t>(i)]) ahat(i, j) = inv;
  }
  Tensor<Scalar> weighted = hadamard(h_in, Tensor<Scalar>::from_matrix(std::move(scale)));
  Tensor<Scalar> agg = matmul(Tensor<Scalar>::from_matrix(std::move(ahat)), matmul(weighted, w));
  return add(agg, b);
}

template <typename Scalar>
struct RelationalResult {
  Tensor<Scalar> out;                         // N x d_e, head-averaged
  std::vector<Tensor<Scalar>> aspect_betas;   // per head, 1 x (N-1)
};

// Relation-scored attention on the star graph. The aspect node attends over
// all context nodes with scores computed from relation embeddings alone; each
// context node's sole neighbor is the aspect node. Head outputs are averaged.
template <typename Scalar>
RelationalResult<Scalar> relational_mha(const Tensor<Scalar>& h_in, const DenseGraph& graph,
                                        const Tensor<Scalar>& rel_emb,
                                        const std::vector<typename DsgWeights<Scalar>::RelHead>& heads) {
  const int n = graph.node_count;
  if (h_in.rows() != n) throw std::runtime_error("relational_mha: node count mismatch");
  const int a = graph.aspect_node;
  RelationalResult<Scalar> res;
  if (n == 1) {  // no context nodes; empty neighborhood aggregates to zero
    res.out = Tensor<Scalar>::zeros(1, h_in.cols());
    return res;
  }

  std::vector<int> context_nodes;
  std::vector<int> context_rels;
  for (int i = 0; i < n; ++i) {
    if (i == a) continue;
    context_nodes.push_back(i);
    const int rel = graph.relation_ids[static_cast<size_t>(i)];
    if (rel < 0 || rel >= rel_emb.rows())
      throw std::runtime_error("relational_mha: unknown relation id " + std::to_string(rel) +
                               " at node " + std::to_string(i));
    context_rels.push_back(rel);
  }

  Tensor<Scalar> rels = gather_rows(rel_emb, context_rels);        // (N-1) x d_r
  Tensor<Scalar> h_ctx = gather_rows(h_in, context_nodes);         // (N-1) x d_e
  Tensor<Scalar> h_asp = row(h_in, a);

  Tensor<Scalar> sum;
  for (size_t m = 0; m < heads.size(); ++m) {
    const auto& hd = heads[m];
    Tensor<Scalar> scores =
        add(matmul(relu(add(matmul(rels, hd.w2), hd.b1)), hd.w3), hd.b2);  // (N-1) x 1
    Tensor<Scalar> beta = softmax_rows(transpose(scores));                 // 1 x (N-1)
    res.aspect_betas.push_back(beta);
    Tensor<Scalar> aspect_out = matmul(beta, matmul(h_ctx, hd.w1));        // 1 x d_e
    Tensor<Scalar> context_out = matmul(h_asp, hd.w1);                     // same for every leaf

    Tensor<Scalar> stacked = aspect_out;
    if (a > 0) stacked = concat_rows(repeat_row(context_out, a), stacked);
    if (a < n - 1) stacked = concat_rows(stacked, repeat_row(context_out, n - 1 - a));
    sum = m == 0 ? stacked : add(sum, stacked);
  }
  res.out = scalar_mul(sum, Scalar(1) / static_cast<Scalar>(heads.size()));
  return res;
}

// Fusion MLP applied row-wise: one hidden ReLU layer, 2*d_e -> d_e -> d_e.
template <typename Scalar>
Tensor<Scalar> fuse_concat(const Tensor<Scalar>& concatenated, const DsgWeights<Scalar>& w) {
  return add(matmul(relu(add(matmul(concatenated, w.wf1), w.bf1)), w.wf2), w.bf2);
}

template <typename Scalar>
Tensor<Scalar> fuse(const Tensor<Scalar>& h_a_gcn, const Tensor<Scalar>& h_a_rel,
                    const DsgWeights<Scalar>& w) {
  return fuse_concat(concat_cols(h_a_gcn, h_a_rel), w);
}

template <typename Scalar>
struct DsgResult {
  Tensor<Scalar> fused;       // unified node sequence, N x d_e
  Tensor<Scalar> r_a_tilde;   // its aspect row
  std::vector<Tensor<Scalar>> rel_betas;
};

// Both branches read the same recurrence output. A disabled branch
// contributes zeros to the fusion input.
template <typename Scalar>
DsgResult<Scalar> dsg_run(const Tensor<Scalar>& m_c_final, const SparseGraph& sparse,
                          const DenseGraph& dense, const std::vector<double>& w_p,
                          const DsgConfig& cfg, const DsgWeights<Scalar>& w) {
  const Eigen::Index n = m_c_final.rows();
  Tensor<Scalar> h_gcn;
  if (cfg.use_pgcn) {
    h_gcn = m_c_final;
    for (size_t l = 0; l < w.gcn.size(); ++l) {
      if (l > 0) h_gcn = relu(h_gcn);
      h_gcn = pgcn_layer(h_gcn, sparse, w_p, w.gcn[l].w, w.gcn[l].b);
    }
  } else {
    h_gcn = Tensor<Scalar>::zeros(n, cfg.d_e);
  }

  DsgResult<Scalar> res;
  Tensor<Scalar> h_rel;
  if (cfg.use_relational) {
    RelationalResult<Scalar> rel = relational_mha(m_c_final, dense, w.rel_emb, w.rel);
    h_rel = rel.out;
    res.rel_betas = std::move(rel.aspect_betas);
  } else {
    h_rel = Tensor<Scalar>::zeros(n, cfg.d_e);
  }

  res.fused = fuse_concat(concat_cols(h_gcn, h_rel), w);
  res.r_a_tilde = row(res.fused, sparse.aspect_node);
  return res;
}

}  // namespace kagrmn
