#pragma once

#include <random>
#include <vector>

#include "kagrmn/ops.hpp"

namespace kagrmn {

// Forward-pass context: train/eval switch plus the stream feeding dropout
// masks. Eval mode never draws from the stream.
template <typename Scalar>
struct RunContext {
  bool training = false;
  Scalar dropout = Scalar(0);
  std::mt19937* rng = nullptr;
};

template <typename Scalar>
Tensor<Scalar> maybe_dropout(const Tensor<Scalar>& x, const RunContext<Scalar>& ctx) {
  if (!ctx.training || ctx.dropout == Scalar(0)) return x;
  if (!ctx.rng) throw std::runtime_error("dropout requested without an RNG");
  return dropout(x, ctx.dropout, *ctx.rng, true);
}

// Per-head bias-free projections, d_e -> d_s each.
template <typename Scalar>
struct HeadProjections {
  Tensor<Scalar> wq, wk, wv;
};

// softmax(Q K^T / sqrt(d_s)) V per head, heads concatenated along the last
// dimension. No output projection or residual here; callers add their own.
// Dropout is applied to the attention weights at train time.
template <typename Scalar>
Tensor<Scalar> multi_head_self_attention(const Tensor<Scalar>& x,
                                         const std::vector<HeadProjections<Scalar>>& heads,
                                         const RunContext<Scalar>& ctx) {
  if (heads.empty()) throw std::runtime_error("multi_head_self_attention: no heads");
  const Scalar inv_sqrt_ds =
      Scalar(1) / std::sqrt(static_cast<Scalar>(heads[0].wq.cols()));
  Tensor<Scalar> out;
  for (size_t m = 0; m < heads.size(); ++m) {
    Tensor<Scalar> q = matmul(x, heads[m].wq);
    Tensor<Scalar> k = matmul(x, heads[m].wk);
    Tensor<Scalar> v = matmul(x, heads[m].wv);
    Tensor<Scalar> scores = scalar_mul(matmul(q, transpose(k)), inv_sqrt_ds);
    Tensor<Scalar> probs = maybe_dropout(softmax_rows(scores), ctx);
    Tensor<Scalar> head = matmul(probs, v);
    out = m == 0 ? head : concat_cols(out, head);
  }
  return out;
}

// k identical copies of a 1-row tensor, stacked.
template <typename Scalar>
Tensor<Scalar> repeat_row(const Tensor<Scalar>& r, Eigen::Index k) {
  if (r.rows() != 1) throw ShapeError("repeat_row", "expected a single row");
  Tensor<Scalar> ones = Tensor<Scalar>::from_matrix(Mat<Scalar>::Ones(k, 1));
  return matmul(ones, r);
}

}  // namespace kagrmn
