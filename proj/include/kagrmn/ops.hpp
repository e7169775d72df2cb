#pragma once

#include <algorithm>
#include <random>

#include "kagrmn/tensor.hpp"

namespace kagrmn {

namespace detail {

template <typename Scalar>
std::shared_ptr<Node<Scalar>> make_op_node(const char* op, Mat<Scalar> value,
                                           std::vector<std::shared_ptr<Node<Scalar>>> parents) {
  auto n = std::make_shared<Node<Scalar>>();
  n->value = std::move(value);
  n->op = op;
  bool rg = false;
  for (const auto& p : parents) rg = rg || p->requires_grad;
  if (rg && grad_enabled()) {
    n->requires_grad = true;
    n->parents = std::move(parents);
  }
  return n;
}

}  // namespace detail

// out = a @ b
template <typename Scalar>
Tensor<Scalar> matmul(const Tensor<Scalar>& a, const Tensor<Scalar>& b) {
  if (a.cols() != b.rows()) throw ShapeError("matmul", a.rows(), a.cols(), b.rows(), b.cols());
  auto n = detail::make_op_node<Scalar>("matmul", a.value() * b.value(), {a.node(), b.node()});
  if (n->requires_grad) {
    n->backward_fn = [](Node<Scalar>& self) {
      auto& pa = *self.parents[0];
      auto& pb = *self.parents[1];
      if (pa.requires_grad) {
        pa.ensure_grad();
        pa.grad.noalias() += self.grad * pb.value.transpose();
      }
      if (pb.requires_grad) {
        pb.ensure_grad();
        pb.grad.noalias() += pa.value.transpose() * self.grad;
      }
    };
  }
  return Tensor<Scalar>(n);
}

// Elementwise sum; a 1-row operand broadcasts over the other's rows.
template <typename Scalar>
Tensor<Scalar> add(const Tensor<Scalar>& a, const Tensor<Scalar>& b) {
  const bool same = a.rows() == b.rows() && a.cols() == b.cols();
  const bool b_row = b.rows() == 1 && a.rows() > 1 && a.cols() == b.cols();
  const bool a_row = a.rows() == 1 && b.rows() > 1 && a.cols() == b.cols();
  if (!same && !b_row && !a_row) throw ShapeError("add", a.rows(), a.cols(), b.rows(), b.cols());

  Mat<Scalar> v;
  if (same)
    v = a.value() + b.value();
  else if (b_row)
    v = a.value().rowwise() + b.value().row(0);
  else
    v = b.value().rowwise() + a.value().row(0);

  auto n = detail::make_op_node<Scalar>("add", std::move(v), {a.node(), b.node()});
  if (n->requires_grad) {
    n->backward_fn = [](Node<Scalar>& self) {
      for (auto& p : self.parents) {
        if (!p->requires_grad) continue;
        p->ensure_grad();
        if (p->value.rows() == self.grad.rows())
          p->grad += self.grad;
        else
          p->grad.row(0) += self.grad.colwise().sum();
      }
    };
  }
  return Tensor<Scalar>(n);
}

// Concatenation along the last dimension.
template <typename Scalar>
Tensor<Scalar> concat_cols(const Tensor<Scalar>& a, const Tensor<Scalar>& b) {
  if (a.rows() != b.rows()) throw ShapeError("concat_cols", a.rows(), a.cols(), b.rows(), b.cols());
  Mat<Scalar> v(a.rows(), a.cols() + b.cols());
  v.leftCols(a.cols()) = a.value();
  v.rightCols(b.cols()) = b.value();
  auto n = detail::make_op_node<Scalar>("concat_cols", std::move(v), {a.node(), b.node()});
  if (n->requires_grad) {
    const Eigen::Index ca = a.cols();
    n->backward_fn = [ca](Node<Scalar>& self) {
      auto& pa = *self.parents[0];
      auto& pb = *self.parents[1];
      if (pa.requires_grad) {
        pa.ensure_grad();
        pa.grad += self.grad.leftCols(ca);
      }
      if (pb.requires_grad) {
        pb.ensure_grad();
        pb.grad += self.grad.rightCols(self.grad.cols() - ca);
      }
    };
  }
  return Tensor<Scalar>(n);
}

template <typename Scalar>
Tensor<Scalar> concat_rows(const Tensor<Scalar>& a, const Tensor<Scalar>& b) {
  if (a.cols() != b.cols()) throw ShapeError("concat_rows", a.rows(), a.cols(), b.rows(), b.cols());
  Mat<Scalar> v(a.rows() + b.rows(), a.cols());
  v.topRows(a.rows()) = a.value();
  v.bottomRows(b.rows()) = b.value();
  auto n = detail::make_op_node<Scalar>("concat_rows", std::move(v), {a.node(), b.node()});
  if (n->requires_grad) {
    const Eigen::Index ra = a.rows();
    n->backward_fn = [ra](Node<Scalar>& self) {
      auto& pa = *self.parents[0];
      auto& pb = *self.parents[1];
      if (pa.requires_grad) {
        pa.ensure_grad();
        pa.grad += self.grad.topRows(ra);
      }
      if (pb.requires_grad) {
        pb.ensure_grad();
        pb.grad += self.grad.bottomRows(self.grad.rows() - ra);
      }
    };
  }
  return Tensor<Scalar>(n);
}

template <typename Scalar>
Tensor<Scalar> hadamard(const Tensor<Scalar>& a, const Tensor<Scalar>& b) {
  if (a.rows() != b.rows() || a.cols() != b.cols())
    throw ShapeError("hadamard", a.rows(), a.cols(), b.rows(), b.cols());
  auto n = detail::make_op_node<Scalar>(
      "hadamard", (a.value().array() * b.value().array()).matrix(), {a.node(), b.node()});
  if (n->requires_grad) {
    n->backward_fn = [](Node<Scalar>& self) {
      auto& pa = *self.parents[0];
      auto& pb = *self.parents[1];
      if (pa.requires_grad) {
        pa.ensure_grad();
        pa.grad.array() += self.grad.array() * pb.value.array();
      }
      if (pb.requires_grad) {
        pb.ensure_grad();
        pb.grad.array() += self.grad.array() * pa.value.array();
      }
    };
  }
  return Tensor<Scalar>(n);
}

// Multiply by a compile-time-known constant.
template <typename Scalar>
Tensor<Scalar> scalar_mul(const Tensor<Scalar>& a, Scalar k) {
  auto n = detail::make_op_node<Scalar>("scalar_mul", a.value() * k, {a.node()});
  if (n->requires_grad) {
    n->backward_fn = [k](Node<Scalar>& self) {
      auto& pa = *self.parents[0];
      if (pa.requires_grad) {
        pa.ensure_grad();
        pa.grad += self.grad * k;
      }
    };
  }
  return Tensor<Scalar>(n);
}

// Multiply every entry of `a` by a 1x1 tensor; gradient flows to both sides.
template <typename Scalar>
Tensor<Scalar> mul_by_scalar_tensor(const Tensor<Scalar>& a, const Tensor<Scalar>& s) {
  if (s.size() != 1) throw ShapeError("mul_by_scalar_tensor", "second operand must be 1x1");
  auto n = detail::make_op_node<Scalar>("mul_by_scalar_tensor", a.value() * s.value()(0, 0),
                                        {a.node(), s.node()});
  if (n->requires_grad) {
    n->backward_fn = [](Node<Scalar>& self) {
      auto& pa = *self.parents[0];
      auto& ps = *self.parents[1];
      if (pa.requires_grad) {
        pa.ensure_grad();
        pa.grad += self.grad * ps.value(0, 0);
      }
      if (ps.requires_grad) {
        ps.ensure_grad();
        ps.grad(0, 0) += (self.grad.array() * pa.value.array()).sum();
      }
    };
  }
  return Tensor<Scalar>(n);
}

template <typename Scalar>
Tensor<Scalar> relu(const Tensor<Scalar>& a) {
  auto n = detail::make_op_node<Scalar>("relu", a.value().cwiseMax(Scalar(0)), {a.node()});
  if (n->requires_grad) {
    n->backward_fn = [](Node<Scalar>& self) {
      auto& pa = *self.parents[0];
      if (pa.requires_grad) {
        pa.ensure_grad();
        pa.grad.array() +=
            self.grad.array() * (pa.value.array() > Scalar(0)).template cast<Scalar>();
      }
    };
  }
  return Tensor<Scalar>(n);
}

template <typename Scalar>
Tensor<Scalar> sigmoid(const Tensor<Scalar>& a) {
  Mat<Scalar> v = (Scalar(1) / (Scalar(1) + (-a.value().array()).exp())).matrix();
  auto n = detail::make_op_node<Scalar>("sigmoid", std::move(v), {a.node()});
  if (n->requires_grad) {
    n->backward_fn = [](Node<Scalar>& self) {
      auto& pa = *self.parents[0];
      if (pa.requires_grad) {
        pa.ensure_grad();
        pa.grad.array() +=
            self.grad.array() * self.value.array() * (Scalar(1) - self.value.array());
      }
    };
  }
  return Tensor<Scalar>(n);
}

// Row-wise softmax (softmax over the last dimension).
template <typename Scalar>
Tensor<Scalar> softmax_rows(const Tensor<Scalar>& a) {
  if (!a.value().allFinite()) throw std::runtime_error("softmax_rows: non-finite input");
  Mat<Scalar> v(a.rows(), a.cols());
  for (Eigen::Index r = 0; r < a.rows(); ++r) {
    auto row = a.value().row(r).array();
    Eigen::Array<Scalar, 1, Eigen::Dynamic> e = (row - row.maxCoeff()).exp();
    v.row(r) = (e / e.sum()).matrix();
  }
  auto n = detail::make_op_node<Scalar>("softmax_rows", std::move(v), {a.node()});
  if (n->requires_grad) {
    n->backward_fn = [](Node<Scalar>& self) {
      auto& pa = *self.parents[0];
      if (!pa.requires_grad) return;
      pa.ensure_grad();
      for (Eigen::Index r = 0; r < self.value.rows(); ++r) {
        auto y = self.value.row(r).array();
        auto dy = self.grad.row(r).array();
        const Scalar dot = (y * dy).sum();
        pa.grad.row(r).array() += y * (dy - dot);
      }
    };
  }
  return Tensor<Scalar>(n);
}

// Column-wise mean over rows: (R x C) -> (1 x C).
template <typename Scalar>
Tensor<Scalar> mean_over_rows(const Tensor<Scalar>& a) {
  auto n = detail::make_op_node<Scalar>("mean_over_rows", a.value().colwise().mean(), {a.node()});
  if (n->requires_grad) {
    n->backward_fn = [](Node<Scalar>& self) {
      auto& pa = *self.parents[0];
      if (!pa.requires_grad) return;
      pa.ensure_grad();
      const Scalar inv = Scalar(1) / static_cast<Scalar>(pa.value.rows());
      pa.grad += (self.grad * inv).replicate(pa.value.rows(), 1);
    };
  }
  return Tensor<Scalar>(n);
}

template <typename Scalar>
Tensor<Scalar> sum_all(const Tensor<Scalar>& a) {
  Mat<Scalar> v(1, 1);
  v(0, 0) = a.value().sum();
  auto n = detail::make_op_node<Scalar>("sum_all", std::move(v), {a.node()});
  if (n->requires_grad) {
    n->backward_fn = [](Node<Scalar>& self) {
      auto& pa = *self.parents[0];
      if (pa.requires_grad) {
        pa.ensure_grad();
        pa.grad.array() += self.grad(0, 0);
      }
    };
  }
  return Tensor<Scalar>(n);
}

template <typename Scalar>
Tensor<Scalar> transpose(const Tensor<Scalar>& a) {
  auto n = detail::make_op_node<Scalar>("transpose", a.value().transpose(), {a.node()});
  if (n->requires_grad) {
    n->backward_fn = [](Node<Scalar>& self) {
      auto& pa = *self.parents[0];
      if (pa.requires_grad) {
        pa.ensure_grad();
        pa.grad += self.grad.transpose();
      }
    };
  }
  return Tensor<Scalar>(n);
}

template <typename Scalar>
Tensor<Scalar> slice_rows(const Tensor<Scalar>& a, Eigen::Index start, Eigen::Index count) {
  if (start < 0 || count <= 0 || start + count > a.rows())
    throw ShapeError("slice_rows", "rows [" + std::to_string(start) + ", " +
                                       std::to_string(start + count) + ") out of range for " +
                                       std::to_string(a.rows()) + " rows");
  auto n =
      detail::make_op_node<Scalar>("slice_rows", a.value().middleRows(start, count), {a.node()});
  if (n->requires_grad) {
    n->backward_fn = [start, count](Node<Scalar>& self) {
      auto& pa = *self.parents[0];
      if (pa.requires_grad) {
        pa.ensure_grad();
        pa.grad.middleRows(start, count) += self.grad;
      }
    };
  }
  return Tensor<Scalar>(n);
}

template <typename Scalar>
Tensor<Scalar> row(const Tensor<Scalar>& a, Eigen::Index i) {
  return slice_rows(a, i, 1);
}

// Gather rows by index; duplicate indices accumulate gradient.
template <typename Scalar>
Tensor<Scalar> gather_rows(const Tensor<Scalar>& a, std::vector<int> indices) {
  if (indices.empty()) throw ShapeError("gather_rows", "empty index list");
  Mat<Scalar> v(static_cast<Eigen::Index>(indices.size()), a.cols());
  for (size_t k = 0; k < indices.size(); ++k) {
    if (indices[k] < 0 || indices[k] >= a.rows())
      throw ShapeError("gather_rows", "index " + std::to_string(indices[k]) +
                                          " out of range for " + std::to_string(a.rows()) +
                                          " rows");
    v.row(static_cast<Eigen::Index>(k)) = a.value().row(indices[k]);
  }
  auto n = detail::make_op_node<Scalar>("gather_rows", std::move(v), {a.node()});
  if (n->requires_grad) {
    n->backward_fn = [idx = std::move(indices)](Node<Scalar>& self) {
      auto& pa = *self.parents[0];
      if (!pa.requires_grad) return;
      pa.ensure_grad();
      for (size_t k = 0; k < idx.size(); ++k)
        pa.grad.row(idx[k]) += self.grad.row(static_cast<Eigen::Index>(k));
    };
  }
  return Tensor<Scalar>(n);
}

// Copy of `a` with row i replaced by the 1-row tensor `r`.
template <typename Scalar>
Tensor<Scalar> scatter_row_replace(const Tensor<Scalar>& a, Eigen::Index i,
                                   const Tensor<Scalar>& r) {
  if (r.rows() != 1 || r.cols() != a.cols())
    throw ShapeError("scatter_row_replace", a.rows(), a.cols(), r.rows(), r.cols());
  if (i < 0 || i >= a.rows())
    throw ShapeError("scatter_row_replace", "row " + std::to_string(i) + " out of range");
  Mat<Scalar> v = a.value();
  v.row(i) = r.value().row(0);
  auto n = detail::make_op_node<Scalar>("scatter_row_replace", std::move(v), {a.node(), r.node()});
  if (n->requires_grad) {
    n->backward_fn = [i](Node<Scalar>& self) {
      auto& pa = *self.parents[0];
      auto& pr = *self.parents[1];
      if (pa.requires_grad) {
        pa.ensure_grad();
        Mat<Scalar> g = self.grad;
        g.row(i).setZero();
        pa.grad += g;
      }
      if (pr.requires_grad) {
        pr.ensure_grad();
        pr.grad.row(0) += self.grad.row(i);
      }
    };
  }
  return Tensor<Scalar>(n);
}

// Inverted dropout: scales kept entries by 1/(1-rate) at train time so the
// expected value is preserved; identity in eval mode.
template <typename Scalar>
Tensor<Scalar> dropout(const Tensor<Scalar>& a, Scalar rate, std::mt19937& rng, bool training) {
  if (rate < Scalar(0) || rate >= Scalar(1))
    throw std::runtime_error("dropout: rate must be in [0, 1)");
  if (!training || rate == Scalar(0)) return a;
  std::bernoulli_distribution keep(1.0 - static_cast<double>(rate));
  const Scalar scale = Scalar(1) / (Scalar(1) - rate);
  Mat<Scalar> mask(a.rows(), a.cols());
  for (Eigen::Index r = 0; r < a.rows(); ++r)
    for (Eigen::Index c = 0; c < a.cols(); ++c) mask(r, c) = keep(rng) ? scale : Scalar(0);
  auto n = detail::make_op_node<Scalar>("dropout", (a.value().array() * mask.array()).matrix(),
                                        {a.node()});
  if (n->requires_grad) {
    n->backward_fn = [m = std::move(mask)](Node<Scalar>& self) {
      auto& pa = *self.parents[0];
      if (pa.requires_grad) {
        pa.ensure_grad();
        pa.grad.array() += self.grad.array() * m.array();
      }
    };
  }
  return Tensor<Scalar>(n);
}

// Negative log likelihood of class `gold` under a 1xK probability row.
// Probabilities are clamped at `floor` before the log.
template <typename Scalar>
Tensor<Scalar> nll_from_probs(const Tensor<Scalar>& probs, int gold,
                              Scalar floor = Scalar(1e-12)) {
  if (probs.rows() != 1) throw ShapeError("nll_from_probs", "expected a 1xK probability row");
  if (gold < 0 || gold >= probs.cols())
    throw ShapeError("nll_from_probs", "gold index " + std::to_string(gold) + " out of range");
  const Scalar p = probs.value()(0, gold);
  Mat<Scalar> v(1, 1);
  v(0, 0) = -std::log(std::max(p, floor));
  auto n = detail::make_op_node<Scalar>("nll_from_probs", std::move(v), {probs.node()});
  if (n->requires_grad) {
    n->backward_fn = [gold, floor](Node<Scalar>& self) {
      auto& pa = *self.parents[0];
      if (!pa.requires_grad) return;
      pa.ensure_grad();
      const Scalar p2 = pa.value(0, gold);
      if (p2 > floor) pa.grad(0, gold) += -self.grad(0, 0) / p2;
    };
  }
  return Tensor<Scalar>(n);
}

// Fused softmax + cross-entropy on a 1xK logit row (log-sum-exp form).
template <typename Scalar>
Tensor<Scalar> cross_entropy_with_softmax(const Tensor<Scalar>& logits, int gold) {
  if (logits.rows() != 1)
    throw ShapeError("cross_entropy_with_softmax", "expected a 1xK logit row");
  if (gold < 0 || gold >= logits.cols())
    throw ShapeError("cross_entropy_with_softmax",
                     "gold index " + std::to_string(gold) + " out of range");
  auto l = logits.value().row(0).array();
  const Scalar m = l.maxCoeff();
  const Scalar lse = m + std::log((l - m).exp().sum());
  Mat<Scalar> v(1, 1);
  v(0, 0) = lse - l(gold);
  auto n = detail::make_op_node<Scalar>("cross_entropy_with_softmax", std::move(v),
                                        {logits.node()});
  if (n->requires_grad) {
    n->backward_fn = [gold](Node<Scalar>& self) {
      auto& pa = *self.parents[0];
      if (!pa.requires_grad) return;
      pa.ensure_grad();
      auto l2 = pa.value.row(0).array();
      const Scalar m2 = l2.maxCoeff();
      Eigen::Array<Scalar, 1, Eigen::Dynamic> p = (l2 - m2).exp();
      p /= p.sum();
      p(gold) -= Scalar(1);
      pa.grad.row(0).array() += self.grad(0, 0) * p;
    };
  }
  return Tensor<Scalar>(n);
}

}  // namespace kagrmn
