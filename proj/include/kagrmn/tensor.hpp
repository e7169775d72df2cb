#pragma once

#include <Eigen/Core>

#include <cmath>
#include <functional>
#include <memory>
#include <stdexcept>
#include <string>
#include <unordered_set>
#include <vector>

namespace kagrmn {

template <typename Scalar>
using Mat = Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;

// One node of the implicit per-forward-pass tape. Holds the forward value,
// the gradient buffer, and a closure that scatters this node's gradient
// into its parents. Parents and closures are released after backward().
template <typename Scalar>
struct Node {
  Mat<Scalar> value;
  Mat<Scalar> grad;  // empty until first touched by backward()
  bool requires_grad = false;
  const char* op = "leaf";
  std::vector<std::shared_ptr<Node<Scalar>>> parents;
  std::function<void(Node<Scalar>&)> backward_fn;
  bool consumed = false;

  void ensure_grad() {
    if (grad.size() == 0) grad = Mat<Scalar>::Zero(value.rows(), value.cols());
  }
};

inline bool& grad_mode_flag() {
  thread_local bool enabled = true;
  return enabled;
}

inline bool grad_enabled() { return grad_mode_flag(); }

// Disables tape recording in scope (inference / metric passes).
struct NoGradGuard {
  bool previous;
  NoGradGuard() : previous(grad_mode_flag()) { grad_mode_flag() = false; }
  ~NoGradGuard() { grad_mode_flag() = previous; }
  NoGradGuard(const NoGradGuard&) = delete;
  NoGradGuard& operator=(const NoGradGuard&) = delete;
};

class ShapeError : public std::runtime_error {
 public:
  ShapeError(const std::string& op, Eigen::Index ar, Eigen::Index ac, Eigen::Index br,
             Eigen::Index bc)
      : std::runtime_error(op + ": shape mismatch (" + std::to_string(ar) + "x" +
                           std::to_string(ac) + ") vs (" + std::to_string(br) + "x" +
                           std::to_string(bc) + ")") {}
  ShapeError(const std::string& op, const std::string& detail)
      : std::runtime_error(op + ": " + detail) {}
};

// Dense 2-D tensor with value semantics over a shared tape node.
// Vectors are represented as 1xN rows.
template <typename Scalar>
class Tensor {
 public:
  Tensor() = default;
  explicit Tensor(std::shared_ptr<Node<Scalar>> node) : node_(std::move(node)) {}

  static Tensor zeros(Eigen::Index rows, Eigen::Index cols, bool requires_grad = false) {
    return from_matrix(Mat<Scalar>::Zero(rows, cols), requires_grad);
  }

  static Tensor from_matrix(Mat<Scalar> m, bool requires_grad = false) {
    auto n = std::make_shared<Node<Scalar>>();
    n->value = std::move(m);
    n->requires_grad = requires_grad;
    return Tensor(std::move(n));
  }

  static Tensor row(std::initializer_list<Scalar> xs, bool requires_grad = false) {
    Mat<Scalar> m(1, static_cast<Eigen::Index>(xs.size()));
    Eigen::Index i = 0;
    for (Scalar x : xs) m(0, i++) = x;
    return from_matrix(std::move(m), requires_grad);
  }

  static Tensor row(const std::vector<Scalar>& xs, bool requires_grad = false) {
    Mat<Scalar> m(1, static_cast<Eigen::Index>(xs.size()));
    for (Eigen::Index i = 0; i < m.cols(); ++i) m(0, i) = xs[static_cast<size_t>(i)];
    return from_matrix(std::move(m), requires_grad);
  }

  bool defined() const { return node_ != nullptr; }
  const Mat<Scalar>& value() const { return node_->value; }
  Mat<Scalar>& value() { return node_->value; }
  bool has_grad() const { return node_ && node_->grad.size() > 0; }
  const Mat<Scalar>& grad() const {
    if (!has_grad()) throw std::runtime_error("tensor has no gradient (backward not run?)");
    return node_->grad;
  }
  void zero_grad() {
    if (node_) node_->grad.resize(0, 0);
  }
  bool requires_grad() const { return node_ && node_->requires_grad; }
  Eigen::Index rows() const { return node_->value.rows(); }
  Eigen::Index cols() const { return node_->value.cols(); }
  Eigen::Index size() const { return node_->value.size(); }
  std::vector<Eigen::Index> shape() const { return {rows(), cols()}; }
  Scalar item() const {
    if (size() != 1) throw ShapeError("item", "tensor is not scalar");
    return node_->value(0, 0);
  }
  const std::shared_ptr<Node<Scalar>>& node() const { return node_; }

 private:
  std::shared_ptr<Node<Scalar>> node_;
};

// Reverse pass from a scalar loss. Consumes the tape: closures and parent
// links of every visited node are dropped afterwards, and a second call on
// the same loss is an error. In double precision every produced gradient is
// checked for NaN/Inf and a non-finite value is a hard failure.
template <typename Scalar>
void backward(const Tensor<Scalar>& loss) {
  if (!loss.defined() || !loss.node()) throw std::runtime_error("backward: undefined tensor");
  auto root = loss.node();
  if (loss.size() != 1) throw ShapeError("backward", "loss must be scalar (1x1)");
  if (root->consumed) throw std::runtime_error("backward: tape already consumed for this loss");
  if (!root->backward_fn && root->parents.empty())
    throw std::runtime_error("backward: empty tape (loss is a leaf)");

  // Iterative post-order topological sort over parent links.
  std::vector<Node<Scalar>*> order;
  std::unordered_set<Node<Scalar>*> seen;
  std::vector<std::pair<Node<Scalar>*, size_t>> stack;
  stack.emplace_back(root.get(), 0);
  seen.insert(root.get());
  while (!stack.empty()) {
    auto& [n, next] = stack.back();
    if (next < n->parents.size()) {
      Node<Scalar>* p = n->parents[next++].get();
      if (seen.insert(p).second) stack.emplace_back(p, 0);
    } else {
      order.push_back(n);
      stack.pop_back();
    }
  }

  root->ensure_grad();
  root->grad(0, 0) = Scalar(1);
  for (auto it = order.rbegin(); it != order.rend(); ++it) {
    Node<Scalar>* n = *it;
    if (n->backward_fn) n->backward_fn(*n);
  }

  if constexpr (std::is_same_v<Scalar, double>) {
    for (Node<Scalar>* n : order) {
      if (n->grad.size() > 0 && !n->grad.allFinite())
        throw std::runtime_error(std::string("backward: non-finite gradient produced at op '") +
                                 n->op + "'");
    }
  }

  for (Node<Scalar>* n : order) {
    n->backward_fn = nullptr;
    n->parents.clear();
  }
  root->consumed = true;
}

}  // namespace kagrmn
