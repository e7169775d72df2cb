#include <doctest.h>

#include <cmath>
#include <random>

#include "fd_check.hpp"
#include "kagrmn/ops.hpp"
#include "kagrmn/tensor.hpp"

using namespace kagrmn;
using kagrmn::testing::max_grad_error;
using kagrmn::testing::random_matrix;
using kagrmn::testing::random_matrix_off_zero;

namespace {
constexpr double kTol = 1e-5;
constexpr int kTrials = 25;

Tensor<double> rand_tensor(Eigen::Index r, Eigen::Index c, std::mt19937& rng,
                           bool off_zero = false) {
  return Tensor<double>::from_matrix(
      off_zero ? random_matrix_off_zero(r, c, rng) : random_matrix(r, c, rng), true);
}

std::uniform_int_distribution<Eigen::Index> dim_dist(1, 5);
}  // namespace

TEST_CASE("softmax of uniform scores is uniform") {
  auto y = softmax_rows(Tensor<double>::row({0.0, 0.0, 0.0}));
  for (int i = 0; i < 3; ++i) CHECK(y.value()(0, i) == doctest::Approx(1.0 / 3).epsilon(1e-12));
}

TEST_CASE("relu clamps negatives") {
  auto y = relu(Tensor<double>::row({-1.0, 2.0}));
  CHECK(y.value()(0, 0) == 0.0);
  CHECK(y.value()(0, 1) == 2.0);
}

TEST_CASE("softmax rows sum to one and are non-negative") {
  std::mt19937 rng(7);
  for (int trial = 0; trial < 100; ++trial) {
    const auto r = dim_dist(rng), c = dim_dist(rng);
    auto y = softmax_rows(Tensor<double>::from_matrix(random_matrix(r, c + 1, rng, -5, 5)));
    for (Eigen::Index i = 0; i < y.rows(); ++i) {
      CHECK(std::abs(y.value().row(i).sum() - 1.0) < 1e-6);
      CHECK(y.value().row(i).minCoeff() >= 0.0);
    }
  }
}

TEST_CASE("softmax rejects non-finite input") {
  Mat<double> m(1, 2);
  m << 1.0, std::numeric_limits<double>::quiet_NaN();
  CHECK_THROWS(softmax_rows(Tensor<double>::from_matrix(m)));
}

TEST_CASE("cross entropy of uniform prediction over 3 classes is ln 3") {
  auto probs = Tensor<double>::row({1.0 / 3, 1.0 / 3, 1.0 / 3});
  auto loss = nll_from_probs(probs, 1);
  CHECK(std::abs(loss.item() - std::log(3.0)) < 1e-9);

  auto logits = Tensor<double>::row({0.0, 0.0, 0.0});
  CHECK(std::abs(cross_entropy_with_softmax(logits, 2).item() - std::log(3.0)) < 1e-9);
}

TEST_CASE("nll examples") {
  CHECK(nll_from_probs(Tensor<double>::row({0.0, 1.0, 0.0}), 1).item() == doctest::Approx(0.0));
  CHECK(std::abs(nll_from_probs(Tensor<double>::row({0.5, 0.25, 0.25}), 0).item() -
                 std::log(2.0)) < 1e-12);
}

TEST_CASE("fused cross entropy equals softmax then nll") {
  std::mt19937 rng(11);
  for (int trial = 0; trial < 20; ++trial) {
    auto logits = Tensor<double>::from_matrix(random_matrix(1, 4, rng, -3, 3));
    const int gold = static_cast<int>(trial % 4);
    const double fused = cross_entropy_with_softmax(logits, gold).item();
    const double composed = nll_from_probs(softmax_rows(logits), gold).item();
    CHECK(std::abs(fused - composed) < 1e-12);
  }
}

TEST_CASE("backward on sum gives ones") {
  auto x = Tensor<double>::row({1.0, 4.0, -2.0}, true);
  backward(sum_all(x));
  for (int i = 0; i < 3; ++i) CHECK(x.grad()(0, i) == 1.0);
}

TEST_CASE("backward through square") {
  auto x = Tensor<double>::row({1.0, 2.0}, true);
  backward(sum_all(hadamard(x, x)));
  CHECK(x.grad()(0, 0) == doctest::Approx(2.0));
  CHECK(x.grad()(0, 1) == doctest::Approx(4.0));
}

TEST_CASE("backward twice on the same tape fails") {
  auto x = Tensor<double>::row({1.0, 2.0}, true);
  auto loss = sum_all(x);
  backward(loss);
  CHECK_THROWS_WITH_AS(backward(loss), doctest::Contains("consumed"), std::runtime_error);
}

TEST_CASE("backward requires a scalar with a tape") {
  auto leaf = Tensor<double>::row({1.0}, true);
  CHECK_THROWS(backward(leaf));  // empty tape
  std::mt19937 rng(1);
  auto x = Tensor<double>::from_matrix(random_matrix(2, 2, rng), true);
  CHECK_THROWS(backward(relu(x)));  // not scalar
}

TEST_CASE("matmul gradient matches central finite differences") {
  std::mt19937 rng(42);
  auto a = rand_tensor(2, 3, rng);
  auto b = rand_tensor(3, 4, rng);
  CHECK(max_grad_error([&] { return matmul(a, b); }, {a, b}, rng) < kTol);
}

TEST_CASE("random multi-op graph matches finite differences") {
  std::mt19937 rng(99);
  for (int trial = 0; trial < 10; ++trial) {
    auto x = rand_tensor(2, 3, rng);
    auto w = rand_tensor(3, 3, rng);
    auto b = rand_tensor(1, 3, rng);
    auto builder = [&] { return softmax_rows(add(relu(matmul(x, w)), b)); };
    CHECK(max_grad_error(builder, {x, w, b}, rng) < kTol);
  }
}

TEST_CASE("per-op gradients match finite differences over random shapes") {
  std::mt19937 rng(2024);

  for (int trial = 0; trial < kTrials; ++trial) {
    const auto m = dim_dist(rng), k = dim_dist(rng), n = dim_dist(rng);

    {
      auto a = rand_tensor(m, k, rng);
      auto b = rand_tensor(k, n, rng);
      CHECK(max_grad_error([&] { return matmul(a, b); }, {a, b}, rng) < kTol);
    }
    {
      auto a = rand_tensor(m, n, rng);
      auto b = rand_tensor(m, n, rng);
      CHECK(max_grad_error([&] { return add(a, b); }, {a, b}, rng) < kTol);
      CHECK(max_grad_error([&] { return hadamard(a, b); }, {a, b}, rng) < kTol);
      CHECK(max_grad_error([&] { return concat_cols(a, b); }, {a, b}, rng) < kTol);
      CHECK(max_grad_error([&] { return concat_rows(a, b); }, {a, b}, rng) < kTol);
    }
    {
      auto a = rand_tensor(m + 1, n, rng);
      auto bias = rand_tensor(1, n, rng);
      CHECK(max_grad_error([&] { return add(a, bias); }, {a, bias}, rng) < kTol);
    }
    {
      auto a = rand_tensor(m, n, rng);
      const double s = 0.5 + trial * 0.1;
      CHECK(max_grad_error([&] { return scalar_mul(a, s); }, {a}, rng) < kTol);
      CHECK(max_grad_error([&] { return transpose(a); }, {a}, rng) < kTol);
      CHECK(max_grad_error([&] { return mean_over_rows(a); }, {a}, rng) < kTol);
      CHECK(max_grad_error([&] { return sum_all(a); }, {a}, rng) < kTol);
    }
    {
      auto a = rand_tensor(m, n, rng);
      auto s = rand_tensor(1, 1, rng);
      CHECK(max_grad_error([&] { return mul_by_scalar_tensor(a, s); }, {a, s}, rng) < kTol);
    }
    {
      auto a = rand_tensor(m, n, rng, /*off_zero=*/true);
      CHECK(max_grad_error([&] { return relu(a); }, {a}, rng) < kTol);
    }
    {
      auto a = rand_tensor(m, n, rng);
      CHECK(max_grad_error([&] { return sigmoid(a); }, {a}, rng) < kTol);
      CHECK(max_grad_error([&] { return softmax_rows(a); }, {a}, rng) < kTol);
    }
    {
      auto a = rand_tensor(m + 2, n, rng);
      const Eigen::Index start = trial % (m + 1);
      CHECK(max_grad_error([&] { return slice_rows(a, start, 2); }, {a}, rng) < kTol);
    }
    {
      auto a = rand_tensor(3, n, rng);
      std::vector<int> idx = {2, 0, 2, 1};  // duplicates accumulate
      CHECK(max_grad_error([&] { return gather_rows(a, idx); }, {a}, rng) < kTol);
    }
    {
      auto a = rand_tensor(m + 1, n, rng);
      auto r = rand_tensor(1, n, rng);
      const Eigen::Index i = trial % (m + 1);
      CHECK(max_grad_error([&] { return scatter_row_replace(a, i, r); }, {a, r}, rng) < kTol);
    }
    {
      auto a = rand_tensor(m, n, rng);
      const unsigned mask_seed = 1000u + static_cast<unsigned>(trial);
      auto builder = [&] {
        std::mt19937 mask_rng(mask_seed);  // frozen mask across FD evaluations
        return dropout(a, 0.4, mask_rng, true);
      };
      CHECK(max_grad_error(builder, {a}, rng) < kTol);
    }
    {
      auto logits = rand_tensor(1, 4, rng);
      const int gold = trial % 4;
      CHECK(max_grad_error([&] { return cross_entropy_with_softmax(logits, gold); }, {logits},
                           rng) < kTol);
      CHECK(max_grad_error([&] { return nll_from_probs(softmax_rows(logits), gold); }, {logits},
                           rng) < kTol);
    }
  }
}

TEST_CASE("shape errors name the op and both shapes") {
  auto a = Tensor<double>::zeros(2, 3);
  auto b = Tensor<double>::zeros(4, 2);
  CHECK_THROWS_WITH_AS(matmul(a, b), doctest::Contains("matmul"), ShapeError);
  CHECK_THROWS_WITH_AS(add(a, b), doctest::Contains("2x3"), ShapeError);
  CHECK_THROWS_WITH_AS(hadamard(a, b), doctest::Contains("4x2"), ShapeError);
}

TEST_CASE("dropout is identity in eval mode") {
  std::mt19937 rng(3);
  auto a = Tensor<double>::from_matrix(random_matrix(4, 5, rng), true);
  auto out = dropout(a, 0.5, rng, false);
  CHECK(out.value() == a.value());
  CHECK(out.node() == a.node());
}

TEST_CASE("train-mode dropout preserves the expected value within 1%") {
  std::mt19937 rng(17);
  const int n = 100000;
  Mat<double> ones = Mat<double>::Ones(1, n);
  auto x = Tensor<double>::from_matrix(ones);
  const double rate = 0.3;
  auto y = dropout(x, rate, rng, true);
  const double mean = y.value().mean();
  CHECK(std::abs(mean - 1.0) < 0.01);
  // every kept entry carries the inverted-dropout scale
  for (Eigen::Index i = 0; i < 200; ++i) {
    const double v = y.value()(0, i);
    CHECK((v == 0.0 || std::abs(v - 1.0 / (1.0 - rate)) < 1e-12));
  }
}

TEST_CASE("gradients after backward are finite for reachable tensors") {
  std::mt19937 rng(5);
  auto x = rand_tensor(3, 3, rng);
  auto w = rand_tensor(3, 3, rng);
  backward(sum_all(softmax_rows(matmul(x, w))));
  CHECK(x.grad().allFinite());
  CHECK(w.grad().allFinite());
}

TEST_CASE("tape is freed after backward") {
  auto x = Tensor<double>::row({1.0, 2.0}, true);
  auto y = hadamard(x, x);
  auto loss = sum_all(y);
  backward(loss);
  CHECK(y.node()->parents.empty());
  CHECK_FALSE(static_cast<bool>(y.node()->backward_fn));
}

TEST_CASE("tensor shape invariant") {
  auto t = Tensor<double>::zeros(3, 4);
  CHECK(t.shape() == std::vector<Eigen::Index>{3, 4});
  CHECK(t.rows() * t.cols() == t.size());
}
