#pragma once

#include <cstdint>
#include <map>
#include <random>
#include <string>
#include <vector>

#include "kagrmn/tensor.hpp"

namespace kagrmn {

enum class Init { XavierUniform, Normal002, Zeros };

template <typename Scalar>
struct Parameter {
  std::string name;
  Tensor<Scalar> tensor;
  Init init = Init::Zeros;
};

inline uint64_t fnv1a(const std::string& s) {
  uint64_t h = 1469598103934665603ull;
  for (unsigned char c : s) {
    h ^= c;
    h *= 1099511628211ull;
  }
  return h;
}

// Named trainable tensors. Initialization is seeded per parameter name so a
// model's weights are reproducible regardless of registration order.
template <typename Scalar>
class ParameterStore {
 public:
  explicit ParameterStore(uint64_t seed = 0) : seed_(seed) {}

  Tensor<Scalar> create(const std::string& name, Eigen::Index rows, Eigen::Index cols,
                        Init init) {
    if (by_name_.count(name))
      throw std::runtime_error("parameter already registered: " + name);
    Mat<Scalar> m(rows, cols);
    const uint64_t h = fnv1a(name);
    std::seed_seq seq{static_cast<uint32_t>(seed_), static_cast<uint32_t>(seed_ >> 32),
                      static_cast<uint32_t>(h), static_cast<uint32_t>(h >> 32)};
    std::mt19937 rng(seq);
    switch (init) {
      case Init::XavierUniform: {
        const double limit = std::sqrt(6.0 / static_cast<double>(rows + cols));
        std::uniform_real_distribution<double> d(-limit, limit);
        for (Eigen::Index r = 0; r < rows; ++r)
          for (Eigen::Index c = 0; c < cols; ++c) m(r, c) = static_cast<Scalar>(d(rng));
        break;
      }
      case Init::Normal002: {
        std::normal_distribution<double> d(0.0, 0.02);
        for (Eigen::Index r = 0; r < rows; ++r)
          for (Eigen::Index c = 0; c < cols; ++c) m(r, c) = static_cast<Scalar>(d(rng));
        break;
      }
      case Init::Zeros:
        m.setZero();
        break;
    }
    Tensor<Scalar> t = Tensor<Scalar>::from_matrix(std::move(m), /*requires_grad=*/true);
    by_name_.emplace(name, params_.size());
    params_.push_back(Parameter<Scalar>{name, t, init});
    return t;
  }

  bool contains(const std::string& name) const { return by_name_.count(name) > 0; }

  Tensor<Scalar>& get(const std::string& name) {
    auto it = by_name_.find(name);
    if (it == by_name_.end()) throw std::runtime_error("unknown parameter: " + name);
    return params_[it->second].tensor;
  }

  std::vector<Parameter<Scalar>>& all() { return params_; }
  const std::vector<Parameter<Scalar>>& all() const { return params_; }
  size_t count() const { return params_.size(); }

  size_t total_entries() const {
    size_t n = 0;
    for (const auto& p : params_) n += static_cast<size_t>(p.tensor.size());
    return n;
  }

  void zero_grads() {
    for (auto& p : params_) p.tensor.zero_grad();
  }

  uint64_t seed() const { return seed_; }

 private:
  uint64_t seed_;
  std::vector<Parameter<Scalar>> params_;
  std::map<std::string, size_t> by_name_;
};

}  // namespace kagrmn
