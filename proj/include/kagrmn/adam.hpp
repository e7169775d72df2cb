#pragma once

#include <cmath>
#include <map>

#include "kagrmn/params.hpp"

namespace kagrmn {

template <typename Scalar>
struct AdamConfig {
  Scalar learning_rate = Scalar(1e-3);
  Scalar beta1 = Scalar(0.9);
  Scalar beta2 = Scalar(0.999);
  Scalar epsilon = Scalar(1e-8);
};

// Adam with bias correction. step() consumes gradients: every registered
// parameter must carry one, and all grads are zeroed after the update.
template <typename Scalar>
class Adam {
 public:
  explicit Adam(AdamConfig<Scalar> cfg) : cfg_(cfg) {}

  void step(ParameterStore<Scalar>& store) {
    ++t_;
    const Scalar bc1 = Scalar(1) - std::pow(cfg_.beta1, static_cast<Scalar>(t_));
    const Scalar bc2 = Scalar(1) - std::pow(cfg_.beta2, static_cast<Scalar>(t_));
    for (auto& p : store.all()) {
      if (!p.tensor.has_grad())
        throw std::runtime_error("adam: missing gradient for parameter " + p.name);
      auto& state = moments_[p.name];
      if (state.m.size() == 0) {
        state.m = Mat<Scalar>::Zero(p.tensor.rows(), p.tensor.cols());
        state.v = Mat<Scalar>::Zero(p.tensor.rows(), p.tensor.cols());
      }
      const Mat<Scalar>& g = p.tensor.grad();
      state.m = cfg_.beta1 * state.m + (Scalar(1) - cfg_.beta1) * g;
      state.v = (cfg_.beta2 * state.v.array() +
                 (Scalar(1) - cfg_.beta2) * g.array().square())
                    .matrix();
      p.tensor.value().array() -=
          cfg_.learning_rate * (state.m.array() / bc1) /
          ((state.v.array() / bc2).sqrt() + cfg_.epsilon);
    }
    store.zero_grads();
  }

  int64_t step_count() const { return t_; }
  const AdamConfig<Scalar>& config() const { return cfg_; }

 private:
  struct Moments {
    Mat<Scalar> m, v;
  };
  AdamConfig<Scalar> cfg_;
  std::map<std::string, Moments> moments_;
  int64_t t_ = 0;
};

}  // namespace kagrmn
