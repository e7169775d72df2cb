#pragma once

#include <algorithm>
#include <functional>
#include <random>

#include "kagrmn/params.hpp"
#include "kagrmn/tensor.hpp"

namespace kagrmn {

inline double rel_err(double analytic, double numeric) {
  return std::abs(analytic - numeric) /
         std::max({1.0, std::abs(analytic), std::abs(numeric)});
}

struct GradCheckEntry {
  std::string name;
  double max_rel_err = 0.0;
  int entries_checked = 0;
};

struct GradCheckReport {
  std::vector<GradCheckEntry> per_parameter;
  double max_rel_err = 0.0;
  bool vacuous = false;  // no parameters to check

  bool passed(double tol) const { return vacuous || max_rel_err <= tol; }
};

// Central-difference validation of the reverse pass. `loss_builder` must
// rebuild the forward pass from the store's current values deterministically
// (eval-mode dropout, fixed inputs). Checks up to `entries_per_param` entries
// of each parameter, sampled without replacement.
template <typename Scalar>
GradCheckReport check_gradients(ParameterStore<Scalar>& store,
                                const std::function<Tensor<Scalar>()>& loss_builder,
                                int entries_per_param, double h, std::mt19937& rng) {
  static_assert(std::is_same_v<Scalar, double>,
                "finite-difference checks require double precision");
  GradCheckReport report;
  if (store.count() == 0) {
    report.vacuous = true;
    return report;
  }

  store.zero_grads();
  Tensor<Scalar> loss = loss_builder();
  backward(loss);
  std::vector<Mat<Scalar>> analytic;
  analytic.reserve(store.count());
  for (auto& p : store.all()) {
    if (!p.tensor.has_grad())
      throw std::runtime_error("gradcheck: parameter received no gradient: " + p.name);
    analytic.push_back(p.tensor.grad());
  }
  store.zero_grads();

  for (size_t pi = 0; pi < store.all().size(); ++pi) {
    auto& p = store.all()[pi];
    GradCheckEntry entry;
    entry.name = p.name;
    const Eigen::Index n = p.tensor.size();
    std::vector<Eigen::Index> coords(static_cast<size_t>(n));
    for (Eigen::Index i = 0; i < n; ++i) coords[static_cast<size_t>(i)] = i;
    std::shuffle(coords.begin(), coords.end(), rng);
    const size_t k = std::min<size_t>(coords.size(), static_cast<size_t>(entries_per_param));

    for (size_t ci = 0; ci < k; ++ci) {
      const Eigen::Index flat = coords[ci];
      const Eigen::Index r = flat / p.tensor.cols();
      const Eigen::Index c = flat % p.tensor.cols();
      Scalar& x = p.tensor.value()(r, c);
      const Scalar orig = x;
      NoGradGuard eval_only;
      x = orig + static_cast<Scalar>(h);
      const double lp = loss_builder().item();
      x = orig - static_cast<Scalar>(h);
      const double lm = loss_builder().item();
      x = orig;
      const double numeric = (lp - lm) / (2.0 * h);
      const double a = analytic[pi](r, c);
      entry.max_rel_err = std::max(entry.max_rel_err, rel_err(a, numeric));
      ++entry.entries_checked;
    }
    report.max_rel_err = std::max(report.max_rel_err, entry.max_rel_err);
    report.per_parameter.push_back(std::move(entry));
  }
  return report;
}

}  // namespace kagrmn
