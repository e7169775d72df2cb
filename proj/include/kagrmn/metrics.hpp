#pragma once

#include <array>
#include <string>
#include <vector>

#include "kagrmn/dataset.hpp"

namespace kagrmn {

// 3x3 confusion counts, rows = gold, cols = predicted, in the fixed label
// order [negative, positive, neutral].
struct ConfusionMatrix {
  std::array<std::array<long, kNumLabels>, kNumLabels> counts{};

  void record(Label gold, Label predicted) {
    ++counts[static_cast<int>(gold)][static_cast<int>(predicted)];
  }
  long total() const;
  long correct() const;
};

struct MetricsResult {
  double accuracy = 0.0;
  double macro_f1 = 0.0;
  std::array<double, kNumLabels> per_class_f1{};
  ConfusionMatrix confusion;
};

// Accuracy = correct/total; per-class F1 from precision/recall with the 0/0
// convention that an undefined ratio counts as 0; macro-F1 is the unweighted
// mean over the fixed 3-class set (absent classes still average in as 0).
MetricsResult compute_metrics(const ConfusionMatrix& m);

std::string metrics_to_json(const MetricsResult& m);

}  // namespace kagrmn
