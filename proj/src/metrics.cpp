#include "kagrmn/metrics.hpp"

#include <json.hpp>

namespace kagrmn {

long ConfusionMatrix::total() const {
  long t = 0;
  for (const auto& row : counts)
    for (long c : row) t += c;
  return t;
}

long ConfusionMatrix::correct() const {
  long t = 0;
  for (int i = 0; i < kNumLabels; ++i) t += counts[i][i];
  return t;
}

MetricsResult compute_metrics(const ConfusionMatrix& m) {
  MetricsResult r;
  r.confusion = m;
  const long total = m.total();
  if (total == 0) throw std::runtime_error("metrics: empty confusion matrix");
  r.accuracy = static_cast<double>(m.correct()) / static_cast<double>(total);

  double f1_sum = 0.0;
  for (int k = 0; k < kNumLabels; ++k) {
    long tp = m.counts[k][k];
    long gold = 0, predicted = 0;
    for (int j = 0; j < kNumLabels; ++j) {
      gold += m.counts[k][j];
      predicted += m.counts[j][k];
    }
    const double precision = predicted == 0 ? 0.0 : static_cast<double>(tp) / predicted;
    const double recall = gold == 0 ? 0.0 : static_cast<double>(tp) / gold;
    const double denom = precision + recall;
    r.per_class_f1[k] = denom == 0.0 ? 0.0 : 2.0 * precision * recall / denom;
    f1_sum += r.per_class_f1[k];
  }
  r.macro_f1 = f1_sum / kNumLabels;
  return r;
}

std::string metrics_to_json(const MetricsResult& m) {
  nlohmann::json j;
  j["accuracy"] = m.accuracy;
  j["macro_f1"] = m.macro_f1;
  j["per_class_f1"] = {{"negative", m.per_class_f1[0]},
                       {"positive", m.per_class_f1[1]},
                       {"neutral", m.per_class_f1[2]}};
  nlohmann::json conf = nlohmann::json::array();
  for (const auto& row : m.confusion.counts) conf.push_back(row);
  j["confusion_matrix"] = conf;
  return j.dump();
}

}  // namespace kagrmn
