#include "collabmap/metrics.hpp"

#include <algorithm>
#include <numeric>
#include <vector>

#include "collabmap/error.hpp"

namespace collabmap::metrics {

double roc_auc(std::span<const double> scores, std::span<const int> labels) {
  if (scores.size() != labels.size()) throw Error("roc_auc: scores and labels differ in length");
  std::vector<std::size_t> order(scores.size());
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::sort(order.begin(), order.end(),
            [&](std::size_t a, std::size_t b) { return scores[a] < scores[b]; });

  // Sum of midranks of the positives.
  double rank_sum = 0.0;
  std::size_t n_pos = 0;
  for (std::size_t i = 0; i < order.size();) {
    std::size_t j = i;
    while (j < order.size() && scores[order[j]] == scores[order[i]]) ++j;
    const double midrank = (static_cast<double>(i + 1) + static_cast<double>(j)) / 2.0;
    for (std::size_t k = i; k < j; ++k) {
      if (labels[order[k]] == 1) {
        rank_sum += midrank;
        ++n_pos;
      }
    }
    i = j;
  }
  const std::size_t n_neg = scores.size() - n_pos;
  if (n_pos == 0 || n_neg == 0) throw Error("roc_auc: both classes must be present");
  const double p = static_cast<double>(n_pos);
  return (rank_sum - p * (p + 1.0) / 2.0) / (p * static_cast<double>(n_neg));
}

namespace {

ClassMetrics class_metrics(std::span<const int> gold, std::span<const int> predicted, int cls) {
  ClassMetrics m;
  std::size_t tp = 0;
  for (std::size_t i = 0; i < gold.size(); ++i) {
    const bool g = gold[i] == cls;
    const bool p = predicted[i] == cls;
    m.support += g;
    m.predicted += p;
    tp += g && p;
  }
  m.precision = m.predicted ? static_cast<double>(tp) / static_cast<double>(m.predicted) : 0.0;
  m.recall = m.support ? static_cast<double>(tp) / static_cast<double>(m.support) : 0.0;
  m.f1 = (m.precision + m.recall) > 0.0
             ? 2.0 * m.precision * m.recall / (m.precision + m.recall)
             : 0.0;
  return m;
}

}  // namespace

BinaryReport binary_report(std::span<const int> gold, std::span<const int> predicted,
                           bool with_accuracy) {
  if (gold.size() != predicted.size()) throw Error("binary_report: length mismatch");
  if (gold.empty()) throw Error("binary_report: empty evaluation set");
  BinaryReport r;
  r.positive = class_metrics(gold, predicted, 1);
  r.negative = class_metrics(gold, predicted, 0);
  r.macro_precision = (r.positive.precision + r.negative.precision) / 2.0;
  r.macro_recall = (r.positive.recall + r.negative.recall) / 2.0;
  r.macro_f1 = (r.positive.f1 + r.negative.f1) / 2.0;
  if (with_accuracy) {
    std::size_t correct = 0;
    for (std::size_t i = 0; i < gold.size(); ++i) correct += gold[i] == predicted[i];
    r.accuracy = static_cast<double>(correct) / static_cast<double>(gold.size());
  }
  return r;
}

}  // namespace collabmap::metrics
