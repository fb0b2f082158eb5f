#pragma once

#include <optional>
#include <span>

namespace collabmap::metrics {

/// ROC-AUC as the Mann-Whitney rank statistic with midranks for tied scores.
/// labels are 0/1. Throws collabmap::Error if either class is absent.
double roc_auc(std::span<const double> scores, std::span<const int> labels);

struct ClassMetrics {
  double precision = 0.0;  // 0 when the class is never predicted
  double recall = 0.0;
  double f1 = 0.0;
  std::size_t support = 0;
  std::size_t predicted = 0;
};

struct BinaryReport {
  std::optional<double> accuracy;
  ClassMetrics positive;
  ClassMetrics negative;
  double macro_precision = 0.0;
  double macro_recall = 0.0;
  double macro_f1 = 0.0;
};

/// Per-class and macro-averaged metrics for 0/1 labels. Accuracy is filled
/// only when with_accuracy is set.
BinaryReport binary_report(std::span<const int> gold, std::span<const int> predicted,
                           bool with_accuracy);

}  // namespace collabmap::metrics
