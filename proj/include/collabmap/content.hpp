#pragma once

#include <array>
#include <cstdint>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include <json.hpp>

#include "collabmap/analytics.hpp"
#include "collabmap/corpus.hpp"
#include "collabmap/learn.hpp"
#include "collabmap/metrics.hpp"

namespace collabmap::content {

enum class ContentLabel { NonCollaborative = 0, Collaborative = 1 };

std::string_view to_string(ContentLabel l);

struct LabeledAbstract {
  std::string paper_id;
  std::string abstract;
  ContentLabel label = ContentLabel::NonCollaborative;

  friend bool operator==(const LabeledAbstract&, const LabeledAbstract&) = default;
};

struct ContentDataset {
  std::vector<LabeledAbstract> items;
  std::size_t dropped_empty_abstract = 0;
  std::size_t excluded_industry_only = 0;
  std::size_t excluded_unknown = 0;
  std::vector<std::string> warnings;

  std::size_t positives() const;
  std::size_t negatives() const { return items.size() - positives(); }
};

/// Positives are Collaborative papers, negatives AcademiaOnly papers.
/// IndustryOnly and Unknown papers and empty abstracts are left out and
/// counted. Items follow classification order.
ContentDataset build_content_dataset(std::span<const analytics::PaperClassification> classifications,
                                     std::span<const corpus::PaperRecord> records);

inline constexpr std::size_t kMinClassSize = 10;
inline constexpr std::array<double, 3> kDefaultRatios = {8.0, 1.0, 1.0};

struct DatasetSplit {
  std::vector<LabeledAbstract> train;
  std::vector<LabeledAbstract> validation;
  std::vector<LabeledAbstract> test;
};

/// Per-class seeded shuffle and proportional allocation (see
/// learn::stratified_split_indices). Throws Error unless both classes have at
/// least kMinClassSize items.
DatasetSplit stratified_split(std::span<const LabeledAbstract> dataset, std::array<double, 3> ratios,
                              std::uint64_t seed);

/// Keeps every positive and a uniform sample without replacement of as many
/// negatives; input order is preserved. Throws Error when negatives are
/// fewer than positives.
std::vector<LabeledAbstract> negative_sample(std::span<const LabeledAbstract> dataset,
                                             std::uint64_t seed);

/// Unigrams "u:<tok>" and adjacent-token bigrams "b:<tok>_<tok>".
std::vector<std::string> abstract_features(std::string_view abstract);

inline constexpr std::uint32_t kDefaultContentDimension = 1u << 18;

/// Anything that scores an abstract with P(Collaborative).
class AbstractScorer {
 public:
  virtual ~AbstractScorer() = default;
  virtual double score(std::string_view abstract) const = 0;
};

class ContentModel : public AbstractScorer {
 public:
  ContentModel() = default;
  ContentModel(learn::LinearModel linear, std::uint64_t seed, int best_epoch, double validation_macro_f1)
      : linear_(std::move(linear)), seed_(seed), best_epoch_(best_epoch),
        validation_macro_f1_(validation_macro_f1) {}

  double score(std::string_view abstract) const override;

  const learn::LinearModel& linear() const { return linear_; }
  std::uint64_t seed() const { return seed_; }
  int best_epoch() const { return best_epoch_; }
  double validation_macro_f1() const { return validation_macro_f1_; }

 private:
  learn::LinearModel linear_;
  std::uint64_t seed_ = 0;
  int best_epoch_ = 0;
  double validation_macro_f1_ = 0.0;
};

/// Class-weighted logistic regression on hashed unigram+bigram features with
/// early stopping on validation macro-F1. Throws Error for one-class training
/// data or an empty validation set.
ContentModel train_content_classifier(std::span<const LabeledAbstract> train,
                                      std::span<const LabeledAbstract> validation, std::uint64_t seed,
                                      std::uint32_t dimension = kDefaultContentDimension);

/// Collaborative iff score >= 0.5.
std::vector<ContentLabel> predict(const AbstractScorer& scorer, std::span<const LabeledAbstract> items);
std::vector<ContentLabel> majority_baseline(std::size_t n, ContentLabel majority);
std::vector<ContentLabel> random_baseline(std::size_t n, std::uint64_t seed);

struct MetricsReport {
  metrics::BinaryReport metrics;  // positive class = Collaborative
  std::size_t train_size = 0;
  std::size_t validation_size = 0;
  std::size_t test_size = 0;
};

/// Macro precision/recall/F1 always; accuracy only when with_accuracy, which
/// callers set for negative-sampled (balanced) evaluations.
MetricsReport evaluate(std::span<const LabeledAbstract> test, std::span<const ContentLabel> predicted,
                       bool with_accuracy);

nlohmann::ordered_json to_json(const MetricsReport& report);

struct ExperimentConfig {
  std::uint64_t seed = 42;
  std::array<double, 3> ratios = kDefaultRatios;
  std::uint32_t dimension = kDefaultContentDimension;
};

struct ExperimentRow {
  std::string method;  // "random", "majority" or "linear"
  bool negative_sampling = false;
  MetricsReport report;
};

/// The four-row grid: random baseline and linear model with negative
/// sampling, majority baseline and linear model without.
std::vector<ExperimentRow> run_experiment_grid(std::span<const LabeledAbstract> dataset,
                                               const ExperimentConfig& config);

}  // namespace collabmap::content
