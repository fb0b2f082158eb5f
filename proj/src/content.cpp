#include "collabmap/content.hpp"

#include <algorithm>
#include <random>
#include <unordered_map>

#include "collabmap/text.hpp"

namespace collabmap::content {

std::string_view to_string(ContentLabel l) {
  return l == ContentLabel::Collaborative ? "collaborative" : "non_collaborative";
}

std::size_t ContentDataset::positives() const {
  return static_cast<std::size_t>(std::count_if(items.begin(), items.end(), [](const LabeledAbstract& a) {
    return a.label == ContentLabel::Collaborative;
  }));
}

ContentDataset build_content_dataset(std::span<const analytics::PaperClassification> classifications,
                                     std::span<const corpus::PaperRecord> records) {
  std::unordered_map<std::string_view, const corpus::PaperRecord*> by_id;
  for (const auto& r : records) by_id.emplace(r.paper_id, &r);

  ContentDataset ds;
  for (const auto& pc : classifications) {
    ContentLabel label;
    if (pc.bucket == analytics::Bucket::Collaborative) {
      label = ContentLabel::Collaborative;
    } else if (pc.bucket == analytics::Bucket::AcademiaOnly) {
      label = ContentLabel::NonCollaborative;
    } else {
      (pc.bucket == analytics::Bucket::IndustryOnly ? ds.excluded_industry_only : ds.excluded_unknown)++;
      continue;
    }
    auto it = by_id.find(pc.paper_id);
    if (it == by_id.end()) throw Error("classification for paper '" + pc.paper_id + "' has no record");
    if (text::trim(it->second->abstract).empty()) {
      ++ds.dropped_empty_abstract;
      continue;
    }
    ds.items.push_back({pc.paper_id, it->second->abstract, label});
  }
  if (ds.dropped_empty_abstract > 0) {
    ds.warnings.push_back(std::to_string(ds.dropped_empty_abstract) +
                          " papers dropped for empty abstracts");
  }
  if (ds.items.empty()) ds.warnings.emplace_back("content dataset is empty");
  return ds;
}

namespace {

std::vector<int> int_labels(std::span<const LabeledAbstract> items) {
  std::vector<int> out;
  out.reserve(items.size());
  for (const auto& it : items) out.push_back(static_cast<int>(it.label));
  return out;
}

std::vector<int> int_labels(std::span<const ContentLabel> items) {
  std::vector<int> out;
  out.reserve(items.size());
  for (auto l : items) out.push_back(static_cast<int>(l));
  return out;
}

}  // namespace

DatasetSplit stratified_split(std::span<const LabeledAbstract> dataset, std::array<double, 3> ratios,
                              std::uint64_t seed) {
  const auto labels = int_labels(dataset);
  const auto pos = static_cast<std::size_t>(std::count(labels.begin(), labels.end(), 1));
  const auto neg = labels.size() - pos;
  if (pos == 0 || neg == 0) throw Error("cannot split a single-class dataset");
  if (pos < kMinClassSize || neg < kMinClassSize) {
    throw Error("dataset too small to split: need at least " + std::to_string(kMinClassSize) +
                " items per class, have " + std::to_string(pos) + " collaborative and " +
                std::to_string(neg) + " non-collaborative");
  }
  const auto idx = learn::stratified_split_indices(labels, ratios, seed);
  DatasetSplit split;
  for (auto i : idx.train) split.train.push_back(dataset[i]);
  for (auto i : idx.validation) split.validation.push_back(dataset[i]);
  for (auto i : idx.test) split.test.push_back(dataset[i]);
  return split;
}

std::vector<LabeledAbstract> negative_sample(std::span<const LabeledAbstract> dataset,
                                             std::uint64_t seed) {
  std::vector<std::size_t> negatives;
  std::size_t positives = 0;
  for (std::size_t i = 0; i < dataset.size(); ++i) {
    if (dataset[i].label == ContentLabel::Collaborative) {
      ++positives;
    } else {
      negatives.push_back(i);
    }
  }
  if (negatives.size() < positives) {
    throw Error("negative sampling needs at least as many negatives (" +
                std::to_string(negatives.size()) + ") as positives (" + std::to_string(positives) + ")");
  }
  learn::seeded_shuffle(negatives, seed);
  std::vector<bool> keep(dataset.size(), false);
  for (std::size_t i = 0; i < positives; ++i) keep[negatives[i]] = true;

  std::vector<LabeledAbstract> out;
  out.reserve(2 * positives);
  for (std::size_t i = 0; i < dataset.size(); ++i) {
    if (dataset[i].label == ContentLabel::Collaborative || keep[i]) out.push_back(dataset[i]);
  }
  return out;
}

std::vector<std::string> abstract_features(std::string_view abstract) {
  const auto tokens = text::word_tokens(abstract);
  std::vector<std::string> features;
  features.reserve(tokens.size() * 2);
  for (std::size_t i = 0; i < tokens.size(); ++i) {
    features.push_back("u:" + tokens[i]);
    if (i + 1 < tokens.size()) features.push_back("b:" + tokens[i] + "_" + tokens[i + 1]);
  }
  return features;
}

double ContentModel::score(std::string_view abstract) const {
  return linear_.probability(learn::hashed_vector(abstract_features(abstract), linear_.dimension()));
}

ContentModel train_content_classifier(std::span<const LabeledAbstract> train,
                                      std::span<const LabeledAbstract> validation, std::uint64_t seed,
                                      std::uint32_t dimension) {
  if (validation.empty()) throw Error("content classifier needs a non-empty validation set");
  auto to_examples = [&](std::span<const LabeledAbstract> items) {
    std::vector<learn::Example> out;
    out.reserve(items.size());
    for (const auto& it : items) {
      out.push_back({learn::hashed_vector(abstract_features(it.abstract), dimension),
                     static_cast<int>(it.label)});
    }
    return out;
  };
  const auto train_ex = to_examples(train);
  const auto val_ex = to_examples(validation);
  const auto val_gold = int_labels(validation);

  auto macro_f1 = [&](const learn::LinearModel& m) {
    std::vector<int> pred;
    pred.reserve(val_ex.size());
    for (const auto& ex : val_ex) pred.push_back(m.probability(ex.features) >= 0.5 ? 1 : 0);
    return metrics::binary_report(val_gold, pred, false).macro_f1;
  };
  learn::TrainOptions options;
  options.seed = seed;
  auto fit = learn::train_logistic(train_ex, dimension, macro_f1, options);
  return ContentModel(std::move(fit.model), seed, fit.best_epoch, fit.best_validation);
}

std::vector<ContentLabel> predict(const AbstractScorer& scorer, std::span<const LabeledAbstract> items) {
  std::vector<ContentLabel> out;
  out.reserve(items.size());
  for (const auto& it : items) {
    out.push_back(scorer.score(it.abstract) >= 0.5 ? ContentLabel::Collaborative
                                                   : ContentLabel::NonCollaborative);
  }
  return out;
}

std::vector<ContentLabel> majority_baseline(std::size_t n, ContentLabel majority) {
  return std::vector<ContentLabel>(n, majority);
}

std::vector<ContentLabel> random_baseline(std::size_t n, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::vector<ContentLabel> out;
  out.reserve(n);
  for (std::size_t i = 0; i < n; ++i) {
    out.push_back((rng() >> 63) ? ContentLabel::Collaborative : ContentLabel::NonCollaborative);
  }
  return out;
}

MetricsReport evaluate(std::span<const LabeledAbstract> test, std::span<const ContentLabel> predicted,
                       bool with_accuracy) {
  MetricsReport r;
  r.metrics = metrics::binary_report(int_labels(test), int_labels(predicted), with_accuracy);
  r.test_size = test.size();
  return r;
}

nlohmann::ordered_json to_json(const MetricsReport& report) {
  const auto& m = report.metrics;
  auto cls = [](const metrics::ClassMetrics& c) {
    return nlohmann::ordered_json{{"precision", c.precision}, {"recall", c.recall}, {"f1", c.f1},
                                  {"support", c.support},     {"predicted", c.predicted}};
  };
  nlohmann::ordered_json j;
  j["accuracy"] = m.accuracy ? nlohmann::ordered_json(*m.accuracy) : nlohmann::ordered_json(nullptr);
  j["macro_precision"] = m.macro_precision;
  j["macro_recall"] = m.macro_recall;
  j["macro_f1"] = m.macro_f1;
  j["per_class"] = {{"collaborative", cls(m.positive)}, {"non_collaborative", cls(m.negative)}};
  j["sizes"] = {{"train", report.train_size}, {"validation", report.validation_size}, {"test", report.test_size}};
  return j;
}

std::vector<ExperimentRow> run_experiment_grid(std::span<const LabeledAbstract> dataset,
                                               const ExperimentConfig& config) {
  std::vector<ExperimentRow> rows;
  for (bool ns : {true, false}) {
    std::vector<LabeledAbstract> data;
    if (ns) {
      data = negative_sample(dataset, config.seed);
    } else {
      data.assign(dataset.begin(), dataset.end());
    }
    const auto split = stratified_split(data, config.ratios, config.seed);
    auto sized = [&](MetricsReport r) {
      r.train_size = split.train.size();
      r.validation_size = split.validation.size();
      return r;
    };

    if (ns) {
      const auto pred = random_baseline(split.test.size(), config.seed);
      rows.push_back({"random", true, sized(evaluate(split.test, pred, true))});
    } else {
      std::size_t pos = 0;
      for (const auto& it : split.train) pos += it.label == ContentLabel::Collaborative;
      const auto majority = 2 * pos > split.train.size() ? ContentLabel::Collaborative
                                                         : ContentLabel::NonCollaborative;
      const auto pred = majority_baseline(split.test.size(), majority);
      rows.push_back({"majority", false, sized(evaluate(split.test, pred, false))});
    }
    const auto model = train_content_classifier(split.train, split.validation, config.seed, config.dimension);
    rows.push_back({"linear", ns, sized(evaluate(split.test, predict(model, split.test), ns))});
  }
  return rows;
}

}  // namespace collabmap::content
