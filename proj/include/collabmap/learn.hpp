#pragma once

#include <array>
#include <cstdint>
#include <functional>
#include <span>
#include <string>
#include <vector>

#include <json.hpp>

#include "collabmap/error.hpp"

namespace collabmap::learn {

/// Sorted-index sparse vector. Indices are strictly increasing.
struct SparseVector {
  std::vector<std::uint32_t> indices;
  std::vector<double> values;

  bool empty() const { return indices.empty(); }
  std::size_t size() const { return indices.size(); }
  double norm() const;

  friend bool operator==(const SparseVector&, const SparseVector&) = default;
};

std::uint32_t hash_feature(std::string_view feature, std::uint32_t dimension);

/// Hashes every feature string into [0, dimension), accumulates counts and
/// L2-normalizes. No features gives the zero vector.
SparseVector hashed_vector(std::span<const std::string> features, std::uint32_t dimension);

class LinearModel {
 public:
  LinearModel() = default;
  explicit LinearModel(std::uint32_t dimension);

  std::uint32_t dimension() const { return static_cast<std::uint32_t>(weights_.size()); }
  double bias() const { return bias_; }
  std::span<const double> weights() const { return weights_; }

  double margin(const SparseVector& x) const;
  double probability(const SparseVector& x) const;

  void set_bias(double b) { bias_ = b; }
  std::vector<double>& mutable_weights() { return weights_; }

  // Weights are stored sparsely: only nonzero entries are written.
  nlohmann::json to_json() const;
  static LinearModel from_json(const nlohmann::json& j);

  friend bool operator==(const LinearModel&, const LinearModel&) = default;

 private:
  std::vector<double> weights_;
  double bias_ = 0.0;
};

double sigmoid(double z);

struct Example {
  SparseVector features;
  int label = 0;  // 1 = positive class
};

struct TrainOptions {
  int max_epochs = 40;
  int patience = 5;  // epochs without validation improvement before stopping
  double learning_rate = 0.2;
  std::uint64_t seed = 1;
  bool class_weighting = true;
};

struct TrainResult {
  LinearModel model;
  int best_epoch = 0;
  double best_validation = 0.0;
  std::vector<double> validation_history;
};

using ValidationMetric = std::function<double(const LinearModel&)>;

/// Logistic-loss linear model fitted with per-coordinate adaptive SGD
/// (AdaGrad). With class_weighting, each example's loss is scaled by
/// n / (2 * n_class). The model from the epoch with the best validation
/// metric is returned; ties keep the earlier epoch. Deterministic for a
/// fixed seed. Throws Error when only one class is present.
TrainResult train_logistic(std::span<const Example> train, std::uint32_t dimension,
                           const ValidationMetric& validate, const TrainOptions& options);

/// Seeded Fisher-Yates shuffle with a portable bounded draw, so results do not
/// depend on the standard library's distribution implementations.
void seeded_shuffle(std::vector<std::size_t>& items, std::uint64_t seed);
std::vector<std::size_t> seeded_permutation(std::size_t n, std::uint64_t seed);

struct SplitIndices {
  std::vector<std::size_t> train;
  std::vector<std::size_t> validation;
  std::vector<std::size_t> test;
};

/// Shuffles each class separately with the seed, then gives validation
/// round(n * r_val / sum) and test round(n * r_test / sum) items of a class of
/// size n and training the rest. Splits list classes in ascending label order.
SplitIndices stratified_split_indices(std::span<const int> labels, std::array<double, 3> ratios,
                                      std::uint64_t seed);

}  // namespace collabmap::learn
