#include "collabmap/learn.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>
#include <random>

#include "collabmap/text.hpp"

namespace collabmap::learn {

namespace {

std::size_t bounded(std::mt19937_64& rng, std::size_t n) {
  const std::uint64_t range = n;
  const std::uint64_t limit = std::mt19937_64::max() - (std::mt19937_64::max() % range);
  std::uint64_t r;
  do {
    r = rng();
  } while (r >= limit);
  return static_cast<std::size_t>(r % range);
}

void shuffle_with(std::vector<std::size_t>& items, std::mt19937_64& rng) {
  for (std::size_t i = items.size(); i > 1; --i) {
    std::swap(items[i - 1], items[bounded(rng, i)]);
  }
}

}  // namespace

double SparseVector::norm() const {
  double s = 0.0;
  for (double v : values) s += v * v;
  return std::sqrt(s);
}

std::uint32_t hash_feature(std::string_view feature, std::uint32_t dimension) {
  return static_cast<std::uint32_t>(text::fnv1a64(feature) % dimension);
}

SparseVector hashed_vector(std::span<const std::string> features, std::uint32_t dimension) {
  if (dimension < 2) throw Error("feature dimension must be at least 2");
  std::map<std::uint32_t, double> counts;
  for (const auto& f : features) counts[hash_feature(f, dimension)] += 1.0;
  SparseVector v;
  v.indices.reserve(counts.size());
  v.values.reserve(counts.size());
  double sq = 0.0;
  for (const auto& [idx, c] : counts) {
    v.indices.push_back(idx);
    v.values.push_back(c);
    sq += c * c;
  }
  if (sq > 0.0) {
    const double inv = 1.0 / std::sqrt(sq);
    for (double& x : v.values) x *= inv;
  }
  return v;
}

double sigmoid(double z) {
  if (z >= 0) return 1.0 / (1.0 + std::exp(-z));
  const double e = std::exp(z);
  return e / (1.0 + e);
}

LinearModel::LinearModel(std::uint32_t dimension) : weights_(dimension, 0.0) {}

double LinearModel::margin(const SparseVector& x) const {
  double z = bias_;
  for (std::size_t i = 0; i < x.indices.size(); ++i) {
    if (x.indices[i] >= weights_.size()) throw Error("feature index outside model dimension");
    z += weights_[x.indices[i]] * x.values[i];
  }
  return z;
}

double LinearModel::probability(const SparseVector& x) const { return sigmoid(margin(x)); }

nlohmann::json LinearModel::to_json() const {
  nlohmann::json weights = nlohmann::json::array();
  for (std::size_t i = 0; i < weights_.size(); ++i) {
    if (weights_[i] != 0.0) weights.push_back({i, weights_[i]});
  }
  return {{"dimension", weights_.size()}, {"bias", bias_}, {"weights", std::move(weights)}};
}

LinearModel LinearModel::from_json(const nlohmann::json& j) {
  try {
    const auto dim = j.at("dimension").get<std::uint32_t>();
    if (dim < 2) throw Error("model dimension must be at least 2");
    LinearModel m(dim);
    m.bias_ = j.at("bias").get<double>();
    for (const auto& entry : j.at("weights")) {
      const auto idx = entry.at(0).get<std::uint32_t>();
      if (idx >= dim) throw Error("model weight index " + std::to_string(idx) + " out of range");
      m.weights_[idx] = entry.at(1).get<double>();
    }
    return m;
  } catch (const nlohmann::json::exception& e) {
    throw Error(std::string("invalid model weights: ") + e.what());
  }
}

void seeded_shuffle(std::vector<std::size_t>& items, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  shuffle_with(items, rng);
}

std::vector<std::size_t> seeded_permutation(std::size_t n, std::uint64_t seed) {
  std::vector<std::size_t> p(n);
  for (std::size_t i = 0; i < n; ++i) p[i] = i;
  seeded_shuffle(p, seed);
  return p;
}

TrainResult train_logistic(std::span<const Example> train, std::uint32_t dimension,
                           const ValidationMetric& validate, const TrainOptions& options) {
  std::size_t n_pos = 0;
  for (const auto& ex : train) n_pos += ex.label == 1 ? 1 : 0;
  const std::size_t n_neg = train.size() - n_pos;
  if (n_pos == 0 || n_neg == 0) throw Error("training data must contain both classes");
  if (options.max_epochs < 1) throw Error("max_epochs must be positive");

  const double n = static_cast<double>(train.size());
  const double w_pos = options.class_weighting ? n / (2.0 * static_cast<double>(n_pos)) : 1.0;
  const double w_neg = options.class_weighting ? n / (2.0 * static_cast<double>(n_neg)) : 1.0;

  LinearModel model(dimension);
  std::vector<double> grad_sq(dimension, 0.0);
  double bias_grad_sq = 0.0;
  constexpr double kEps = 1e-8;

  TrainResult result;
  result.model = model;
  result.best_validation = -std::numeric_limits<double>::infinity();

  std::mt19937_64 rng(options.seed);
  std::vector<std::size_t> order(train.size());
  for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;

  int since_best = 0;
  for (int epoch = 1; epoch <= options.max_epochs; ++epoch) {
    shuffle_with(order, rng);
    auto& w = model.mutable_weights();
    for (std::size_t idx : order) {
      const auto& ex = train[idx];
      const double p = model.probability(ex.features);
      const double g = (ex.label == 1 ? w_pos : w_neg) * (p - static_cast<double>(ex.label));
      for (std::size_t k = 0; k < ex.features.indices.size(); ++k) {
        const auto f = ex.features.indices[k];
        const double gf = g * ex.features.values[k];
        grad_sq[f] += gf * gf;
        w[f] -= options.learning_rate * gf / (std::sqrt(grad_sq[f]) + kEps);
      }
      bias_grad_sq += g * g;
      model.set_bias(model.bias() - options.learning_rate * g / (std::sqrt(bias_grad_sq) + kEps));
    }

    const double score = validate(model);
    result.validation_history.push_back(score);
    if (score > result.best_validation) {
      result.best_validation = score;
      result.best_epoch = epoch;
      result.model = model;
      since_best = 0;
    } else if (++since_best >= options.patience) {
      break;
    }
  }
  return result;
}

}  // namespace collabmap::learn

namespace collabmap::learn {

SplitIndices stratified_split_indices(std::span<const int> labels, std::array<double, 3> ratios,
                                      std::uint64_t seed) {
  const double sum = ratios[0] + ratios[1] + ratios[2];
  if (!(ratios[0] >= 0 && ratios[1] >= 0 && ratios[2] >= 0 && sum > 0)) {
    throw Error("split ratios must be non-negative with a positive sum");
  }
  std::map<int, std::vector<std::size_t>> by_class;
  for (std::size_t i = 0; i < labels.size(); ++i) by_class[labels[i]].push_back(i);

  SplitIndices out;
  for (auto& [cls, members] : by_class) {
    seeded_shuffle(members, seed ^ (0x9E3779B97F4A7C15ull * static_cast<std::uint64_t>(cls + 1)));
    const double n = static_cast<double>(members.size());
    auto n_val = static_cast<std::size_t>(std::llround(n * ratios[1] / sum));
    auto n_test = static_cast<std::size_t>(std::llround(n * ratios[2] / sum));
    if (n_val + n_test > members.size()) n_test = members.size() - std::min(n_val, members.size());
    n_val = std::min(n_val, members.size());
    const std::size_t n_train = members.size() - n_val - n_test;
    auto it = members.begin();
    out.train.insert(out.train.end(), it, it + static_cast<std::ptrdiff_t>(n_train));
    it += static_cast<std::ptrdiff_t>(n_train);
    out.validation.insert(out.validation.end(), it, it + static_cast<std::ptrdiff_t>(n_val));
    it += static_cast<std::ptrdiff_t>(n_val);
    out.test.insert(out.test.end(), it, members.end());
  }
  return out;
}

}  // namespace collabmap::learn
