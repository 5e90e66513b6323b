#pragma once

#include <cstdint>
#include <limits>
#include <span>
#include <vector>

#include "agrifield/damageml/dataset.hpp"

namespace agrifield::damageml {

/// 1 - sum of squared class proportions. Labels must be non-negative.
double gini(std::span<const int> labels);

struct TreeParams {
  int max_depth = std::numeric_limits<int>::max();
  int min_samples_split = 2;

  void validate() const;
};

/// CART classifier with Gini splits at midpoints between observed values.
class DecisionTree {
 public:
  struct Node {
    int feature = -1;  // -1 marks a leaf
    double threshold = 0.0;  // rows with value <= threshold go left
    int left = -1;
    int right = -1;
    int label = 0;
    std::size_t samples = 0;
  };

  /// `feature_fraction` < 1 samples that share of features at every split,
  /// drawn from `seed`. With 1.0 every feature is scanned in column order.
  static DecisionTree fit(const FeatureMatrix& train, const TreeParams& params,
                          double feature_fraction = 1.0, std::uint64_t seed = 0);
  static DecisionTree fit_rows(const FeatureMatrix& train, std::span<const std::size_t> rows,
                               const TreeParams& params, double feature_fraction,
                               std::uint64_t seed);

  int predict_one(std::span<const double> x) const;
  std::vector<int> predict(const FeatureMatrix& rows) const;

  const std::vector<Node>& nodes() const noexcept { return nodes_; }
  int depth() const;
  std::size_t leaf_count() const;

 private:
  std::vector<Node> nodes_;
};

struct ForestParams {
  int n_trees = 50;
  bool bootstrap = true;
  double feature_subsample = 0.5;
  std::uint64_t seed = 0;
  TreeParams tree;
  unsigned threads = 0;  // 0: hardware concurrency

  void validate() const;
};

/// Bagged trees with per-split feature subsampling and majority vote.
/// Per-tree seeds derive from `seed`, so results do not depend on `threads`.
class RandomForest {
 public:
  static RandomForest fit(const FeatureMatrix& train, const ForestParams& params);

  int predict_one(std::span<const double> x) const;
  std::vector<int> predict(const FeatureMatrix& rows) const;
  const std::vector<DecisionTree>& trees() const noexcept { return trees_; }

 private:
  std::vector<DecisionTree> trees_;
  int n_classes_ = 0;
};

struct KnnParams {
  int k = 5;
};

/// k nearest neighbours on standardized features. Categorical columns are
/// one-hot encoded before standardization.
class KnnModel {
 public:
  static KnnModel fit(const FeatureMatrix& train, const KnnParams& params);

  int predict_one(std::span<const double> x) const;
  std::vector<int> predict(const FeatureMatrix& rows) const;

 private:
  std::vector<double> encode(std::span<const double> x) const;

  struct OneHot {
    std::size_t column;
    std::vector<double> levels;
  };

  int k_ = 1;
  std::vector<std::size_t> numeric_cols_;
  std::vector<OneHot> one_hot_;
  std::vector<double> mean_;
  std::vector<double> scale_;
  std::size_t dim_ = 0;
  std::vector<double> points_;  // encoded, standardized, row-major
  std::vector<int> labels_;
};

}  // namespace agrifield::damageml
