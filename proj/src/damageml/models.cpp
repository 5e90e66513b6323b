#include "agrifield/damageml/models.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <numeric>
#include <optional>
#include <thread>

#include "agrifield/errors.hpp"
#include "agrifield/simcore.hpp"

namespace agrifield::damageml {
namespace {

std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9E3779B97F4A7C15ull;
  x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ull;
  x = (x ^ (x >> 27)) * 0x94D049BB133111EBull;
  return x ^ (x >> 31);
}

int count_classes(std::span<const int> labels) {
  int max_label = -1;
  for (int l : labels) {
    if (l < 0) throw DomainError("training labels must be non-negative");
    max_label = std::max(max_label, l);
  }
  return max_label + 1;
}

/// Index of the largest count; ties go to the smallest label.
int majority(std::span<const std::size_t> counts) {
  int best = 0;
  for (std::size_t c = 1; c < counts.size(); ++c)
    if (counts[c] > counts[static_cast<std::size_t>(best)]) best = static_cast<int>(c);
  return best;
}

class TreeBuilder {
 public:
  TreeBuilder(const FeatureMatrix& m, const TreeParams& params, double feature_fraction,
              std::uint64_t seed, std::vector<DecisionTree::Node>& nodes)
      : m_(m),
        params_(params),
        fraction_(feature_fraction),
        rng_(seed),
        nodes_(nodes),
        n_classes_(count_classes(m.labels)) {}

  int build(std::vector<std::size_t> rows, int depth) {
    std::vector<std::size_t> counts(static_cast<std::size_t>(n_classes_), 0);
    for (std::size_t r : rows) ++counts[static_cast<std::size_t>(m_.labels[r])];

    const int index = static_cast<int>(nodes_.size());
    nodes_.push_back({});
    nodes_[static_cast<std::size_t>(index)].label = majority(counts);
    nodes_[static_cast<std::size_t>(index)].samples = rows.size();

    const bool pure = std::count_if(counts.begin(), counts.end(), [](std::size_t c) { return c > 0; }) <= 1;
    if (pure || depth >= params_.max_depth ||
        rows.size() < static_cast<std::size_t>(params_.min_samples_split))
      return index;

    const auto best = best_split(rows);
    if (!best) return index;

    std::vector<std::size_t> left, right;
    for (std::size_t r : rows) (m_.at(r, best->feature) <= best->threshold ? left : right).push_back(r);
    rows.clear();
    rows.shrink_to_fit();

    const int l = build(std::move(left), depth + 1);
    const int rt = build(std::move(right), depth + 1);
    auto& node = nodes_[static_cast<std::size_t>(index)];
    node.feature = static_cast<int>(best->feature);
    node.threshold = best->threshold;
    node.left = l;
    node.right = rt;
    return index;
  }

 private:
  struct Split {
    std::size_t feature;
    double threshold;
    double impurity;
  };

  std::vector<std::size_t> candidate_features() {
    std::vector<std::size_t> features(m_.cols);
    std::iota(features.begin(), features.end(), std::size_t{0});
    if (fraction_ >= 1.0) return features;
    const auto take = std::max<std::size_t>(
        1, static_cast<std::size_t>(std::lround(fraction_ * static_cast<double>(m_.cols))));
    for (std::size_t i = 0; i < take; ++i)
      std::swap(features[i], features[i + static_cast<std::size_t>(rng_() % (m_.cols - i))]);
    features.resize(take);
    std::sort(features.begin(), features.end());
    return features;
  }

  std::optional<Split> best_split(const std::vector<std::size_t>& rows) {
    const auto n = rows.size();
    const auto C = static_cast<std::size_t>(n_classes_);
    std::vector<std::size_t> total(C, 0);
    for (std::size_t r : rows) ++total[static_cast<std::size_t>(m_.labels[r])];

    std::optional<Split> best;
    std::vector<std::pair<double, int>> column(n);
    std::vector<std::size_t> left(C);
    for (std::size_t f : candidate_features()) {
      for (std::size_t i = 0; i < n; ++i) column[i] = {m_.at(rows[i], f), m_.labels[rows[i]]};
      std::sort(column.begin(), column.end());
      std::fill(left.begin(), left.end(), 0);
      for (std::size_t i = 0; i + 1 < n; ++i) {
        ++left[static_cast<std::size_t>(column[i].second)];
        if (!(column[i].first < column[i + 1].first)) continue;
        const double nl = static_cast<double>(i + 1);
        const double nr = static_cast<double>(n - i - 1);
        double sl = 0.0, sr = 0.0;
        for (std::size_t c = 0; c < C; ++c) {
          const double a = static_cast<double>(left[c]);
          const double b = static_cast<double>(total[c] - left[c]);
          sl += a * a;
          sr += b * b;
        }
        // n * weighted gini = nl*(1 - sl/nl^2) + nr*(1 - sr/nr^2)
        const double impurity = (nl - sl / nl + nr - sr / nr) / static_cast<double>(n);
        if (!best || impurity < best->impurity)
          best = Split{f, 0.5 * (column[i].first + column[i + 1].first), impurity};
      }
    }
    return best;
  }

  const FeatureMatrix& m_;
  TreeParams params_;
  double fraction_;
  sim::Rng rng_;
  std::vector<DecisionTree::Node>& nodes_;
  int n_classes_;
};

}  // namespace

double gini(std::span<const int> labels) {
  if (labels.empty()) throw DomainError("gini of an empty label set");
  std::vector<std::size_t> counts(static_cast<std::size_t>(count_classes(labels)), 0);
  for (int l : labels) ++counts[static_cast<std::size_t>(l)];
  double sum_sq = 0.0;
  const double n = static_cast<double>(labels.size());
  for (std::size_t c : counts) sum_sq += (static_cast<double>(c) / n) * (static_cast<double>(c) / n);
  return 1.0 - sum_sq;
}

void TreeParams::validate() const {
  if (max_depth < 0) throw DomainError("max_depth must be >= 0");
  if (min_samples_split < 2) throw DomainError("min_samples_split must be >= 2");
}

DecisionTree DecisionTree::fit(const FeatureMatrix& train, const TreeParams& params,
                               double feature_fraction, std::uint64_t seed) {
  std::vector<std::size_t> rows(train.rows);
  std::iota(rows.begin(), rows.end(), std::size_t{0});
  return fit_rows(train, rows, params, feature_fraction, seed);
}

DecisionTree DecisionTree::fit_rows(const FeatureMatrix& train, std::span<const std::size_t> rows,
                                    const TreeParams& params, double feature_fraction,
                                    std::uint64_t seed) {
  params.validate();
  if (rows.empty()) throw DomainError("cannot fit a tree on zero rows");
  if (!(feature_fraction > 0.0 && feature_fraction <= 1.0))
    throw DomainError("feature fraction must lie in (0,1]");
  DecisionTree tree;
  TreeBuilder builder(train, params, feature_fraction, seed, tree.nodes_);
  builder.build({rows.begin(), rows.end()}, 0);
  return tree;
}

int DecisionTree::predict_one(std::span<const double> x) const {
  const Node* node = &nodes_.front();
  while (node->feature >= 0)
    node = &nodes_[static_cast<std::size_t>(
        x[static_cast<std::size_t>(node->feature)] <= node->threshold ? node->left : node->right)];
  return node->label;
}

std::vector<int> DecisionTree::predict(const FeatureMatrix& rows) const {
  std::vector<int> out(rows.rows);
  for (std::size_t r = 0; r < rows.rows; ++r) out[r] = predict_one(rows.row(r));
  return out;
}

int DecisionTree::depth() const {
  std::vector<std::pair<int, int>> stack{{0, 0}};
  int deepest = 0;
  while (!stack.empty()) {
    auto [i, d] = stack.back();
    stack.pop_back();
    deepest = std::max(deepest, d);
    const Node& n = nodes_[static_cast<std::size_t>(i)];
    if (n.feature >= 0) {
      stack.emplace_back(n.left, d + 1);
      stack.emplace_back(n.right, d + 1);
    }
  }
  return deepest;
}

std::size_t DecisionTree::leaf_count() const {
  return static_cast<std::size_t>(
      std::count_if(nodes_.begin(), nodes_.end(), [](const Node& n) { return n.feature < 0; }));
}

void ForestParams::validate() const {
  if (n_trees < 1) throw DomainError("n_trees must be >= 1");
  if (!(feature_subsample > 0.0 && feature_subsample <= 1.0))
    throw DomainError("feature_subsample must lie in (0,1]");
  tree.validate();
}

RandomForest RandomForest::fit(const FeatureMatrix& train, const ForestParams& params) {
  params.validate();
  if (train.rows == 0) throw DomainError("cannot fit a forest on zero rows");
  RandomForest forest;
  forest.n_classes_ = count_classes(train.labels);
  forest.trees_.resize(static_cast<std::size_t>(params.n_trees));

  auto fit_one = [&](std::size_t t) {
    const std::uint64_t tree_seed = splitmix64(params.seed + t);
    std::vector<std::size_t> rows(train.rows);
    if (params.bootstrap) {
      sim::Rng rng(splitmix64(tree_seed));
      for (auto& r : rows) r = static_cast<std::size_t>(rng() % train.rows);
    } else {
      std::iota(rows.begin(), rows.end(), std::size_t{0});
    }
    forest.trees_[t] =
        DecisionTree::fit_rows(train, rows, params.tree, params.feature_subsample, tree_seed);
  };

  unsigned workers = params.threads ? params.threads : std::max(1u, std::thread::hardware_concurrency());
  workers = std::min<unsigned>(workers, static_cast<unsigned>(params.n_trees));
  std::atomic<std::size_t> next{0};
  auto worker = [&] {
    for (std::size_t t = next++; t < forest.trees_.size(); t = next++) fit_one(t);
  };
  std::vector<std::jthread> pool;
  for (unsigned w = 1; w < workers; ++w) pool.emplace_back(worker);
  worker();
  return forest;
}

int RandomForest::predict_one(std::span<const double> x) const {
  std::vector<std::size_t> votes(static_cast<std::size_t>(n_classes_), 0);
  for (const auto& tree : trees_) ++votes[static_cast<std::size_t>(tree.predict_one(x))];
  return majority(votes);
}

std::vector<int> RandomForest::predict(const FeatureMatrix& rows) const {
  std::vector<int> out(rows.rows);
  for (std::size_t r = 0; r < rows.rows; ++r) out[r] = predict_one(rows.row(r));
  return out;
}

KnnModel KnnModel::fit(const FeatureMatrix& train, const KnnParams& params) {
  if (params.k < 1) throw DomainError("k must be >= 1");
  if (static_cast<std::size_t>(params.k) > train.rows)
    throw DomainError("k = " + std::to_string(params.k) + " exceeds training size " +
                      std::to_string(train.rows));
  count_classes(train.labels);

  KnnModel model;
  model.k_ = params.k;
  for (std::size_t c = 0; c < train.cols; ++c) {
    const bool categorical = c < train.categorical.size() && train.categorical[c];
    if (!categorical) {
      model.numeric_cols_.push_back(c);
      continue;
    }
    OneHot oh{c, {}};
    for (std::size_t r = 0; r < train.rows; ++r) oh.levels.push_back(train.at(r, c));
    std::sort(oh.levels.begin(), oh.levels.end());
    oh.levels.erase(std::unique(oh.levels.begin(), oh.levels.end()), oh.levels.end());
    model.one_hot_.push_back(std::move(oh));
  }
  model.dim_ = model.numeric_cols_.size();
  for (const auto& oh : model.one_hot_) model.dim_ += oh.levels.size();
  model.mean_.assign(model.dim_, 0.0);
  model.scale_.assign(model.dim_, 1.0);

  model.points_.reserve(train.rows * model.dim_);
  for (std::size_t r = 0; r < train.rows; ++r) {
    const auto e = model.encode(train.row(r));
    model.points_.insert(model.points_.end(), e.begin(), e.end());
  }
  const double n = static_cast<double>(train.rows);
  for (std::size_t d = 0; d < model.dim_; ++d) {
    double sum = 0.0, sum_sq = 0.0;
    for (std::size_t r = 0; r < train.rows; ++r) sum += model.points_[r * model.dim_ + d];
    const double mean = sum / n;
    for (std::size_t r = 0; r < train.rows; ++r) {
      const double dev = model.points_[r * model.dim_ + d] - mean;
      sum_sq += dev * dev;
    }
    const double sd = std::sqrt(sum_sq / n);
    model.mean_[d] = mean;
    model.scale_[d] = sd > 0.0 ? sd : 1.0;
    for (std::size_t r = 0; r < train.rows; ++r) {
      double& v = model.points_[r * model.dim_ + d];
      v = (v - mean) / model.scale_[d];
    }
  }
  model.labels_ = train.labels;
  return model;
}

std::vector<double> KnnModel::encode(std::span<const double> x) const {
  std::vector<double> out;
  out.reserve(dim_);
  for (std::size_t c : numeric_cols_) out.push_back(x[c]);
  for (const auto& oh : one_hot_)
    for (double level : oh.levels) out.push_back(x[oh.column] == level ? 1.0 : 0.0);
  return out;
}

int KnnModel::predict_one(std::span<const double> x) const {
  std::vector<double> q = encode(x);
  for (std::size_t d = 0; d < dim_; ++d) q[d] = (q[d] - mean_[d]) / scale_[d];

  const std::size_t n = labels_.size();
  std::vector<std::pair<double, std::size_t>> dist(n);
  for (std::size_t r = 0; r < n; ++r) {
    const double* p = points_.data() + r * dim_;
    double s = 0.0;
    for (std::size_t d = 0; d < dim_; ++d) s += (p[d] - q[d]) * (p[d] - q[d]);
    dist[r] = {s, r};
  }
  const auto k = static_cast<std::size_t>(k_);
  auto closer = [&](const auto& a, const auto& b) {
    if (a.first != b.first) return a.first < b.first;
    if (labels_[a.second] != labels_[b.second]) return labels_[a.second] < labels_[b.second];
    return a.second < b.second;
  };
  std::partial_sort(dist.begin(), dist.begin() + static_cast<std::ptrdiff_t>(k), dist.end(), closer);

  int n_classes = 0;
  for (std::size_t i = 0; i < k; ++i) n_classes = std::max(n_classes, labels_[dist[i].second] + 1);
  std::vector<std::size_t> votes(static_cast<std::size_t>(n_classes), 0);
  std::vector<double> total(static_cast<std::size_t>(n_classes), 0.0);
  for (std::size_t i = 0; i < k; ++i) {
    const auto l = static_cast<std::size_t>(labels_[dist[i].second]);
    ++votes[l];
    total[l] += std::sqrt(dist[i].first);
  }
  std::size_t best = 0;
  for (std::size_t c = 1; c < votes.size(); ++c) {
    if (votes[c] > votes[best] || (votes[c] == votes[best] && votes[c] > 0 && total[c] < total[best]))
      best = c;
  }
  return static_cast<int>(best);
}

std::vector<int> KnnModel::predict(const FeatureMatrix& rows) const {
  std::vector<int> out(rows.rows);
  for (std::size_t r = 0; r < rows.rows; ++r) out[r] = predict_one(rows.row(r));
  return out;
}

}  // namespace agrifield::damageml
