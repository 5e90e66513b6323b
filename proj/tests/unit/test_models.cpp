#include "doctest.h"

#include <cmath>
#include <limits>
#include <random>

#include "agrifield/damageml/metrics.hpp"
#include "agrifield/damageml/models.hpp"
#include "agrifield/damageml/pipeline.hpp"
#include "agrifield/errors.hpp"

using namespace agrifield;
using namespace agrifield::damageml;

namespace {

// Weighted Gini of a candidate split computed from class proportions.
double split_impurity(const FeatureMatrix& m, const std::vector<std::size_t>& rows, std::size_t f,
                      double threshold) {
  std::vector<int> left, right;
  for (std::size_t r : rows) (m.at(r, f) <= threshold ? left : right).push_back(m.labels[r]);
  if (left.empty() || right.empty()) return std::numeric_limits<double>::infinity();
  const double n = static_cast<double>(rows.size());
  return static_cast<double>(left.size()) / n * gini(left) +
         static_cast<double>(right.size()) / n * gini(right);
}

// Exhaustive search over every feature and every midpoint.
double best_impurity(const FeatureMatrix& m, const std::vector<std::size_t>& rows) {
  double best = std::numeric_limits<double>::infinity();
  for (std::size_t f = 0; f < m.cols; ++f) {
    std::vector<double> values;
    for (std::size_t r : rows) values.push_back(m.at(r, f));
    std::sort(values.begin(), values.end());
    values.erase(std::unique(values.begin(), values.end()), values.end());
    for (std::size_t i = 0; i + 1 < values.size(); ++i)
      best = std::min(best, split_impurity(m, rows, f, 0.5 * (values[i] + values[i + 1])));
  }
  return best;
}

// Walks the fitted tree and checks each internal node against the oracle.
void check_node(const DecisionTree& tree, int index, const FeatureMatrix& m,
                const std::vector<std::size_t>& rows) {
  const auto& node = tree.nodes()[static_cast<std::size_t>(index)];
  REQUIRE(node.samples == rows.size());
  if (node.feature < 0) return;
  const auto f = static_cast<std::size_t>(node.feature);
  REQUIRE(split_impurity(m, rows, f, node.threshold) ==
          doctest::Approx(best_impurity(m, rows)).epsilon(1e-12));
  std::vector<std::size_t> left, right;
  for (std::size_t r : rows) (m.at(r, f) <= node.threshold ? left : right).push_back(r);
  check_node(tree, node.left, m, left);
  check_node(tree, node.right, m, right);
}

FeatureMatrix eight_rows() {
  return FeatureMatrix::from_rows({{1, 7}, {2, 3}, {3, 8}, {4, 1}, {5, 6}, {6, 2}, {7, 9}, {8, 4}},
                                  {0, 0, 1, 0, 1, 2, 1, 2});
}

FeatureMatrix random_matrix(std::size_t n, std::size_t cols, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::vector<std::vector<double>> rows;
  std::vector<int> labels;
  for (std::size_t i = 0; i < n; ++i) {
    std::vector<double> row(cols);
    for (auto& v : row) v = static_cast<double>(rng() % 20);
    labels.push_back(static_cast<int>((row[0] + row[1 % cols] > 19 ? 1 : 0) + (rng() % 10 == 0 ? 1 : 0)));
    rows.push_back(std::move(row));
  }
  return FeatureMatrix::from_rows(rows, labels);
}

double accuracy_of(std::span<const int> truth, std::span<const int> pred) {
  return evaluate(truth, pred).report.accuracy;
}

}  // namespace

TEST_CASE("gini values") {
  CHECK(gini(std::vector<int>{0, 1}) == doctest::Approx(0.5));
  CHECK(gini(std::vector<int>{2, 2, 2}) == 0.0);
  CHECK(gini(std::vector<int>{0, 1, 2}) == doctest::Approx(2.0 / 3.0));
  CHECK_THROWS_AS(gini(std::vector<int>{}), DomainError);
}

TEST_CASE("tree separates a one-dimensional problem with one split") {
  const auto m = FeatureMatrix::from_rows({{1}, {2}, {3}, {10}, {11}, {12}}, {0, 0, 0, 1, 1, 1});
  const auto tree = DecisionTree::fit(m, {});
  REQUIRE(tree.nodes().size() == 3);
  CHECK(tree.nodes()[0].feature == 0);
  CHECK(tree.nodes()[0].threshold == 6.5);
  CHECK(tree.predict(m) == m.labels);
  CHECK(tree.predict_one(std::vector<double>{6.5}) == 0);
  CHECK(tree.predict_one(std::vector<double>{6.6}) == 1);
}

TEST_CASE("pure or depth-zero input gives a single leaf") {
  const auto pure = FeatureMatrix::from_rows({{1}, {2}, {3}}, {2, 2, 2});
  const auto tree = DecisionTree::fit(pure, {});
  CHECK(tree.leaf_count() == 1);
  CHECK(tree.predict_one(std::vector<double>{100}) == 2);

  const auto mixed = FeatureMatrix::from_rows({{1}, {2}, {3}, {4}}, {1, 0, 1, 0});
  const auto stump = DecisionTree::fit(mixed, TreeParams{0, 2});
  CHECK(stump.leaf_count() == 1);
  CHECK(stump.predict_one(std::vector<double>{1}) == 0);  // tie goes to the smaller label
}

TEST_CASE("every split matches the exhaustive oracle") {
  const auto m = eight_rows();
  const auto tree = DecisionTree::fit(m, {});
  std::vector<std::size_t> all(m.rows);
  std::iota(all.begin(), all.end(), std::size_t{0});
  check_node(tree, 0, m, all);
  CHECK(tree.predict(m) == m.labels);

  for (std::uint64_t seed = 1; seed <= 5; ++seed) {
    const auto r = random_matrix(60, 3, seed);
    const auto t = DecisionTree::fit(r, {});
    std::vector<std::size_t> rows(r.rows);
    std::iota(rows.begin(), rows.end(), std::size_t{0});
    check_node(t, 0, r, rows);
  }
}

TEST_CASE("training accuracy never drops with depth") {
  const auto m = random_matrix(300, 4, 17);
  double prev = 0.0;
  for (int depth = 0; depth <= 12; ++depth) {
    const auto tree = DecisionTree::fit(m, TreeParams{depth, 2});
    CHECK(tree.depth() <= depth);
    const double acc = accuracy_of(m.labels, tree.predict(m));
    CHECK(acc >= prev);
    prev = acc;
  }
}

TEST_CASE("one-tree forest without resampling equals a single tree") {
  const auto m = random_matrix(200, 4, 23);
  ForestParams fp;
  fp.n_trees = 1;
  fp.bootstrap = false;
  fp.feature_subsample = 1.0;
  const auto forest = RandomForest::fit(m, fp);
  const auto tree = DecisionTree::fit(m, fp.tree);
  const auto test = random_matrix(100, 4, 24);
  CHECK(forest.predict(test) == tree.predict(test));
}

TEST_CASE("forest results depend on the seed, not the thread count") {
  const auto m = random_matrix(300, 5, 31);
  const auto test = random_matrix(150, 5, 32);
  ForestParams fp;
  fp.n_trees = 20;
  fp.seed = 7;
  fp.threads = 1;
  const auto serial = RandomForest::fit(m, fp).predict(test);
  fp.threads = 4;
  CHECK(RandomForest::fit(m, fp).predict(test) == serial);
  CHECK(RandomForest::fit(m, fp).predict(test) == serial);
  fp.n_trees = 0;
  CHECK_THROWS_AS(RandomForest::fit(m, fp), DomainError);
}

TEST_CASE("knn votes among the nearest rows") {
  const auto m = FeatureMatrix::from_rows({{0}, {1}, {2}, {10}, {11}, {12}}, {0, 0, 0, 1, 1, 1});
  const auto knn = KnnModel::fit(m, {3});
  CHECK(knn.predict_one(std::vector<double>{0.5}) == 0);
  CHECK(knn.predict_one(std::vector<double>{11.2}) == 1);
  CHECK(knn.predict(m) == m.labels);
  CHECK_THROWS_AS(KnnModel::fit(m, {7}), DomainError);
  CHECK_THROWS_AS(KnnModel::fit(m, {0}), DomainError);
}

TEST_CASE("knn vote ties go to the closer class") {
  const auto m = FeatureMatrix::from_rows({{0}, {2}}, {1, 0});
  const auto knn = KnnModel::fit(m, {2});
  CHECK(knn.predict_one(std::vector<double>{0.4}) == 1);
  CHECK(knn.predict_one(std::vector<double>{1.6}) == 0);
  CHECK(knn.predict_one(std::vector<double>{1.0}) == 0);  // equal distance: smaller label
}

TEST_CASE("knn one-hot encodes categorical columns") {
  FeatureMatrix m = FeatureMatrix::from_rows({{1, 0}, {2, 0}, {3, 0}, {1, 5}, {2, 5}, {3, 5}},
                                             {0, 0, 0, 1, 1, 1});
  m.categorical = {true, false};
  const auto knn = KnnModel::fit(m, {3});
  CHECK(knn.predict_one(std::vector<double>{2, 4.5}) == 1);
  CHECK(knn.predict_one(std::vector<double>{2, 0.5}) == 0);
}

TEST_CASE("model kind names") {
  CHECK(parse_model_kind("RF") == ModelKind::RandomForest);
  CHECK(parse_model_kind("knn") == ModelKind::Knn);
  CHECK(parse_model_kind("Dt") == ModelKind::DecisionTree);
  CHECK_FALSE(parse_model_kind("xgb"));
  CHECK(to_string(ModelKind::Knn) == "KNN");
}

TEST_CASE("pipeline scores every requested model on the same split") {
  const auto records = synth_generate(2000, 4);
  const std::vector<ModelKind> kinds{ModelKind::DecisionTree, ModelKind::Knn};
  PipelineOptions opts;
  const auto run = run_pipeline(records, kinds, opts);
  CHECK(run.n_train == 1500);
  CHECK(run.n_test == 500);
  REQUIRE(run.reports.size() == 2);
  CHECK(run.reports[0].model == "DT");
  CHECK(run.reports[0].evaluation.counts.total == 500);
  CHECK(run.reports[0].evaluation.report.accuracy > 0.85);
  const auto again = run_pipeline(records, kinds, opts);
  CHECK(format_report_csv(again.reports) == format_report_csv(run.reports));

  auto unlabeled = records;
  unlabeled[3].crop_damage.reset();
  CHECK_THROWS_AS(run_pipeline(unlabeled, kinds, opts), SchemaError);
}
