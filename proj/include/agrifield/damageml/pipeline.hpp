#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <string_view>
#include <vector>

#include "agrifield/damageml/dataset.hpp"
#include "agrifield/damageml/metrics.hpp"
#include "agrifield/damageml/models.hpp"

namespace agrifield::damageml {

enum class ModelKind { DecisionTree, RandomForest, Knn };

std::string_view to_string(ModelKind kind);  // "DT", "RF", "KNN"
std::optional<ModelKind> parse_model_kind(std::string_view name);  // dt|rf|knn, any case

struct PipelineOptions {
  FeatureSpec features;
  double train_fraction = 0.75;
  std::uint64_t seed = 1;
  TreeParams dt{8, 20};
  ForestParams rf{};
  KnnParams knn{};
};

/// fill_missing followed by add_lag_features.
FeatureMatrix prepare_features(std::span<const DamageRecord> records, const FeatureSpec& spec);

struct PipelineRun {
  std::size_t n_train = 0;
  std::size_t n_test = 0;
  std::vector<ModelReport> reports;  // one per requested model, in request order
};

/// Prepares features, splits once with `options.seed`, then trains and scores
/// every requested model on the same held-out rows. Forest seeds also come
/// from `options.seed`.
PipelineRun run_pipeline(std::span<const DamageRecord> records, std::span<const ModelKind> models,
                         const PipelineOptions& options);

}  // namespace agrifield::damageml
