#include "agrifield/damageml/pipeline.hpp"

#include <cctype>
#include <string>

#include "agrifield/errors.hpp"

namespace agrifield::damageml {

std::string_view to_string(ModelKind kind) {
  switch (kind) {
    case ModelKind::DecisionTree: return "DT";
    case ModelKind::RandomForest: return "RF";
    case ModelKind::Knn: return "KNN";
  }
  return "?";
}

std::optional<ModelKind> parse_model_kind(std::string_view name) {
  std::string s(name);
  for (char& c : s) c = static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
  if (s == "dt") return ModelKind::DecisionTree;
  if (s == "rf") return ModelKind::RandomForest;
  if (s == "knn") return ModelKind::Knn;
  return std::nullopt;
}

FeatureMatrix prepare_features(std::span<const DamageRecord> records, const FeatureSpec& spec) {
  const auto filled = fill_missing({records.begin(), records.end()}, spec);
  return add_lag_features(filled, spec);
}

PipelineRun run_pipeline(std::span<const DamageRecord> records, std::span<const ModelKind> models,
                         const PipelineOptions& options) {
  for (const auto& r : records)
    if (!r.crop_damage) throw SchemaError("record " + r.id + " has no Crop_Damage label");
  const FeatureMatrix features = prepare_features(records, options.features);
  const auto [train, test] = split(features, options.train_fraction, options.seed);
  if (test.rows == 0) throw DomainError("split left no held-out rows");

  PipelineRun run;
  run.n_train = train.rows;
  run.n_test = test.rows;
  for (ModelKind kind : models) {
    std::vector<int> predicted;
    switch (kind) {
      case ModelKind::DecisionTree:
        predicted = DecisionTree::fit(train, options.dt).predict(test);
        break;
      case ModelKind::RandomForest: {
        ForestParams rf = options.rf;
        rf.seed = options.seed;
        predicted = RandomForest::fit(train, rf).predict(test);
        break;
      }
      case ModelKind::Knn:
        predicted = KnnModel::fit(train, options.knn).predict(test);
        break;
    }
    run.reports.push_back({std::string(to_string(kind)), evaluate(test.labels, predicted)});
  }
  return run;
}

}  // namespace agrifield::damageml
