#pragma once

#include <cstddef>
#include <span>
#include <string>
#include <vector>

namespace agrifield::damageml {

/// One-vs-rest outcome counts for a single class.
struct ClassCounts {
  std::size_t tp = 0;
  std::size_t fp = 0;
  std::size_t fn = 0;
  std::size_t tn = 0;

  friend bool operator==(const ClassCounts&, const ClassCounts&) = default;
};

struct ConfusionCounts {
  std::vector<ClassCounts> per_class;  // indexed by label
  std::size_t total = 0;
  std::size_t exact_matches = 0;

  friend bool operator==(const ConfusionCounts&, const ConfusionCounts&) = default;
};

struct ClassMetrics {
  double precision = 0.0;
  double recall = 0.0;
  double f1 = 0.0;
  std::size_t support = 0;
  // Set when the metric's denominator was zero and 0 was reported instead.
  bool precision_undefined = false;
  bool recall_undefined = false;
  bool f1_undefined = false;
};

struct MetricsReport {
  std::vector<ClassMetrics> per_class;
  double accuracy = 0.0;
  double macro_precision = 0.0;
  double macro_recall = 0.0;
  double macro_f1 = 0.0;
};

struct Evaluation {
  ConfusionCounts counts;
  MetricsReport report;
};

/// Per-class counts over classes 0..max label seen in either vector.
/// Throws DomainError on empty input, length mismatch or negative labels.
Evaluation evaluate(std::span<const int> y_true, std::span<const int> y_pred);

/// A named model's scores. External predictions (e.g. boosted trees run
/// elsewhere) go through the same `evaluate` and get their own row group.
struct ModelReport {
  std::string model;
  Evaluation evaluation;
};

/// Aligned text table: Model | Class | Prec | Rec | F1 | Acc.
std::string format_report_table(std::span<const ModelReport> reports);

/// CSV with one row per (model, class): model,class,precision,recall,f1,support,accuracy.
std::string format_report_csv(std::span<const ModelReport> reports);

}  // namespace agrifield::damageml
