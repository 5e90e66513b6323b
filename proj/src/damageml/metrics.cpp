#include "agrifield/damageml/metrics.hpp"

#include <algorithm>
#include <cstdio>

#include "agrifield/errors.hpp"

namespace agrifield::damageml {
namespace {

double ratio(std::size_t num, std::size_t den, bool& undefined) {
  undefined = den == 0;
  return undefined ? 0.0 : static_cast<double>(num) / static_cast<double>(den);
}

}  // namespace

Evaluation evaluate(std::span<const int> y_true, std::span<const int> y_pred) {
  if (y_true.size() != y_pred.size())
    throw DomainError("label vectors differ in length: " + std::to_string(y_true.size()) + " vs " +
                      std::to_string(y_pred.size()));
  if (y_true.empty()) throw DomainError("cannot evaluate empty label vectors");

  int max_label = 0;
  for (std::size_t i = 0; i < y_true.size(); ++i) {
    if (y_true[i] < 0 || y_pred[i] < 0) throw DomainError("labels must be non-negative");
    max_label = std::max({max_label, y_true[i], y_pred[i]});
  }
  const auto n_classes = static_cast<std::size_t>(max_label) + 1;

  Evaluation ev;
  ConfusionCounts& cc = ev.counts;
  cc.total = y_true.size();
  cc.per_class.resize(n_classes);
  for (std::size_t i = 0; i < y_true.size(); ++i) {
    const auto t = static_cast<std::size_t>(y_true[i]);
    const auto p = static_cast<std::size_t>(y_pred[i]);
    if (t == p) {
      ++cc.per_class[t].tp;
      ++cc.exact_matches;
    } else {
      ++cc.per_class[p].fp;
      ++cc.per_class[t].fn;
    }
  }
  for (auto& c : cc.per_class) c.tn = cc.total - c.tp - c.fp - c.fn;

  MetricsReport& rep = ev.report;
  rep.per_class.resize(n_classes);
  for (std::size_t c = 0; c < n_classes; ++c) {
    const ClassCounts& k = cc.per_class[c];
    ClassMetrics& m = rep.per_class[c];
    m.support = k.tp + k.fn;
    m.precision = ratio(k.tp, k.tp + k.fp, m.precision_undefined);
    m.recall = ratio(k.tp, k.tp + k.fn, m.recall_undefined);
    m.f1_undefined = m.precision + m.recall == 0.0;
    m.f1 = m.f1_undefined ? 0.0 : 2.0 * m.precision * m.recall / (m.precision + m.recall);
    rep.macro_precision += m.precision / static_cast<double>(n_classes);
    rep.macro_recall += m.recall / static_cast<double>(n_classes);
    rep.macro_f1 += m.f1 / static_cast<double>(n_classes);
  }
  rep.accuracy = static_cast<double>(cc.exact_matches) / static_cast<double>(cc.total);
  return ev;
}

std::string format_report_table(std::span<const ModelReport> reports) {
  std::string out;
  char buf[160];
  std::snprintf(buf, sizeof buf, "%-8s %5s %6s %6s %6s %6s\n", "Model", "Class", "Prec", "Rec", "F1",
                "Acc.");
  out += buf;
  for (const auto& r : reports) {
    const auto& classes = r.evaluation.report.per_class;
    const std::size_t acc_row = classes.size() / 2;
    for (std::size_t c = 0; c < classes.size(); ++c) {
      const auto& m = classes[c];
      char acc[16] = "";
      if (c == acc_row) std::snprintf(acc, sizeof acc, "%6.2f", r.evaluation.report.accuracy);
      std::snprintf(buf, sizeof buf, "%-8s %5zu %6.2f %6.2f %6.2f %6s\n",
                    c == 0 ? r.model.c_str() : "", c, m.precision, m.recall, m.f1, acc);
      out += buf;
    }
  }
  return out;
}

std::string format_report_csv(std::span<const ModelReport> reports) {
  std::string out = "model,class,precision,recall,f1,support,accuracy\n";
  char buf[256];
  for (const auto& r : reports) {
    const auto& classes = r.evaluation.report.per_class;
    for (std::size_t c = 0; c < classes.size(); ++c) {
      const auto& m = classes[c];
      std::snprintf(buf, sizeof buf, "%s,%zu,%.6f,%.6f,%.6f,%zu,%.6f\n", r.model.c_str(), c,
                    m.precision, m.recall, m.f1, m.support, r.evaluation.report.accuracy);
      out += buf;
    }
  }
  return out;
}

}  // namespace agrifield::damageml
