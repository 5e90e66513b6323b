#include "doctest.h"

#include <random>

#include "agrifield/damageml/metrics.hpp"
#include "agrifield/errors.hpp"

using namespace agrifield;
using namespace agrifield::damageml;

TEST_CASE("perfect predictions score one everywhere") {
  const std::vector<int> y{0, 1, 2, 2, 1, 0};
  const auto ev = evaluate(y, y);
  CHECK(ev.report.accuracy == 1.0);
  for (const auto& c : ev.report.per_class) {
    CHECK(c.precision == 1.0);
    CHECK(c.recall == 1.0);
    CHECK(c.f1 == 1.0);
    CHECK(c.support == 2);
  }
}

TEST_CASE("two-class worked example") {
  const std::vector<int> t{0, 0, 1, 1}, p{0, 1, 1, 1};
  const auto ev = evaluate(t, p);
  CHECK(ev.report.accuracy == 0.75);
  const auto& c1 = ev.report.per_class[1];
  CHECK(c1.precision == doctest::Approx(2.0 / 3.0));
  CHECK(c1.recall == 1.0);
  CHECK(c1.f1 == doctest::Approx(0.8));
  CHECK(ev.counts.per_class[1] == ClassCounts{2, 1, 0, 1});
  const auto& c0 = ev.report.per_class[0];
  CHECK(c0.precision == 1.0);
  CHECK(c0.recall == 0.5);
}

TEST_CASE("zero denominators are reported as zero with a flag") {
  const std::vector<int> t{0, 0, 2}, p{0, 0, 0};
  const auto ev = evaluate(t, p);
  REQUIRE(ev.report.per_class.size() == 3);
  const auto& c1 = ev.report.per_class[1];
  CHECK(c1.precision_undefined);
  CHECK(c1.recall_undefined);
  CHECK(c1.f1_undefined);
  CHECK(c1.f1 == 0.0);
  const auto& c2 = ev.report.per_class[2];
  CHECK(c2.precision_undefined);
  CHECK_FALSE(c2.recall_undefined);
  CHECK(c2.recall == 0.0);
}

TEST_CASE("invalid inputs") {
  CHECK_THROWS_AS(evaluate(std::vector<int>{0, 1}, std::vector<int>{0}), DomainError);
  CHECK_THROWS_AS(evaluate(std::vector<int>{}, std::vector<int>{}), DomainError);
  CHECK_THROWS_AS(evaluate(std::vector<int>{-1}, std::vector<int>{0}), DomainError);
}

TEST_CASE("counts and scores match a brute-force oracle") {
  std::mt19937_64 rng(1234);
  for (int trial = 0; trial < 1000; ++trial) {
    const std::size_t n = 1 + rng() % 60;
    std::vector<int> t(n), p(n);
    for (std::size_t i = 0; i < n; ++i) {
      t[i] = static_cast<int>(rng() % 3);
      p[i] = static_cast<int>(rng() % 3);
    }
    const auto ev = evaluate(t, p);
    int max_label = 0;
    for (std::size_t i = 0; i < n; ++i) max_label = std::max({max_label, t[i], p[i]});
    REQUIRE(ev.counts.per_class.size() == static_cast<std::size_t>(max_label + 1));

    std::size_t correct = 0;
    for (std::size_t i = 0; i < n; ++i) correct += t[i] == p[i];
    REQUIRE(ev.report.accuracy == doctest::Approx(static_cast<double>(correct) / n).epsilon(1e-12));

    for (int c = 0; c <= max_label; ++c) {
      std::size_t tp = 0, fp = 0, fn = 0, tn = 0;
      for (std::size_t i = 0; i < n; ++i) {
        const bool is_t = t[i] == c, is_p = p[i] == c;
        tp += is_t && is_p;
        fp += !is_t && is_p;
        fn += is_t && !is_p;
        tn += !is_t && !is_p;
      }
      REQUIRE(ev.counts.per_class[static_cast<std::size_t>(c)] == ClassCounts{tp, fp, fn, tn});
      const auto& m = ev.report.per_class[static_cast<std::size_t>(c)];
      const double prec = tp + fp ? static_cast<double>(tp) / static_cast<double>(tp + fp) : 0.0;
      const double rec = tp + fn ? static_cast<double>(tp) / static_cast<double>(tp + fn) : 0.0;
      const double f1 = prec + rec > 0 ? 2 * prec * rec / (prec + rec) : 0.0;
      REQUIRE(m.precision == doctest::Approx(prec).epsilon(1e-12));
      REQUIRE(m.recall == doctest::Approx(rec).epsilon(1e-12));
      REQUIRE(m.f1 == doctest::Approx(f1).epsilon(1e-12));
      REQUIRE(m.support == tp + fn);
    }
  }
}

TEST_CASE("report formatting") {
  const std::vector<int> t{0, 0, 1, 1, 2, 2}, p{0, 1, 1, 1, 2, 0};
  const std::vector<ModelReport> reports{{"RF", evaluate(t, p)}};
  const std::string table = format_report_table(reports);
  CHECK(table.find("Model") != std::string::npos);
  CHECK(table.find("RF") != std::string::npos);
  CHECK(table.find("0.67") != std::string::npos);
  const std::string csv = format_report_csv(reports);
  CHECK(csv.rfind("model,class,precision,recall,f1,support,accuracy\n", 0) == 0);
  CHECK(std::count(csv.begin(), csv.end(), '\n') == 4);
}
