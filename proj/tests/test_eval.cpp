#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <numeric>
#include <sstream>

#include "kglink/errors.hpp"
#include "kglink/eval.hpp"
#include "kglink/rng.hpp"
#include "oracles.hpp"

using namespace kglink;

namespace {

QueryResult result(const std::string& relation, bool positive, int true_class,
                   std::vector<int> ranking, double avg_len = 1.0,
                   uint64_t paths = 1) {
  QueryResult q;
  q.source = "s";
  q.target = "t";
  q.relation = relation;
  q.positive = positive;
  q.true_class = true_class;
  q.ranking = std::move(ranking);
  q.avg_path_length = avg_len;
  q.path_count = paths;
  return q;
}

std::vector<int> ranking_with_true_at(size_t rank, size_t classes, Rng& rng) {
  std::vector<int> order(classes);
  std::iota(order.begin(), order.end(), 0);
  rng.shuffle(order);
  // move the true class (say class 0) to the requested 1-based rank
  auto it = std::find(order.begin(), order.end(), 0);
  std::iter_swap(it, order.begin() + (rank - 1));
  return order;
}

}  // namespace

TEST_CASE("single-relevant AP@5 is the reciprocal rank, truncated") {
  Rng rng(3);
  auto r1 = ranking_with_true_at(1, 8, rng);
  auto r2 = ranking_with_true_at(2, 8, rng);
  auto r6 = ranking_with_true_at(6, 8, rng);
  CHECK(average_precision_at_k(r1, 0, 5) == 1.0);
  CHECK(average_precision_at_k(r2, 0, 5) == 0.5);
  CHECK(average_precision_at_k(r6, 0, 5) == 0.0);
  CHECK_THROWS_AS(average_precision_at_k(r1, 0, 0), InputError);
}

TEST_CASE("AP@5 takes only the attainable values") {
  Rng rng(5);
  const std::vector<double> attainable{0.0, 0.2, 0.25, 1.0 / 3.0, 0.5, 1.0};
  for (int trial = 0; trial < 200; ++trial) {
    auto ranking = ranking_with_true_at(1 + rng.below(9), 9, rng);
    double ap = average_precision_at_k(ranking, 0, 5);
    CHECK(std::find(attainable.begin(), attainable.end(), ap) != attainable.end());
  }
}

TEST_CASE("a perfect predictor scores MAP 1.0") {
  std::vector<QueryResult> results;
  Rng rng(7);
  for (int i = 0; i < 50; ++i) {
    int cls = static_cast<int>(rng.below(6));
    std::vector<int> ranking{cls};
    for (int c = 0; c < 6; ++c) {
      if (c != cls) ranking.push_back(c);
    }
    results.push_back(result("r", true, cls, ranking));
  }
  CHECK(map_at_k(results, 5) == 1.0);
}

TEST_CASE("MAP@5 equals the direct-definition oracle on 1000 random rankings") {
  Rng rng(11);
  std::vector<QueryResult> results;
  double oracle_sum = 0.0;
  for (int i = 0; i < 1000; ++i) {
    const size_t classes = 6 + rng.below(10);
    auto ranking = ranking_with_true_at(1 + rng.below(classes), classes, rng);
    oracle_sum += oracle::ap_at_k_direct(ranking, 0, 5);
    results.push_back(result("r", true, 0, ranking));
  }
  CHECK(map_at_k(results, 5) == oracle_sum / 1000.0);  // exact equality
}

TEST_CASE("multi-relevant AP generalizes the single case") {
  std::vector<int> ranking{3, 0, 1, 2};
  std::vector<int> one{3};
  CHECK(average_precision_at_k_multi(ranking, one, 5) ==
        average_precision_at_k(ranking, 3, 5));
  std::vector<int> two{0, 3};
  // hits at ranks 1 and 2: (1/1 + 2/2) / 2
  CHECK(average_precision_at_k_multi(ranking, two, 5) == 1.0);
  std::vector<int> split{3, 2};
  // hits at ranks 1 and 4: (1 + 2/4) / 2
  CHECK(average_precision_at_k_multi(ranking, split, 5) == doctest::Approx(0.75));
}

TEST_CASE("all-correct predictions give unit rates") {
  EvalReport report;
  report.null_class = 3;
  report.class_names = {"a", "b", "c", "null"};
  Rng rng(13);
  for (int i = 0; i < 20; ++i) {
    bool positive = i % 2 == 0;
    int cls = positive ? static_cast<int>(rng.below(3)) : 3;
    std::vector<int> ranking{cls};
    for (int c = 0; c < 4; ++c) {
      if (c != cls) ranking.push_back(c);
    }
    report.queries.push_back(result(positive ? "a" : "b", positive, cls, ranking));
  }
  compute_aggregates(report);
  CHECK(report.map_at_5 == 1.0);
  CHECK(*report.tpr == 1.0);
  CHECK(*report.tnr == 1.0);
  CHECK(*report.avg_accuracy == 1.0);
}

TEST_CASE("a 9:1 imbalanced pool pulls average accuracy toward TNR") {
  // relation "rel": 2 positives (1 recovered), 18 negatives (12 recovered)
  EvalReport report;
  report.null_class = 2;
  report.class_names = {"rel", "other", "null"};
  report.queries.push_back(result("rel", true, 0, {0, 1, 2}));   // hit
  report.queries.push_back(result("rel", true, 0, {1, 0, 2}));   // miss
  for (int i = 0; i < 12; ++i) {
    report.queries.push_back(result("rel", false, 2, {2, 0, 1}));  // null: hit
  }
  for (int i = 0; i < 6; ++i) {
    report.queries.push_back(result("rel", false, 2, {0, 2, 1}));  // miss
  }
  compute_aggregates(report);

  REQUIRE(report.per_relation.size() == 1);
  const RelationStats& stats = report.per_relation[0];
  CHECK(*stats.tpr == doctest::Approx(0.5));
  CHECK(*stats.tnr == doctest::Approx(12.0 / 18.0));
  CHECK(*stats.avg_accuracy == doctest::Approx(13.0 / 20.0));
  // hand check: |0.65 - 0.667| < |0.65 - 0.5|
  CHECK(std::abs(*stats.avg_accuracy - *stats.tnr) <
        std::abs(*stats.avg_accuracy - *stats.tpr));
}

TEST_CASE("relations with no positives mark TPR undefined, not zero") {
  EvalReport report;
  report.null_class = 1;
  report.class_names = {"rel", "null"};
  report.queries.push_back(result("rel", false, 1, {1, 0}));
  compute_aggregates(report);
  REQUIRE(report.per_relation.size() == 1);
  CHECK_FALSE(report.per_relation[0].tpr.has_value());
  CHECK(report.per_relation[0].tnr.has_value());
  CHECK_FALSE(report.tpr.has_value());
}

TEST_CASE("aggregates are invariant under query reordering") {
  Rng rng(17);
  EvalReport report;
  report.null_class = 4;
  report.class_names = {"a", "b", "c", "d", "null"};
  for (int i = 0; i < 40; ++i) {
    bool positive = rng.chance(0.5);
    int cls = positive ? static_cast<int>(rng.below(4)) : 4;
    auto ranking = ranking_with_true_at(1 + rng.below(5), 5, rng);
    report.queries.push_back(result(rng.chance(0.5) ? "a" : "b", positive, cls,
                                    ranking, rng.uniform(1, 4), 1 + rng.below(9)));
  }
  EvalReport shuffled = report;
  rng.shuffle(shuffled.queries);
  compute_aggregates(report);
  compute_aggregates(shuffled);
  CHECK(report.map_at_5 == doctest::Approx(shuffled.map_at_5).epsilon(1e-15));
  CHECK(*report.tpr == *shuffled.tpr);
  CHECK(*report.tnr == *shuffled.tnr);
  CHECK(*report.avg_accuracy == *shuffled.avg_accuracy);
}

TEST_CASE("identical statistics land in one stratification bucket") {
  EvalReport report;
  report.null_class = 1;
  report.class_names = {"a", "null"};
  for (int i = 0; i < 15; ++i) {
    report.queries.push_back(result("a", true, 0, {0, 1}, 1.0, 1));
  }
  auto curve = stratify(report, StratifyBy::AvgPathLength, 20);
  REQUIRE(curve.size() == 1);
  CHECK(curve[0].count == 15);
  CHECK(curve[0].lo == 1.0);
  CHECK(curve[0].hi == 1.0);
}

TEST_CASE("twenty requested intervals over distinct counts give twenty bins") {
  EvalReport report;
  report.null_class = 1;
  report.class_names = {"a", "null"};
  for (uint64_t i = 1; i <= 40; ++i) {
    report.queries.push_back(result("a", true, 0, {0, 1}, 1.0, i));
  }
  auto curve = stratify(report, StratifyBy::ParallelPaths, 20);
  CHECK(curve.size() == 20);
  size_t total = 0;
  for (const auto& bin : curve) total += bin.count;
  CHECK(total == report.queries.size());
}

TEST_CASE("bin-weighted MAP equals global MAP") {
  Rng rng(19);
  EvalReport report;
  report.null_class = 5;
  report.class_names = {"a", "b", "c", "d", "e", "null"};
  for (int i = 0; i < 137; ++i) {
    auto ranking = ranking_with_true_at(1 + rng.below(6), 6, rng);
    report.queries.push_back(
        result("a", true, 0, ranking, rng.uniform(1.0, 6.0), 1 + rng.below(50)));
  }
  compute_aggregates(report);
  for (auto by : {StratifyBy::AvgPathLength, StratifyBy::ParallelPaths}) {
    auto curve = stratify(report, by, 20);
    double weighted = 0.0;
    size_t total = 0;
    for (const auto& bin : curve) {
      weighted += bin.map_at_5 * static_cast<double>(bin.count);
      total += bin.count;
    }
    CHECK(total == report.queries.size());
    CHECK(std::abs(weighted / static_cast<double>(total) - report.map_at_5) < 1e-9);
  }
}

TEST_CASE("json report round-trips losslessly") {
  Rng rng(23);
  EvalReport report;
  report.null_class = 2;
  report.class_names = {"a", "b", "null"};
  for (int i = 0; i < 10; ++i) {
    bool positive = rng.chance(0.6);
    report.queries.push_back(result(positive ? "a" : "b", positive,
                                    positive ? 1 : 2,
                                    ranking_with_true_at(1 + rng.below(3), 3, rng),
                                    rng.uniform(1.0, 3.0), 1 + rng.below(5)));
  }
  compute_aggregates(report);

  std::stringstream buffer;
  write_report_json(report, buffer);
  EvalReport loaded = read_report_json(buffer);

  CHECK(loaded.null_class == report.null_class);
  CHECK(loaded.class_names == report.class_names);
  CHECK(loaded.map_at_5 == report.map_at_5);
  CHECK(loaded.tpr == report.tpr);
  CHECK(loaded.tnr == report.tnr);
  CHECK(loaded.avg_accuracy == report.avg_accuracy);
  REQUIRE(loaded.queries.size() == report.queries.size());
  for (size_t i = 0; i < loaded.queries.size(); ++i) {
    CHECK(loaded.queries[i].ranking == report.queries[i].ranking);
    CHECK(loaded.queries[i].true_class == report.queries[i].true_class);
    CHECK(loaded.queries[i].avg_path_length == report.queries[i].avg_path_length);
    CHECK(loaded.queries[i].path_count == report.queries[i].path_count);
  }
}

TEST_CASE("csv emits the documented header first") {
  EvalReport report;
  report.null_class = 1;
  report.class_names = {"a", "null"};
  report.queries.push_back(result("a", true, 0, {0, 1}));
  compute_aggregates(report);

  std::stringstream csv;
  write_report_csv(report, csv);
  std::string first_line;
  std::getline(csv, first_line);
  CHECK(first_line ==
        "source,target,relation,polarity,true_class,predicted,true_rank,"
        "ap_at_5,avg_path_length,path_count,ranking");

  std::stringstream curve_csv;
  std::vector<StratBin> curve{{1.0, 2.0, 3, 0.5}};
  write_curve_csv(curve, curve_csv);
  std::getline(curve_csv, first_line);
  CHECK(first_line == "bin_lo,bin_hi,n,map_at_5");
}

TEST_CASE("aggregates recomputed from emitted rows match the embedded block") {
  Rng rng(29);
  EvalReport report;
  report.null_class = 3;
  report.class_names = {"a", "b", "c", "null"};
  for (int i = 0; i < 25; ++i) {
    bool positive = rng.chance(0.5);
    int cls = positive ? static_cast<int>(rng.below(3)) : 3;
    report.queries.push_back(result(positive ? "a" : "c", positive, cls,
                                    ranking_with_true_at(1 + rng.below(4), 4, rng)));
  }
  compute_aggregates(report);
  std::stringstream buffer;
  write_report_json(report, buffer);
  EvalReport loaded = read_report_json(buffer);

  EvalReport recomputed;
  recomputed.null_class = loaded.null_class;
  recomputed.class_names = loaded.class_names;
  recomputed.queries = loaded.queries;
  compute_aggregates(recomputed);
  CHECK(recomputed.map_at_5 == loaded.map_at_5);
  CHECK(recomputed.tpr == loaded.tpr);
  CHECK(recomputed.tnr == loaded.tnr);
  CHECK(recomputed.avg_accuracy == loaded.avg_accuracy);
  REQUIRE(recomputed.per_relation.size() == loaded.per_relation.size());
  for (size_t i = 0; i < recomputed.per_relation.size(); ++i) {
    CHECK(recomputed.per_relation[i].relation == loaded.per_relation[i].relation);
    CHECK(recomputed.per_relation[i].tpr == loaded.per_relation[i].tpr);
    CHECK(recomputed.per_relation[i].tnr == loaded.per_relation[i].tnr);
    CHECK(recomputed.per_relation[i].avg_accuracy ==
          loaded.per_relation[i].avg_accuracy);
  }
}
