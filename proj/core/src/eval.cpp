#include "kglink/eval.hpp"

#include <algorithm>
#include <cmath>
#include <istream>
#include <map>
#include <ostream>

#include <json.hpp>

#include "kglink/errors.hpp"

namespace kglink {

size_t QueryResult::true_rank() const {
  for (size_t i = 0; i < ranking.size(); ++i) {
    if (ranking[i] == true_class) return i + 1;
  }
  throw Error("query result: true class missing from ranking");
}

double average_precision_at_k(std::span<const int> ranking, int true_class,
                              size_t k) {
  if (k < 1) throw InputError("average precision: k must be >= 1");
  for (size_t i = 0; i < std::min(k, ranking.size()); ++i) {
    if (ranking[i] == true_class) {
      return 1.0 / static_cast<double>(i + 1);
    }
  }
  return 0.0;
}

double average_precision_at_k_multi(std::span<const int> ranking,
                                    std::span<const int> relevant, size_t k) {
  if (k < 1) throw InputError("average precision: k must be >= 1");
  if (relevant.empty()) throw InputError("average precision: no relevant classes");
  size_t hits = 0;
  double sum = 0.0;
  for (size_t i = 0; i < std::min(k, ranking.size()); ++i) {
    bool hit = std::find(relevant.begin(), relevant.end(), ranking[i]) !=
               relevant.end();
    if (hit) {
      ++hits;
      sum += static_cast<double>(hits) / static_cast<double>(i + 1);
    }
  }
  return sum / static_cast<double>(std::min(k, relevant.size()));
}

double map_at_k(std::span<const QueryResult> results, size_t k) {
  if (results.empty()) return 0.0;
  double sum = 0.0;
  for (const QueryResult& r : results) {
    sum += average_precision_at_k(r.ranking, r.true_class, k);
  }
  return sum / static_cast<double>(results.size());
}

void compute_aggregates(EvalReport& report) {
  report.map_at_5 = map_at_k(report.queries, 5);

  struct Tally {
    size_t pos = 0, pos_hit = 0;
    size_t neg = 0, neg_hit = 0;
    double ap_sum = 0.0;
  };
  Tally overall;
  std::map<std::string, Tally> by_relation;

  for (const QueryResult& q : report.queries) {
    Tally& rel = by_relation[q.relation];
    const double ap = average_precision_at_k(q.ranking, q.true_class, 5);
    rel.ap_sum += ap;
    if (q.positive) {
      ++overall.pos;
      ++rel.pos;
      if (q.predicted() == q.true_class) {
        ++overall.pos_hit;
        ++rel.pos_hit;
      }
    } else {
      ++overall.neg;
      ++rel.neg;
      if (q.predicted() == report.null_class) {
        ++overall.neg_hit;
        ++rel.neg_hit;
      }
    }
  }

  auto rate = [](size_t hit, size_t total) -> std::optional<double> {
    if (total == 0) return std::nullopt;
    return static_cast<double>(hit) / static_cast<double>(total);
  };
  report.tpr = rate(overall.pos_hit, overall.pos);
  report.tnr = rate(overall.neg_hit, overall.neg);
  report.avg_accuracy =
      rate(overall.pos_hit + overall.neg_hit, overall.pos + overall.neg);

  report.per_relation.clear();
  for (const auto& [name, tally] : by_relation) {
    RelationStats stats;
    stats.relation = name;
    stats.positives = tally.pos;
    stats.negatives = tally.neg;
    stats.map_at_5 = (tally.pos + tally.neg) > 0
                         ? std::optional<double>(tally.ap_sum /
                                                 static_cast<double>(tally.pos + tally.neg))
                         : std::nullopt;
    stats.tpr = rate(tally.pos_hit, tally.pos);
    stats.tnr = rate(tally.neg_hit, tally.neg);
    stats.avg_accuracy = rate(tally.pos_hit + tally.neg_hit, tally.pos + tally.neg);
    report.per_relation.push_back(std::move(stats));
  }
}

std::vector<StratBin> stratify(const EvalReport& report, StratifyBy by,
                               size_t bins) {
  if (bins < 1) throw InputError("stratify: bins must be >= 1");
  if (report.queries.empty()) return {};

  auto stat = [&](const QueryResult& q) {
    return by == StratifyBy::AvgPathLength
               ? q.avg_path_length
               : static_cast<double>(q.path_count);
  };

  std::vector<size_t> order(report.queries.size());
  for (size_t i = 0; i < order.size(); ++i) order[i] = i;
  std::stable_sort(order.begin(), order.end(), [&](size_t a, size_t b) {
    return stat(report.queries[a]) < stat(report.queries[b]);
  });

  // Quantile cut points; each bin is extended to swallow boundary ties so a
  // value never spans two bins.
  const size_t n = order.size();
  std::vector<StratBin> out;
  size_t start = 0;
  for (size_t b = 0; b < bins && start < n; ++b) {
    size_t end = std::max((b + 1) * n / bins, start + 1);
    while (end < n &&
           stat(report.queries[order[end]]) == stat(report.queries[order[end - 1]])) {
      ++end;
    }
    StratBin bin;
    bin.lo = stat(report.queries[order[start]]);
    bin.hi = stat(report.queries[order[end - 1]]);
    bin.count = end - start;
    double ap_sum = 0.0;
    for (size_t i = start; i < end; ++i) {
      const QueryResult& q = report.queries[order[i]];
      ap_sum += average_precision_at_k(q.ranking, q.true_class, 5);
    }
    bin.map_at_5 = ap_sum / static_cast<double>(bin.count);
    out.push_back(bin);
    start = end;
  }
  // Leftover rows (possible when ties swallowed later cut points) join the
  // last bin.
  if (start < n) {
    StratBin& last = out.back();
    double ap_sum = last.map_at_5 * static_cast<double>(last.count);
    for (size_t i = start; i < n; ++i) {
      const QueryResult& q = report.queries[order[i]];
      ap_sum += average_precision_at_k(q.ranking, q.true_class, 5);
      last.hi = std::max(last.hi, stat(q));
      ++last.count;
    }
    last.map_at_5 = ap_sum / static_cast<double>(last.count);
  }
  return out;
}

namespace {

using nlohmann::json;

json optional_to_json(const std::optional<double>& v) {
  if (v) return *v;
  return nullptr;
}

std::optional<double> optional_from_json(const json& j) {
  if (j.is_null()) return std::nullopt;
  return j.get<double>();
}

}  // namespace

void write_report_json(const EvalReport& report, std::ostream& out) {
  json j;
  j["null_class"] = report.null_class;
  j["class_names"] = report.class_names;
  j["aggregates"] = {
      {"map_at_5", report.map_at_5},
      {"tpr", optional_to_json(report.tpr)},
      {"tnr", optional_to_json(report.tnr)},
      {"avg_accuracy", optional_to_json(report.avg_accuracy)},
  };
  j["per_relation"] = json::array();
  for (const RelationStats& r : report.per_relation) {
    j["per_relation"].push_back({
        {"relation", r.relation},
        {"positives", r.positives},
        {"negatives", r.negatives},
        {"map_at_5", optional_to_json(r.map_at_5)},
        {"tpr", optional_to_json(r.tpr)},
        {"tnr", optional_to_json(r.tnr)},
        {"avg_accuracy", optional_to_json(r.avg_accuracy)},
    });
  }
  j["queries"] = json::array();
  for (const QueryResult& q : report.queries) {
    j["queries"].push_back({
        {"source", q.source},
        {"target", q.target},
        {"relation", q.relation},
        {"positive", q.positive},
        {"true_class", q.true_class},
        {"ranking", q.ranking},
        {"avg_path_length", q.avg_path_length},
        {"path_count", q.path_count},
    });
  }
  out << j.dump(2) << '\n';
}

EvalReport read_report_json(std::istream& in) {
  json j;
  try {
    in >> j;
  } catch (const json::exception& e) {
    throw IoError(std::string("report: invalid json: ") + e.what());
  }
  EvalReport report;
  report.null_class = j.at("null_class").get<int>();
  report.class_names = j.at("class_names").get<std::vector<std::string>>();
  const json& agg = j.at("aggregates");
  report.map_at_5 = agg.at("map_at_5").get<double>();
  report.tpr = optional_from_json(agg.at("tpr"));
  report.tnr = optional_from_json(agg.at("tnr"));
  report.avg_accuracy = optional_from_json(agg.at("avg_accuracy"));
  for (const json& r : j.at("per_relation")) {
    RelationStats stats;
    stats.relation = r.at("relation").get<std::string>();
    stats.positives = r.at("positives").get<size_t>();
    stats.negatives = r.at("negatives").get<size_t>();
    stats.map_at_5 = optional_from_json(r.at("map_at_5"));
    stats.tpr = optional_from_json(r.at("tpr"));
    stats.tnr = optional_from_json(r.at("tnr"));
    stats.avg_accuracy = optional_from_json(r.at("avg_accuracy"));
    report.per_relation.push_back(std::move(stats));
  }
  for (const json& q : j.at("queries")) {
    QueryResult result;
    result.source = q.at("source").get<std::string>();
    result.target = q.at("target").get<std::string>();
    result.relation = q.at("relation").get<std::string>();
    result.positive = q.at("positive").get<bool>();
    result.true_class = q.at("true_class").get<int>();
    result.ranking = q.at("ranking").get<std::vector<int>>();
    result.avg_path_length = q.at("avg_path_length").get<double>();
    result.path_count = q.at("path_count").get<uint64_t>();
    report.queries.push_back(std::move(result));
  }
  return report;
}

void write_report_csv(const EvalReport& report, std::ostream& out) {
  out << "source,target,relation,polarity,true_class,predicted,true_rank,"
         "ap_at_5,avg_path_length,path_count,ranking\n";
  for (const QueryResult& q : report.queries) {
    out << q.source << ',' << q.target << ',' << q.relation << ','
        << (q.positive ? '+' : '-') << ',' << q.true_class << ','
        << q.predicted() << ',' << q.true_rank() << ','
        << average_precision_at_k(q.ranking, q.true_class, 5) << ','
        << q.avg_path_length << ',' << q.path_count << ',';
    for (size_t i = 0; i < q.ranking.size(); ++i) {
      if (i) out << '|';
      out << q.ranking[i];
    }
    out << '\n';
  }
}

void write_curve_csv(std::span<const StratBin> curve, std::ostream& out) {
  out << "bin_lo,bin_hi,n,map_at_5\n";
  for (const StratBin& b : curve) {
    out << b.lo << ',' << b.hi << ',' << b.count << ',' << b.map_at_5 << '\n';
  }
}

}  // namespace kglink
