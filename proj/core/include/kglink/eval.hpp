#pragma once

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "kglink/kb.hpp"
#include "kglink/queries.hpp"

namespace kglink {

// Outcome of one scored query: the full relation ranking plus the graph
// statistics used for stratified analysis.
struct QueryResult {
  std::string source;
  std::string target;
  std::string relation;  // attributed target relation
  bool positive = true;
  int true_class = 0;
  std::vector<int> ranking;  // classes, best first
  double avg_path_length = 0.0;
  uint64_t path_count = 0;

  int predicted() const { return ranking.front(); }
  // 1-based rank of the true class.
  size_t true_rank() const;
};

struct RelationStats {
  std::string relation;
  size_t positives = 0;
  size_t negatives = 0;
  std::optional<double> map_at_5;
  std::optional<double> tpr;  // undefined when the relation has no positives
  std::optional<double> tnr;
  std::optional<double> avg_accuracy;
};

struct EvalReport {
  std::vector<QueryResult> queries;
  int null_class = 0;
  std::vector<std::string> class_names;

  double map_at_5 = 0.0;
  std::optional<double> tpr;
  std::optional<double> tnr;
  std::optional<double> avg_accuracy;
  std::vector<RelationStats> per_relation;
};

// Average precision truncated at k for a single relevant class:
// 1/rank when rank <= k, else 0.
double average_precision_at_k(std::span<const int> ranking, int true_class, size_t k);
// General multi-relevant truncated AP, exposed for reuse.
double average_precision_at_k_multi(std::span<const int> ranking,
                                    std::span<const int> relevant, size_t k);
double map_at_k(std::span<const QueryResult> results, size_t k);

// Fills the aggregate and per-relation blocks from the per-query rows.
// Positives of relation r count as true positives when the argmax equals the
// true class; negatives count as true negatives when the argmax is null.
void compute_aggregates(EvalReport& report);

enum class StratifyBy { AvgPathLength, ParallelPaths };

struct StratBin {
  double lo = 0.0;
  double hi = 0.0;
  size_t count = 0;
  double map_at_5 = 0.0;
};

// Equal-frequency binning over the chosen statistic. Ties never straddle a
// boundary, so heavy duplication can yield fewer bins than requested; every
// query lands in exactly one bin.
std::vector<StratBin> stratify(const EvalReport& report, StratifyBy by, size_t bins);

void write_report_json(const EvalReport& report, std::ostream& out);
EvalReport read_report_json(std::istream& in);
void write_report_csv(const EvalReport& report, std::ostream& out);
void write_curve_csv(std::span<const StratBin> curve, std::ostream& out);

}  // namespace kglink
