#pragma once

#include <cstdint>
#include <filesystem>
#include <functional>
#include <iosfwd>
#include <optional>
#include <span>
#include <string>
#include <unordered_map>
#include <vector>

#include "kglink/adam.hpp"
#include "kglink/config.hpp"
#include "kglink/kb.hpp"
#include "kglink/model.hpp"
#include "kglink/queries.hpp"
#include "kglink/query_graph.hpp"

namespace kglink {

struct RunLogRow {
  size_t step;
  size_t epoch;
  double loss;
  double wallclock_ms;
};

struct EpochSummary {
  size_t epoch;
  size_t steps;
  double mean_loss;
  double total_ms;
};

struct RunLog {
  std::vector<RunLogRow> rows;

  void write_csv(std::ostream& out) const;
  static RunLog read_csv(std::istream& in);
  std::vector<double> losses() const;
  std::vector<EpochSummary> epoch_summaries() const;
};

// Polarity-balanced batch stream: slots alternate positive/negative by
// global position (positives on even slots), each pool cycles through
// seeded shuffles, reshuffled per cycle with derived seeds.
class BatchStream {
 public:
  BatchStream(std::span<const ResolvedQuery> queries, size_t batch, uint64_t seed);

  std::vector<ResolvedQuery> next();
  void skip(size_t batches);

  size_t positives() const { return pos_.size(); }
  size_t negatives() const { return neg_.size(); }

 private:
  const ResolvedQuery& draw(bool positive);

  std::vector<ResolvedQuery> pos_, neg_;
  std::vector<size_t> pos_order_, neg_order_;
  size_t pos_at_ = 0, neg_at_ = 0;
  uint64_t pos_cycle_ = 0, neg_cycle_ = 0;
  size_t batch_;
  uint64_t seed_;
  uint64_t slot_ = 0;
};

// Serialized training state: model tensors plus optimizer moments in one
// container, run metadata in a `<path>.meta` key-value sidecar.
struct Checkpoint {
  ModelParams params;
  ModelConfig model;
  TargetVocab targets;
  TrainConfig train;
  size_t completed_steps = 0;
  bool has_optimizer = false;
  AdamState adam;
};

void save_checkpoint_file(const std::filesystem::path& path, const Checkpoint& ckpt);
Checkpoint load_checkpoint_file(const std::filesystem::path& path);

// Optimization loop: balanced batches, subgraph extraction with caching,
// forward, cross-entropy, backward, Adam. Deterministic under a fixed seed.
class Trainer {
 public:
  Trainer(const KnowledgeBase& kb, const TargetVocab& targets,
          std::span<const ResolvedQuery> queries, ModelConfig model_config,
          TrainConfig train_config);

  // Fresh parameter init from the configured seed.
  void init_params();
  void restore(const Checkpoint& ckpt);

  // Runs from the current step to epochs*steps. Throws NumericError with
  // the offending step on a non-finite loss.
  const RunLog& run();

  Checkpoint checkpoint() const;
  const ModelParams& params() const { return params_; }
  const RunLog& log() const { return log_; }
  size_t completed_steps() const { return step_; }
  size_t usable_queries() const { return queries_.size(); }
  size_t skipped_queries() const { return skipped_; }

  // Cached subgraph extraction keyed by (source, target); the bound comes
  // from the train config.
  const QueryGraph& graph_for(EntityId source, EntityId target);

  void set_checkpoint_dir(std::filesystem::path dir) { checkpoint_dir_ = std::move(dir); }
  void set_log_stream(std::ostream* out) { live_log_ = out; }
  // Validation hook, called after each completed epoch; off by default.
  std::function<void(size_t epoch, const ModelParams&)> on_epoch_end;

 private:
  double step_once(const std::vector<ResolvedQuery>& batch);

  const KnowledgeBase& kb_;
  TargetVocab targets_;
  ModelConfig model_config_;
  TrainConfig train_config_;
  std::vector<ResolvedQuery> queries_;
  size_t skipped_ = 0;
  std::unordered_map<uint64_t, QueryGraph> graph_cache_;
  ModelParams params_;
  AdamState adam_;
  RunLog log_;
  size_t step_ = 0;
  std::optional<std::filesystem::path> checkpoint_dir_;
  std::ostream* live_log_ = nullptr;
  bool live_log_header_written_ = false;
};

}  // namespace kglink
