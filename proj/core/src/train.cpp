#include "kglink/train.hpp"

#include <chrono>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <istream>
#include <ostream>
#include <sstream>

#include "kglink/errors.hpp"
#include "kglink/rng.hpp"
#include "kglink/tape.hpp"

namespace kglink {

namespace {

std::string format_double(double v) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

uint64_t pair_key(EntityId a, EntityId b) {
  return (static_cast<uint64_t>(a) << 32) | b;
}

}  // namespace

void RunLog::write_csv(std::ostream& out) const {
  out << "step,epoch,loss,wallclock_ms\n";
  for (const RunLogRow& r : rows) {
    out << r.step << ',' << r.epoch << ',' << format_double(r.loss) << ','
        << format_double(r.wallclock_ms) << '\n';
  }
}

RunLog RunLog::read_csv(std::istream& in) {
  RunLog log;
  std::string line;
  if (!std::getline(in, line)) throw IoError("run log: empty file");
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    RunLogRow row;
    std::stringstream ss(line);
    std::string field;
    std::getline(ss, field, ',');
    row.step = std::stoull(field);
    std::getline(ss, field, ',');
    row.epoch = std::stoull(field);
    std::getline(ss, field, ',');
    row.loss = std::stod(field);
    std::getline(ss, field, ',');
    row.wallclock_ms = std::stod(field);
    log.rows.push_back(row);
  }
  return log;
}

std::vector<double> RunLog::losses() const {
  std::vector<double> out;
  out.reserve(rows.size());
  for (const RunLogRow& r : rows) out.push_back(r.loss);
  return out;
}

std::vector<EpochSummary> RunLog::epoch_summaries() const {
  std::vector<EpochSummary> out;
  for (const RunLogRow& r : rows) {
    if (out.empty() || out.back().epoch != r.epoch) {
      out.push_back(EpochSummary{r.epoch, 0, 0.0, 0.0});
    }
    EpochSummary& s = out.back();
    ++s.steps;
    s.mean_loss += r.loss;
    s.total_ms += r.wallclock_ms;
  }
  for (EpochSummary& s : out) s.mean_loss /= static_cast<double>(s.steps);
  return out;
}

BatchStream::BatchStream(std::span<const ResolvedQuery> queries, size_t batch,
                         uint64_t seed)
    : batch_(batch), seed_(seed) {
  for (const ResolvedQuery& q : queries) {
    (q.positive ? pos_ : neg_).push_back(q);
  }
  if (pos_.empty() || neg_.empty()) {
    throw InputError("balanced batching needs at least one positive and one "
                     "negative query (got " +
                     std::to_string(pos_.size()) + " / " +
                     std::to_string(neg_.size()) + ")");
  }
}

const ResolvedQuery& BatchStream::draw(bool positive) {
  auto& pool = positive ? pos_ : neg_;
  auto& order = positive ? pos_order_ : neg_order_;
  auto& at = positive ? pos_at_ : neg_at_;
  auto& cycle = positive ? pos_cycle_ : neg_cycle_;
  if (at == order.size()) {
    order.resize(pool.size());
    for (size_t i = 0; i < pool.size(); ++i) order[i] = i;
    Rng rng(Rng::derive(seed_, (positive ? 0x10000000ULL : 0x20000000ULL) + cycle));
    rng.shuffle(order);
    at = 0;
    ++cycle;
  }
  return pool[order[at++]];
}

std::vector<ResolvedQuery> BatchStream::next() {
  std::vector<ResolvedQuery> batch;
  batch.reserve(batch_);
  for (size_t i = 0; i < batch_; ++i) {
    batch.push_back(draw(slot_ % 2 == 0));
    ++slot_;
  }
  return batch;
}

void BatchStream::skip(size_t batches) {
  for (size_t i = 0; i < batches; ++i) next();
}

void save_checkpoint_file(const std::filesystem::path& path, const Checkpoint& ckpt) {
  NamedTensors tensors = ckpt.params.to_container();
  if (ckpt.has_optimizer) {
    size_t slot = 0;
    ckpt.params.for_each([&](const std::string& name, const Tensor&) {
      tensors.add("adam.m." + name, ckpt.adam.first_moment(slot));
      tensors.add("adam.v." + name, ckpt.adam.second_moment(slot));
      ++slot;
    });
  }
  write_container(path, tensors);

  std::map<std::string, std::string> meta;
  meta["format_version"] = "1";
  meta["variant"] = variant_name(ckpt.model.variant);
  meta["update_order"] = update_order_name(ckpt.model.update_order);
  meta["dim"] = std::to_string(ckpt.model.dim);
  meta["t_max"] = std::to_string(ckpt.model.t_max);
  meta["classes"] = std::to_string(ckpt.model.classes);
  meta["layer_norm_eps"] = format_double(ckpt.model.layer_norm_eps);
  meta["l_max"] = std::to_string(ckpt.train.l_max);
  meta["seed"] = std::to_string(ckpt.train.seed);
  meta["lr"] = format_double(ckpt.train.lr);
  meta["batch"] = std::to_string(ckpt.train.batch);
  meta["steps"] = std::to_string(ckpt.train.steps_per_epoch);
  meta["epochs"] = std::to_string(ckpt.train.epochs);
  meta["deterministic"] = ckpt.train.deterministic ? "true" : "false";
  meta["completed_steps"] = std::to_string(ckpt.completed_steps);
  meta["has_optimizer"] = ckpt.has_optimizer ? "true" : "false";
  meta["adam_step"] = std::to_string(ckpt.adam.step_count());
  std::string targets;
  for (const auto& name : ckpt.targets.names()) {
    if (!targets.empty()) targets += ',';
    targets += name;
  }
  meta["targets"] = targets;

  std::ofstream meta_out(path.string() + ".meta");
  if (!meta_out) throw IoError("cannot write checkpoint meta for " + path.string());
  write_key_values(meta_out, meta);
}

Checkpoint load_checkpoint_file(const std::filesystem::path& path) {
  NamedTensors tensors = read_container(path);
  auto meta = read_key_value_file(path.string() + ".meta");
  auto need = [&](const std::string& key) -> const std::string& {
    auto it = meta.find(key);
    if (it == meta.end()) {
      throw MismatchError("checkpoint meta missing key '" + key + "'");
    }
    return it->second;
  };
  if (need("format_version") != "1") {
    throw MismatchError("unsupported checkpoint meta version " +
                        need("format_version"));
  }

  Checkpoint ckpt;
  ckpt.model.variant = parse_variant(need("variant"));
  ckpt.model.update_order = parse_update_order(need("update_order"));
  ckpt.model.dim = std::stoull(need("dim"));
  ckpt.model.t_max = std::stoull(need("t_max"));
  ckpt.model.classes = std::stoull(need("classes"));
  ckpt.model.layer_norm_eps = std::stod(need("layer_norm_eps"));
  ckpt.train.l_max = std::stoi(need("l_max"));
  ckpt.train.seed = std::stoull(need("seed"));
  ckpt.train.lr = std::stod(need("lr"));
  ckpt.train.batch = std::stoull(need("batch"));
  ckpt.train.steps_per_epoch = std::stoull(need("steps"));
  ckpt.train.epochs = std::stoull(need("epochs"));
  ckpt.train.deterministic = need("deterministic") == "true";
  ckpt.completed_steps = std::stoull(need("completed_steps"));

  std::vector<std::string> target_names;
  {
    std::stringstream ss(need("targets"));
    std::string part;
    while (std::getline(ss, part, ',')) target_names.push_back(part);
  }
  ckpt.targets = TargetVocab(std::move(target_names));
  if (ckpt.targets.classes() != ckpt.model.classes) {
    throw MismatchError("checkpoint target vocabulary size " +
                        std::to_string(ckpt.targets.classes()) +
                        " does not match classes " +
                        std::to_string(ckpt.model.classes));
  }

  const size_t num_types = tensors.at("type_emb").rows();
  const size_t num_relations = tensors.at("rel_emb").rows();
  ckpt.params = ModelParams::init(ckpt.model, num_types, num_relations, 0);
  ckpt.params.load_container(tensors);

  ckpt.has_optimizer = need("has_optimizer") == "true";
  if (ckpt.has_optimizer) {
    ckpt.adam = AdamState(ckpt.train.lr);
    ckpt.adam.set_step_count(std::stoull(need("adam_step")));
    size_t slot = 0;
    ckpt.params.for_each([&](const std::string& name, const Tensor& t) {
      ckpt.adam.register_param(t.rows(), t.cols());
      const Tensor& m = tensors.at("adam.m." + name);
      const Tensor& v = tensors.at("adam.v." + name);
      if (!m.same_shape(t) || !v.same_shape(t)) {
        throw MismatchError("optimizer moment shape mismatch for '" + name + "'");
      }
      ckpt.adam.first_moment(slot) = m;
      ckpt.adam.second_moment(slot) = v;
      ++slot;
    });
  }
  return ckpt;
}

Trainer::Trainer(const KnowledgeBase& kb, const TargetVocab& targets,
                 std::span<const ResolvedQuery> queries, ModelConfig model_config,
                 TrainConfig train_config)
    : kb_(kb),
      targets_(targets),
      model_config_(std::move(model_config)),
      train_config_(train_config) {
  model_config_.validate();
  train_config_.validate();
  if (model_config_.classes != targets_.classes()) {
    throw MismatchError("model classes " + std::to_string(model_config_.classes) +
                        " does not match target vocabulary (" +
                        std::to_string(targets_.classes()) + ")");
  }
  // Keep only queries whose pair admits a subgraph within the bound; the
  // extraction cache is warmed as a side effect.
  for (const ResolvedQuery& q : queries) {
    try {
      graph_for(q.source, q.target);
      queries_.push_back(q);
    } catch (const EmptyGraphError&) {
      ++skipped_;
    }
  }
}

void Trainer::init_params() {
  params_ = ModelParams::init(model_config_, kb_.num_types(), kb_.num_relations(),
                              train_config_.seed);
  adam_ = AdamState(train_config_.lr);
  params_.for_each([&](const std::string&, Tensor& t) {
    adam_.register_param(t.rows(), t.cols());
  });
  step_ = 0;
  log_.rows.clear();
}

void Trainer::restore(const Checkpoint& ckpt) {
  if (ckpt.model.dim != model_config_.dim ||
      ckpt.model.classes != model_config_.classes ||
      ckpt.model.variant != model_config_.variant ||
      ckpt.model.t_max != model_config_.t_max) {
    throw MismatchError("checkpoint model config does not match trainer config");
  }
  if (!ckpt.has_optimizer) {
    throw MismatchError("checkpoint has no optimizer state; cannot resume");
  }
  params_ = ckpt.params;
  adam_ = ckpt.adam;
  adam_.lr = train_config_.lr;
  step_ = ckpt.completed_steps;
  log_.rows.clear();
}

const QueryGraph& Trainer::graph_for(EntityId source, EntityId target) {
  const uint64_t key = pair_key(source, target);
  auto it = graph_cache_.find(key);
  if (it != graph_cache_.end()) return it->second;
  QueryGraph qg = extract_subgraph(kb_, source, target, train_config_.l_max);
  return graph_cache_.emplace(key, std::move(qg)).first->second;
}

double Trainer::step_once(const std::vector<ResolvedQuery>& batch) {
  std::vector<QueryGraph> graphs;
  graphs.reserve(batch.size());
  std::vector<int> labels;
  labels.reserve(batch.size());
  for (const ResolvedQuery& q : batch) {
    graphs.push_back(graph_for(q.source, q.target));
    labels.push_back(q.label);
  }
  BatchedGraph bg = batch_graphs(graphs);

  Tape tape(train_config_.checked);
  BoundParams bound = bind_params(tape, params_);
  Var logits = forward_on_tape(tape, bg, bound, model_config_);
  Var labels_var = tape.constant(one_hot(labels, model_config_.classes));
  Var loss = tape.softmax_cross_entropy(logits, labels_var);
  const double loss_value = tape.value(loss).item();
  if (!std::isfinite(loss_value)) {
    throw NumericError("non-finite loss at step " + std::to_string(step_));
  }
  tape.backward(loss);

  std::vector<Tensor*> tensors;
  params_.for_each([&](const std::string&, Tensor& t) { tensors.push_back(&t); });
  std::vector<Tensor> grads;
  grads.reserve(bound.flat.size());
  for (Var v : bound.flat) grads.push_back(tape.grad(v));
  if (train_config_.weight_decay != 0.0) {
    apply_weight_decay(grads, tensors, train_config_.weight_decay);
  }
  if (train_config_.grad_clip > 0.0) {
    clip_gradients(grads, train_config_.grad_clip);
  }
  adam_.step(tensors, grads);
  return loss_value;
}

const RunLog& Trainer::run() {
  if (params_.rel_emb.numel() == 0) {
    throw Error("trainer: parameters not initialized");
  }
  using clock = std::chrono::steady_clock;
  const size_t total = train_config_.total_steps();

  BatchStream stream(queries_, train_config_.batch, train_config_.seed);
  stream.skip(step_);

  if (live_log_ && !live_log_header_written_) {
    *live_log_ << "step,epoch,loss,wallclock_ms\n";
    live_log_header_written_ = true;
  }

  while (step_ < total) {
    const size_t epoch = step_ / train_config_.steps_per_epoch;
    auto batch = stream.next();
    const auto t0 = clock::now();
    const double loss = step_once(batch);
    const double ms =
        std::chrono::duration<double, std::milli>(clock::now() - t0).count();
    RunLogRow row{step_, epoch, loss, ms};
    log_.rows.push_back(row);
    if (live_log_) {
      *live_log_ << row.step << ',' << row.epoch << ',' << format_double(row.loss)
                 << ',' << format_double(row.wallclock_ms) << '\n';
    }
    ++step_;

    const bool epoch_done = step_ % train_config_.steps_per_epoch == 0;
    if (epoch_done) {
      if (on_epoch_end) on_epoch_end(epoch, params_);
      if (checkpoint_dir_ && train_config_.checkpoint_every > 0 &&
          (epoch + 1) % train_config_.checkpoint_every == 0 && step_ < total) {
        save_checkpoint_file(
            *checkpoint_dir_ / ("checkpoint_epoch" + std::to_string(epoch + 1) + ".kgt"),
            checkpoint());
      }
    }
  }
  return log_;
}

Checkpoint Trainer::checkpoint() const {
  Checkpoint ckpt;
  ckpt.params = params_;
  ckpt.model = model_config_;
  ckpt.targets = targets_;
  ckpt.train = train_config_;
  ckpt.completed_steps = step_;
  ckpt.has_optimizer = true;
  ckpt.adam = adam_;
  return ckpt;
}

}  // namespace kglink
