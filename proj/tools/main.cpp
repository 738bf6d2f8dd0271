#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "kglink/config.hpp"
#include "kglink/errors.hpp"
#include "kglink/eval.hpp"
#include "kglink/kb.hpp"
#include "kglink/model.hpp"
#include "kglink/parallel.hpp"
#include "kglink/queries.hpp"
#include "kglink/query_graph.hpp"
#include "kglink/synth.hpp"
#include "kglink/train.hpp"
#include "manifest.hpp"

namespace fs = std::filesystem;
using namespace kglink;
using cli::RunManifest;

namespace {

constexpr const char* kToolVersion = "kglink 0.1.0";

enum ExitCode {
  kOk = 0,
  kFailure = 1,
  kUsage = 2,
  kConfig = 3,
  kMismatch = 4,
  kNoSubgraph = 5,
  kNumeric = 6,
};

std::string format_double(double v) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

void require_file(const fs::path& path) {
  if (!fs::exists(path)) {
    throw IoError("missing file: " + path.string());
  }
}

KnowledgeBase load_kb_files(const fs::path& facts, const fs::path& types) {
  require_file(facts);
  require_file(types);
  std::ifstream facts_in(facts);
  std::ifstream types_in(types);
  return KnowledgeBase::load(facts_in, types_in);
}

std::vector<QueryRecord> load_query_file(const fs::path& path) {
  require_file(path);
  std::ifstream in(path);
  return load_queries(in);
}

// Flag values only applied when the user actually passed them, so they
// override profile and config-file settings.
struct TrainFlags {
  std::string profile;
  std::string config_file;
  std::string variant;
  uint64_t seed = 0;
  int l_max = 0;
  size_t t_max = 0, dim = 0, epochs = 0, steps = 0, batch = 0;
  size_t checkpoint_every = 0;
  double lr = 0.0;
  bool deterministic = false;
};

void add_model_train_flags(CLI::App* cmd, TrainFlags& flags) {
  cmd->add_option("--profile", flags.profile, "Hyperparameter profile (paper|desk)");
  cmd->add_option("--config", flags.config_file, "Key-value config file");
  cmd->add_option("--variant", flags.variant,
                  "Entity init variant (relation|mean|sum)");
  cmd->add_option("--seed", flags.seed, "RNG seed");
  cmd->add_option("--l-max", flags.l_max, "Path length bound for extraction");
  cmd->add_option("--t-max", flags.t_max, "Message passing rounds");
  cmd->add_option("--dim", flags.dim, "Embedding width");
  cmd->add_option("--epochs", flags.epochs, "Training epochs");
  cmd->add_option("--steps", flags.steps, "Optimizer steps per epoch");
  cmd->add_option("--batch", flags.batch, "Batch size");
  cmd->add_option("--lr", flags.lr, "Adam learning rate");
  cmd->add_option("--checkpoint-every", flags.checkpoint_every,
                  "Save a checkpoint every N epochs");
  cmd->add_flag("--deterministic", flags.deterministic,
                "Force fully serial, bitwise-reproducible execution");
}

void apply_flags(const CLI::App* cmd, const TrainFlags& flags, ModelConfig& mcfg,
                 TrainConfig& tcfg) {
  if (cmd->count("--profile")) apply_profile(flags.profile, mcfg, tcfg);
  if (cmd->count("--config")) {
    apply_config_keys(read_key_value_file(flags.config_file), mcfg, tcfg);
  }
  if (cmd->count("--variant")) mcfg.variant = parse_variant(flags.variant);
  if (cmd->count("--seed")) tcfg.seed = flags.seed;
  if (cmd->count("--l-max")) tcfg.l_max = flags.l_max;
  if (cmd->count("--t-max")) mcfg.t_max = flags.t_max;
  if (cmd->count("--dim")) mcfg.dim = flags.dim;
  if (cmd->count("--epochs")) tcfg.epochs = flags.epochs;
  if (cmd->count("--steps")) tcfg.steps_per_epoch = flags.steps;
  if (cmd->count("--batch")) tcfg.batch = flags.batch;
  if (cmd->count("--lr")) tcfg.lr = flags.lr;
  if (cmd->count("--checkpoint-every")) tcfg.checkpoint_every = flags.checkpoint_every;
  if (cmd->count("--deterministic")) tcfg.deterministic = true;
}

std::map<std::string, std::string> resolved_config(const ModelConfig& mcfg,
                                                   const TrainConfig& tcfg) {
  std::map<std::string, std::string> kv;
  kv["dim"] = std::to_string(mcfg.dim);
  kv["t_max"] = std::to_string(mcfg.t_max);
  kv["classes"] = std::to_string(mcfg.classes);
  kv["variant"] = variant_name(mcfg.variant);
  kv["update_order"] = update_order_name(mcfg.update_order);
  kv["layer_norm_eps"] = format_double(mcfg.layer_norm_eps);
  kv["batch"] = std::to_string(tcfg.batch);
  kv["steps"] = std::to_string(tcfg.steps_per_epoch);
  kv["epochs"] = std::to_string(tcfg.epochs);
  kv["lr"] = format_double(tcfg.lr);
  kv["seed"] = std::to_string(tcfg.seed);
  kv["l_max"] = std::to_string(tcfg.l_max);
  kv["checkpoint_every"] = std::to_string(tcfg.checkpoint_every);
  kv["deterministic"] = tcfg.deterministic ? "true" : "false";
  kv["checked"] = tcfg.checked ? "true" : "false";
  return kv;
}

int cmd_synth(const fs::path& spec_path, const fs::path& out_dir,
              std::optional<uint64_t> seed_override) {
  require_file(spec_path);
  SynthSpec spec = parse_synth_spec(read_key_value_file(spec_path.string()));
  if (seed_override) spec.seed = *seed_override;
  SynthOutput result = generate(spec);

  fs::create_directories(out_dir);
  {
    std::ofstream facts(out_dir / "facts.tsv");
    for (const std::string& line : result.fact_lines) facts << line << '\n';
    std::ofstream types(out_dir / "types.tsv");
    std::ostringstream discard;
    result.kb.save(discard, types);
  }
  {
    std::ofstream train(out_dir / "queries_train.tsv");
    save_queries(train, result.train_queries);
    std::ofstream test(out_dir / "queries_test.tsv");
    save_queries(test, result.test_queries);
  }
  {
    std::ofstream rules(out_dir / "rules.tsv");
    for (const CompositionRule& r : result.rules) {
      rules << r.target << '\t';
      for (size_t i = 0; i < r.body.size(); ++i) {
        if (i) rules << ',';
        rules << r.body[i];
      }
      rules << '\n';
    }
  }

  RunManifest manifest;
  manifest.tool_version = kToolVersion;
  manifest.command = "synth";
  manifest.seed = spec.seed;
  manifest.config["entities"] = std::to_string(spec.entities);
  manifest.config["base_relations"] = std::to_string(spec.base_relations);
  manifest.config["rules"] = std::to_string(spec.rules);
  manifest.config["rule_body_length"] = std::to_string(spec.rule_body_length);
  manifest.config["density"] = format_double(spec.density);
  manifest.config["train_fraction"] = format_double(spec.train_fraction);
  manifest.config["negative_ratio"] = format_double(spec.negative_ratio);
  manifest.config["typed"] = spec.typed ? "true" : "false";
  manifest.config["base_type_kinds"] = std::to_string(spec.base_type_kinds);
  manifest.config["inverse_line_fraction"] = format_double(spec.inverse_line_fraction);
  manifest.add_input(spec_path);
  for (const char* name : {"facts.tsv", "types.tsv", "queries_train.tsv",
                           "queries_test.tsv", "rules.tsv"}) {
    manifest.artifacts.push_back((out_dir / name).string());
  }
  manifest.write(out_dir / "manifest.json");

  std::cout << "synth: " << result.kb.num_facts() << " facts, "
            << result.kb.num_entities() << " entities, "
            << result.train_queries.size() << " train / "
            << result.test_queries.size() << " test queries -> " << out_dir.string()
            << "\n";
  return kOk;
}

int cmd_ingest(const fs::path& facts, const fs::path& types, const fs::path& out_dir) {
  KnowledgeBase kb = load_kb_files(facts, types);
  fs::create_directories(out_dir);
  {
    std::ofstream facts_out(out_dir / "facts.tsv");
    std::ofstream types_out(out_dir / "types.tsv");
    kb.save(facts_out, types_out);
  }
  RunManifest manifest;
  manifest.tool_version = kToolVersion;
  manifest.command = "ingest";
  manifest.config["entities"] = std::to_string(kb.num_entities());
  manifest.config["relations"] = std::to_string(kb.num_relations());
  manifest.config["types"] = std::to_string(kb.num_types());
  manifest.config["facts"] = std::to_string(kb.num_facts());
  manifest.config["max_types_per_entity"] = std::to_string(kb.max_types_per_entity());
  manifest.add_input(facts);
  manifest.add_input(types);
  manifest.artifacts.push_back((out_dir / "facts.tsv").string());
  manifest.artifacts.push_back((out_dir / "types.tsv").string());
  manifest.write(out_dir / "manifest.json");

  std::cout << "ingest: " << kb.num_facts() << " facts over "
            << kb.num_entities() << " entities (" << kb.num_relations()
            << " relations folded, " << kb.num_types() << " types) -> "
            << out_dir.string() << "\n";
  return kOk;
}

int cmd_train(const CLI::App* cmd, const TrainFlags& flags, const fs::path& facts,
              const fs::path& types, const fs::path& queries,
              const std::string& resume_path, const fs::path& out_dir) {
  std::optional<Checkpoint> resume;
  ModelConfig mcfg;
  TrainConfig tcfg;
  if (!resume_path.empty()) {
    require_file(resume_path);
    resume = load_checkpoint_file(resume_path);
    mcfg = resume->model;
    tcfg = resume->train;
  }
  apply_flags(cmd, flags, mcfg, tcfg);

  KnowledgeBase kb = load_kb_files(facts, types);
  std::vector<QueryRecord> records = load_query_file(queries);
  TargetVocab vocab =
      resume ? resume->targets : TargetVocab::from_queries(records);
  mcfg.classes = vocab.classes();

  std::vector<size_t> unresolved;
  std::vector<ResolvedQuery> resolved =
      resolve_queries(kb, records, vocab, &unresolved);
  if (!unresolved.empty()) {
    std::cerr << "warning: " << unresolved.size()
              << " queries reference entities missing from the KB\n";
  }

  Trainer trainer(kb, vocab, resolved, mcfg, tcfg);
  if (trainer.skipped_queries() > 0) {
    std::cerr << "warning: skipped " << trainer.skipped_queries()
              << " queries with no subgraph within l_max=" << tcfg.l_max << "\n";
  }
  if (resume) {
    trainer.restore(*resume);
  } else {
    trainer.init_params();
  }

  fs::create_directories(out_dir);
  std::ofstream runlog(out_dir / "runlog.csv");
  trainer.set_log_stream(&runlog);
  trainer.set_checkpoint_dir(out_dir);
  trainer.run();

  const fs::path ckpt_path = out_dir / "checkpoint.kgt";
  save_checkpoint_file(ckpt_path, trainer.checkpoint());

  RunManifest manifest;
  manifest.tool_version = kToolVersion;
  manifest.command = "train";
  manifest.seed = tcfg.seed;
  manifest.config = resolved_config(mcfg, tcfg);
  if (cmd->count("--profile")) manifest.config["profile"] = flags.profile;
  manifest.add_input(facts);
  manifest.add_input(types);
  manifest.add_input(queries);
  if (cmd->count("--config")) manifest.add_input(flags.config_file);
  if (resume) manifest.add_input(resume_path);
  manifest.artifacts.push_back(ckpt_path.string());
  manifest.artifacts.push_back(ckpt_path.string() + ".meta");
  manifest.artifacts.push_back((out_dir / "runlog.csv").string());
  manifest.write(out_dir / "manifest.json");

  const auto& rows = trainer.log().rows;
  std::cout << "train: " << trainer.completed_steps() << " steps over "
            << trainer.usable_queries() << " queries; final loss "
            << (rows.empty() ? std::string("n/a") : format_double(rows.back().loss))
            << " -> " << ckpt_path.string() << "\n";
  return kOk;
}

struct ScoredQuery {
  bool ok = false;
  QueryResult result;
};

int cmd_eval(const fs::path& ckpt_path, const fs::path& facts, const fs::path& types,
             const fs::path& queries, const fs::path& out_dir,
             std::optional<int> l_max_override) {
  require_file(ckpt_path);
  Checkpoint ckpt = load_checkpoint_file(ckpt_path);
  KnowledgeBase kb = load_kb_files(facts, types);
  if (kb.num_relations() > ckpt.params.rel_emb.rows() ||
      kb.num_types() > ckpt.params.type_emb.rows()) {
    throw MismatchError("KB vocabulary exceeds checkpoint embedding tables");
  }

  std::vector<QueryRecord> records = load_query_file(queries);
  std::vector<size_t> unresolved;
  std::vector<ResolvedQuery> resolved =
      resolve_queries(kb, records, ckpt.targets, &unresolved);
  const int l_max = l_max_override.value_or(ckpt.train.l_max);

  std::vector<ScoredQuery> scored(resolved.size());
  parallel_for(resolved.size(), configured_threads(), [&](size_t i) {
    const ResolvedQuery& q = resolved[i];
    QueryGraph qg;
    try {
      qg = extract_subgraph(kb, q.source, q.target, l_max);
    } catch (const EmptyGraphError&) {
      return;  // skipped, reported below
    }
    Tensor logits = forward(qg, ckpt.params, ckpt.model);
    ScoredQuery& s = scored[i];
    s.ok = true;
    s.result.source = kb.entities().name(q.source);
    s.result.target = kb.entities().name(q.target);
    s.result.relation = q.relation;
    s.result.positive = q.positive;
    s.result.true_class = q.label;
    s.result.ranking = predict_ranking(logits, 0);
    s.result.avg_path_length = qg.avg_path_length;
    s.result.path_count = qg.path_count;
  });

  EvalReport report;
  report.null_class = ckpt.targets.null_class();
  for (size_t c = 0; c < ckpt.targets.classes(); ++c) {
    report.class_names.push_back(ckpt.targets.class_name(static_cast<int>(c)));
  }
  size_t skipped = unresolved.size();
  for (ScoredQuery& s : scored) {
    if (s.ok) {
      report.queries.push_back(std::move(s.result));
    } else {
      ++skipped;
    }
  }
  if (skipped > 0) {
    std::cerr << "warning: skipped " << skipped
              << " queries (missing entities or no subgraph)\n";
  }
  compute_aggregates(report);

  fs::create_directories(out_dir);
  {
    std::ofstream json_out(out_dir / "report.json");
    std::ofstream csv_out(out_dir / "report.csv");
    if (!json_out || !csv_out) {
      throw IoError("cannot write report under " + out_dir.string());
    }
    write_report_json(report, json_out);
    write_report_csv(report, csv_out);
  }

  RunManifest manifest;
  manifest.tool_version = kToolVersion;
  manifest.command = "eval";
  manifest.seed = ckpt.train.seed;
  manifest.config["l_max"] = std::to_string(l_max);
  manifest.config["classes"] = std::to_string(ckpt.model.classes);
  manifest.config["variant"] = variant_name(ckpt.model.variant);
  manifest.config["skipped_queries"] = std::to_string(skipped);
  manifest.add_input(ckpt_path);
  manifest.add_input(facts);
  manifest.add_input(types);
  manifest.add_input(queries);
  manifest.artifacts.push_back((out_dir / "report.json").string());
  manifest.artifacts.push_back((out_dir / "report.csv").string());
  manifest.write(out_dir / "manifest.json");

  std::cout << "eval: " << report.queries.size() << " queries; map@5 "
            << format_double(report.map_at_5);
  if (report.avg_accuracy) {
    std::cout << ", avg-acc " << format_double(*report.avg_accuracy);
  }
  std::cout << " -> " << (out_dir / "report.json").string() << "\n";
  return kOk;
}

int cmd_predict(const fs::path& ckpt_path, const fs::path& facts,
                const fs::path& types, const std::string& source,
                const std::string& target, std::optional<int> l_max_override,
                const std::string& out_dir) {
  require_file(ckpt_path);
  Checkpoint ckpt = load_checkpoint_file(ckpt_path);
  KnowledgeBase kb = load_kb_files(facts, types);
  if (kb.num_relations() > ckpt.params.rel_emb.rows() ||
      kb.num_types() > ckpt.params.type_emb.rows()) {
    throw MismatchError("KB vocabulary exceeds checkpoint embedding tables");
  }

  const uint32_t* s = kb.entities().lookup(source);
  const uint32_t* t = kb.entities().lookup(target);
  if (!s || !t) {
    throw EmptyGraphError("entity '" + (s ? target : source) + "' not in KB");
  }
  const int l_max = l_max_override.value_or(ckpt.train.l_max);
  QueryGraph qg = extract_subgraph(kb, *s, *t, l_max);
  Tensor logits = forward(qg, ckpt.params, ckpt.model);
  Tensor probs = softmax_rows(logits);
  std::vector<int> ranking = predict_ranking(logits, 0);

  std::cout << "prediction: " << ckpt.targets.class_name(ranking[0]) << "\n";
  std::cout << "rank\tclass\tlogit\tprobability\n";
  for (size_t i = 0; i < ranking.size(); ++i) {
    const int cls = ranking[i];
    std::cout << i + 1 << '\t' << ckpt.targets.class_name(cls) << '\t'
              << format_double(logits.at(0, cls)) << '\t'
              << format_double(probs.at(0, cls)) << '\n';
  }

  if (!out_dir.empty()) {
    fs::create_directories(out_dir);
    nlohmann::json j;
    j["source"] = source;
    j["target"] = target;
    j["prediction"] = ckpt.targets.class_name(ranking[0]);
    j["ranking"] = nlohmann::json::array();
    for (int cls : ranking) {
      j["ranking"].push_back({{"class", ckpt.targets.class_name(cls)},
                              {"logit", logits.at(0, cls)},
                              {"probability", probs.at(0, cls)}});
    }
    j["subgraph"] = {{"nodes", qg.num_nodes()},
                     {"edges", qg.num_edges()},
                     {"path_count", qg.path_count},
                     {"avg_path_length", qg.avg_path_length}};
    std::ofstream out(fs::path(out_dir) / "prediction.json");
    out << j.dump(2) << '\n';

    RunManifest manifest;
    manifest.tool_version = kToolVersion;
    manifest.command = "predict";
    manifest.seed = ckpt.train.seed;
    manifest.config["l_max"] = std::to_string(l_max);
    manifest.config["source"] = source;
    manifest.config["target"] = target;
    manifest.add_input(ckpt_path);
    manifest.add_input(facts);
    manifest.add_input(types);
    manifest.artifacts.push_back((fs::path(out_dir) / "prediction.json").string());
    manifest.write(fs::path(out_dir) / "manifest.json");
  }
  return kOk;
}

int cmd_analyze(const fs::path& report_path, const std::string& by, size_t bins,
                const fs::path& out_path) {
  require_file(report_path);
  StratifyBy strat;
  if (by == "avg-path-length") {
    strat = StratifyBy::AvgPathLength;
  } else if (by == "parallel-paths") {
    strat = StratifyBy::ParallelPaths;
  } else {
    throw ConfigError("unknown --by '" + by +
                      "' (avg-path-length|parallel-paths)");
  }
  std::ifstream in(report_path);
  EvalReport report = read_report_json(in);
  std::vector<StratBin> curve = stratify(report, strat, bins);

  if (out_path.has_parent_path()) fs::create_directories(out_path.parent_path());
  std::ofstream out(out_path);
  if (!out) throw IoError("cannot write " + out_path.string());
  write_curve_csv(curve, out);

  RunManifest manifest;
  manifest.tool_version = kToolVersion;
  manifest.command = "analyze";
  manifest.config["by"] = by;
  manifest.config["bins"] = std::to_string(bins);
  manifest.add_input(report_path);
  manifest.artifacts.push_back(out_path.string());
  manifest.write(out_path.string() + ".manifest.json");

  std::cout << "analyze: " << curve.size() << " bins over "
            << report.queries.size() << " queries -> " << out_path.string() << "\n";
  return kOk;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Knowledge-graph link prediction via message passing"};
  app.set_version_flag("--version", kToolVersion);
  app.require_subcommand(1);

  // synth
  auto* synth = app.add_subcommand("synth", "Generate a synthetic benchmark KB");
  std::string synth_spec, synth_out;
  uint64_t synth_seed = 0;
  synth->add_option("--spec", synth_spec, "Synth spec key-value file")->required();
  synth->add_option("--out", synth_out, "Output directory")->required();
  synth->add_option("--seed", synth_seed, "Override the spec seed");

  // ingest
  auto* ingest = app.add_subcommand("ingest", "Load and canonicalize a KB");
  std::string ingest_facts, ingest_types, ingest_out;
  ingest->add_option("--facts", ingest_facts, "Facts file")->required();
  ingest->add_option("--types", ingest_types, "Types file")->required();
  ingest->add_option("--out", ingest_out, "Output directory")->required();

  // train
  auto* train = app.add_subcommand("train", "Train a model");
  std::string train_facts, train_types, train_queries, train_out, train_resume;
  TrainFlags train_flags;
  train->add_option("--facts", train_facts, "Facts file")->required();
  train->add_option("--types", train_types, "Types file")->required();
  train->add_option("--queries", train_queries, "Training queries")->required();
  train->add_option("--out", train_out, "Output directory")->required();
  train->add_option("--checkpoint", train_resume, "Checkpoint to resume from");
  add_model_train_flags(train, train_flags);

  // eval
  auto* eval = app.add_subcommand("eval", "Score queries and emit a report");
  std::string eval_ckpt, eval_facts, eval_types, eval_queries, eval_out;
  int eval_l_max = 0;
  eval->add_option("--checkpoint", eval_ckpt, "Trained checkpoint")->required();
  eval->add_option("--facts", eval_facts, "Facts file")->required();
  eval->add_option("--types", eval_types, "Types file")->required();
  eval->add_option("--queries", eval_queries, "Evaluation queries")->required();
  eval->add_option("--out", eval_out, "Output directory")->required();
  eval->add_option("--l-max", eval_l_max, "Override the checkpoint's path bound");

  // predict
  auto* predict = app.add_subcommand("predict", "Rank relations for one pair");
  std::string pred_ckpt, pred_facts, pred_types, pred_source, pred_target, pred_out;
  int pred_l_max = 0;
  predict->add_option("--checkpoint", pred_ckpt, "Trained checkpoint")->required();
  predict->add_option("--facts", pred_facts, "Facts file")->required();
  predict->add_option("--types", pred_types, "Types file")->required();
  predict->add_option("source", pred_source, "Source entity name")->required();
  predict->add_option("target", pred_target, "Target entity name")->required();
  predict->add_option("--l-max", pred_l_max, "Override the checkpoint's path bound");
  predict->add_option("--out", pred_out, "Optional output directory");

  // analyze
  auto* analyze = app.add_subcommand("analyze", "Stratified curves from a report");
  std::string an_report, an_by = "parallel-paths", an_out = "curve.csv";
  size_t an_bins = 20;
  analyze->add_option("--report", an_report, "report.json from eval")->required();
  analyze->add_option("--by", an_by, "avg-path-length|parallel-paths");
  analyze->add_option("--bins", an_bins, "Number of intervals");
  analyze->add_option("--out", an_out, "Curve CSV path");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    int code = app.exit(e);
    return code == 0 ? kOk : kUsage;
  }

  try {
    if (synth->parsed()) {
      std::optional<uint64_t> seed;
      if (synth->count("--seed")) seed = synth_seed;
      return cmd_synth(synth_spec, synth_out, seed);
    }
    if (ingest->parsed()) {
      return cmd_ingest(ingest_facts, ingest_types, ingest_out);
    }
    if (train->parsed()) {
      return cmd_train(train, train_flags, train_facts, train_types, train_queries,
                       train_resume, train_out);
    }
    if (eval->parsed()) {
      std::optional<int> l_max;
      if (eval->count("--l-max")) l_max = eval_l_max;
      return cmd_eval(eval_ckpt, eval_facts, eval_types, eval_queries, eval_out,
                      l_max);
    }
    if (predict->parsed()) {
      std::optional<int> l_max;
      if (predict->count("--l-max")) l_max = pred_l_max;
      return cmd_predict(pred_ckpt, pred_facts, pred_types, pred_source,
                         pred_target, l_max, pred_out);
    }
    if (analyze->parsed()) {
      return cmd_analyze(an_report, an_by, an_bins, an_out);
    }
  } catch (const ConfigError& e) {
    std::cerr << "error: config: " << e.what() << "\n";
    return kConfig;
  } catch (const MismatchError& e) {
    std::cerr << "error: mismatch: " << e.what() << "\n";
    return kMismatch;
  } catch (const EmptyGraphError& e) {
    std::cerr << "error: no-subgraph: " << e.what() << "\n";
    return kNoSubgraph;
  } catch (const NumericError& e) {
    std::cerr << "error: numeric: " << e.what() << "\n";
    return kNumeric;
  } catch (const InputError& e) {
    std::cerr << "error: input: " << e.what() << "\n";
    return kUsage;
  } catch (const IoError& e) {
    std::cerr << "error: io: " << e.what() << "\n";
    return kUsage;
  } catch (const std::exception& e) {
    std::cerr << "error: internal: " << e.what() << "\n";
    return kFailure;
  }
  return kFailure;
}
