#include "kglink/model.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <unordered_map>

#include "kglink/errors.hpp"
#include "kglink/rng.hpp"

namespace kglink {

namespace {

template <typename Params, typename Fn>
void walk_mlp(const std::string& prefix, Params& mlp, Fn&& fn) {
  for (size_t k = 0; k < mlp.weights.size(); ++k) {
    fn(prefix + ".W" + std::to_string(k), mlp.weights[k]);
    fn(prefix + ".b" + std::to_string(k), mlp.biases[k]);
  }
}

template <typename Params, typename Fn>
void walk_gate(const std::string& prefix, Params& gate, Fn&& fn) {
  fn(prefix + ".Wx", gate.Wx);
  fn(prefix + ".Wh", gate.Wh);
  fn(prefix + ".gain", gate.gain);
  fn(prefix + ".bias", gate.bias);
}

template <typename Params, typename Fn>
void walk_cell(const std::string& prefix, Params& cell, Fn&& fn) {
  walk_gate(prefix + ".i", cell.input, fn);
  walk_gate(prefix + ".f", cell.forget, fn);
  walk_gate(prefix + ".g", cell.cand, fn);
  walk_gate(prefix + ".o", cell.output, fn);
}

template <typename Params, typename Fn>
void walk_params(Params& p, Fn&& fn) {
  fn("type_emb", p.type_emb);
  fn("rel_emb", p.rel_emb);
  fn("entity_vec", p.entity_vec);
  walk_mlp("msg_es", p.msg_es, fn);
  walk_mlp("msg_et", p.msg_et, fn);
  walk_mlp("msg_se", p.msg_se, fn);
  walk_mlp("msg_te", p.msg_te, fn);
  walk_cell("e_cell", p.e_cell, fn);
  walk_cell("f_cell", p.f_cell, fn);
  walk_mlp("vote", p.vote, fn);
}

MlpParams make_mlp(size_t input, const std::vector<size_t>& layers) {
  MlpParams mlp;
  size_t fan_in = input;
  for (size_t width : layers) {
    mlp.weights.emplace_back(fan_in, width);
    mlp.biases.emplace_back(1, width);
    fan_in = width;
  }
  return mlp;
}

CellParams make_cell(size_t input, size_t d) {
  CellParams cell;
  for (GateParams* g : {&cell.input, &cell.forget, &cell.cand, &cell.output}) {
    g->Wx = Tensor(input, d);
    g->Wh = Tensor(d, d);
    g->gain = Tensor(1, d);
    g->bias = Tensor(1, d);
  }
  return cell;
}

bool ends_with(const std::string& s, const std::string& suffix) {
  return s.size() >= suffix.size() &&
         s.compare(s.size() - suffix.size(), suffix.size(), suffix) == 0;
}

}  // namespace

ModelParams ModelParams::init(const ModelConfig& config, size_t num_types,
                              size_t num_relations, uint64_t seed) {
  config.validate();
  const size_t d = config.dim;
  const auto msg_layers = config.resolved_msg_layers();
  const size_t msg_out = msg_layers.back();

  ModelParams p;
  p.type_emb = Tensor(std::max<size_t>(num_types, 1), d);
  p.rel_emb = Tensor(std::max<size_t>(num_relations, 1), d);
  p.entity_vec = Tensor(1, d);
  p.msg_es = make_mlp(d, msg_layers);
  p.msg_et = make_mlp(d, msg_layers);
  p.msg_se = make_mlp(d, msg_layers);
  p.msg_te = make_mlp(d, msg_layers);
  p.e_cell = make_cell(2 * msg_out, d);
  p.f_cell = make_cell(2 * msg_out, d);
  p.vote = make_mlp(d, config.resolved_vote_layers());

  // Tables draw from U(-1/sqrt(d), 1/sqrt(d)); weight matrices are Glorot
  // uniform; layer-norm gains start at 1 and biases at 0, except the forget
  // gate bias which starts at 1. Draw order is the canonical for_each order.
  Rng rng(seed);
  const double table_limit = 1.0 / std::sqrt(static_cast<double>(d));
  p.for_each([&](const std::string& name, Tensor& t) {
    if (name == "type_emb" || name == "rel_emb" || name == "entity_vec") {
      for (double& v : t.data()) v = rng.uniform(-table_limit, table_limit);
    } else if (ends_with(name, ".gain")) {
      t.fill(1.0);
    } else if (name.find(".W") != std::string::npos) {
      const double limit =
          std::sqrt(6.0 / static_cast<double>(t.rows() + t.cols()));
      for (double& v : t.data()) v = rng.uniform(-limit, limit);
    } else if (ends_with(name, ".f.bias")) {
      t.fill(1.0);
    } else {
      t.fill(0.0);  // MLP biases and remaining layer-norm biases
    }
  });
  return p;
}

void ModelParams::for_each(
    const std::function<void(const std::string&, Tensor&)>& fn) {
  walk_params(*this, fn);
}

void ModelParams::for_each(
    const std::function<void(const std::string&, const Tensor&)>& fn) const {
  walk_params(*this, fn);
}

NamedTensors ModelParams::to_container() const {
  NamedTensors out;
  for_each([&](const std::string& name, const Tensor& t) { out.add(name, t); });
  return out;
}

void ModelParams::load_container(const NamedTensors& tensors) {
  for_each([&](const std::string& name, Tensor& t) {
    const Tensor* loaded = tensors.find(name);
    if (!loaded) {
      throw MismatchError("checkpoint missing tensor '" + name + "'");
    }
    if (!loaded->same_shape(t)) {
      throw MismatchError("checkpoint tensor '" + name + "' has shape " +
                          loaded->shape_str() + ", expected " + t.shape_str());
    }
    t = *loaded;
  });
}

BoundParams bind_params(Tape& tape, const ModelParams& params) {
  std::unordered_map<std::string, Var> by_name;
  BoundParams bound;
  params.for_each([&](const std::string& name, const Tensor& t) {
    Var v = tape.param(t);
    by_name.emplace(name, v);
    bound.flat.push_back(v);
  });

  auto mlp = [&](const std::string& prefix, size_t layers) {
    MlpVars vars;
    for (size_t k = 0; k < layers; ++k) {
      vars.weights.push_back(by_name.at(prefix + ".W" + std::to_string(k)));
      vars.biases.push_back(by_name.at(prefix + ".b" + std::to_string(k)));
    }
    return vars;
  };
  auto gate = [&](const std::string& prefix) {
    return GateVars{by_name.at(prefix + ".Wx"), by_name.at(prefix + ".Wh"),
                    by_name.at(prefix + ".gain"), by_name.at(prefix + ".bias")};
  };
  auto cell = [&](const std::string& prefix) {
    return CellVars{gate(prefix + ".i"), gate(prefix + ".f"),
                    gate(prefix + ".g"), gate(prefix + ".o")};
  };

  bound.type_emb = by_name.at("type_emb");
  bound.rel_emb = by_name.at("rel_emb");
  bound.entity_vec = by_name.at("entity_vec");
  bound.msg_es = mlp("msg_es", params.msg_es.weights.size());
  bound.msg_et = mlp("msg_et", params.msg_et.weights.size());
  bound.msg_se = mlp("msg_se", params.msg_se.weights.size());
  bound.msg_te = mlp("msg_te", params.msg_te.weights.size());
  bound.e_cell = cell("e_cell");
  bound.f_cell = cell("f_cell");
  bound.vote = mlp("vote", params.vote.weights.size());
  return bound;
}

namespace {

Var apply_mlp(Tape& tape, Var x, const MlpVars& mlp) {
  Var h = x;
  for (size_t k = 0; k < mlp.weights.size(); ++k) {
    h = tape.add_bias(tape.matmul(h, mlp.weights[k]), mlp.biases[k]);
    if (k + 1 < mlp.weights.size()) h = tape.relu(h);
  }
  return h;
}

// Layer-norm LSTM step. Returns (hidden, cell).
std::pair<Var, Var> cell_step(Tape& tape, const CellVars& cell, Var x, Var h,
                              Var c, double eps) {
  auto gate_pre = [&](const GateVars& g) {
    return tape.layer_norm(tape.add(tape.matmul(x, g.Wx), tape.matmul(h, g.Wh)),
                           g.gain, g.bias, eps);
  };
  Var i = tape.sigmoid(gate_pre(cell.input));
  Var f = tape.sigmoid(gate_pre(cell.forget));
  Var g = tape.relu(gate_pre(cell.cand));
  Var o = tape.sigmoid(gate_pre(cell.output));
  Var c_next = tape.add(tape.mul(f, c), tape.mul(i, g));
  Var h_next = tape.mul(o, tape.relu(c_next));
  return {h_next, c_next};
}

}  // namespace

std::pair<Var, Var> init_embeddings(Tape& tape, const BatchedGraph& graph,
                                    const BoundParams& params,
                                    const ModelConfig& config) {
  const size_t d = config.dim;
  const size_t m = graph.num_edges();
  const size_t n = graph.num_nodes();

  // Facts: relation embedding rows; the fake fact rows are zeroed by a mask.
  std::vector<uint32_t> rel_rows(m, 0);
  Tensor fake_mask = Tensor::full(m, d, 1.0);
  for (size_t i = 0; i < m; ++i) {
    const int64_t rel = graph.edge_relation[i];
    if (rel == QueryGraph::kFakeRelation) {
      for (size_t j = 0; j < d; ++j) fake_mask.at(i, j) = 0.0;
    } else {
      rel_rows[i] = static_cast<uint32_t>(rel);
    }
  }
  Var f_init = tape.mul(tape.gather_rows(params.rel_emb, std::move(rel_rows)),
                        tape.constant(std::move(fake_mask)));

  Var e_init;
  if (config.variant == Variant::Relation) {
    // Every entity starts from the one shared learned vector.
    e_init = tape.matmul(tape.constant(Tensor::full(n, 1, 1.0)), params.entity_vec);
  } else {
    // Aggregate each entity's type embeddings; untyped entities stay zero.
    std::vector<uint32_t> type_rows;
    size_t slots = 0;
    for (const auto& types : graph.node_types) slots += types.size();
    Tensor agg(n, slots);
    for (size_t i = 0; i < n; ++i) {
      const auto& types = graph.node_types[i];
      const double w = config.variant == Variant::Mean && !types.empty()
                           ? 1.0 / static_cast<double>(types.size())
                           : 1.0;
      for (TypeId t : types) {
        agg.at(i, type_rows.size()) = w;
        type_rows.push_back(t);
      }
    }
    e_init = tape.matmul(tape.constant(std::move(agg)),
                         tape.gather_rows(params.type_emb, std::move(type_rows)));
  }
  return {e_init, f_init};
}

PassState message_round(Tape& tape, const PassState& state, Var S, Var T,
                        Var St, Var Tt, const BoundParams& params,
                        const ModelConfig& config) {
  const double eps = config.layer_norm_eps;

  auto entity_update = [&](Var f_src) {
    Var incoming = tape.concat_cols(
        tape.matmul(St, apply_mlp(tape, f_src, params.msg_es)),
        tape.matmul(Tt, apply_mlp(tape, f_src, params.msg_et)));
    return cell_step(tape, params.e_cell, incoming, state.e_h, state.e_c, eps);
  };
  auto fact_update = [&](Var e_src) {
    Var incoming = tape.concat_cols(
        tape.matmul(S, apply_mlp(tape, e_src, params.msg_se)),
        tape.matmul(T, apply_mlp(tape, e_src, params.msg_te)));
    return cell_step(tape, params.f_cell, incoming, state.f_h, state.f_c, eps);
  };

  PassState next = state;
  if (config.update_order == UpdateOrder::Jacobi) {
    auto [eh, ec] = entity_update(state.f_h);
    auto [fh, fc] = fact_update(state.e_h);
    next = PassState{eh, ec, fh, fc};
  } else {
    auto [eh, ec] = entity_update(state.f_h);
    next.e_h = eh;
    next.e_c = ec;
    auto [fh, fc] = fact_update(next.e_h);
    next.f_h = fh;
    next.f_c = fc;
  }
  return next;
}

Var forward_on_tape(Tape& tape, const BatchedGraph& graph,
                    const BoundParams& params, const ModelConfig& config) {
  config.validate();
  auto [s, t] = std::pair<Tensor, Tensor>{graph.S, graph.T};
  Var S = tape.constant(std::move(s));
  Var T = tape.constant(std::move(t));
  Var St = tape.constant(transpose(graph.S));
  Var Tt = tape.constant(transpose(graph.T));

  auto [e_init, f_init] = init_embeddings(tape, graph, params, config);
  PassState state;
  state.e_h = e_init;
  state.e_c = tape.constant(Tensor(graph.num_nodes(), config.dim));
  state.f_h = f_init;
  state.f_c = tape.constant(Tensor(graph.num_edges(), config.dim));

  for (size_t round = 0; round < config.t_max; ++round) {
    state = message_round(tape, state, S, T, St, Tt, params, config);
  }

  std::vector<uint32_t> fake_rows(graph.fake_edge_rows.begin(),
                                  graph.fake_edge_rows.end());
  Var fake = tape.gather_rows(state.f_h, std::move(fake_rows));
  return apply_mlp(tape, fake, params.vote);
}

Tensor forward(const BatchedGraph& graph, const ModelParams& params,
               const ModelConfig& config, bool checked) {
  Tape tape(checked);
  BoundParams bound = bind_params(tape, params);
  Var logits = forward_on_tape(tape, graph, bound, config);
  return tape.value(logits);
}

Tensor forward(const QueryGraph& graph, const ModelParams& params,
               const ModelConfig& config, bool checked) {
  return forward(batch_graphs(std::span(&graph, 1)), params, config, checked);
}

std::vector<int> predict_ranking(const Tensor& logits, size_t row) {
  std::vector<int> order(logits.cols());
  std::iota(order.begin(), order.end(), 0);
  const double* z = logits.row(row);
  std::stable_sort(order.begin(), order.end(), [&](int a, int b) {
    if (z[a] != z[b]) return z[a] > z[b];
    return a < b;
  });
  return order;
}

int predict_argmax(const Tensor& logits, size_t row) {
  const double* z = logits.row(row);
  int best = 0;
  for (size_t j = 1; j < logits.cols(); ++j) {
    if (z[j] > z[best]) best = static_cast<int>(j);
  }
  return best;
}

Tensor one_hot(const std::vector<int>& labels, size_t classes) {
  Tensor out(labels.size(), classes);
  for (size_t i = 0; i < labels.size(); ++i) {
    if (labels[i] < 0 || static_cast<size_t>(labels[i]) >= classes) {
      throw InputError("one_hot: label " + std::to_string(labels[i]) +
                       " outside " + std::to_string(classes) + " classes");
    }
    out.at(i, static_cast<size_t>(labels[i])) = 1.0;
  }
  return out;
}

}  // namespace kglink
