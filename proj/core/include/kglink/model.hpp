#pragma once

#include <cstdint>
#include <functional>
#include <string>
#include <vector>

#include "kglink/checkpoint.hpp"
#include "kglink/config.hpp"
#include "kglink/query_graph.hpp"
#include "kglink/tape.hpp"
#include "kglink/tensor.hpp"

namespace kglink {

// Feed-forward stack, ReLU on hidden layers, linear final layer.
struct MlpParams {
  std::vector<Tensor> weights;
  std::vector<Tensor> biases;
};

// One LSTM gate: input weights, recurrent weights, and the layer-norm
// gain/bias applied to the gate pre-activation.
struct GateParams {
  Tensor Wx, Wh, gain, bias;
};

// Layer-norm LSTM cell; gates use sigmoid, candidate and output use ReLU.
struct CellParams {
  GateParams input, forget, cand, output;
};

// All trainable state. Embedding tables initialize fact and entity
// representations; message MLPs compute per-element messages; the two cells
// refine entity/fact embeddings; the vote MLP decodes the fake fact.
struct ModelParams {
  Tensor type_emb;    // |types| x d
  Tensor rel_emb;     // |relations| x d
  Tensor entity_vec;  // 1 x d, shared entity init for the relation variant
  MlpParams msg_es;   // fact -> entity messages, source side
  MlpParams msg_et;   // fact -> entity messages, target side
  MlpParams msg_se;   // entity -> fact messages, source side
  MlpParams msg_te;   // entity -> fact messages, target side
  CellParams e_cell;
  CellParams f_cell;
  MlpParams vote;

  static ModelParams init(const ModelConfig& config, size_t num_types,
                          size_t num_relations, uint64_t seed);

  // Canonical enumeration order: tables, message MLPs, cells, vote. This
  // order fixes checkpoint layout, optimizer slot order and init draws.
  void for_each(const std::function<void(const std::string&, Tensor&)>& fn);
  void for_each(const std::function<void(const std::string&, const Tensor&)>& fn) const;

  NamedTensors to_container() const;
  // Replaces every tensor from the container; throws MismatchError on
  // missing entries or shape disagreements.
  void load_container(const NamedTensors& tensors);
};

struct MlpVars {
  std::vector<Var> weights;
  std::vector<Var> biases;
};

struct GateVars {
  Var Wx, Wh, gain, bias;
};

struct CellVars {
  GateVars input, forget, cand, output;
};

// Parameters registered on a tape for one forward/backward pass. `flat`
// follows the for_each order so gradients can be zipped with the tensors.
struct BoundParams {
  Var type_emb, rel_emb, entity_vec;
  MlpVars msg_es, msg_et, msg_se, msg_te;
  CellVars e_cell, f_cell;
  MlpVars vote;
  std::vector<Var> flat;
};

BoundParams bind_params(Tape& tape, const ModelParams& params);

// Initial embeddings from the lookup tables: fact rows take their relation
// embedding (fake rows are zero), entity rows take the variant-dependent
// aggregation of their type embeddings.
std::pair<Var, Var> init_embeddings(Tape& tape, const BatchedGraph& graph,
                                    const BoundParams& params,
                                    const ModelConfig& config);

// One message-passing round over (entity, fact) hidden/cell states.
struct PassState {
  Var e_h, e_c, f_h, f_c;
};
PassState message_round(Tape& tape, const PassState& state, Var S, Var T,
                        Var St, Var Tt, const BoundParams& params,
                        const ModelConfig& config);

// Full pipeline on a tape: init, t_max rounds, vote on the fake-fact rows.
// Returns logits of shape (batch, classes).
Var forward_on_tape(Tape& tape, const BatchedGraph& graph,
                    const BoundParams& params, const ModelConfig& config);

// Convenience inference entry point.
Tensor forward(const BatchedGraph& graph, const ModelParams& params,
               const ModelConfig& config, bool checked = true);
Tensor forward(const QueryGraph& graph, const ModelParams& params,
               const ModelConfig& config, bool checked = true);

// Classes sorted by descending logit, ties broken by ascending class index.
std::vector<int> predict_ranking(const Tensor& logits, size_t row);
int predict_argmax(const Tensor& logits, size_t row);

Tensor one_hot(const std::vector<int>& labels, size_t classes);

}  // namespace kglink
