#pragma once

#include <cstdint>
#include <iosfwd>
#include <map>
#include <string>
#include <vector>

namespace kglink {

// Entity initialization scheme: one shared learned vector, or the mean/sum
// of the entity's type embeddings.
enum class Variant { Relation, Mean, Sum };

// Whether entity and fact refinements within a round both read the previous
// round's embeddings, or the fact refinement reads the freshly updated
// entity embeddings.
enum class UpdateOrder { Jacobi, GaussSeidel };

Variant parse_variant(const std::string& name);
std::string variant_name(Variant v);
UpdateOrder parse_update_order(const std::string& name);
std::string update_order_name(UpdateOrder o);

struct ModelConfig {
  size_t dim = 64;
  size_t t_max = 25;
  size_t classes = 47;
  Variant variant = Variant::Sum;
  UpdateOrder update_order = UpdateOrder::Jacobi;
  double layer_norm_eps = 1e-5;
  // Message MLP layer widths; empty means {dim, dim, dim}.
  std::vector<size_t> msg_layers;
  // Vote MLP layer widths excluding the final `classes` layer; empty means
  // {dim, dim, dim}.
  std::vector<size_t> vote_layers;

  std::vector<size_t> resolved_msg_layers() const;
  std::vector<size_t> resolved_vote_layers() const;  // includes final classes
  void validate() const;
};

struct TrainConfig {
  size_t batch = 10;
  size_t steps_per_epoch = 128;
  size_t epochs = 2000;
  double lr = 2e-5;
  uint64_t seed = 0;
  int l_max = 6;
  size_t checkpoint_every = 0;  // epochs between checkpoints; 0 = final only
  bool deterministic = true;
  bool checked = false;     // numeric guards during training
  double grad_clip = 0.0;   // max gradient norm; 0 = off
  double weight_decay = 0.0;

  size_t total_steps() const { return steps_per_epoch * epochs; }
  void validate() const;
};

// Hyperparameter profiles. "paper" is the published schedule; "desk" is a
// small configuration sized for local experiments.
void apply_profile(const std::string& profile, ModelConfig& model,
                   TrainConfig& train);

// Flat `key = value` text, '#' comments. Duplicate keys keep the last value.
std::map<std::string, std::string> parse_key_values(std::istream& in);
std::map<std::string, std::string> read_key_value_file(const std::string& path);
void write_key_values(std::ostream& out,
                      const std::map<std::string, std::string>& kv);

// Applies recognized keys onto the configs; throws ConfigError on unknown
// keys or unparsable values.
void apply_config_keys(const std::map<std::string, std::string>& kv,
                       ModelConfig& model, TrainConfig& train);

}  // namespace kglink
