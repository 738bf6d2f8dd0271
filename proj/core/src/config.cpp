#include "kglink/config.hpp"

#include <fstream>
#include <istream>
#include <ostream>
#include <sstream>

#include "kglink/errors.hpp"

namespace kglink {

Variant parse_variant(const std::string& name) {
  if (name == "relation") return Variant::Relation;
  if (name == "mean") return Variant::Mean;
  if (name == "sum") return Variant::Sum;
  throw ConfigError("unknown variant '" + name + "' (relation|mean|sum)");
}

std::string variant_name(Variant v) {
  switch (v) {
    case Variant::Relation: return "relation";
    case Variant::Mean: return "mean";
    case Variant::Sum: return "sum";
  }
  return "sum";
}

UpdateOrder parse_update_order(const std::string& name) {
  if (name == "jacobi") return UpdateOrder::Jacobi;
  if (name == "gauss_seidel") return UpdateOrder::GaussSeidel;
  throw ConfigError("unknown update order '" + name + "' (jacobi|gauss_seidel)");
}

std::string update_order_name(UpdateOrder o) {
  return o == UpdateOrder::Jacobi ? "jacobi" : "gauss_seidel";
}

std::vector<size_t> ModelConfig::resolved_msg_layers() const {
  if (!msg_layers.empty()) return msg_layers;
  return {dim, dim, dim};
}

std::vector<size_t> ModelConfig::resolved_vote_layers() const {
  std::vector<size_t> layers = vote_layers.empty()
                                   ? std::vector<size_t>{dim, dim, dim}
                                   : vote_layers;
  layers.push_back(classes);
  return layers;
}

void ModelConfig::validate() const {
  if (dim < 1) throw ConfigError("dim must be >= 1");
  if (t_max < 1) throw ConfigError("t_max must be >= 1");
  if (classes < 2) throw ConfigError("classes must be >= 2");
}

void TrainConfig::validate() const {
  if (batch < 1) throw ConfigError("batch must be >= 1");
  if (steps_per_epoch < 1) throw ConfigError("steps must be >= 1");
  if (epochs < 1) throw ConfigError("epochs must be >= 1");
  if (lr <= 0) throw ConfigError("lr must be > 0");
  if (l_max < 1) throw ConfigError("l_max must be >= 1");
}

void apply_profile(const std::string& profile, ModelConfig& model,
                   TrainConfig& train) {
  if (profile == "paper") {
    model.dim = 64;
    model.t_max = 25;
    train.batch = 10;
    train.steps_per_epoch = 128;
    train.epochs = 2000;
    train.lr = 2e-5;
    train.l_max = 6;
  } else if (profile == "desk") {
    model.dim = 32;
    model.t_max = 8;
    train.batch = 10;
    train.steps_per_epoch = 300;
    train.epochs = 1;
    train.lr = 2e-3;
    train.l_max = 2;
  } else {
    throw ConfigError("unknown profile '" + profile + "' (paper|desk)");
  }
}

namespace {

std::string trim(const std::string& s) {
  size_t b = s.find_first_not_of(" \t\r");
  if (b == std::string::npos) return "";
  size_t e = s.find_last_not_of(" \t\r");
  return s.substr(b, e - b + 1);
}

uint64_t to_u64(const std::string& key, const std::string& value) {
  try {
    size_t pos = 0;
    uint64_t v = std::stoull(value, &pos);
    if (pos != value.size()) throw std::invalid_argument(value);
    return v;
  } catch (const std::exception&) {
    throw ConfigError("key '" + key + "': expected integer, got '" + value + "'");
  }
}

double to_double(const std::string& key, const std::string& value) {
  try {
    size_t pos = 0;
    double v = std::stod(value, &pos);
    if (pos != value.size()) throw std::invalid_argument(value);
    return v;
  } catch (const std::exception&) {
    throw ConfigError("key '" + key + "': expected number, got '" + value + "'");
  }
}

bool to_bool(const std::string& key, const std::string& value) {
  if (value == "true" || value == "1" || value == "on") return true;
  if (value == "false" || value == "0" || value == "off") return false;
  throw ConfigError("key '" + key + "': expected boolean, got '" + value + "'");
}

std::vector<size_t> to_size_list(const std::string& key, const std::string& value) {
  std::vector<size_t> out;
  std::stringstream ss(value);
  std::string part;
  while (std::getline(ss, part, ',')) {
    out.push_back(static_cast<size_t>(to_u64(key, trim(part))));
  }
  if (out.empty()) throw ConfigError("key '" + key + "': empty list");
  return out;
}

}  // namespace

std::map<std::string, std::string> parse_key_values(std::istream& in) {
  std::map<std::string, std::string> kv;
  std::string line;
  size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    std::string s = trim(line);
    if (s.empty() || s[0] == '#') continue;
    size_t eq = s.find('=');
    if (eq == std::string::npos) {
      throw ConfigError("config line " + std::to_string(lineno) +
                        ": expected key = value");
    }
    std::string key = trim(s.substr(0, eq));
    std::string value = trim(s.substr(eq + 1));
    if (key.empty()) {
      throw ConfigError("config line " + std::to_string(lineno) + ": empty key");
    }
    kv[key] = value;
  }
  return kv;
}

std::map<std::string, std::string> read_key_value_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open config file " + path);
  return parse_key_values(in);
}

void write_key_values(std::ostream& out,
                      const std::map<std::string, std::string>& kv) {
  for (const auto& [k, v] : kv) out << k << " = " << v << '\n';
}

void apply_config_keys(const std::map<std::string, std::string>& kv,
                       ModelConfig& model, TrainConfig& train) {
  for (const auto& [key, value] : kv) {
    if (key == "dim") {
      model.dim = to_u64(key, value);
    } else if (key == "t_max") {
      model.t_max = to_u64(key, value);
    } else if (key == "variant") {
      model.variant = parse_variant(value);
    } else if (key == "update_order") {
      model.update_order = parse_update_order(value);
    } else if (key == "msg_layers") {
      model.msg_layers = to_size_list(key, value);
    } else if (key == "vote_layers") {
      model.vote_layers = to_size_list(key, value);
    } else if (key == "layer_norm_eps") {
      model.layer_norm_eps = to_double(key, value);
    } else if (key == "batch") {
      train.batch = to_u64(key, value);
    } else if (key == "steps") {
      train.steps_per_epoch = to_u64(key, value);
    } else if (key == "epochs") {
      train.epochs = to_u64(key, value);
    } else if (key == "lr") {
      train.lr = to_double(key, value);
    } else if (key == "seed") {
      train.seed = to_u64(key, value);
    } else if (key == "l_max") {
      train.l_max = static_cast<int>(to_u64(key, value));
    } else if (key == "checkpoint_every") {
      train.checkpoint_every = to_u64(key, value);
    } else if (key == "deterministic") {
      train.deterministic = to_bool(key, value);
    } else if (key == "checked") {
      train.checked = to_bool(key, value);
    } else if (key == "grad_clip") {
      train.grad_clip = to_double(key, value);
    } else if (key == "weight_decay") {
      train.weight_decay = to_double(key, value);
    } else {
      throw ConfigError("unknown config key '" + key + "'");
    }
  }
}

}  // namespace kglink
