#include "kglink/synth.hpp"

#include <algorithm>
#include <map>
#include <set>
#include <sstream>

#include "kglink/errors.hpp"
#include "kglink/rng.hpp"

namespace kglink {

void SynthSpec::validate() const {
  if (entities < 3) throw ConfigError("synth: entities must be >= 3");
  if (base_relations < 1) throw ConfigError("synth: base_relations must be >= 1");
  if (rules < 1) throw ConfigError("synth: rules must be >= 1");
  if (rule_body_length != 2 && rule_body_length != 3) {
    throw ConfigError("synth: rule_body_length must be 2 or 3");
  }
  if (density <= 0.0 || density > 1.0) {
    throw ConfigError("synth: density must be in (0, 1]");
  }
  if (train_fraction <= 0.0 || train_fraction > 1.0) {
    throw ConfigError("synth: train_fraction must be in (0, 1]");
  }
  if (negative_ratio <= 0.0) throw ConfigError("synth: negative_ratio must be > 0");
  if (inverse_line_fraction < 0.0 || inverse_line_fraction > 1.0) {
    throw ConfigError("synth: inverse_line_fraction must be in [0, 1]");
  }
  const double max_rules = static_cast<double>(base_relations) *
                           static_cast<double>(base_relations);
  if (static_cast<double>(rules) > max_rules) {
    throw ConfigError("synth: more rules than distinct relation pairs");
  }
}

SynthSpec parse_synth_spec(const std::map<std::string, std::string>& kv) {
  SynthSpec spec;
  for (const auto& [key, value] : kv) {
    try {
      if (key == "entities") {
        spec.entities = std::stoull(value);
      } else if (key == "base_relations") {
        spec.base_relations = std::stoull(value);
      } else if (key == "rules") {
        spec.rules = std::stoull(value);
      } else if (key == "rule_body_length") {
        spec.rule_body_length = std::stoull(value);
      } else if (key == "density") {
        spec.density = std::stod(value);
      } else if (key == "seed") {
        spec.seed = std::stoull(value);
      } else if (key == "train_fraction") {
        spec.train_fraction = std::stod(value);
      } else if (key == "negative_ratio") {
        spec.negative_ratio = std::stod(value);
      } else if (key == "typed") {
        spec.typed = value == "true" || value == "1" || value == "on";
      } else if (key == "base_type_kinds") {
        spec.base_type_kinds = std::stoull(value);
      } else if (key == "inverse_line_fraction") {
        spec.inverse_line_fraction = std::stod(value);
      } else {
        throw ConfigError("synth: unknown spec key '" + key + "'");
      }
    } catch (const ConfigError&) {
      throw;
    } catch (const std::exception&) {
      throw ConfigError("synth: bad value for key '" + key + "': " + value);
    }
  }
  spec.validate();
  return spec;
}

namespace {

struct Triple {
  uint32_t source, relation, target;
  bool operator<(const Triple& o) const {
    if (source != o.source) return source < o.source;
    if (relation != o.relation) return relation < o.relation;
    return target < o.target;
  }
};

using Pair = std::pair<uint32_t, uint32_t>;

// All pairs connected by the rule's body as a simple directed path, walked
// over per-relation adjacency. Witness paths carry the matching rule index.
void match_rule(const std::vector<std::vector<std::vector<uint32_t>>>& out,
                const std::vector<uint32_t>& body, size_t rule_index,
                std::map<Pair, size_t>& label,
                std::vector<std::pair<size_t, std::vector<uint32_t>>>* witnesses) {
  const size_t n = out[0].size();
  std::vector<uint32_t> path;
  auto walk = [&](auto&& self, uint32_t v, size_t depth) -> void {
    if (depth == body.size()) {
      Pair p{path.front(), v};
      auto it = label.find(p);
      if (it == label.end()) label.emplace(p, rule_index);
      if (witnesses) {
        auto full = path;
        full.push_back(v);
        witnesses->emplace_back(rule_index, std::move(full));
      }
      return;
    }
    path.push_back(v);
    for (uint32_t w : out[body[depth]][v]) {
      if (std::find(path.begin(), path.end(), w) != path.end()) continue;
      self(self, w, depth + 1);
    }
    path.pop_back();
  };
  for (uint32_t u = 0; u < n; ++u) walk(walk, u, 0);
}

}  // namespace

SynthOutput generate(const SynthSpec& spec) {
  spec.validate();
  Rng rng(spec.seed);
  const size_t n = spec.entities;
  const size_t nr = spec.base_relations;

  auto entity_name = [](uint32_t e) { return "e" + std::to_string(e); };
  auto relation_name = [](uint32_t r) { return "r" + std::to_string(r); };

  // Rule bodies: distinct relation tuples, targets named target<k>.
  SynthOutput out;
  std::set<std::vector<uint32_t>> used_bodies;
  std::vector<std::vector<uint32_t>> rule_bodies;
  while (rule_bodies.size() < spec.rules) {
    std::vector<uint32_t> body;
    for (size_t i = 0; i < spec.rule_body_length; ++i) {
      body.push_back(static_cast<uint32_t>(rng.below(nr)));
    }
    if (!used_bodies.insert(body).second) continue;
    rule_bodies.push_back(body);
  }
  for (size_t k = 0; k < rule_bodies.size(); ++k) {
    CompositionRule rule;
    for (uint32_t r : rule_bodies[k]) rule.body.push_back(relation_name(r));
    rule.target = "target" + std::to_string(k);
    out.rules.push_back(std::move(rule));
  }

  // Base facts: distinct (source, relation, target) triples, no self loops.
  const auto want =
      static_cast<size_t>(spec.density * static_cast<double>(n) *
                          static_cast<double>(n - 1));
  const size_t max_triples = n * (n - 1) * nr;
  const size_t fact_count = std::max<size_t>(1, std::min(want, max_triples));
  std::set<Triple> seen;
  std::vector<Triple> triples;
  while (triples.size() < fact_count) {
    Triple t;
    t.source = static_cast<uint32_t>(rng.below(n));
    t.target = static_cast<uint32_t>(rng.below(n));
    if (t.source == t.target) continue;
    t.relation = static_cast<uint32_t>(rng.below(nr));
    if (!seen.insert(t).second) continue;
    triples.push_back(t);
  }

  // Emit fact lines; a seeded subset takes the inverse-marked form.
  for (const Triple& t : triples) {
    std::ostringstream line;
    if (rng.chance(spec.inverse_line_fraction)) {
      line << entity_name(t.target) << '\t' << '_' << relation_name(t.relation)
           << '\t' << entity_name(t.source);
    } else {
      line << entity_name(t.source) << '\t' << relation_name(t.relation) << '\t'
           << entity_name(t.target);
    }
    out.fact_lines.push_back(line.str());
  }
  for (const std::string& line : out.fact_lines) {
    const size_t tab1 = line.find('\t');
    const size_t tab2 = line.find('\t', tab1 + 1);
    out.kb.add_fact(line.substr(0, tab1), line.substr(tab1 + 1, tab2 - tab1 - 1),
                    line.substr(tab2 + 1));
  }

  // Rule matching over per-relation adjacency; lowest rule index wins when
  // several rules connect the same pair.
  std::vector<std::vector<std::vector<uint32_t>>> adjacency(
      nr, std::vector<std::vector<uint32_t>>(n));
  for (const Triple& t : triples) adjacency[t.relation][t.source].push_back(t.target);
  std::map<Pair, size_t> positive_label;
  std::vector<std::pair<size_t, std::vector<uint32_t>>> witnesses;
  for (size_t k = 0; k < rule_bodies.size(); ++k) {
    match_rule(adjacency, rule_bodies[k], k, positive_label,
               spec.typed ? &witnesses : nullptr);
  }
  if (positive_label.empty()) {
    throw InputError("synth: spec produced no rule instances; raise density "
                     "or relax rules");
  }

  // Negatives: pairs connected by some body-length relation path that match
  // no rule, attributed to a seeded random target relation.
  std::set<Pair> negative_candidates;
  {
    std::vector<uint32_t> any_body(spec.rule_body_length, 0);
    std::vector<std::vector<std::vector<uint32_t>>> merged(
        1, std::vector<std::vector<uint32_t>>(n));
    for (const Triple& t : triples) merged[0][t.source].push_back(t.target);
    std::map<Pair, size_t> connected;
    match_rule(merged, any_body, 0, connected, nullptr);
    for (const auto& [pair, _] : connected) {
      if (!positive_label.count(pair)) negative_candidates.insert(pair);
    }
  }

  // Entity types: a base kind for everyone plus role types marking the
  // endpoints of rule-witnessing paths, so types correlate with rule
  // participation. Types are interned entity by entity, matching the emitted
  // types file, so a reload reproduces identical type ids.
  if (spec.typed) {
    std::vector<std::set<size_t>> src_roles(n), dst_roles(n);
    for (const auto& [k, path] : witnesses) {
      src_roles[path.front()].insert(k);
      dst_roles[path.back()].insert(k);
    }
    for (uint32_t e = 0; e < n; ++e) {
      out.kb.add_type(entity_name(e),
                      "kind" + std::to_string(e % spec.base_type_kinds));
      for (size_t k : src_roles[e]) {
        out.kb.add_type(entity_name(e), "role" + std::to_string(k) + "_src");
      }
      for (size_t k : dst_roles[e]) {
        out.kb.add_type(entity_name(e), "role" + std::to_string(k) + "_dst");
      }
    }
  }

  // Queries: positives from the label map, negatives sampled from the
  // candidate pool, each split train/test with derived seeds.
  std::vector<QueryRecord> positives;
  for (const auto& [pair, k] : positive_label) {
    positives.push_back(QueryRecord{entity_name(pair.first),
                                    entity_name(pair.second),
                                    out.rules[k].target, true});
  }
  std::vector<QueryRecord> negatives;
  {
    std::vector<Pair> pool(negative_candidates.begin(), negative_candidates.end());
    Rng neg_rng(Rng::derive(spec.seed, 0x4e454741ULL));
    neg_rng.shuffle(pool);
    const auto want_neg = static_cast<size_t>(spec.negative_ratio *
                                              static_cast<double>(positives.size()));
    const size_t take = std::min(std::max<size_t>(want_neg, 1), pool.size());
    for (size_t i = 0; i < take; ++i) {
      const size_t k = neg_rng.below(out.rules.size());
      negatives.push_back(QueryRecord{entity_name(pool[i].first),
                                      entity_name(pool[i].second),
                                      out.rules[k].target, false});
    }
  }
  if (negatives.empty()) {
    throw InputError("synth: no negative candidates; raise density");
  }

  auto split = [&](std::vector<QueryRecord> records, uint64_t salt) {
    Rng split_rng(Rng::derive(spec.seed, salt));
    split_rng.shuffle(records);
    const auto cut = static_cast<size_t>(spec.train_fraction *
                                         static_cast<double>(records.size()));
    std::vector<QueryRecord> train(records.begin(), records.begin() + cut);
    std::vector<QueryRecord> test(records.begin() + cut, records.end());
    return std::make_pair(std::move(train), std::move(test));
  };
  auto [train_pos, test_pos] = split(std::move(positives), 0x706f73ULL);
  auto [train_neg, test_neg] = split(std::move(negatives), 0x6e6567ULL);

  out.train_queries = std::move(train_pos);
  out.train_queries.insert(out.train_queries.end(), train_neg.begin(),
                           train_neg.end());
  out.test_queries = std::move(test_pos);
  out.test_queries.insert(out.test_queries.end(), test_neg.begin(),
                          test_neg.end());
  return out;
}

std::string oracle_label(const KnowledgeBase& kb, EntityId source, EntityId target,
                         std::span<const CompositionRule> rules) {
  for (const CompositionRule& rule : rules) {
    std::vector<RelationId> body;
    bool resolvable = true;
    for (const std::string& name : rule.body) {
      const uint32_t* id = kb.relations().lookup(name);
      if (!id) {
        resolvable = false;
        break;
      }
      body.push_back(*id);
    }
    if (!resolvable) continue;

    std::vector<EntityId> path{source};
    auto walk = [&](auto&& self, EntityId v, size_t depth) -> bool {
      if (depth == body.size()) return v == target;
      for (FactId f : kb.facts_from(v)) {
        const Fact& fact = kb.fact(f);
        if (fact.relation != body[depth]) continue;
        if (std::find(path.begin(), path.end(), fact.target) != path.end()) {
          continue;
        }
        path.push_back(fact.target);
        if (self(self, fact.target, depth + 1)) return true;
        path.pop_back();
      }
      return false;
    };
    if (walk(walk, source, 0)) return rule.target;
  }
  return TargetVocab::kNullName;
}

}  // namespace kglink
