#pragma once

#include <cstdint>
#include <map>
#include <span>
#include <string>
#include <vector>

#include "kglink/kb.hpp"
#include "kglink/queries.hpp"

namespace kglink {

// Relation composition rule: chaining the body relations (in order) between
// two entities implies the target relation between them.
struct CompositionRule {
  std::vector<std::string> body;  // 2 or 3 base relation names
  std::string target;
};

// Parameters for the planted-rule benchmark generator. Base facts are
// sampled at the given density; pairs connected by a rule body become
// positive queries for the rule's target relation (the direct target fact is
// withheld from the KB); negatives are path-connected pairs matching no rule.
struct SynthSpec {
  size_t entities = 300;
  size_t base_relations = 10;
  size_t rules = 4;
  size_t rule_body_length = 2;  // 2 or 3
  double density = 0.02;        // facts ~= density * entities * (entities-1)
  uint64_t seed = 7;
  double train_fraction = 0.8;
  double negative_ratio = 1.0;  // negatives per positive
  bool typed = true;            // emit role-correlated entity types
  size_t base_type_kinds = 5;
  double inverse_line_fraction = 0.2;  // fact lines emitted in inverse form

  void validate() const;
};

SynthSpec parse_synth_spec(const std::map<std::string, std::string>& kv);

struct SynthOutput {
  KnowledgeBase kb;
  std::vector<CompositionRule> rules;
  std::vector<QueryRecord> train_queries;
  std::vector<QueryRecord> test_queries;
  // Fact lines as they should be written to disk; a seeded subset uses the
  // inverse-marked relation with swapped endpoints to exercise folding.
  std::vector<std::string> fact_lines;
};

SynthOutput generate(const SynthSpec& spec);

// Exhaustive check of every rule against every connecting body-length path;
// returns the lowest-index matching rule's target, or "null".
std::string oracle_label(const KnowledgeBase& kb, EntityId source, EntityId target,
                         std::span<const CompositionRule> rules);

}  // namespace kglink
