#pragma once

#include <cstdint>
#include <iosfwd>
#include <string>
#include <string_view>
#include <unordered_map>
#include <utility>
#include <vector>

namespace kglink {

using EntityId = uint32_t;
using RelationId = uint32_t;
using TypeId = uint32_t;
using FactId = uint32_t;

// Directed fact between two entities, always stored in canonical (non-inverse)
// orientation. Parallel facts between the same pair are distinct by id.
struct Fact {
  FactId id;
  EntityId source;
  RelationId relation;
  EntityId target;
};

// Name <-> dense id table. Ids are assigned in first-sighting order, which
// makes loads reproducible.
class Interner {
 public:
  uint32_t intern(std::string_view name);
  const uint32_t* lookup(std::string_view name) const;
  const std::string& name(uint32_t id) const { return names_[id]; }
  size_t size() const { return names_.size(); }
  const std::vector<std::string>& names() const { return names_; }

 private:
  std::unordered_map<std::string, uint32_t> ids_;
  std::vector<std::string> names_;
};

// Knowledge base of typed entities and directed relational facts. Relation
// names carrying the inverse marker prefix "_" are folded onto their
// canonical form with source/target swapped. Immutable once loaded; safe to
// share across concurrent readers.
class KnowledgeBase {
 public:
  static constexpr char kInverseMarker = '_';
  static constexpr char kCommentMarker = '#';

  // Returns the canonical relation id plus whether `name` was inverse-marked.
  std::pair<RelationId, bool> intern_relation(std::string_view name);
  EntityId intern_entity(std::string_view name);
  TypeId intern_type(std::string_view name);

  FactId add_fact(std::string_view source, std::string_view relation,
                  std::string_view target);
  void add_type(std::string_view entity, std::string_view type);

  // Facts file: `source<TAB>relation<TAB>target` per line.
  // Types file: `entity<TAB>type1,type2,...` per line. '#' starts a comment.
  static KnowledgeBase load(std::istream& facts, std::istream& types);
  void save(std::ostream& facts, std::ostream& types) const;

  const std::vector<TypeId>& entity_types(EntityId e) const;
  const std::vector<FactId>& facts_from(EntityId e) const;
  const std::vector<FactId>& facts_into(EntityId e) const;
  const Fact& fact(FactId f) const { return facts_[f]; }
  const std::vector<Fact>& facts() const { return facts_; }

  size_t num_entities() const { return entities_.size(); }
  size_t num_relations() const { return relations_.size(); }
  size_t num_types() const { return types_.size(); }
  size_t num_facts() const { return facts_.size(); }
  // Maximum number of types on any single entity.
  size_t max_types_per_entity() const { return max_types_; }

  const Interner& entities() const { return entities_; }
  const Interner& relations() const { return relations_; }
  const Interner& types() const { return types_; }

 private:
  void ensure_entity_slots(EntityId e);

  Interner entities_;
  Interner relations_;
  Interner types_;
  std::vector<Fact> facts_;
  std::vector<std::vector<TypeId>> entity_types_;
  std::vector<std::vector<FactId>> as_source_;
  std::vector<std::vector<FactId>> as_target_;
  size_t max_types_ = 0;
};

// Strips the inverse marker if present. "_capitalOf" -> ("capitalOf", true).
std::pair<std::string_view, bool> strip_inverse(std::string_view relation);

}  // namespace kglink
