#include "kglink/kb.hpp"

#include <algorithm>
#include <istream>
#include <ostream>
#include <sstream>

#include "kglink/errors.hpp"

namespace kglink {

uint32_t Interner::intern(std::string_view name) {
  auto it = ids_.find(std::string(name));
  if (it != ids_.end()) return it->second;
  uint32_t id = static_cast<uint32_t>(names_.size());
  names_.emplace_back(name);
  ids_.emplace(names_.back(), id);
  return id;
}

const uint32_t* Interner::lookup(std::string_view name) const {
  auto it = ids_.find(std::string(name));
  return it == ids_.end() ? nullptr : &it->second;
}

std::pair<std::string_view, bool> strip_inverse(std::string_view relation) {
  if (!relation.empty() && relation.front() == KnowledgeBase::kInverseMarker) {
    return {relation.substr(1), true};
  }
  return {relation, false};
}

std::pair<RelationId, bool> KnowledgeBase::intern_relation(std::string_view name) {
  auto [canonical, inverted] = strip_inverse(name);
  if (canonical.empty()) {
    throw InputError("relation name empty" +
                     std::string(inverted ? " after inverse marker" : ""));
  }
  return {relations_.intern(canonical), inverted};
}

EntityId KnowledgeBase::intern_entity(std::string_view name) {
  if (name.empty()) throw InputError("entity name empty");
  EntityId e = entities_.intern(name);
  ensure_entity_slots(e);
  return e;
}

TypeId KnowledgeBase::intern_type(std::string_view name) {
  if (name.empty()) throw InputError("type name empty");
  return types_.intern(name);
}

void KnowledgeBase::ensure_entity_slots(EntityId e) {
  if (e >= entity_types_.size()) {
    entity_types_.resize(e + 1);
    as_source_.resize(e + 1);
    as_target_.resize(e + 1);
  }
}

FactId KnowledgeBase::add_fact(std::string_view source, std::string_view relation,
                               std::string_view target) {
  EntityId s = intern_entity(source);
  EntityId t = intern_entity(target);
  auto [r, inverted] = intern_relation(relation);
  if (inverted) std::swap(s, t);
  FactId id = static_cast<FactId>(facts_.size());
  facts_.push_back(Fact{id, s, r, t});
  as_source_[s].push_back(id);
  as_target_[t].push_back(id);
  return id;
}

void KnowledgeBase::add_type(std::string_view entity, std::string_view type) {
  EntityId e = intern_entity(entity);
  TypeId t = intern_type(type);
  auto& list = entity_types_[e];
  if (std::find(list.begin(), list.end(), t) != list.end()) return;  // dedup
  list.push_back(t);
  max_types_ = std::max(max_types_, list.size());
}

namespace {

// Splits on single tabs; returns false for comment/blank lines.
bool content_line(const std::string& line) {
  for (char c : line) {
    if (c == ' ' || c == '\t' || c == '\r') continue;
    return c != KnowledgeBase::kCommentMarker;
  }
  return false;
}

std::vector<std::string> split(const std::string& line, char sep) {
  std::vector<std::string> out;
  size_t start = 0;
  while (true) {
    size_t pos = line.find(sep, start);
    if (pos == std::string::npos) {
      out.push_back(line.substr(start));
      break;
    }
    out.push_back(line.substr(start, pos - start));
    start = pos + 1;
  }
  if (!out.empty() && !out.back().empty() && out.back().back() == '\r') {
    out.back().pop_back();
  }
  return out;
}

}  // namespace

KnowledgeBase KnowledgeBase::load(std::istream& facts, std::istream& types) {
  KnowledgeBase kb;
  std::string line;
  size_t lineno = 0;
  while (std::getline(facts, line)) {
    ++lineno;
    if (!content_line(line)) continue;
    auto fields = split(line, '\t');
    if (fields.size() != 3 || fields[0].empty() || fields[1].empty() ||
        fields[2].empty()) {
      throw InputError("facts line " + std::to_string(lineno) +
                       ": expected source<TAB>relation<TAB>target");
    }
    kb.add_fact(fields[0], fields[1], fields[2]);
  }
  lineno = 0;
  while (std::getline(types, line)) {
    ++lineno;
    if (!content_line(line)) continue;
    auto fields = split(line, '\t');
    if (fields.size() != 2 || fields[0].empty()) {
      throw InputError("types line " + std::to_string(lineno) +
                       ": expected entity<TAB>type1,type2,...");
    }
    for (const auto& type : split(fields[1], ',')) {
      if (type.empty()) {
        throw InputError("types line " + std::to_string(lineno) +
                         ": empty type name");
      }
      kb.add_type(fields[0], type);
    }
  }
  return kb;
}

void KnowledgeBase::save(std::ostream& facts, std::ostream& types) const {
  for (const Fact& f : facts_) {
    facts << entities_.name(f.source) << '\t' << relations_.name(f.relation)
          << '\t' << entities_.name(f.target) << '\n';
  }
  for (EntityId e = 0; e < entity_types_.size(); ++e) {
    if (entity_types_[e].empty()) continue;
    types << entities_.name(e) << '\t';
    for (size_t i = 0; i < entity_types_[e].size(); ++i) {
      if (i) types << ',';
      types << types_.name(entity_types_[e][i]);
    }
    types << '\n';
  }
}

const std::vector<TypeId>& KnowledgeBase::entity_types(EntityId e) const {
  if (e >= entity_types_.size()) {
    throw InputError("entity id " + std::to_string(e) + " out of range");
  }
  return entity_types_[e];
}

const std::vector<FactId>& KnowledgeBase::facts_from(EntityId e) const {
  if (e >= as_source_.size()) {
    throw InputError("entity id " + std::to_string(e) + " out of range");
  }
  return as_source_[e];
}

const std::vector<FactId>& KnowledgeBase::facts_into(EntityId e) const {
  if (e >= as_target_.size()) {
    throw InputError("entity id " + std::to_string(e) + " out of range");
  }
  return as_target_[e];
}

}  // namespace kglink
