#pragma once

#include <iosfwd>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "kglink/kb.hpp"

namespace kglink {

// Query row as it appears on disk: `e_s<TAB>e_t<TAB>relation<TAB>{+,-}`.
// Negative rows keep their relation name for per-relation attribution but
// are relabeled to the null class for training and scoring.
struct QueryRecord {
  std::string source;
  std::string target;
  std::string relation;
  bool positive = true;
};

std::vector<QueryRecord> load_queries(std::istream& in);
void save_queries(std::ostream& out, std::span<const QueryRecord> records);

// Target relation classes. Holds the distinct target relation names in
// sorted order plus the null class last, so the class layout is independent
// of query file ordering.
class TargetVocab {
 public:
  static constexpr const char* kNullName = "null";

  TargetVocab() = default;
  explicit TargetVocab(std::vector<std::string> sorted_names);

  static TargetVocab from_queries(std::span<const QueryRecord> records);

  size_t classes() const { return names_.size() + 1; }  // +1 for null
  int null_class() const { return static_cast<int>(names_.size()); }
  const std::string& class_name(int cls) const;
  // Class index of a relation name; nullopt if unknown.
  std::optional<int> class_of(const std::string& relation) const;
  const std::vector<std::string>& names() const { return names_; }

 private:
  std::vector<std::string> names_;  // sorted, null excluded
};

// Query with names resolved against a KB and target vocabulary.
struct ResolvedQuery {
  EntityId source = 0;
  EntityId target = 0;
  int label = 0;  // class index; negatives carry the null class
  bool positive = true;
  std::string relation;  // attributed relation, kept for reporting
};

// Resolves records; rows whose entities are absent from the KB are dropped
// and their indices reported in `skipped`.
std::vector<ResolvedQuery> resolve_queries(const KnowledgeBase& kb,
                                           std::span<const QueryRecord> records,
                                           const TargetVocab& vocab,
                                           std::vector<size_t>* skipped = nullptr);

}  // namespace kglink
