#include "kglink/queries.hpp"

#include <algorithm>
#include <istream>
#include <ostream>
#include <set>

#include "kglink/errors.hpp"

namespace kglink {

std::vector<QueryRecord> load_queries(std::istream& in) {
  std::vector<QueryRecord> out;
  std::string line;
  size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    bool blank = true;
    for (char c : line) {
      if (c != ' ' && c != '\t') {
        blank = false;
        break;
      }
    }
    if (blank || line[0] == KnowledgeBase::kCommentMarker) continue;

    std::vector<std::string> fields;
    size_t start = 0;
    while (true) {
      size_t pos = line.find('\t', start);
      if (pos == std::string::npos) {
        fields.push_back(line.substr(start));
        break;
      }
      fields.push_back(line.substr(start, pos - start));
      start = pos + 1;
    }
    if (fields.size() != 4 || fields[0].empty() || fields[1].empty() ||
        fields[2].empty() || (fields[3] != "+" && fields[3] != "-")) {
      throw InputError("queries line " + std::to_string(lineno) +
                       ": expected e_s<TAB>e_t<TAB>relation<TAB>{+,-}");
    }
    out.push_back(QueryRecord{fields[0], fields[1], fields[2], fields[3] == "+"});
  }
  return out;
}

void save_queries(std::ostream& out, std::span<const QueryRecord> records) {
  for (const QueryRecord& q : records) {
    out << q.source << '\t' << q.target << '\t' << q.relation << '\t'
        << (q.positive ? '+' : '-') << '\n';
  }
}

TargetVocab::TargetVocab(std::vector<std::string> sorted_names)
    : names_(std::move(sorted_names)) {
  for (const auto& n : names_) {
    if (n == kNullName) {
      throw InputError("target vocab: 'null' is reserved for the negative class");
    }
  }
}

TargetVocab TargetVocab::from_queries(std::span<const QueryRecord> records) {
  std::set<std::string> distinct;
  for (const QueryRecord& q : records) {
    if (q.relation == kNullName) {
      throw InputError("query names the reserved relation 'null'");
    }
    distinct.insert(q.relation);
  }
  return TargetVocab(std::vector<std::string>(distinct.begin(), distinct.end()));
}

const std::string& TargetVocab::class_name(int cls) const {
  static const std::string null_name = kNullName;
  if (cls == null_class()) return null_name;
  return names_.at(static_cast<size_t>(cls));
}

std::optional<int> TargetVocab::class_of(const std::string& relation) const {
  auto it = std::lower_bound(names_.begin(), names_.end(), relation);
  if (it == names_.end() || *it != relation) return std::nullopt;
  return static_cast<int>(it - names_.begin());
}

std::vector<ResolvedQuery> resolve_queries(const KnowledgeBase& kb,
                                           std::span<const QueryRecord> records,
                                           const TargetVocab& vocab,
                                           std::vector<size_t>* skipped) {
  std::vector<ResolvedQuery> out;
  for (size_t i = 0; i < records.size(); ++i) {
    const QueryRecord& q = records[i];
    const uint32_t* s = kb.entities().lookup(q.source);
    const uint32_t* t = kb.entities().lookup(q.target);
    if (!s || !t) {
      if (skipped) skipped->push_back(i);
      continue;
    }
    auto cls = vocab.class_of(q.relation);
    if (!cls) {
      throw MismatchError("query relation '" + q.relation +
                          "' not in target vocabulary");
    }
    ResolvedQuery r;
    r.source = *s;
    r.target = *t;
    r.positive = q.positive;
    r.relation = q.relation;
    r.label = q.positive ? *cls : vocab.null_class();
    out.push_back(std::move(r));
  }
  return out;
}

}  // namespace kglink
