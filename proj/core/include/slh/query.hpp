#pragma once

#include "slh/ledger.hpp"

#include <filesystem>
#include <map>
#include <set>
#include <string>
#include <string_view>
#include <vector>

namespace slh {

// Lowercases ASCII, maps every non-alphanumeric byte to a space, collapses
// runs, trims. All matching happens in this normal form, so "Blood-Pressure"
// and "blood pressure" are the same phrase.
std::string normalize_text(std::string_view text);

// Whitespace tokens of normalize_text(query).
std::vector<std::string> normalize_terms(std::string_view query);

// term -> synonyms, loaded from a text resource. Expansion follows the
// synonym graph transitively and always keeps the original term, so
// expanding an already-expanded set changes nothing.
class SynonymDictionary {
 public:
  // one entry per line: "term: synonym, synonym"; '#' comments, blank lines
  static SynonymDictionary parse(std::string_view text);
  static SynonymDictionary load(const std::filesystem::path& path);

  void add(std::string_view term, const std::vector<std::string>& synonyms);

  // reflexive transitive closure over the synonym graph
  std::set<std::string> expand_term(std::string_view term) const;

  size_t size() const { return entries_.size(); }

 private:
  std::map<std::string, std::set<std::string>> entries_;
};

// Union of expand_term over each token of the query. Phrases reached
// through the dictionary stay whole; only the user's query is tokenized.
std::set<std::string> expand(std::string_view query, const SynonymDictionary& dict);

struct QueryMatch {
  RecordId record_id{};
  uint64_t created_at = 0;
  size_t score = 0;                  // distinct expanded terms present
  std::vector<std::string> matched;  // sorted
};

struct QueryResult {
  std::set<std::string> terms;      // expanded set the scan used
  std::vector<QueryMatch> matches;  // score desc, created_at desc, id asc
};

// Full scan: a record matches a term when the term's tokens appear
// contiguously in the normalized payload text. Scores count distinct
// matched terms; ties rank newer records first.
QueryResult run_query(std::string_view query, const SynonymDictionary& dict,
                      const Ledger& ledger);

}  // namespace slh
