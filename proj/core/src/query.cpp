#include "slh/query.hpp"

#include <algorithm>
#include <cctype>
#include <deque>
#include <fstream>
#include <sstream>

namespace slh {

std::string normalize_text(std::string_view text) {
  std::string out;
  out.reserve(text.size());
  bool pending_space = false;
  for (unsigned char c : text) {
    if (std::isalnum(c)) {
      if (pending_space && !out.empty()) out.push_back(' ');
      pending_space = false;
      out.push_back(char(std::tolower(c)));
    } else {
      pending_space = true;
    }
  }
  return out;
}

std::vector<std::string> normalize_terms(std::string_view query) {
  std::vector<std::string> terms;
  std::istringstream in(normalize_text(query));
  std::string tok;
  while (in >> tok) terms.push_back(tok);
  return terms;
}

void SynonymDictionary::add(std::string_view term,
                            const std::vector<std::string>& synonyms) {
  std::string key = normalize_text(term);
  if (key.empty()) throw Error(Errc::bad_argument, "empty dictionary term");
  auto& set = entries_[key];
  for (const auto& s : synonyms) {
    std::string syn = normalize_text(s);
    if (!syn.empty()) set.insert(std::move(syn));
  }
}

SynonymDictionary SynonymDictionary::parse(std::string_view text) {
  SynonymDictionary dict;
  size_t pos = 0, lineno = 0;
  while (pos <= text.size()) {
    size_t eol = text.find('\n', pos);
    if (eol == std::string_view::npos) eol = text.size();
    std::string_view line = text.substr(pos, eol - pos);
    pos = eol + 1;
    ++lineno;

    size_t hash = line.find('#');
    if (hash != std::string_view::npos) line = line.substr(0, hash);
    if (normalize_text(line).empty()) continue;

    size_t colon = line.find(':');
    if (colon == std::string_view::npos) {
      throw Error(Errc::parse_error,
                  "dictionary line " + std::to_string(lineno) + " has no ':'");
    }
    std::string_view term = line.substr(0, colon);
    std::string_view rest = line.substr(colon + 1);
    std::vector<std::string> synonyms;
    size_t start = 0;
    while (start <= rest.size()) {
      size_t comma = rest.find(',', start);
      if (comma == std::string_view::npos) comma = rest.size();
      synonyms.emplace_back(rest.substr(start, comma - start));
      start = comma + 1;
    }
    if (normalize_text(term).empty()) {
      throw Error(Errc::parse_error,
                  "dictionary line " + std::to_string(lineno) + " has no term");
    }
    dict.add(term, synonyms);
  }
  return dict;
}

SynonymDictionary SynonymDictionary::load(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(Errc::io_error, "cannot open " + path.string());
  std::ostringstream buf;
  buf << in.rdbuf();
  return parse(buf.str());
}

std::set<std::string> SynonymDictionary::expand_term(std::string_view term) const {
  std::set<std::string> out;
  std::deque<std::string> frontier;
  std::string start = normalize_text(term);
  if (start.empty()) return out;
  out.insert(start);
  frontier.push_back(std::move(start));
  while (!frontier.empty()) {
    std::string cur = std::move(frontier.front());
    frontier.pop_front();
    auto it = entries_.find(cur);
    if (it == entries_.end()) continue;
    for (const auto& syn : it->second) {
      if (out.insert(syn).second) frontier.push_back(syn);
    }
  }
  return out;
}

std::set<std::string> expand(std::string_view query, const SynonymDictionary& dict) {
  std::set<std::string> out;
  for (const auto& tok : normalize_terms(query)) {
    auto e = dict.expand_term(tok);
    out.insert(e.begin(), e.end());
  }
  return out;
}

namespace {

bool contains_phrase(const std::string& padded_text, const std::string& term) {
  return padded_text.find(" " + term + " ") != std::string::npos;
}

}  // namespace

QueryResult run_query(std::string_view query, const SynonymDictionary& dict,
                      const Ledger& ledger) {
  QueryResult result;
  result.terms = expand(query, dict);
  if (result.terms.empty()) return result;

  ledger.for_each([&](const HealthRecord& rec, const DhfProof&) {
    std::string text(reinterpret_cast<const char*>(rec.payload.data()),
                     rec.payload.size());
    std::string padded = " " + normalize_text(text) + " ";
    QueryMatch m;
    for (const auto& term : result.terms) {
      if (contains_phrase(padded, term)) m.matched.push_back(term);
    }
    if (m.matched.empty()) return;
    m.record_id = rec.record_id;
    m.created_at = rec.created_at;
    m.score = m.matched.size();
    result.matches.push_back(std::move(m));
  });

  std::sort(result.matches.begin(), result.matches.end(),
            [](const QueryMatch& a, const QueryMatch& b) {
              if (a.score != b.score) return a.score > b.score;
              if (a.created_at != b.created_at) return a.created_at > b.created_at;
              return a.record_id < b.record_id;
            });
  return result;
}

}  // namespace slh
