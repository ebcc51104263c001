#include "semsearch/core.hpp"

#include <algorithm>

namespace semsearch {

ElementId Dictionary::intern(std::string_view token) {
  auto it = ids_.find(std::string(token));
  if (it != ids_.end()) return it->second;
  ElementId id = static_cast<ElementId>(tokens_.size());
  tokens_.emplace_back(token);
  ids_.emplace(tokens_.back(), id);
  return id;
}

std::optional<ElementId> Dictionary::find(std::string_view token) const {
  auto it = ids_.find(std::string(token));
  if (it == ids_.end()) return std::nullopt;
  return it->second;
}

void Collection::add_set(std::vector<ElementId> elements) {
  std::sort(elements.begin(), elements.end());
  elements.erase(std::unique(elements.begin(), elements.end()), elements.end());
  CandidateSet set;
  set.id = static_cast<std::uint32_t>(sets.size());
  set.elements = std::move(elements);
  if (frequency.size() < dictionary.size()) frequency.resize(dictionary.size(), 0);
  for (ElementId e : set.elements) {
    if (e < frequency.size()) ++frequency[e];
  }
  sets.push_back(std::move(set));
}

QuerySet make_query(const std::vector<std::string>& tokens, const Dictionary& dictionary) {
  QuerySet query;
  query.oov_base = static_cast<ElementId>(dictionary.size());
  std::unordered_map<std::string, ElementId> seen_oov;
  for (const auto& token : tokens) {
    if (token.empty()) continue;
    if (auto id = dictionary.find(token)) {
      query.elements.push_back(*id);
    } else {
      auto it = seen_oov.find(token);
      if (it == seen_oov.end()) {
        ElementId id = query.oov_base + static_cast<ElementId>(query.oov_tokens.size());
        query.oov_tokens.push_back(token);
        seen_oov.emplace(token, id);
        query.elements.push_back(id);
      }
    }
  }
  std::sort(query.elements.begin(), query.elements.end());
  query.elements.erase(std::unique(query.elements.begin(), query.elements.end()),
                       query.elements.end());
  return query;
}

void SearchParams::validate() const {
  if (k < 1) throw std::invalid_argument("k must be >= 1");
  if (!(alpha > 0.0 && alpha <= 1.0)) throw std::invalid_argument("alpha must be in (0, 1]");
  if (partitions < 1) throw std::invalid_argument("partitions must be >= 1");
  if (workers < 0) throw std::invalid_argument("workers must be >= 0");
  if (timeout_seconds && *timeout_seconds <= 0.0)
    throw std::invalid_argument("timeout must be positive");
}

std::uint32_t vanilla_overlap(const std::vector<ElementId>& a, const std::vector<ElementId>& b) {
  std::uint32_t count = 0;
  std::size_t i = 0, j = 0;
  while (i < a.size() && j < b.size()) {
    if (a[i] == b[j]) {
      ++count;
      ++i;
      ++j;
    } else if (a[i] < b[j]) {
      ++i;
    } else {
      ++j;
    }
  }
  return count;
}

}  // namespace semsearch
