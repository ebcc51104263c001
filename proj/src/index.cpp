#include "semsearch/index.hpp"

#include <algorithm>

namespace semsearch {

InvertedIndex InvertedIndex::build(const Collection& collection) {
  InvertedIndex index;
  index.postings_.resize(collection.dictionary.size());
  for (const auto& set : collection.sets) {
    for (ElementId e : set.elements) index.postings_[e].push_back(set.id);
    index.total_ += set.elements.size();
  }
  return index;
}

InvertedIndex InvertedIndex::build(const Collection& collection,
                                   std::span<const std::uint32_t> set_ids) {
  InvertedIndex index;
  index.postings_.resize(collection.dictionary.size());
  for (std::uint32_t sid : set_ids) {
    const auto& set = collection.sets[sid];
    for (ElementId e : set.elements) index.postings_[e].push_back(sid);
    index.total_ += set.elements.size();
  }
  // set ids arrive in input order; postings must be ascending
  for (auto& list : index.postings_) {
    if (!std::is_sorted(list.begin(), list.end())) std::sort(list.begin(), list.end());
  }
  return index;
}

void InvertedIndex::assign(std::vector<std::vector<std::uint32_t>> postings) {
  postings_ = std::move(postings);
  total_ = 0;
  for (const auto& list : postings_) total_ += list.size();
}

}  // namespace semsearch
