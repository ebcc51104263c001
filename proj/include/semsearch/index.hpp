#pragma once

#include <span>
#include <vector>

#include "semsearch/core.hpp"

namespace semsearch {

/// Inverted index: element id -> ascending list of the sets containing it.
class InvertedIndex {
 public:
  static InvertedIndex build(const Collection& collection);
  /// Postings restricted to a subset of set ids (one search partition).
  static InvertedIndex build(const Collection& collection,
                             std::span<const std::uint32_t> set_ids);

  std::span<const std::uint32_t> postings(ElementId t) const {
    if (t >= postings_.size()) return {};
    return postings_[t];
  }
  std::size_t vocabulary_size() const { return postings_.size(); }
  std::size_t total_postings() const { return total_; }

  bool operator==(const InvertedIndex& other) const { return postings_ == other.postings_; }

  const std::vector<std::vector<std::uint32_t>>& raw() const { return postings_; }
  void assign(std::vector<std::vector<std::uint32_t>> postings);

 private:
  std::vector<std::vector<std::uint32_t>> postings_;
  std::size_t total_ = 0;
};

}  // namespace semsearch
