#pragma once

#include <optional>
#include <unordered_map>
#include <vector>

#include "semsearch/core.hpp"
#include "semsearch/similarity.hpp"

namespace semsearch {

/// All dictionary elements with sim(q, t) >= alpha, sorted by similarity
/// descending, ties by id ascending. The scan runs over the dictionary in
/// fixed-size batches; batching has no effect on the output.
std::vector<std::pair<ElementId, double>> brute_force_neighbors(ElementId q,
                                                                const SimilarityProvider& provider,
                                                                const Dictionary& dictionary,
                                                                double alpha);

/// Per-query-element neighbor lists, shared by every stream opened for the
/// same query. A query element's own identity entry is pinned to the front
/// of its list so the identity tuple is always the first one emitted for it.
class NeighborLists {
 public:
  static NeighborLists build(const QuerySet& query, const SimilarityProvider& provider,
                             const Dictionary& dictionary, double alpha, int workers = 0);

  const std::vector<std::pair<ElementId, double>>& list(std::size_t query_pos) const {
    return lists_[query_pos];
  }
  std::size_t query_size() const { return lists_.size(); }

 private:
  std::vector<std::vector<std::pair<ElementId, double>>> lists_;
};

/// Cache of every (query element, token) similarity that the stream can
/// emit; weight matrices in post-processing are filled from here.
class SimilarityCache {
 public:
  SimilarityCache() = default;
  SimilarityCache(const QuerySet& query, const NeighborLists& lists);

  double get(ElementId q, ElementId t) const {
    if (q == t) return 1.0;
    auto it = cache_.find(key(q, t));
    return it == cache_.end() ? 0.0 : it->second;
  }
  std::size_t size() const { return cache_.size(); }

 private:
  static std::uint64_t key(ElementId q, ElementId t) {
    return (static_cast<std::uint64_t>(q) << 32) | t;
  }
  std::unordered_map<std::uint64_t, double> cache_;
};

/// Merged, non-increasing-similarity stream of (query element, token, sim)
/// tuples, cut off below alpha. A frontier holds at most one pending tuple
/// per query element; popping refills only the popped element's cursor.
/// Owned by exactly one refinement task.
class TokenStream {
 public:
  struct Tuple {
    std::uint32_t query_pos;
    ElementId query_element;
    ElementId token;
    double sim;
  };

  struct Frontier {
    double sim;
    std::uint32_t query_pos;
    ElementId query_element;
    ElementId token;
  };

  TokenStream(const QuerySet& query, const NeighborLists& lists);

  std::optional<Tuple> next();

 private:
  void push_cursor(std::uint32_t query_pos);

  const NeighborLists* lists_;
  std::vector<ElementId> query_elements_;
  std::vector<std::size_t> cursor_;
  std::vector<Frontier> heap_;  // max-heap: sim desc, then (query, token) asc
};

}  // namespace semsearch
