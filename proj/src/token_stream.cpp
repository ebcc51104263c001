#include "semsearch/token_stream.hpp"

#include <algorithm>

#ifdef _OPENMP
#include <omp.h>
#endif

namespace semsearch {

namespace {
constexpr std::size_t kScanBatch = 100;
}  // namespace

std::vector<std::pair<ElementId, double>> brute_force_neighbors(ElementId q,
                                                                const SimilarityProvider& provider,
                                                                const Dictionary& dictionary,
                                                                double alpha) {
  std::vector<std::pair<ElementId, double>> out;
  const std::size_t n = dictionary.size();
  for (std::size_t base = 0; base < n; base += kScanBatch) {
    const std::size_t end = std::min(n, base + kScanBatch);
    for (std::size_t t = base; t < end; ++t) {
      double s = provider.similarity(q, static_cast<ElementId>(t));
      if (s >= alpha) out.emplace_back(static_cast<ElementId>(t), s);
    }
  }
  std::sort(out.begin(), out.end(), [](const auto& a, const auto& b) {
    if (a.second != b.second) return a.second > b.second;
    return a.first < b.first;
  });
  return out;
}

NeighborLists NeighborLists::build(const QuerySet& query, const SimilarityProvider& provider,
                                   const Dictionary& dictionary, double alpha, int workers) {
  NeighborLists lists;
  lists.lists_.resize(query.elements.size());
  const int n = static_cast<int>(query.elements.size());
#ifdef _OPENMP
  int threads = workers > 0 ? workers : omp_get_max_threads();
#pragma omp parallel for num_threads(threads) schedule(dynamic)
#endif
  for (int i = 0; i < n; ++i) {
    ElementId q = query.elements[i];
    auto list = brute_force_neighbors(q, provider, dictionary, alpha);
    // pin the identity entry to the front among any similarity-1 ties
    auto it = std::find_if(list.begin(), list.end(), [q](const auto& e) { return e.first == q; });
    if (it != list.end()) std::rotate(list.begin(), it, it + 1);
    lists.lists_[i] = std::move(list);
  }
  return lists;
}

SimilarityCache::SimilarityCache(const QuerySet& query, const NeighborLists& lists) {
  for (std::size_t i = 0; i < query.elements.size(); ++i) {
    for (const auto& [t, s] : lists.list(i)) cache_.emplace(key(query.elements[i], t), s);
  }
}

TokenStream::TokenStream(const QuerySet& query, const NeighborLists& lists)
    : lists_(&lists), query_elements_(query.elements), cursor_(query.elements.size(), 0) {
  heap_.reserve(query.elements.size());
  for (std::uint32_t i = 0; i < query.elements.size(); ++i) push_cursor(i);
}

namespace {
// max-heap on similarity; ties resolved by ascending (query, token)
struct FrontierLess {
  bool operator()(const TokenStream::Frontier& a, const TokenStream::Frontier& b) const {
    if (a.sim != b.sim) return a.sim < b.sim;
    if (a.query_element != b.query_element) return a.query_element > b.query_element;
    return a.token > b.token;
  }
};
}  // namespace

void TokenStream::push_cursor(std::uint32_t query_pos) {
  const auto& list = lists_->list(query_pos);
  std::size_t& cur = cursor_[query_pos];
  if (cur >= list.size()) return;
  heap_.push_back(
      Frontier{list[cur].second, query_pos, query_elements_[query_pos], list[cur].first});
  ++cur;
  std::push_heap(heap_.begin(), heap_.end(), FrontierLess{});
}

std::optional<TokenStream::Tuple> TokenStream::next() {
  if (heap_.empty()) return std::nullopt;
  std::pop_heap(heap_.begin(), heap_.end(), FrontierLess{});
  Frontier top = heap_.back();
  heap_.pop_back();
  push_cursor(top.query_pos);
  return Tuple{top.query_pos, top.query_element, top.token, top.sim};
}

}  // namespace semsearch
