#pragma once

#include <atomic>
#include <chrono>
#include <optional>
#include <vector>

#include "semsearch/core.hpp"
#include "semsearch/index.hpp"
#include "semsearch/token_stream.hpp"

namespace semsearch {

using Deadline = std::optional<std::chrono::steady_clock::time_point>;

class MissingEntry : public std::logic_error {
 public:
  using std::logic_error::logic_error;
};

/// Monotone lock-free maximum shared across partitions. Stale reads are
/// safe: a smaller value only weakens pruning.
class GlobalThetaCell {
 public:
  void update(double v) {
    double cur = value_.load();
    while (v > cur && !value_.compare_exchange_weak(cur, v)) {
    }
  }
  double get() const { return value_.load(); }

 private:
  std::atomic<double> value_{0.0};
};

/// Running top-k list of (set, score), descending. bottom() is the k-th
/// score and stays 0 until k entries exist.
class TopKList {
 public:
  explicit TopKList(int capacity) : capacity_(capacity) {}

  struct Entry {
    std::uint32_t set_id;
    double score;
  };

  /// Insert, or raise the score of an existing entry. Returns the evicted
  /// set id, if the insertion displaced one.
  std::optional<std::uint32_t> update(std::uint32_t set_id, double score);
  double bottom() const {
    return static_cast<int>(entries_.size()) < capacity_ ? 0.0 : entries_.back().score;
  }
  bool contains(std::uint32_t set_id) const;
  const std::vector<Entry>& entries() const { return entries_; }
  int capacity() const { return capacity_; }

 private:
  int capacity_;
  std::vector<Entry> entries_;  // (score desc, set_id asc)
};

/// Per-candidate bound state. The lower bound runs a partial greedy
/// matching (partial_sum). The upper bound books the candidate's stream-seen
/// tokens instead: seen_sum adds each distinct token's first-emission (that
/// is, maximum) similarity, and seen_sum + remaining * s bounds the overlap
/// for the current stream similarity s. The matching-based variant of that
/// bound can undershoot when the optimum re-pairs an already-matched
/// element; the token-based form cannot, since an unmatched seen token
/// over-credits the sum by at least s.
struct CandidateState {
  std::uint32_t set_id = 0;
  // lower-bound side: valid edges of the running greedy matching
  double partial_sum = 0.0;   // iLB
  std::uint32_t matched = 0;  // matched pairs
  std::vector<std::uint64_t> matched_query;  // bitset over query positions
  std::vector<ElementId> matched_elements;   // sorted
  // upper-bound side: distinct set tokens observed in the stream
  double seen_sum = 0.0;
  std::uint32_t seen_count = 0;
  std::uint32_t remaining = 0;  // min(|Q| - seen, |C| - seen)
  std::vector<ElementId> seen_elements;  // sorted

  double upper_bound(double sim) const { return seen_sum + remaining * sim; }
  bool query_matched(std::uint32_t pos) const {
    return (matched_query[pos >> 6] >> (pos & 63)) & 1;
  }
  void mark_query(std::uint32_t pos) { matched_query[pos >> 6] |= std::uint64_t{1} << (pos & 63); }
  bool element_matched(ElementId e) const;
  void mark_element(ElementId e);
};

/// Seeds both sides with the vanilla overlap: identity pairs are matched up
/// front, so identical elements count 1 even without provider coverage.
CandidateState init_candidate(const CandidateSet& set, const QuerySet& query);

/// Applies one stream edge to the partial greedy matching. Only valid edges
/// (both endpoints unmatched) change the state; returns whether it did.
bool update_ilb(CandidateState& state, std::uint32_t query_pos, ElementId token, double sim);

/// Books a stream tuple on the upper-bound side. Each distinct token of the
/// set counts once, at its first emission; returns whether it was new.
bool observe_token(CandidateState& state, ElementId token, double sim, std::size_t query_size,
                   std::size_t set_size);

/// Candidates grouped by remaining matchable count m, each bucket ascending
/// by partial sum, so one threshold scan per bucket replaces per-set upper
/// bound updates.
class BucketIndex {
 public:
  explicit BucketIndex(std::size_t max_m) : buckets_(max_m + 1) {}

  void insert(std::uint32_t m, std::uint32_t set_id, double partial_sum);
  /// Re-bucket after an edge was applied (m decreases by one). Entries whose
  /// m reaches 0 leave the structure; their bound is frozen at partial_sum.
  void move(std::uint32_t set_id, std::uint32_t old_m, std::uint32_t new_m, double new_sum);

  /// Prune every entry with partial_sum + m * sim <= theta - eps, scanning
  /// each bucket in ascending partial-sum order and stopping at the first
  /// survivor. Entries for which `is_protected` holds are skipped.
  template <typename Protected, typename OnPrune>
  void prune(double sim, double theta, Protected&& is_protected, OnPrune&& on_prune) {
    for (std::uint32_t m = 1; m < buckets_.size(); ++m) {
      auto& bucket = buckets_[m];
      const double threshold = theta - static_cast<double>(m) * sim - kScoreEps;
      std::size_t keep = 0;
      std::size_t i = 0;
      for (; i < bucket.size() && bucket[i].sum <= threshold; ++i) {
        if (is_protected(bucket[i].set_id)) {
          bucket[keep++] = bucket[i];
        } else {
          on_prune(bucket[i].set_id);
        }
      }
      if (keep != i) {
        std::move(bucket.begin() + i, bucket.end(), bucket.begin() + keep);
        bucket.resize(bucket.size() - (i - keep));
      }
    }
  }

  std::size_t size() const;
  bool sorted() const;  // test hook

 private:
  struct Entry {
    double sum;
    std::uint32_t set_id;
  };
  std::vector<std::vector<Entry>> buckets_;
};

struct RefineCounters {
  std::uint64_t tuples_consumed = 0;
  std::uint64_t candidates_seen = 0;
  std::uint64_t iub_pruned = 0;
};

/// Phase-1 output: the unpruned candidates with their bounds, the running
/// lower-bound list, and the similarity of the last consumed tuple (the
/// survivors' upper bounds are partial_sum + remaining * last_sim).
struct RefineResult {
  std::vector<CandidateState> survivors;
  TopKList lb_list{1};
  double last_sim = 1.0;
  RefineCounters counters;
  std::vector<double> theta_trace;
  bool timed_out = false;
};

RefineResult refine(const QuerySet& query, const Collection& collection,
                    const InvertedIndex& index, TokenStream& stream, const SearchParams& params,
                    GlobalThetaCell* global_theta = nullptr, Deadline deadline = {});

}  // namespace semsearch
