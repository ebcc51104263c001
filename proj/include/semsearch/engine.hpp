#pragma once

#include <vector>

#include "semsearch/index.hpp"
#include "semsearch/postproc.hpp"
#include "semsearch/refinement.hpp"

namespace semsearch {

struct SearchStats {
  std::uint64_t tuples_consumed = 0;
  std::uint64_t candidates = 0;
  std::uint64_t iub_pruned = 0;
  std::uint64_t survivors = 0;
  std::uint64_t em_calls = 0;
  std::uint64_t em_early_terminated = 0;
  std::uint64_t no_em_accepted = 0;
  std::uint64_t finalize_calls = 0;
  std::uint64_t resident = 0;
  double refine_ms = 0.0;
  double postproc_ms = 0.0;
  double total_ms = 0.0;
  // theta evolution, recorded when params.collect_traces (one partition)
  std::vector<double> theta_lb_trace;
  std::vector<double> theta_ub_trace;

  std::uint64_t hungarian_invocations() const {
    return em_calls + em_early_terminated + finalize_calls;
  }
};

struct SearchResult {
  std::vector<std::pair<std::uint32_t, double>> entries;  // (set, score), score desc / id asc
  // local top-k of each partition before the merge (k * partitions sets)
  std::vector<std::vector<std::pair<std::uint32_t, double>>> per_partition;
  SearchStats stats;
  bool exact = true;        // false when a timeout truncated the search
  bool timed_out = false;
  bool truncated = false;   // fewer than k sets had nonzero overlap

  double top1() const { return entries.empty() ? 0.0 : entries.front().second; }
};

/// Seeded uniform assignment of every set to exactly one of p partitions.
std::vector<std::vector<std::uint32_t>> partition(const Collection& collection, int parts,
                                                  std::uint64_t seed);

/// Two-phase top-k semantic overlap search. Partitions run concurrently and
/// share one monotone global theta_lb; the merged result is the global top-k
/// ordered by (score desc, set id asc).
SearchResult search(const QuerySet& query, const Collection& collection,
                    const InvertedIndex& index, const SimilarityProvider& provider,
                    const SearchParams& params);

/// Exhaustive reference: exact-match every candidate set reachable through
/// the token stream. With `with_iub` the refinement filter pre-prunes the
/// candidates first; the result never changes, only the matching count.
SearchResult baseline_search(const QuerySet& query, const Collection& collection,
                             const InvertedIndex& index, const SimilarityProvider& provider,
                             const SearchParams& params, bool with_iub = false);

}  // namespace semsearch
