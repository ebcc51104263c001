#pragma once

#include <vector>

#include "semsearch/matching.hpp"
#include "semsearch/refinement.hpp"

namespace semsearch {

struct PostprocCounters {
  std::uint64_t em_calls = 0;             // completed exact matchings
  std::uint64_t em_early_terminated = 0;  // matchings aborted by the label-sum bound
  std::uint64_t no_em_accepted = 0;       // accepted into the result without matching
  std::uint64_t finalize_calls = 0;       // score materialization for no-EM members
  std::uint64_t resident = 0;             // survivors never taken off the UB queue
};

struct PostprocessResult {
  std::vector<std::pair<std::uint32_t, double>> topk;  // (set, exact overlap), score desc
  PostprocCounters counters;
  std::vector<double> theta_lb_trace;
  std::vector<double> theta_ub_trace;
  bool timed_out = false;
};

/// Phase 2: verify the unpruned candidates. Members of the top-k UB list
/// are matched in parallel batches, highest upper bound first; candidates
/// whose lower bound already meets the k-th upper bound are accepted without
/// matching, and running matchings abort as soon as their label sum falls
/// below the live theta_lb.
PostprocessResult postprocess(const QuerySet& query, const Collection& collection,
                              std::vector<CandidateState> candidates, double last_sim,
                              TopKList lb_list, const SimilarityCache& cache,
                              const SearchParams& params,
                              GlobalThetaCell* global_theta = nullptr, Deadline deadline = {});

}  // namespace semsearch
