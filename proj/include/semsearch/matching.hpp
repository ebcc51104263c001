#pragma once

#include <functional>
#include <utility>
#include <vector>

#include "semsearch/core.hpp"
#include "semsearch/similarity.hpp"
#include "semsearch/token_stream.hpp"

namespace semsearch {

/// Thresholded similarity matrix of a (query, candidate) pair. Entries below
/// alpha are exact zeros; identical ids carry weight 1.
struct WeightMatrix {
  int rows = 0;
  int cols = 0;
  std::vector<double> w;

  WeightMatrix() = default;
  WeightMatrix(int r, int c) : rows(r), cols(c), w(static_cast<std::size_t>(r) * c, 0.0) {}

  double at(int i, int j) const { return w[static_cast<std::size_t>(i) * cols + j]; }
  double& at(int i, int j) { return w[static_cast<std::size_t>(i) * cols + j]; }

  static WeightMatrix build(const QuerySet& query, const CandidateSet& set,
                            const SimilarityCache& cache);
  static WeightMatrix build(const QuerySet& query, const CandidateSet& set,
                            const SimilarityProvider& provider, double alpha);
};

struct GreedyResult {
  double score = 0.0;
  std::vector<std::pair<int, int>> pairs;
};

/// Repeatedly takes the heaviest edge between unmatched nodes until no
/// positive edge remains. Ties break on ascending (row, col).
GreedyResult greedy_matching(const WeightMatrix& w);

double max_edge(const WeightMatrix& w);

/// max(max edge, greedy score); never exceeds the exact overlap.
double lower_bound(const WeightMatrix& w);

/// Re-readable pruning threshold; must be monotone non-decreasing when read
/// from concurrent matchings.
using ThetaProbe = std::function<double()>;

struct MatchOutcome {
  enum class Kind { kExact, kEarlyTerminated };
  Kind kind = Kind::kExact;
  double score = 0.0;  // exact overlap, or the label-sum bound at abort
  std::vector<std::pair<int, int>> pairs;

  bool exact() const { return kind == Kind::kExact; }
};

/// Maximum-weight optional one-to-one matching via the Kuhn-Munkres
/// algorithm on the zero-padded square matrix. The feasible label sum is an
/// upper bound on the overlap; whenever it drops below the probed threshold
/// the matching aborts with the bound at that point.
MatchOutcome hungarian_so(const WeightMatrix& w, const ThetaProbe& theta = {});

/// Exact semantic overlap of two sets under a provider.
double exact_so(const QuerySet& query, const CandidateSet& set,
                const SimilarityProvider& provider, double alpha);

}  // namespace semsearch
