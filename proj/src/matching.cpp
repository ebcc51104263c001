#include "semsearch/matching.hpp"

#include <algorithm>
#include <cassert>
#include <limits>
#include <numeric>

namespace semsearch {

namespace {
// equality-subgraph membership tolerance inside Kuhn-Munkres
constexpr double kSlackEps = 1e-12;
}  // namespace

WeightMatrix WeightMatrix::build(const QuerySet& query, const CandidateSet& set,
                                 const SimilarityCache& cache) {
  WeightMatrix m(static_cast<int>(query.elements.size()), static_cast<int>(set.elements.size()));
  for (int i = 0; i < m.rows; ++i) {
    for (int j = 0; j < m.cols; ++j) {
      m.at(i, j) = cache.get(query.elements[i], set.elements[j]);
    }
  }
  return m;
}

WeightMatrix WeightMatrix::build(const QuerySet& query, const CandidateSet& set,
                                 const SimilarityProvider& provider, double alpha) {
  WeightMatrix m(static_cast<int>(query.elements.size()), static_cast<int>(set.elements.size()));
  for (int i = 0; i < m.rows; ++i) {
    for (int j = 0; j < m.cols; ++j) {
      ElementId a = query.elements[i];
      ElementId b = set.elements[j];
      m.at(i, j) = a == b ? 1.0 : apply_threshold(provider.similarity(a, b), alpha);
    }
  }
  return m;
}

GreedyResult greedy_matching(const WeightMatrix& w) {
  struct Edge {
    double weight;
    int row;
    int col;
  };
  std::vector<Edge> edges;
  edges.reserve(w.w.size());
  for (int i = 0; i < w.rows; ++i) {
    for (int j = 0; j < w.cols; ++j) {
      if (w.at(i, j) > 0.0) edges.push_back({w.at(i, j), i, j});
    }
  }
  std::sort(edges.begin(), edges.end(), [](const Edge& a, const Edge& b) {
    if (a.weight != b.weight) return a.weight > b.weight;
    if (a.row != b.row) return a.row < b.row;
    return a.col < b.col;
  });
  GreedyResult result;
  std::vector<char> row_used(w.rows, 0), col_used(w.cols, 0);
  for (const Edge& e : edges) {
    if (row_used[e.row] || col_used[e.col]) continue;
    row_used[e.row] = col_used[e.col] = 1;
    result.score += e.weight;
    result.pairs.emplace_back(e.row, e.col);
  }
  return result;
}

double max_edge(const WeightMatrix& w) {
  double best = 0.0;
  for (double x : w.w) best = std::max(best, x);
  return best;
}

double lower_bound(const WeightMatrix& w) {
  return std::max(max_edge(w), greedy_matching(w).score);
}

MatchOutcome hungarian_so(const WeightMatrix& wm, const ThetaProbe& theta) {
  const int rows = wm.rows, cols = wm.cols;
  if (rows == 0 || cols == 0) return MatchOutcome{MatchOutcome::Kind::kExact, 0.0, {}};
  const int n = std::max(rows, cols);
  auto weight = [&](int i, int j) -> double {
    return (i < rows && j < cols) ? wm.at(i, j) : 0.0;  // zero-weight dummy padding
  };

  std::vector<double> lx(n, 0.0), ly(n, 0.0);
  for (int i = 0; i < n; ++i) {
    double best = 0.0;
    for (int j = 0; j < cols && i < rows; ++j) best = std::max(best, wm.at(i, j));
    lx[i] = best;
  }

  auto label_sum = [&]() {
    return std::accumulate(lx.begin(), lx.end(), 0.0) +
           std::accumulate(ly.begin(), ly.end(), 0.0);
  };
  // the initial labeling already bounds the overlap from above
  if (theta) {
    double sum = label_sum();
    if (sum < theta() - kScoreEps) return MatchOutcome{MatchOutcome::Kind::kEarlyTerminated, sum, {}};
  }

#ifndef NDEBUG
  auto assert_feasible = [&]() {
    for (int i = 0; i < n; ++i)
      for (int j = 0; j < n; ++j) assert(lx[i] + ly[j] >= weight(i, j) - kScoreEps);
  };
  assert_feasible();
#endif

  constexpr double kInf = std::numeric_limits<double>::infinity();
  std::vector<int> match_x(n, -1), match_y(n, -1);
  std::vector<double> slack(n);
  std::vector<int> slack_x(n);
  std::vector<char> in_s(n), in_t(n);

  for (int root = 0; root < n; ++root) {
    std::fill(in_s.begin(), in_s.end(), 0);
    std::fill(in_t.begin(), in_t.end(), 0);
    in_s[root] = 1;
    for (int j = 0; j < n; ++j) {
      slack[j] = lx[root] + ly[j] - weight(root, j);
      slack_x[j] = root;
    }
    int final_y = -1;
    while (final_y < 0) {
      int y0 = -1;
      for (int j = 0; j < n; ++j) {
        if (!in_t[j] && slack[j] <= kSlackEps) {
          y0 = j;
          break;
        }
      }
      if (y0 < 0) {
        double delta = kInf;
        for (int j = 0; j < n; ++j)
          if (!in_t[j]) delta = std::min(delta, slack[j]);
        for (int i = 0; i < n; ++i)
          if (in_s[i]) lx[i] -= delta;
        for (int j = 0; j < n; ++j) {
          if (in_t[j])
            ly[j] += delta;
          else
            slack[j] -= delta;
        }
#ifndef NDEBUG
        assert_feasible();
#endif
        if (theta) {
          double sum = label_sum();
          if (sum < theta() - kScoreEps)
            return MatchOutcome{MatchOutcome::Kind::kEarlyTerminated, sum, {}};
        }
        continue;
      }
      in_t[y0] = 1;
      if (match_y[y0] < 0) {
        final_y = y0;
        break;
      }
      int x = match_y[y0];
      in_s[x] = 1;
      for (int j = 0; j < n; ++j) {
        if (in_t[j]) continue;
        double s = lx[x] + ly[j] - weight(x, j);
        if (s < slack[j]) {
          slack[j] = s;
          slack_x[j] = x;
        }
      }
    }
    // flip the alternating path hanging off the free column
    int y = final_y;
    while (y >= 0) {
      int x = slack_x[y];
      int prev_y = match_x[x];
      match_x[x] = y;
      match_y[y] = x;
      y = prev_y;
    }
  }

  MatchOutcome outcome;
  outcome.kind = MatchOutcome::Kind::kExact;
  for (int i = 0; i < rows; ++i) {
    int j = match_x[i];
    if (j >= 0 && j < cols && wm.at(i, j) > 0.0) {
      outcome.score += wm.at(i, j);
      outcome.pairs.emplace_back(i, j);
    }
  }
  return outcome;
}

double exact_so(const QuerySet& query, const CandidateSet& set,
                const SimilarityProvider& provider, double alpha) {
  WeightMatrix m = WeightMatrix::build(query, set, provider, alpha);
  return hungarian_so(m).score;
}

}  // namespace semsearch
