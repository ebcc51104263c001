#include "semsearch/engine.hpp"

#include <algorithm>
#include <chrono>

#ifdef _OPENMP
#include <omp.h>
#endif

namespace semsearch {

namespace {

std::uint64_t mix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ull;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ull;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebull;
  return x ^ (x >> 31);
}

Deadline make_deadline(const SearchParams& params) {
  if (!params.timeout_seconds) return {};
  return std::chrono::steady_clock::now() +
         std::chrono::duration_cast<std::chrono::steady_clock::duration>(
             std::chrono::duration<double>(*params.timeout_seconds));
}

double ms_since(std::chrono::steady_clock::time_point t0) {
  return std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - t0).count();
}

void sort_entries(std::vector<std::pair<std::uint32_t, double>>& entries) {
  std::sort(entries.begin(), entries.end(), [](const auto& a, const auto& b) {
    if (a.second != b.second) return a.second > b.second;
    return a.first < b.first;
  });
}

}  // namespace

std::vector<std::vector<std::uint32_t>> partition(const Collection& collection, int parts,
                                                  std::uint64_t seed) {
  if (parts < 1) throw std::invalid_argument("partitions must be >= 1");
  std::vector<std::vector<std::uint32_t>> out(parts);
  for (const auto& set : collection.sets) {
    std::uint64_t h = mix64(mix64(seed) ^ set.id);
    out[h % static_cast<std::uint64_t>(parts)].push_back(set.id);
  }
  return out;
}

SearchResult search(const QuerySet& query, const Collection& collection,
                    const InvertedIndex& index, const SimilarityProvider& provider,
                    const SearchParams& params) {
  params.validate();
  const auto t0 = std::chrono::steady_clock::now();
  Deadline deadline = make_deadline(params);

  SearchResult result;
  NeighborLists neighbors =
      NeighborLists::build(query, provider, collection.dictionary, params.alpha, params.workers);
  SimilarityCache cache(query, neighbors);

  const int parts = params.partitions;
  auto assignment = partition(collection, parts, params.seed);
  std::vector<InvertedIndex> part_indexes;
  if (parts > 1) {
    part_indexes.reserve(parts);
    for (int p = 0; p < parts; ++p)
      part_indexes.push_back(InvertedIndex::build(collection, assignment[p]));
  }

  GlobalThetaCell theta;
  std::vector<RefineResult> refined(parts);
  std::vector<PostprocessResult> verified(parts);
  std::vector<double> refine_ms(parts, 0.0), postproc_ms(parts, 0.0);

#ifdef _OPENMP
  omp_set_max_active_levels(2);
  int outer = std::min(parts, params.workers > 0 ? params.workers : omp_get_max_threads());
#pragma omp parallel for num_threads(outer) schedule(dynamic, 1)
#endif
  for (int p = 0; p < parts; ++p) {
    const InvertedIndex& part_index = parts > 1 ? part_indexes[p] : index;
    auto tr = std::chrono::steady_clock::now();
    TokenStream stream(query, neighbors);
    refined[p] = refine(query, collection, part_index, stream, params, &theta, deadline);
    refine_ms[p] = ms_since(tr);
    auto tp = std::chrono::steady_clock::now();
    verified[p] = postprocess(query, collection, std::move(refined[p].survivors),
                              refined[p].last_sim, refined[p].lb_list, cache, params, &theta,
                              deadline);
    postproc_ms[p] = ms_since(tp);
  }

  for (int p = 0; p < parts; ++p) {
    const RefineResult& r = refined[p];
    const PostprocessResult& v = verified[p];
    result.stats.tuples_consumed += r.counters.tuples_consumed;
    result.stats.candidates += r.counters.candidates_seen;
    result.stats.iub_pruned += r.counters.iub_pruned;
    result.stats.survivors += r.counters.candidates_seen - r.counters.iub_pruned;
    result.stats.em_calls += v.counters.em_calls;
    result.stats.em_early_terminated += v.counters.em_early_terminated;
    result.stats.no_em_accepted += v.counters.no_em_accepted;
    result.stats.finalize_calls += v.counters.finalize_calls;
    result.stats.resident += v.counters.resident;
    result.stats.refine_ms = std::max(result.stats.refine_ms, refine_ms[p]);
    result.stats.postproc_ms = std::max(result.stats.postproc_ms, postproc_ms[p]);
    result.timed_out = result.timed_out || r.timed_out || v.timed_out;
    result.per_partition.push_back(v.topk);
    for (const auto& e : v.topk) result.entries.push_back(e);
    if (params.collect_traces && parts == 1) {
      result.stats.theta_lb_trace = r.theta_trace;
      result.stats.theta_lb_trace.insert(result.stats.theta_lb_trace.end(),
                                         v.theta_lb_trace.begin(), v.theta_lb_trace.end());
      result.stats.theta_ub_trace = v.theta_ub_trace;
    }
  }

  sort_entries(result.entries);
  if (result.entries.size() > static_cast<std::size_t>(params.k))
    result.entries.resize(params.k);
  result.truncated = result.entries.size() < static_cast<std::size_t>(params.k);
  result.exact = !result.timed_out;
  result.stats.total_ms = ms_since(t0);
  return result;
}

SearchResult baseline_search(const QuerySet& query, const Collection& collection,
                             const InvertedIndex& index, const SimilarityProvider& provider,
                             const SearchParams& params, bool with_iub) {
  params.validate();
  const auto t0 = std::chrono::steady_clock::now();
  Deadline deadline = make_deadline(params);

  SearchResult result;
  NeighborLists neighbors =
      NeighborLists::build(query, provider, collection.dictionary, params.alpha, params.workers);
  SimilarityCache cache(query, neighbors);

  std::vector<std::uint32_t> candidates;
  if (with_iub) {
    auto tr = std::chrono::steady_clock::now();
    TokenStream stream(query, neighbors);
    RefineResult refined = refine(query, collection, index, stream, params, nullptr, deadline);
    result.stats.refine_ms = ms_since(tr);
    result.stats.tuples_consumed = refined.counters.tuples_consumed;
    result.stats.candidates = refined.counters.candidates_seen;
    result.stats.iub_pruned = refined.counters.iub_pruned;
    result.timed_out = refined.timed_out;
    for (const auto& state : refined.survivors) candidates.push_back(state.set_id);
  } else {
    std::vector<char> seen(collection.sets.size(), 0);
    for (std::size_t i = 0; i < query.elements.size(); ++i) {
      for (const auto& [token, sim] : neighbors.list(i)) {
        for (std::uint32_t sid : index.postings(token)) {
          if (!seen[sid]) {
            seen[sid] = 1;
            candidates.push_back(sid);
          }
        }
      }
    }
    std::sort(candidates.begin(), candidates.end());
    result.stats.candidates = candidates.size();
  }
  result.stats.survivors = candidates.size();

  auto tp = std::chrono::steady_clock::now();
  std::vector<double> scores(candidates.size(), 0.0);
  bool timed_out = false;
#ifdef _OPENMP
  int workers = params.workers > 0 ? params.workers : omp_get_max_threads();
#pragma omp parallel for num_threads(workers) schedule(dynamic)
#endif
  for (std::size_t i = 0; i < candidates.size(); ++i) {
    if (deadline && std::chrono::steady_clock::now() > *deadline) {
      timed_out = true;
      continue;
    }
    WeightMatrix w = WeightMatrix::build(query, collection.sets[candidates[i]], cache);
    scores[i] = hungarian_so(w).score;
  }
  result.stats.postproc_ms = ms_since(tp);
  result.stats.em_calls = candidates.size();
  result.timed_out = result.timed_out || timed_out;

  result.entries.reserve(candidates.size());
  for (std::size_t i = 0; i < candidates.size(); ++i)
    result.entries.emplace_back(candidates[i], scores[i]);
  sort_entries(result.entries);
  if (result.entries.size() > static_cast<std::size_t>(params.k))
    result.entries.resize(params.k);
  result.truncated = result.entries.size() < static_cast<std::size_t>(params.k);
  result.exact = !result.timed_out;
  result.stats.total_ms = ms_since(t0);
  return result;
}

}  // namespace semsearch
