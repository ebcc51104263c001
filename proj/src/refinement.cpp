#include "semsearch/refinement.hpp"

#include <algorithm>
#include <cassert>

namespace semsearch {

std::optional<std::uint32_t> TopKList::update(std::uint32_t set_id, double score) {
  auto pos = std::find_if(entries_.begin(), entries_.end(),
                          [set_id](const Entry& e) { return e.set_id == set_id; });
  if (pos != entries_.end()) {
    if (score <= pos->score) return std::nullopt;
    pos->score = score;
  } else if (static_cast<int>(entries_.size()) < capacity_) {
    entries_.push_back({set_id, score});
  } else if (score > entries_.back().score) {
    std::uint32_t evicted = entries_.back().set_id;
    entries_.back() = {set_id, score};
    std::sort(entries_.begin(), entries_.end(), [](const Entry& a, const Entry& b) {
      if (a.score != b.score) return a.score > b.score;
      return a.set_id < b.set_id;
    });
    return evicted;
  } else {
    return std::nullopt;
  }
  std::sort(entries_.begin(), entries_.end(), [](const Entry& a, const Entry& b) {
    if (a.score != b.score) return a.score > b.score;
    return a.set_id < b.set_id;
  });
  return std::nullopt;
}

bool TopKList::contains(std::uint32_t set_id) const {
  return std::any_of(entries_.begin(), entries_.end(),
                     [set_id](const Entry& e) { return e.set_id == set_id; });
}

bool CandidateState::element_matched(ElementId e) const {
  return std::binary_search(matched_elements.begin(), matched_elements.end(), e);
}

void CandidateState::mark_element(ElementId e) {
  matched_elements.insert(
      std::upper_bound(matched_elements.begin(), matched_elements.end(), e), e);
}

namespace {

std::uint32_t remaining_of(std::size_t query_size, std::size_t set_size, std::uint32_t matched) {
  std::uint32_t q = static_cast<std::uint32_t>(query_size) - matched;
  std::uint32_t c = static_cast<std::uint32_t>(set_size) - matched;
  return std::min(q, c);
}

}  // namespace

CandidateState init_candidate(const CandidateSet& set, const QuerySet& query) {
  CandidateState state;
  state.set_id = set.id;
  state.matched_query.assign((query.elements.size() + 63) / 64, 0);
  std::size_t i = 0, j = 0;
  while (i < query.elements.size() && j < set.elements.size()) {
    if (query.elements[i] == set.elements[j]) {
      state.mark_query(static_cast<std::uint32_t>(i));
      state.matched_elements.push_back(set.elements[j]);
      state.seen_elements.push_back(set.elements[j]);
      state.partial_sum += 1.0;
      state.seen_sum += 1.0;
      ++state.matched;
      ++state.seen_count;
      ++i;
      ++j;
    } else if (query.elements[i] < set.elements[j]) {
      ++i;
    } else {
      ++j;
    }
  }
  state.remaining = remaining_of(query.elements.size(), set.elements.size(), state.seen_count);
  return state;
}

bool update_ilb(CandidateState& state, std::uint32_t query_pos, ElementId token, double sim) {
  if (state.query_matched(query_pos) || state.element_matched(token)) return false;
  state.mark_query(query_pos);
  state.mark_element(token);
  state.partial_sum += sim;
  ++state.matched;
  return true;
}

bool observe_token(CandidateState& state, ElementId token, double sim, std::size_t query_size,
                   std::size_t set_size) {
  if (state.remaining == 0) return false;  // the bound is already saturated
  if (std::binary_search(state.seen_elements.begin(), state.seen_elements.end(), token))
    return false;
  state.seen_elements.insert(
      std::upper_bound(state.seen_elements.begin(), state.seen_elements.end(), token), token);
  state.seen_sum += sim;
  ++state.seen_count;
  state.remaining = remaining_of(query_size, set_size, state.seen_count);
  return true;
}

void BucketIndex::insert(std::uint32_t m, std::uint32_t set_id, double partial_sum) {
  if (m == 0) return;  // frozen bound, nothing left to tighten
  if (m >= buckets_.size()) buckets_.resize(m + 1);
  auto& bucket = buckets_[m];
  Entry entry{partial_sum, set_id};
  auto pos = std::upper_bound(bucket.begin(), bucket.end(), entry,
                              [](const Entry& a, const Entry& b) { return a.sum < b.sum; });
  bucket.insert(pos, entry);
}

void BucketIndex::move(std::uint32_t set_id, std::uint32_t old_m, std::uint32_t new_m,
                       double new_sum) {
  if (old_m == 0 || old_m >= buckets_.size()) throw MissingEntry("bucket move: no such bucket");
  auto& bucket = buckets_[old_m];
  auto pos = std::find_if(bucket.begin(), bucket.end(),
                          [set_id](const Entry& e) { return e.set_id == set_id; });
  if (pos == bucket.end()) throw MissingEntry("bucket move: entry not found");
  bucket.erase(pos);
  insert(new_m, set_id, new_sum);
}

std::size_t BucketIndex::size() const {
  std::size_t n = 0;
  for (const auto& b : buckets_) n += b.size();
  return n;
}

bool BucketIndex::sorted() const {
  for (const auto& b : buckets_) {
    if (!std::is_sorted(b.begin(), b.end(),
                        [](const Entry& a, const Entry& x) { return a.sum < x.sum; }))
      return false;
  }
  return true;
}

RefineResult refine(const QuerySet& query, const Collection& collection,
                    const InvertedIndex& index, TokenStream& stream, const SearchParams& params,
                    GlobalThetaCell* global_theta, Deadline deadline) {
  RefineResult result;
  result.lb_list = TopKList(params.k);
  TopKList& lb_list = result.lb_list;

  const std::size_t n_sets = collection.sets.size();
  const double query_size = static_cast<double>(query.elements.size());
  std::vector<std::int32_t> slot(n_sets, -1);
  std::vector<char> pruned(n_sets, 0);
  std::vector<char> in_lb(n_sets, 0);
  std::vector<CandidateState> states;
  BucketIndex buckets(query.elements.size());

  auto effective_theta = [&]() {
    double theta = lb_list.bottom();
    if (global_theta) theta = std::max(theta, global_theta->get());
    return theta;
  };
  auto record_theta = [&](double theta) {
    if (params.collect_traces &&
        (result.theta_trace.empty() || theta > result.theta_trace.back()))
      result.theta_trace.push_back(theta);
  };
  auto admit_lb = [&](std::uint32_t set_id, double score) {
    if (score <= lb_list.bottom()) return;
    if (auto evicted = lb_list.update(set_id, score)) in_lb[*evicted] = 0;
    if (lb_list.contains(set_id)) in_lb[set_id] = 1;
    if (global_theta) global_theta->update(lb_list.bottom());
    record_theta(effective_theta());
  };

  record_theta(effective_theta());
  while (auto tuple = stream.next()) {
    ++result.counters.tuples_consumed;
    if (deadline && (result.counters.tuples_consumed & 1023) == 0 &&
        std::chrono::steady_clock::now() > *deadline) {
      result.timed_out = true;
      break;
    }
    result.last_sim = tuple->sim;
    double theta = effective_theta();

    // Candidate discovery. A set first seen now has every pairwise
    // similarity <= sim, so its overlap is at most min(|Q|, |C|) * sim;
    // when even |Q| * sim cannot reach theta the postings probe is skipped.
    if (query_size * tuple->sim > theta - kScoreEps) {
      for (std::uint32_t sid : index.postings(tuple->token)) {
        if (slot[sid] >= 0 || pruned[sid]) continue;
        ++result.counters.candidates_seen;
        const CandidateSet& set = collection.sets[sid];
        CandidateState state = init_candidate(set, query);
        if (state.upper_bound(tuple->sim) <= theta - kScoreEps) {
          pruned[sid] = 1;
          ++result.counters.iub_pruned;
          continue;
        }
        slot[sid] = static_cast<std::int32_t>(states.size());
        buckets.insert(state.remaining, sid, state.seen_sum);
        states.push_back(std::move(state));
        admit_lb(sid, states.back().partial_sum);  // vanilla-overlap seed
      }
    }

    // Bound updates for the sets containing the token.
    for (std::uint32_t sid : index.postings(tuple->token)) {
      if (pruned[sid] || slot[sid] < 0) continue;
      CandidateState& state = states[slot[sid]];
      std::uint32_t old_m = state.remaining;
      if (observe_token(state, tuple->token, tuple->sim, query.elements.size(),
                        collection.sets[sid].elements.size())) {
        buckets.move(sid, old_m, state.remaining, state.seen_sum);
      }
      if (update_ilb(state, tuple->query_pos, tuple->token, tuple->sim)) {
        admit_lb(sid, state.partial_sum);
      }
    }

    // One threshold scan per bucket replaces per-set upper-bound updates.
    theta = effective_theta();
    buckets.prune(
        tuple->sim, theta, [&](std::uint32_t sid) { return in_lb[sid] != 0; },
        [&](std::uint32_t sid) {
          pruned[sid] = 1;
          ++result.counters.iub_pruned;
        });

#ifndef NDEBUG
    // every unpruned candidate with slack left sits in exactly one bucket
    std::size_t expected = 0;
    for (const auto& st : states)
      if (!pruned[st.set_id] && st.remaining > 0) ++expected;
    assert(buckets.size() == expected);
    assert(buckets.sorted());
#endif
  }

  result.survivors.reserve(states.size());
  for (auto& state : states) {
    if (!pruned[state.set_id]) result.survivors.push_back(std::move(state));
  }
  return result;
}

}  // namespace semsearch
