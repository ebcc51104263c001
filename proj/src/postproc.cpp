#include "semsearch/postproc.hpp"

#include <algorithm>
#include <limits>
#include <queue>
#include <thread>

#ifdef _OPENMP
#include <omp.h>
#endif

namespace semsearch {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

struct Item {
  std::uint32_t set_id = 0;
  double lb = 0.0;
  double ub = 0.0;
  bool checked = false;
  bool processed = false;  // finished via no-EM, exact match, or early termination
  bool has_exact = false;
};

struct QueueEntry {
  double ub;
  std::uint32_t set_id;
  std::size_t item;
};

struct QueueLess {
  bool operator()(const QueueEntry& a, const QueueEntry& b) const {
    if (a.ub != b.ub) return a.ub < b.ub;
    return a.set_id > b.set_id;  // pop order: ub desc, ties by ascending id
  }
};

int effective_workers(const SearchParams& params) {
  if (params.workers > 0) return params.workers;
#ifdef _OPENMP
  return omp_get_max_threads();
#else
  return static_cast<int>(std::max(1u, std::thread::hardware_concurrency()));
#endif
}

}  // namespace

PostprocessResult postprocess(const QuerySet& query, const Collection& collection,
                              std::vector<CandidateState> candidates, double last_sim,
                              TopKList lb_list, const SimilarityCache& cache,
                              const SearchParams& params, GlobalThetaCell* global_theta,
                              Deadline deadline) {
  PostprocessResult result;
  const std::size_t k = static_cast<std::size_t>(params.k);
  const int workers = effective_workers(params);

  std::vector<Item> items;
  items.reserve(candidates.size());
  std::priority_queue<QueueEntry, std::vector<QueueEntry>, QueueLess> queue;
  for (const CandidateState& c : candidates) {
    Item item;
    item.set_id = c.set_id;
    item.lb = c.partial_sum;
    item.ub = c.upper_bound(last_sim);
    if (item.ub - item.lb <= kScoreEps) {  // collapsed: the overlap is already known
      item.ub = item.lb;
      item.has_exact = true;
    }
    queue.push(QueueEntry{item.ub, item.set_id, items.size()});
    items.push_back(item);
  }

  auto effective_theta = [&]() {
    double theta = lb_list.bottom();
    if (global_theta) theta = std::max(theta, global_theta->get());
    return theta;
  };
  auto record_lb = [&]() {
    if (params.collect_traces) {
      double theta = effective_theta();
      if (result.theta_lb_trace.empty() || theta > result.theta_lb_trace.back())
        result.theta_lb_trace.push_back(theta);
    }
  };
  record_lb();

  std::vector<std::size_t> members;
  auto theta_ub = [&]() {
    if (members.size() < k) return kInf;
    double bound = kInf;
    for (std::size_t m : members) bound = std::min(bound, items[m].ub);
    return bound;
  };
  auto record_ub = [&]() {
    if (params.collect_traces && members.size() == k) result.theta_ub_trace.push_back(theta_ub());
  };
  auto refill = [&]() {
    while (members.size() < k && !queue.empty()) {
      QueueEntry top = queue.top();
      queue.pop();
      // entries overtaken by theta_lb are dead on arrival
      if (top.ub <= effective_theta() - kScoreEps) continue;
      members.push_back(top.item);
    }
  };
  auto remove_member = [&](std::size_t item_index) {
    members.erase(std::find(members.begin(), members.end(), item_index));
  };
  auto raise_lb = [&](std::uint32_t set_id, double score) {
    if (score >= lb_list.bottom()) {
      lb_list.update(set_id, score);
      if (global_theta) global_theta->update(lb_list.bottom());
      record_lb();
    }
  };

  refill();
  record_ub();

  while (true) {
    if (deadline && std::chrono::steady_clock::now() > *deadline) {
      result.timed_out = true;
      break;
    }
    std::vector<std::size_t> unchecked;
    for (std::size_t m : members)
      if (!items[m].checked) unchecked.push_back(m);
    if (unchecked.empty()) break;
    std::sort(unchecked.begin(), unchecked.end(), [&](std::size_t a, std::size_t b) {
      if (items[a].ub != items[b].ub) return items[a].ub > items[b].ub;
      return items[a].set_id < items[b].set_id;
    });

    // No-EM: a member whose lower bound reaches the k-th largest upper
    // bound is in the result for sure; skip its matching.
    const double bound = theta_ub();
    std::vector<std::size_t> batch;
    for (std::size_t m : unchecked) {
      if (items[m].lb >= bound) {
        items[m].checked = true;
        items[m].processed = true;
        ++result.counters.no_em_accepted;
      } else {
        batch.push_back(m);
      }
    }
    if (batch.empty()) continue;

    std::vector<MatchOutcome> outcomes(batch.size());
    const double theta_snapshot = effective_theta();
    GlobalThetaCell* shared = global_theta;
#ifdef _OPENMP
#pragma omp parallel for num_threads(workers) schedule(dynamic)
#endif
    for (std::size_t i = 0; i < batch.size(); ++i) {
      const Item& item = items[batch[i]];
      WeightMatrix w = WeightMatrix::build(query, collection.sets[item.set_id], cache);
      ThetaProbe probe = [theta_snapshot, shared]() {
        return shared ? std::max(theta_snapshot, shared->get()) : theta_snapshot;
      };
      outcomes[i] = hungarian_so(w, probe);
    }

    for (std::size_t i = 0; i < batch.size(); ++i) {
      Item& item = items[batch[i]];
      if (!outcomes[i].exact()) {
        ++result.counters.em_early_terminated;
        item.processed = true;
        remove_member(batch[i]);
      } else {
        ++result.counters.em_calls;
        const double so = outcomes[i].score;
        item.lb = item.ub = so;
        item.checked = true;
        item.processed = true;
        item.has_exact = true;
        raise_lb(item.set_id, so);
        if (so <= effective_theta() - kScoreEps) {
          remove_member(batch[i]);  // overtaken while matching; drop, not requeue
        } else if (!queue.empty() && queue.top().ub > so) {
          remove_member(batch[i]);
          queue.push(QueueEntry{so, item.set_id, batch[i]});
        }
      }
      refill();
      record_ub();
    }
  }

  // The result reports exact overlaps; members accepted without matching
  // get their score materialized here, outside the filter accounting.
  if (!result.timed_out) {
    for (std::size_t m : members) {
      Item& item = items[m];
      if (item.has_exact) continue;
      if (item.ub - item.lb <= kScoreEps) {
        item.ub = item.lb;
      } else {
        WeightMatrix w = WeightMatrix::build(query, collection.sets[item.set_id], cache);
        double so = hungarian_so(w).score;
        ++result.counters.finalize_calls;
        item.lb = item.ub = so;
        raise_lb(item.set_id, so);
      }
      item.has_exact = true;
    }
  }

  for (const Item& item : items)
    if (!item.processed) ++result.counters.resident;

  result.topk.reserve(members.size());
  for (std::size_t m : members) result.topk.emplace_back(items[m].set_id, items[m].lb);
  std::sort(result.topk.begin(), result.topk.end(), [](const auto& a, const auto& b) {
    if (a.second != b.second) return a.second > b.second;
    return a.first < b.first;
  });
  return result;
}

}  // namespace semsearch
