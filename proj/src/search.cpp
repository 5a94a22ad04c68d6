// Copyright 2026-present the gem authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include "gem/search.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <limits>
#include <queue>
#include <thread>

#include "gem/metric.hpp"

namespace gem {

void SearchParams::validate() const {
  if (k == 0) raise(ErrorCode::invalid_argument, "k must be >= 1");
  if (t == 0) raise(ErrorCode::invalid_argument, "t must be >= 1");
  if (ef_search < k) {
    raise(ErrorCode::invalid_argument, "need k <= ef_search");
  }
  const uint32_t r = resolved_rerank();
  if (r < k || r > ef_search) {
    raise(ErrorCode::invalid_argument, "need k <= rerank_k <= ef_search");
  }
}

std::vector<uint32_t> cluster_filter(const VectorSet& query,
                                     const ClusterSpace& space, uint32_t t) {
  if (query.vectors.empty()) {
    raise(ErrorCode::empty_query, "query has no vectors");
  }
  const uint32_t k2 = space.cluster_count();
  std::vector<uint8_t> chosen(k2, 0);
  std::vector<std::pair<double, uint32_t>> scores(k2);
  for (const Vector& token : query.vectors) {
    if (token.size() != space.dim) {
      raise(ErrorCode::dim_mismatch, "query dimension mismatch");
    }
    for (uint32_t c = 0; c < k2; ++c) {
      const double s =
          vector_similarity(token, space.index_centroids[c], space.kind);
      // Sort by score descending, ties toward the lower cluster index.
      scores[c] = {-s, c};
    }
    const size_t top = std::min<size_t>(t, k2);
    std::partial_sort(scores.begin(), scores.begin() + top, scores.end());
    for (size_t i = 0; i < top; ++i) chosen[scores[i].second] = 1;
  }
  std::vector<uint32_t> out;
  for (uint32_t c = 0; c < k2; ++c) {
    if (chosen[c]) out.push_back(c);
  }
  return out;
}

namespace {

// Heap entry ordered by (distance, id); the result heap keeps its largest
// element on top so eviction at capacity drops the farthest candidate.
struct HeapItem {
  double dist;
  uint32_t id;

  bool operator<(const HeapItem& o) const {
    if (dist != o.dist) return dist < o.dist;
    return id < o.id;
  }
  bool operator>(const HeapItem& o) const { return o < *this; }
};

void parallel_scores(const std::vector<uint32_t>& ids,
                     const std::function<double(uint32_t)>& query_dist,
                     uint32_t max_threads, std::vector<double>& out) {
  out.resize(ids.size());
  const uint32_t workers = std::min<uint32_t>(
      std::max<uint32_t>(max_threads, 1),
      static_cast<uint32_t>(ids.size()));
  if (workers <= 1 || ids.size() < 8) {
    for (size_t i = 0; i < ids.size(); ++i) out[i] = query_dist(ids[i]);
    return;
  }
  std::atomic<size_t> next{0};
  auto work = [&] {
    for (size_t i = next.fetch_add(1); i < ids.size();
         i = next.fetch_add(1)) {
      out[i] = query_dist(ids[i]);
    }
  };
  std::vector<std::thread> threads;
  threads.reserve(workers - 1);
  for (uint32_t w = 1; w < workers; ++w) threads.emplace_back(work);
  work();
  for (std::thread& th : threads) th.join();
}

}  // namespace

std::vector<Candidate> beam_traverse(
    const GemGraph& graph, const std::vector<uint32_t>& entries,
    const std::function<double(uint32_t)>& query_dist,
    const std::function<bool(uint32_t)>& accept, uint32_t ef,
    uint32_t max_threads, SearchStats& stats, bool track_rounds) {
  using MinHeap =
      std::priority_queue<HeapItem, std::vector<HeapItem>, std::greater<>>;

  struct Path {
    MinHeap queue;
    bool dead = false;
  };

  std::vector<uint8_t> visited(graph.vertex_count(), 0);
  std::vector<Path> paths;
  std::priority_queue<HeapItem> results;  // max on top

  auto offer_result = [&](const HeapItem& item, uint32_t v) {
    if (!graph.is_live(v)) return;
    results.push(item);
    if (results.size() > ef) results.pop();
  };

  for (uint32_t e : entries) {
    if (visited[e]) continue;
    visited[e] = 1;
    const double d = query_dist(e);
    stats.qch_evals++;
    if (track_rounds) stats.visit_round.emplace(e, 0);
    Path path;
    path.queue.push({d, e});
    offer_result({d, e}, e);
    paths.push_back(std::move(path));
  }

  std::vector<uint32_t> claimed;
  std::vector<size_t> claimed_path;
  std::vector<double> scores;

  for (;;) {
    bool any_active = false;
    for (const Path& p : paths) {
      if (!p.dead && !p.queue.empty()) {
        any_active = true;
        break;
      }
    }
    if (!any_active) break;
    stats.rounds++;
    const uint32_t round = static_cast<uint32_t>(stats.rounds);

    const double tau = results.size() >= ef
                           ? results.top().dist
                           : std::numeric_limits<double>::infinity();

    claimed.clear();
    claimed_path.clear();
    for (size_t pi = 0; pi < paths.size(); ++pi) {
      Path& path = paths[pi];
      if (path.dead || path.queue.empty()) continue;
      const HeapItem head = path.queue.top();
      path.queue.pop();
      stats.hops++;
      if (head.dist > tau) {
        path.dead = true;  // termination is final for this path
        continue;
      }
      for (const GemGraph::Edge& edge : graph.adjacency[head.id]) {
        const uint32_t nb = edge.to;
        if (visited[nb]) continue;
        if (!accept(nb)) {
          stats.pruned_by_cluster++;
          continue;
        }
        visited[nb] = 1;
        claimed.push_back(nb);
        claimed_path.push_back(pi);
        if (track_rounds) stats.visit_round.emplace(nb, round);
      }
    }
    if (claimed.empty()) continue;

    parallel_scores(claimed, query_dist, max_threads, scores);
    stats.qch_evals += claimed.size();

    for (size_t i = 0; i < claimed.size(); ++i) {
      const HeapItem item{scores[i], claimed[i]};
      paths[claimed_path[i]].queue.push(item);
      offer_result(item, claimed[i]);
    }
  }

  std::vector<Candidate> out;
  out.reserve(results.size());
  while (!results.empty()) {
    out.push_back({results.top().id, results.top().dist});
    results.pop();
  }
  std::reverse(out.begin(), out.end());  // ascending qCH, ties by id
  return out;
}

std::vector<Candidate> beam_search(const CodeSet& query_codes,
                                   const GemIndex& index,
                                   const std::vector<uint32_t>& c_query,
                                   const SearchParams& params, Rng& rng,
                                   SearchStats& stats) {
  const GemGraph& graph = index.graph;
  if (graph.live_count() == 0) {
    raise(ErrorCode::empty_graph, "no live vertices to search");
  }
  if (c_query.empty()) {
    raise(ErrorCode::empty_query, "cluster filter produced no clusters");
  }

  // One entry per filtered cluster: the lowest live member deterministically,
  // or a seeded draw over the live members otherwise.
  std::vector<uint32_t> entries;
  for (uint32_t c : c_query) {
    const std::vector<uint32_t>& members = graph.entry_candidates[c];
    std::vector<uint32_t> live;
    live.reserve(members.size());
    for (uint32_t v : members) {
      if (graph.is_live(v)) live.push_back(v);
    }
    if (live.empty()) continue;
    entries.push_back(params.deterministic
                          ? live.front()
                          : live[rng.next_below(live.size())]);
  }

  std::vector<uint8_t> wanted(index.space.cluster_count(), 0);
  for (uint32_t c : c_query) wanted[c] = 1;
  auto accept = [&](uint32_t v) {
    for (uint32_t c : graph.cluster_membership[v]) {
      if (wanted[c]) return true;
    }
    return false;
  };
  auto query_dist = [&](uint32_t v) {
    return qch(query_codes, index.codes[v], index.codebook);
  };
  return beam_traverse(graph, entries, query_dist, accept, params.ef_search,
                       params.max_threads, stats, params.track_visit_rounds);
}

SearchResult rerank(const VectorSet& query, std::vector<Candidate> candidates,
                    const Corpus& corpus, SimilarityKind kind,
                    uint32_t rerank_k, uint32_t k, SearchStats stats) {
  std::sort(candidates.begin(), candidates.end(),
            [](const Candidate& a, const Candidate& b) {
              if (a.dist != b.dist) return a.dist < b.dist;
              return a.id < b.id;
            });
  if (candidates.size() > rerank_k) candidates.resize(rerank_k);

  SearchResult out;
  out.hits.reserve(candidates.size());
  for (const Candidate& c : candidates) {
    const double sim =
        chamfer_similarity(query, corpus.sets[c.id], kind);
    stats.ch_evals++;
    out.hits.emplace_back(c.id, sim);
  }
  std::sort(out.hits.begin(), out.hits.end(),
            [](const auto& a, const auto& b) {
              if (a.second != b.second) return a.second > b.second;
              return a.first < b.first;
            });
  if (out.hits.size() > k) out.hits.resize(k);
  out.stats = std::move(stats);
  return out;
}

SearchResult search(const VectorSet& query, const GemIndex& index,
                    const SearchParams& params) {
  params.validate();
  if (index.graph.live_count() == 0) {
    raise(ErrorCode::empty_graph, "index has no live vertices");
  }
  for (const Vector& v : query.vectors) {
    if (v.size() != index.corpus.dim) {
      raise(ErrorCode::dim_mismatch, "query dimension mismatch");
    }
  }

  const VectorSet q = normalize_set(query, index.params.kind);
  SearchStats stats;
  const std::vector<uint32_t> c_query =
      cluster_filter(q, index.space, params.t);
  const CodeSet query_codes = encode(q, index.codebook);

  Rng rng(params.seed);
  std::vector<Candidate> candidates =
      beam_search(query_codes, index, c_query, params, rng, stats);
  return rerank(q, std::move(candidates), index.corpus, index.params.kind,
                params.resolved_rerank(), params.k, std::move(stats));
}

}  // namespace gem
