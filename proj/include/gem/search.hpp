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

#pragma once

#include <cstdint>
#include <functional>
#include <unordered_map>
#include <utility>
#include <vector>

#include "gem/graph.hpp"
#include "gem/types.hpp"

namespace gem {

struct SearchParams {
  uint32_t t = 4;           // top centroids per query token
  uint32_t ef_search = 64;  // result heap capacity
  uint32_t rerank_k = 0;    // 0: min(4k, ef_search)
  uint32_t k = 10;
  bool deterministic = true;  // entry points: lowest live id vs seeded draw
  uint32_t max_threads = 1;
  uint64_t seed = 0;
  bool track_visit_rounds = false;

  uint32_t resolved_rerank() const {
    const uint32_t r = rerank_k == 0 ? 4 * k : rerank_k;
    return std::min(std::max(r, k), ef_search);
  }
  void validate() const;
};

struct SearchStats {
  uint64_t qch_evals = 0;
  uint64_t ch_evals = 0;
  uint64_t hops = 0;  // queue pops processed
  uint64_t pruned_by_cluster = 0;
  uint64_t rounds = 0;
  // Filled only when track_visit_rounds is set: vertex -> round first seen.
  std::unordered_map<uint32_t, uint32_t> visit_round;
};

struct SearchResult {
  // (doc id, exact Chamfer similarity), descending score, ties by id.
  std::vector<std::pair<uint64_t, double>> hits;
  SearchStats stats;
};

// Union over query tokens of each token's top-t coarse centroids by
// relevance (dot product in cosine mode, negated distance in l2).
std::vector<uint32_t> cluster_filter(const VectorSet& query,
                                     const ClusterSpace& space, uint32_t t);

struct Candidate {
  uint32_t id = 0;
  double dist = 0.0;  // qCH to the query
};

// Multi-path beam traversal, one path per entry point, executed in
// synchronous rounds: every active path pops once, unvisited neighbors that
// pass `accept` are claimed in deterministic order, scored (in parallel when
// max_threads > 1) and merged into the shared result heap. The round
// structure makes the surviving candidate set independent of the thread
// count. Tombstoned vertices are traversed but never enter the heap.
std::vector<Candidate> beam_traverse(
    const GemGraph& graph, const std::vector<uint32_t>& entries,
    const std::function<double(uint32_t)>& query_dist,
    const std::function<bool(uint32_t)>& accept, uint32_t ef,
    uint32_t max_threads, SearchStats& stats, bool track_rounds);

// GEM flavor: entries from each filtered cluster, expansion limited to
// vertices whose assigned clusters meet the query's.
std::vector<Candidate> beam_search(const CodeSet& query_codes,
                                   const GemIndex& index,
                                   const std::vector<uint32_t>& c_query,
                                   const SearchParams& params, Rng& rng,
                                   SearchStats& stats);

// Exact-Chamfer rescoring of the rerank_k closest candidates.
SearchResult rerank(const VectorSet& query, std::vector<Candidate> candidates,
                    const Corpus& corpus, SimilarityKind kind,
                    uint32_t rerank_k, uint32_t k, SearchStats stats);

// Full pipeline: cluster filter, query encoding, beam traversal, rerank.
// The query is normalized on entry in cosine mode.
SearchResult search(const VectorSet& query, const GemIndex& index,
                    const SearchParams& params);

}  // namespace gem
