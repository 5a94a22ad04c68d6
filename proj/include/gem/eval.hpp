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
#include <span>
#include <unordered_map>
#include <vector>

#include "gem/graph.hpp"
#include "gem/search.hpp"
#include "gem/types.hpp"

namespace gem {

// Ground-truth document ids per query id. Lists are kept sorted.
struct Qrels {
  std::unordered_map<uint64_t, std::vector<uint64_t>> relevant;
};

// Exact top-k by Chamfer similarity against every set, descending score with
// ties broken by ascending id.
std::vector<std::pair<uint64_t, double>> brute_force_topk(
    const VectorSet& query, const Corpus& corpus, uint32_t k,
    SimilarityKind kind);

double recall_at_k(std::span<const uint64_t> results,
                   const std::vector<uint64_t>& g_q);
double mrr_at_k(std::span<const uint64_t> results,
                const std::vector<uint64_t>& g_q, uint32_t k);
double success_at_k(std::span<const uint64_t> results,
                    const std::vector<uint64_t>& g_q);

// Flat single-graph baseline: neighbors chosen by qCH during insertion, no
// clusters, no bridges, no shortcuts; single-entry traversal under qCH with
// the same exact-Chamfer rerank.
struct MvgIndex {
  Corpus corpus;
  Codebook codebook;
  std::vector<CodeSet> codes;
  GemGraph graph;
  BuildParams params;
};

MvgIndex mvg_build(Corpus corpus, BuildParams params);
SearchResult mvg_search(const VectorSet& query, const MvgIndex& index,
                        const SearchParams& params);

struct MetricReport {
  uint32_t k = 0;
  double recall_at_k = 0.0;
  double mrr_at_k = 0.0;
  double success_at_k = 0.0;
  double mean_latency_s = 0.0;
  double mean_qch_evals = 0.0;
  double mean_ch_evals = 0.0;

  struct PerQuery {
    uint64_t query_id = 0;
    double recall = 0.0;
    double mrr = 0.0;
    double success = 0.0;
    double latency_s = 0.0;
  };
  std::vector<PerQuery> per_query;
};

using SearchFn =
    std::function<SearchResult(const VectorSet&, const SearchParams&)>;

SearchFn make_gem_backend(const GemIndex& index);
SearchFn make_mvg_backend(const MvgIndex& index);
SearchFn make_brute_backend(const Corpus& corpus, SimilarityKind kind);

// Runs every query `repeats` times; quality metrics come from the first run
// (hits are deterministic), latency is the mean wall time around the search
// call only.
MetricReport run_benchmark(const SearchFn& backend,
                           const std::vector<VectorSet>& queries,
                           const Qrels& qrels, const SearchParams& params,
                           uint32_t repeats);

}  // namespace gem
