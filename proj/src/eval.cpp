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

#include "gem/eval.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <memory>
#include <numeric>
#include <unordered_map>

#include "gem/metric.hpp"

namespace gem {

std::vector<std::pair<uint64_t, double>> brute_force_topk(
    const VectorSet& query, const Corpus& corpus, uint32_t k,
    SimilarityKind kind) {
  std::vector<std::pair<uint64_t, double>> scored;
  scored.reserve(corpus.size());
  for (const VectorSet& set : corpus.sets) {
    scored.emplace_back(set.id, chamfer_similarity(query, set, kind));
  }
  std::sort(scored.begin(), scored.end(), [](const auto& a, const auto& b) {
    if (a.second != b.second) return a.second > b.second;
    return a.first < b.first;
  });
  if (scored.size() > k) scored.resize(k);
  return scored;
}

double recall_at_k(std::span<const uint64_t> results,
                   const std::vector<uint64_t>& g_q) {
  if (g_q.empty()) {
    raise(ErrorCode::empty_ground_truth, "empty ground-truth set");
  }
  size_t hit = 0;
  for (uint64_t id : results) {
    hit += std::binary_search(g_q.begin(), g_q.end(), id);
  }
  return static_cast<double>(hit) / static_cast<double>(g_q.size());
}

double mrr_at_k(std::span<const uint64_t> results,
                const std::vector<uint64_t>& g_q, uint32_t k) {
  if (g_q.empty()) {
    raise(ErrorCode::empty_ground_truth, "empty ground-truth set");
  }
  const size_t limit = std::min<size_t>(results.size(), k);
  for (size_t i = 0; i < limit; ++i) {
    if (std::binary_search(g_q.begin(), g_q.end(), results[i])) {
      return 1.0 / static_cast<double>(i + 1);
    }
  }
  return 0.0;
}

double success_at_k(std::span<const uint64_t> results,
                    const std::vector<uint64_t>& g_q) {
  if (g_q.empty()) {
    raise(ErrorCode::empty_ground_truth, "empty ground-truth set");
  }
  for (uint64_t id : results) {
    if (std::binary_search(g_q.begin(), g_q.end(), id)) return 1.0;
  }
  return 0.0;
}

MvgIndex mvg_build(Corpus corpus, BuildParams params) {
  params.resolve_defaults(corpus);

  MvgIndex index;
  index.params = params;
  index.corpus = normalize_corpus(std::move(corpus), params.kind);

  // Same fine vocabulary sizing as GEM; no coarse stage.
  Rng rng(params.seed);
  std::vector<Vector> pool;
  for (const VectorSet& set : index.corpus.sets) {
    for (const Vector& v : set.vectors) pool.push_back(v);
  }
  std::vector<Vector> sample;
  if (params.sample_frac >= 1.0) {
    sample = pool;
  } else {
    const size_t want = static_cast<size_t>(std::llround(
        params.sample_frac * static_cast<double>(pool.size())));
    std::vector<size_t> order(pool.size());
    std::iota(order.begin(), order.end(), 0);
    rng.shuffle(order);
    order.resize(std::max<size_t>(want, 1));
    std::sort(order.begin(), order.end());
    for (size_t idx : order) sample.push_back(pool[idx]);
  }
  if (sample.size() < params.k1) {
    raise(ErrorCode::too_few_points, "sample smaller than k1");
  }
  std::vector<Vector> fine = kmeans(sample, params.k1, kKmeansIters, rng);
  for (Vector& c : fine) {
    for (double& x : c) x = to_f32_grid(x);
  }
  index.codebook = build_codebook(std::move(fine), params.kind);

  const size_t n = index.corpus.size();
  index.codes.reserve(n);
  for (const VectorSet& set : index.corpus.sets) {
    index.codes.push_back(encode(set, index.codebook));
  }

  GemGraph& graph = index.graph;
  graph.degree_cap = params.M;
  graph.adjacency.assign(n, {});
  graph.tombstone.assign(n, 0);
  graph.cluster_membership.assign(n, {0});
  graph.entry_candidates.assign(1, {});
  graph.entry_candidates[0].resize(n);
  std::iota(graph.entry_candidates[0].begin(),
            graph.entry_candidates[0].end(), 0);

  auto cache = std::make_shared<std::unordered_map<uint64_t, double>>();
  const VertexDistanceFn dist = [cache, &index](uint32_t u, uint32_t v) {
    const uint64_t key = (static_cast<uint64_t>(u) << 32) | v;
    auto it = cache->find(key);
    if (it != cache->end()) return it->second;
    const double d = qch(index.codes[u], index.codes[v], index.codebook);
    (*cache)[key] = d;
    return d;
  };
  build_cluster_graph(graph, graph.entry_candidates[0], dist, params.fanout(),
                      params.ef_construction, params.M);
  repair_cluster_connectivity(graph, dist, params.M);
  return index;
}

SearchResult mvg_search(const VectorSet& query, const MvgIndex& index,
                        const SearchParams& params) {
  params.validate();
  const GemGraph& graph = index.graph;
  if (graph.live_count() == 0) {
    raise(ErrorCode::empty_graph, "index has no live vertices");
  }
  if (query.vectors.empty()) {
    raise(ErrorCode::empty_query, "query has no vectors");
  }
  for (const Vector& v : query.vectors) {
    if (v.size() != index.corpus.dim) {
      raise(ErrorCode::dim_mismatch, "query dimension mismatch");
    }
  }

  const VectorSet q = normalize_set(query, index.params.kind);
  const CodeSet query_codes = encode(q, index.codebook);
  SearchStats stats;

  std::vector<uint32_t> live;
  for (uint32_t v = 0; v < graph.vertex_count(); ++v) {
    if (graph.is_live(v)) live.push_back(v);
  }
  Rng rng(params.seed);
  const uint32_t entry = params.deterministic
                             ? live.front()
                             : live[rng.next_below(live.size())];

  std::vector<Candidate> candidates = beam_traverse(
      graph, {entry},
      [&](uint32_t v) { return qch(query_codes, index.codes[v], index.codebook); },
      [](uint32_t) { return true; }, params.ef_search, params.max_threads,
      stats, params.track_visit_rounds);
  return rerank(q, std::move(candidates), index.corpus, index.params.kind,
                params.resolved_rerank(), params.k, std::move(stats));
}

SearchFn make_gem_backend(const GemIndex& index) {
  return [&index](const VectorSet& query, const SearchParams& params) {
    return search(query, index, params);
  };
}

SearchFn make_mvg_backend(const MvgIndex& index) {
  return [&index](const VectorSet& query, const SearchParams& params) {
    return mvg_search(query, index, params);
  };
}

SearchFn make_brute_backend(const Corpus& corpus, SimilarityKind kind) {
  return [&corpus, kind](const VectorSet& query, const SearchParams& params) {
    const VectorSet q = normalize_set(query, kind);
    SearchResult out;
    out.hits = brute_force_topk(q, corpus, params.k, kind);
    out.stats.ch_evals = corpus.size();
    return out;
  };
}

MetricReport run_benchmark(const SearchFn& backend,
                           const std::vector<VectorSet>& queries,
                           const Qrels& qrels, const SearchParams& params,
                           uint32_t repeats) {
  if (queries.empty()) {
    raise(ErrorCode::invalid_argument, "no queries to benchmark");
  }
  if (repeats == 0) repeats = 1;

  MetricReport report;
  report.k = params.k;
  double latency_sum = 0.0;
  double qch_sum = 0.0;
  double ch_sum = 0.0;

  for (const VectorSet& query : queries) {
    const auto it = qrels.relevant.find(query.id);
    if (it == qrels.relevant.end() || it->second.empty()) {
      raise(ErrorCode::inconsistent_qrels,
            "query " + std::to_string(query.id) + " has no ground truth");
    }
    const std::vector<uint64_t>& g_q = it->second;

    SearchResult first;
    double query_latency = 0.0;
    for (uint32_t r = 0; r < repeats; ++r) {
      const auto start = std::chrono::steady_clock::now();
      SearchResult res = backend(query, params);
      const auto stop = std::chrono::steady_clock::now();
      query_latency +=
          std::chrono::duration<double>(stop - start).count();
      if (r == 0) first = std::move(res);
    }
    query_latency /= static_cast<double>(repeats);

    std::vector<uint64_t> ids;
    ids.reserve(first.hits.size());
    for (const auto& [id, score] : first.hits) {
      (void)score;
      ids.push_back(id);
    }

    MetricReport::PerQuery pq;
    pq.query_id = query.id;
    pq.recall = recall_at_k(ids, g_q);
    pq.mrr = mrr_at_k(ids, g_q, params.k);
    pq.success = success_at_k(ids, g_q);
    pq.latency_s = query_latency;
    report.per_query.push_back(pq);

    report.recall_at_k += pq.recall;
    report.mrr_at_k += pq.mrr;
    report.success_at_k += pq.success;
    latency_sum += query_latency;
    qch_sum += static_cast<double>(first.stats.qch_evals);
    ch_sum += static_cast<double>(first.stats.ch_evals);
  }

  const double nq = static_cast<double>(queries.size());
  report.recall_at_k /= nq;
  report.mrr_at_k /= nq;
  report.success_at_k /= nq;
  report.mean_latency_s = latency_sum / nq;
  report.mean_qch_evals = qch_sum / nq;
  report.mean_ch_evals = ch_sum / nq;
  return report;
}

}  // namespace gem
