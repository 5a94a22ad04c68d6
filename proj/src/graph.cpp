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

#include "gem/graph.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <memory>
#include <numeric>
#include <queue>
#include <unordered_map>

#include "gem/search.hpp"

namespace gem {

uint32_t GemGraph::base_degree(uint32_t v) const {
  uint32_t n = 0;
  for (const Edge& e : adjacency[v]) n += e.kind != EdgeKind::shortcut;
  return n;
}

uint32_t GemGraph::shortcut_count(uint32_t v) const {
  uint32_t n = 0;
  for (const Edge& e : adjacency[v]) n += e.kind == EdgeKind::shortcut;
  return n;
}

bool GemGraph::has_edge(uint32_t u, uint32_t v) const {
  for (const Edge& e : adjacency[u]) {
    if (e.to == v) return true;
  }
  return false;
}

bool GemGraph::in_cluster(uint32_t v, uint32_t cluster) const {
  const auto& m = cluster_membership[v];
  return std::binary_search(m.begin(), m.end(), cluster);
}

void BuildParams::validate() const {
  if (M == 0) raise(ErrorCode::invalid_argument, "M must be >= 1");
  if (fanout() == 0 || fanout() > M) {
    raise(ErrorCode::invalid_argument, "need 1 <= f <= M");
  }
  if (ef_construction < M) {
    raise(ErrorCode::invalid_argument, "need M <= ef_construction");
  }
  if (r_max == 0) raise(ErrorCode::invalid_argument, "r_max must be >= 1");
  if (fallback_r == 0 || fallback_r > r_max) {
    raise(ErrorCode::invalid_argument, "need 1 <= fallback_r <= r_max");
  }
  if (shortcut_frac < 0.0 || shortcut_frac > 1.0) {
    raise(ErrorCode::invalid_argument, "shortcut_frac must be in [0, 1]");
  }
  if (sample_frac <= 0.0 || sample_frac > 1.0) {
    raise(ErrorCode::invalid_argument, "sample_frac must be in (0, 1]");
  }
  if (f_prime == 0) raise(ErrorCode::invalid_argument, "f_prime must be >= 1");
}

uint32_t BuildParams::default_k1(size_t total_vectors) {
  const double target = 16.0 * std::sqrt(static_cast<double>(total_vectors));
  uint64_t lo = 1;
  while (lo * 2 <= static_cast<uint64_t>(target)) lo *= 2;
  const uint64_t hi = lo * 2;
  uint64_t k1 = (target - static_cast<double>(lo) <=
                 static_cast<double>(hi) - target)
                    ? lo
                    : hi;
  k1 = std::max<uint64_t>(k1, 16);
  k1 = std::min<uint64_t>(k1, total_vectors);
  return static_cast<uint32_t>(std::max<uint64_t>(k1, 1));
}

uint32_t BuildParams::default_k2(size_t n_sets, uint32_t k1) {
  uint64_t k2 = std::max<uint64_t>(2, n_sets / 1000);
  k2 = std::min<uint64_t>(k2, n_sets);
  k2 = std::min<uint64_t>(k2, k1);
  return static_cast<uint32_t>(std::max<uint64_t>(k2, 1));
}

void BuildParams::resolve_defaults(const Corpus& corpus) {
  size_t total_vectors = 0;
  for (const VectorSet& s : corpus.sets) total_vectors += s.vectors.size();
  if (k1 == 0) k1 = default_k1(total_vectors);
  if (k2 == 0) k2 = default_k2(corpus.sets.size(), k1);
  k1 = static_cast<uint32_t>(std::min<size_t>(k1, total_vectors));
  k2 = std::min(k2, k1);
  validate();
}

namespace {

void add_edge_pair(GemGraph& g, uint32_t u, uint32_t v, EdgeKind kind) {
  g.adjacency[u].push_back({v, kind});
  g.adjacency[v].push_back({u, kind});
}

void remove_edge_pair(GemGraph& g, uint32_t u, uint32_t v) {
  auto drop = [&](uint32_t a, uint32_t b) {
    auto& adj = g.adjacency[a];
    for (size_t i = 0; i < adj.size(); ++i) {
      if (adj[i].to == b) {
        adj.erase(adj.begin() + static_cast<ptrdiff_t>(i));
        return;
      }
    }
  };
  drop(u, v);
  drop(v, u);
}

// Drops v's least similar evictable edge: the normal edge with the largest
// dist(v, .), ties resolved toward the larger neighbor id. Shortcut and
// pinned edges are left alone. `keep` (if any) is also protected.
bool evict_worst_normal(GemGraph& g, uint32_t v, const VertexDistanceFn& dist,
                        int64_t keep = -1) {
  double worst_d = -1.0;
  int64_t worst = -1;
  for (const GemGraph::Edge& e : g.adjacency[v]) {
    if (e.kind != EdgeKind::normal) continue;
    if (static_cast<int64_t>(e.to) == keep) continue;
    const double d = dist(v, e.to);
    if (d > worst_d || (d == worst_d && static_cast<int64_t>(e.to) > worst)) {
      worst_d = d;
      worst = e.to;
    }
  }
  if (worst < 0) return false;
  remove_edge_pair(g, v, static_cast<uint32_t>(worst));
  return true;
}

using Scored = std::pair<double, uint32_t>;  // (distance, vertex)

// Nearest already-wired members of a cluster as seen from a fresh vertex.
// Small pools are scanned exhaustively; larger ones use a greedy beam from
// the first wired member over in-cluster edges.
std::vector<Scored> construction_ann(const GemGraph& g,
                                     const std::vector<uint32_t>& wired,
                                     const std::vector<uint8_t>& in_wired,
                                     const std::function<double(uint32_t)>& d_to,
                                     uint32_t ef) {
  std::vector<Scored> out;
  if (wired.empty()) return out;

  if (wired.size() <= ef) {
    out.reserve(wired.size());
    for (uint32_t v : wired) out.emplace_back(d_to(v), v);
    std::sort(out.begin(), out.end());
    return out;
  }

  const uint32_t entry = wired.front();
  std::vector<uint8_t> visited(g.vertex_count(), 0);
  visited[entry] = 1;

  std::priority_queue<Scored, std::vector<Scored>, std::greater<Scored>> cand;
  std::priority_queue<Scored> results;  // max-heap, capped at ef
  const double d0 = d_to(entry);
  cand.emplace(d0, entry);
  results.emplace(d0, entry);

  while (!cand.empty()) {
    const auto [d, v] = cand.top();
    cand.pop();
    if (results.size() >= ef && d > results.top().first) break;
    for (const GemGraph::Edge& e : g.adjacency[v]) {
      const uint32_t nb = e.to;
      if (!in_wired[nb] || visited[nb]) continue;
      visited[nb] = 1;
      const double nd = d_to(nb);
      if (results.size() < ef || nd < results.top().first) {
        cand.emplace(nd, nb);
        results.emplace(nd, nb);
        if (results.size() > ef) results.pop();
      }
    }
  }
  out.reserve(results.size());
  while (!results.empty()) {
    out.push_back(results.top());
    results.pop();
  }
  std::sort(out.begin(), out.end());
  return out;
}

// First-time wiring of a vertex (Alg. 2 lines 3-7): bidirectional edges to
// the fanout nearest wired members, evicting over-cap neighbors.
void connect_new_vertex(GemGraph& g, uint32_t p,
                        const std::vector<Scored>& found, uint32_t fanout,
                        const VertexDistanceFn& dist, uint32_t cap) {
  uint32_t added = 0;
  for (const auto& [d, v] : found) {
    (void)d;
    if (added >= fanout) break;
    if (v == p || g.has_edge(p, v)) continue;
    add_edge_pair(g, p, v, EdgeKind::normal);
    ++added;
    if (g.base_degree(v) > cap) {
      evict_worst_normal(g, v, dist);
    }
  }
}

}  // namespace

void update_bridges(GemGraph& graph, uint32_t p,
                    const std::vector<uint32_t>& new_neighbors,
                    const std::vector<uint32_t>& c_top,
                    const VertexDistanceFn& dist, uint32_t degree_cap) {
  // Non-evictable partners stay regardless of the merge outcome.
  std::vector<uint32_t> preserved;
  std::vector<uint32_t> old_normal;
  for (const GemGraph::Edge& e : graph.adjacency[p]) {
    (e.kind == EdgeKind::normal ? old_normal : preserved).push_back(e.to);
  }

  std::vector<uint32_t> all = old_normal;
  for (uint32_t v : new_neighbors) {
    if (v != p) all.push_back(v);
  }
  std::sort(all.begin(), all.end());
  all.erase(std::unique(all.begin(), all.end()), all.end());
  all.erase(std::remove_if(all.begin(), all.end(),
                           [&](uint32_t v) {
                             return std::find(preserved.begin(),
                                              preserved.end(),
                                              v) != preserved.end();
                           }),
            all.end());

  std::vector<uint32_t> final_set;
  if (all.size() + preserved.size() <= degree_cap) {
    final_set = all;
  } else {
    std::vector<Scored> scored;
    scored.reserve(all.size());
    for (uint32_t v : all) scored.emplace_back(dist(p, v), v);
    std::sort(scored.begin(), scored.end());

    const size_t budget = degree_cap - preserved.size();
    std::vector<uint32_t> rest;
    for (size_t i = 0; i < scored.size(); ++i) {
      (i < budget ? final_set : rest).push_back(scored[i].second);
    }

    auto provides = [&](uint32_t cluster) {
      size_t n = 0;
      for (uint32_t v : final_set) n += graph.in_cluster(v, cluster);
      for (uint32_t v : preserved) n += graph.in_cluster(v, cluster);
      return n;
    };

    // Guarantee one representative per cluster of c_top when the merged
    // candidate pool has one. Victims are the farthest kept neighbors that
    // are not the sole representative of some other guaranteed cluster.
    for (uint32_t cluster : c_top) {
      if (provides(cluster) > 0) continue;
      int64_t best = -1;
      double best_d = std::numeric_limits<double>::infinity();
      for (uint32_t v : rest) {
        if (!graph.in_cluster(v, cluster)) continue;
        const double d = dist(p, v);
        if (d < best_d || (d == best_d && static_cast<int64_t>(v) < best)) {
          best_d = d;
          best = v;
        }
      }
      if (best < 0) continue;

      auto is_critical = [&](uint32_t v) {
        for (uint32_t other : c_top) {
          if (other == cluster) continue;
          if (graph.in_cluster(v, other) && provides(other) == 1) return true;
        }
        return false;
      };
      int64_t victim = -1;
      double victim_d = -1.0;
      bool victim_critical = true;
      for (uint32_t v : final_set) {
        const bool crit = is_critical(v);
        const double d = dist(p, v);
        const bool better =
            (victim < 0) || (victim_critical && !crit) ||
            (victim_critical == crit &&
             (d > victim_d ||
              (d == victim_d && static_cast<int64_t>(v) > victim)));
        if (better) {
          victim = v;
          victim_d = d;
          victim_critical = crit;
        }
      }
      if (victim < 0) continue;
      final_set.erase(
          std::find(final_set.begin(), final_set.end(),
                    static_cast<uint32_t>(victim)));
      rest.push_back(static_cast<uint32_t>(victim));
      rest.erase(std::find(rest.begin(), rest.end(),
                           static_cast<uint32_t>(best)));
      final_set.push_back(static_cast<uint32_t>(best));
    }
  }

  // Apply the replacement, updating reverse edges. Reverse additions that
  // push a partner over the cap evict that partner's worst other edge so the
  // fresh bridge link survives.
  std::vector<uint32_t> final_sorted = final_set;
  std::sort(final_sorted.begin(), final_sorted.end());
  for (uint32_t v : old_normal) {
    if (!std::binary_search(final_sorted.begin(), final_sorted.end(), v)) {
      remove_edge_pair(graph, p, v);
    }
  }
  std::sort(old_normal.begin(), old_normal.end());
  for (uint32_t v : final_sorted) {
    if (std::binary_search(old_normal.begin(), old_normal.end(), v)) continue;
    add_edge_pair(graph, p, v, EdgeKind::normal);
    if (graph.base_degree(v) > degree_cap) {
      evict_worst_normal(graph, v, dist, /*keep=*/p);
    }
  }
}

void build_cluster_graph(GemGraph& graph,
                         const std::vector<uint32_t>& members,
                         const VertexDistanceFn& dist, uint32_t fanout,
                         uint32_t ef_construction, uint32_t degree_cap) {
  std::vector<uint32_t> wired;
  std::vector<uint8_t> in_wired(graph.vertex_count(), 0);
  wired.reserve(members.size());

  for (uint32_t p : members) {
    const std::vector<Scored> found = construction_ann(
        graph, wired, in_wired, [&](uint32_t v) { return dist(p, v); },
        ef_construction);

    if (graph.adjacency[p].empty()) {
      connect_new_vertex(graph, p, found, fanout, dist, degree_cap);
    } else {
      std::vector<uint32_t> new_neighbors;
      for (size_t i = 0; i < found.size() && i < fanout; ++i) {
        new_neighbors.push_back(found[i].second);
      }
      update_bridges(graph, p, new_neighbors, graph.cluster_membership[p],
                     dist, degree_cap);
    }
    wired.push_back(p);
    in_wired[p] = 1;
  }
}

namespace {

struct UnionFind {
  std::vector<uint32_t> parent;

  explicit UnionFind(size_t n) : parent(n) {
    std::iota(parent.begin(), parent.end(), 0);
  }

  uint32_t find(uint32_t x) {
    while (parent[x] != x) {
      parent[x] = parent[parent[x]];
      x = parent[x];
    }
    return x;
  }

  void unite(uint32_t a, uint32_t b) { parent[find(a)] = find(b); }
};

}  // namespace

void repair_cluster_connectivity(GemGraph& graph,
                                 const VertexDistanceFn& dist,
                                 uint32_t degree_cap) {
  constexpr int kMaxSweeps = 32;
  for (int sweep = 0; sweep < kMaxSweeps; ++sweep) {
    bool repaired = false;
    for (size_t cluster = 0; cluster < graph.entry_candidates.size();
         ++cluster) {
      const std::vector<uint32_t>& members = graph.entry_candidates[cluster];
      if (members.size() < 2) continue;

      std::vector<int32_t> local(graph.vertex_count(), -1);
      for (size_t i = 0; i < members.size(); ++i) {
        local[members[i]] = static_cast<int32_t>(i);
      }

      for (size_t round = 0; round <= members.size(); ++round) {
        UnionFind uf(members.size());
        for (size_t i = 0; i < members.size(); ++i) {
          for (const GemGraph::Edge& e : graph.adjacency[members[i]]) {
            if (local[e.to] >= 0) {
              uf.unite(static_cast<uint32_t>(i),
                       static_cast<uint32_t>(local[e.to]));
            }
          }
        }
        std::unordered_map<uint32_t, std::vector<uint32_t>> comps;
        for (size_t i = 0; i < members.size(); ++i) {
          comps[uf.find(static_cast<uint32_t>(i))].push_back(members[i]);
        }
        if (comps.size() <= 1) break;

        // Largest component (ties: smallest member id) absorbs the nearest
        // other component via a pinned edge.
        std::vector<std::vector<uint32_t>> groups;
        for (auto& [root, ids] : comps) {
          (void)root;
          groups.push_back(std::move(ids));
        }
        std::sort(groups.begin(), groups.end(),
                  [](const auto& a, const auto& b) {
                    if (a.size() != b.size()) return a.size() > b.size();
                    return a.front() < b.front();
                  });

        double best_d = std::numeric_limits<double>::infinity();
        uint32_t best_a = 0, best_b = 0;
        for (size_t gi = 1; gi < groups.size(); ++gi) {
          for (uint32_t a : groups[0]) {
            for (uint32_t b : groups[gi]) {
              const double d = dist(a, b);
              if (d < best_d ||
                  (d == best_d &&
                   std::pair<uint32_t, uint32_t>(a, b) <
                       std::pair<uint32_t, uint32_t>(best_a, best_b))) {
                best_d = d;
                best_a = a;
                best_b = b;
              }
            }
          }
        }
        add_edge_pair(graph, best_a, best_b, EdgeKind::pinned);
        if (graph.base_degree(best_a) > degree_cap) {
          evict_worst_normal(graph, best_a, dist);
        }
        if (graph.base_degree(best_b) > degree_cap) {
          evict_worst_normal(graph, best_b, dist);
        }
        repaired = true;
      }
    }
    if (!repaired) return;
  }
}

namespace {

VertexDistanceFn make_qemd_memo(const GemIndex& index) {
  auto cache = std::make_shared<std::unordered_map<uint64_t, double>>();
  return [cache, &index](uint32_t u, uint32_t v) {
    const uint64_t key =
        (static_cast<uint64_t>(std::min(u, v)) << 32) | std::max(u, v);
    auto it = cache->find(key);
    if (it != cache->end()) return it->second;
    const double d = index.set_qemd(u, v);
    (*cache)[key] = d;
    return d;
  };
}

std::vector<uint32_t> assigned_clusters(const GemIndex& index,
                                        const TfIdfProfile& profile,
                                        uint32_t m) {
  if (!index.params.use_tfidf) {
    return prune_clusters(profile,
                          static_cast<uint32_t>(profile.size()));
  }
  const uint32_t r = index.cutoff.empty()
                         ? index.params.fallback_r
                         : predict_cutoff(index.cutoff, profile, m);
  return prune_clusters(profile, r);
}

}  // namespace

void inject_shortcuts(GemIndex& index, const std::vector<TrainingPair>& pairs,
                      uint32_t f_prime, uint32_t degree_cap) {
  SearchParams sp;
  sp.k = f_prime;
  sp.ef_search = std::max(index.params.ef_construction, f_prime);
  sp.rerank_k = f_prime;
  sp.deterministic = true;
  sp.max_threads = 1;

  for (const TrainingPair& pair : pairs) {
    if (pair.positive_id >= index.corpus.size()) {
      raise(ErrorCode::unknown_doc_id,
            "training pair references unknown document " +
                std::to_string(pair.positive_id));
    }
    const uint32_t positive = static_cast<uint32_t>(pair.positive_id);
    const SearchResult res = search(pair.query, index, sp);
    if (res.hits.empty()) continue;

    bool present = false;
    for (const auto& [id, score] : res.hits) {
      (void)score;
      if (id == pair.positive_id) {
        present = true;
        break;
      }
    }
    if (present) continue;

    const uint32_t p_top = static_cast<uint32_t>(res.hits.front().first);
    if (index.graph.total_degree(p_top) > degree_cap ||
        index.graph.total_degree(positive) > degree_cap) {
      continue;
    }
    if (index.graph.shortcut_count(p_top) >= kMaxShortcutsPerVertex ||
        index.graph.shortcut_count(positive) >= kMaxShortcutsPerVertex) {
      continue;
    }
    if (p_top == positive || index.graph.has_edge(p_top, positive)) continue;
    add_edge_pair(index.graph, p_top, positive, EdgeKind::shortcut);
  }
}

GemIndex build_index(Corpus corpus, BuildParams params,
                     const std::vector<TrainingPair>& pairs) {
  params.resolve_defaults(corpus);

  GemIndex index;
  index.params = params;
  index.corpus = normalize_corpus(std::move(corpus), params.kind);

  Rng rng(params.seed);
  TwoStageResult stages =
      two_stage_cluster(index.corpus, params.kind, params.k1, params.k2,
                        params.sample_frac, rng);
  index.codebook = std::move(stages.codebook);
  index.space = std::move(stages.space);

  const size_t n = index.corpus.size();
  index.codes.reserve(n);
  std::vector<TfIdfProfile> profiles;
  profiles.reserve(n);
  for (const VectorSet& set : index.corpus.sets) {
    index.codes.push_back(encode(set, index.codebook));
    profiles.push_back(tfidf_profile(index.codes.back(), index.space, n));
  }

  // Adaptive cutoff: labels come from the rank at which the positive's
  // profile first meets the query's filtered clusters.
  if (params.use_tfidf && pairs.size() >= params.tree_min_leaf) {
    std::vector<std::vector<double>> features;
    std::vector<uint32_t> labels;
    features.reserve(pairs.size());
    for (const TrainingPair& pair : pairs) {
      if (pair.positive_id >= n) {
        raise(ErrorCode::unknown_doc_id,
              "training pair references unknown document " +
                  std::to_string(pair.positive_id));
      }
      const VectorSet query = normalize_set(pair.query, params.kind);
      const std::vector<uint32_t> query_clusters =
          cluster_filter(query, index.space, SearchParams{}.t);
      const TfIdfProfile& profile = profiles[pair.positive_id];
      const uint32_t m =
          static_cast<uint32_t>(index.corpus.sets[pair.positive_id].size());
      features.push_back(cutoff_features(profile, m, params.r_max));
      labels.push_back(label_cutoff(profile, query_clusters, params.r_max));
    }
    index.cutoff = train_cutoff_model(features, labels, params.tree_max_depth,
                                      params.tree_min_leaf, params.r_max);
  }

  GemGraph& graph = index.graph;
  graph.degree_cap = params.M;
  graph.adjacency.assign(n, {});
  graph.tombstone.assign(n, 0);
  graph.cluster_membership.resize(n);
  graph.entry_candidates.assign(index.space.cluster_count(), {});
  for (size_t i = 0; i < n; ++i) {
    const uint32_t m = static_cast<uint32_t>(index.corpus.sets[i].size());
    graph.cluster_membership[i] = assigned_clusters(index, profiles[i], m);
    for (uint32_t c : graph.cluster_membership[i]) {
      graph.entry_candidates[c].push_back(static_cast<uint32_t>(i));
    }
  }

  const VertexDistanceFn dist = make_qemd_memo(index);
  for (uint32_t c = 0; c < index.space.cluster_count(); ++c) {
    build_cluster_graph(graph, graph.entry_candidates[c], dist,
                        params.fanout(), params.ef_construction, params.M);
  }
  repair_cluster_connectivity(graph, dist, params.M);

  if (!pairs.empty() && params.shortcut_frac > 0.0) {
    const size_t want = static_cast<size_t>(
        std::llround(params.shortcut_frac * static_cast<double>(pairs.size())));
    std::vector<size_t> order(pairs.size());
    std::iota(order.begin(), order.end(), 0);
    rng.shuffle(order);
    order.resize(std::min(order.size(), std::max<size_t>(want, 0)));
    std::sort(order.begin(), order.end());
    std::vector<TrainingPair> sampled;
    sampled.reserve(order.size());
    for (size_t i : order) {
      TrainingPair p = pairs[i];
      p.query = normalize_set(std::move(p.query), params.kind);
      sampled.push_back(std::move(p));
    }
    inject_shortcuts(index, sampled, params.f_prime, params.M);
  }
  return index;
}

void insert_set(GemIndex& index, VectorSet set) {
  const size_t n = index.corpus.size();
  if (set.id < n) {
    raise(ErrorCode::duplicate_id,
          "id " + std::to_string(set.id) + " already present");
  }
  if (set.id != n) {
    raise(ErrorCode::invalid_argument,
          "inserted ids must extend the dense range; expected " +
              std::to_string(n));
  }
  if (set.vectors.empty()) {
    raise(ErrorCode::empty_set, "cannot insert an empty set");
  }
  for (const Vector& v : set.vectors) {
    if (v.size() != index.corpus.dim) {
      raise(ErrorCode::dim_mismatch, "inserted set dimension mismatch");
    }
  }

  set = normalize_set(std::move(set), index.params.kind);
  index.corpus.sets.push_back(std::move(set));
  index.codes.push_back(encode(index.corpus.sets.back(), index.codebook));

  // The new set counts toward doc_freq before profiling, mirroring the
  // full-corpus statistics a fresh build would see.
  std::vector<uint8_t> touched(index.space.cluster_count(), 0);
  for (const auto& [code, count] : index.codes.back().histogram) {
    (void)count;
    touched[index.space.coarse_of(code)] = 1;
  }
  for (uint32_t c = 0; c < index.space.cluster_count(); ++c) {
    if (touched[c]) index.space.doc_freq[c]++;
  }

  const TfIdfProfile profile =
      tfidf_profile(index.codes.back(), index.space, index.corpus.size());
  const uint32_t m =
      static_cast<uint32_t>(index.corpus.sets.back().size());
  const std::vector<uint32_t> c_top = assigned_clusters(index, profile, m);

  GemGraph& graph = index.graph;
  const uint32_t id = static_cast<uint32_t>(n);
  graph.adjacency.emplace_back();
  graph.tombstone.push_back(0);
  graph.cluster_membership.push_back(c_top);

  const VertexDistanceFn dist = make_qemd_memo(index);
  std::vector<uint8_t> in_wired(graph.vertex_count(), 0);
  for (uint32_t c : c_top) {
    const std::vector<uint32_t>& wired = graph.entry_candidates[c];
    for (uint32_t v : wired) in_wired[v] = 1;
    const std::vector<Scored> found = construction_ann(
        graph, wired, in_wired, [&](uint32_t v) { return dist(id, v); },
        index.params.ef_construction);
    for (uint32_t v : wired) in_wired[v] = 0;

    if (graph.adjacency[id].empty()) {
      connect_new_vertex(graph, id, found, index.params.fanout(), dist,
                         index.params.M);
    } else {
      std::vector<uint32_t> new_neighbors;
      for (size_t i = 0; i < found.size() && i < index.params.fanout(); ++i) {
        new_neighbors.push_back(found[i].second);
      }
      update_bridges(graph, id, new_neighbors, c_top, dist, index.params.M);
    }
    graph.entry_candidates[c].push_back(id);
  }
  repair_cluster_connectivity(graph, dist, index.params.M);
}

void delete_set(GemIndex& index, uint64_t id) {
  if (id >= index.graph.vertex_count() ||
      !index.graph.is_live(static_cast<uint32_t>(id))) {
    raise(ErrorCode::unknown_doc_id,
          "id " + std::to_string(id) + " is not a live vertex");
  }
  index.graph.tombstone[static_cast<uint32_t>(id)] = 1;
}

}  // namespace gem
