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
#include <vector>

#include "gem/clustering.hpp"
#include "gem/metric.hpp"
#include "gem/types.hpp"

namespace gem {

// Edge classes. Normal edges obey the degree cap and may be evicted when a
// vertex runs over it. Shortcut edges sit outside the cap (at most
// kMaxShortcutsPerVertex per vertex) and are never evicted. Pinned edges are
// connectivity repairs: they count toward the cap but are not evictable.
enum class EdgeKind : uint8_t { normal = 0, shortcut = 1, pinned = 2 };

constexpr uint32_t kMaxShortcutsPerVertex = 4;

// Set-level adjacency structure. Vertex ids coincide with corpus set ids;
// a vertex appears once regardless of how many clusters it belongs to.
struct GemGraph {
  struct Edge {
    uint32_t to = 0;
    EdgeKind kind = EdgeKind::normal;
  };

  std::vector<std::vector<Edge>> adjacency;
  std::vector<uint8_t> tombstone;
  std::vector<std::vector<uint32_t>> cluster_membership;  // sorted C_top per vertex
  std::vector<std::vector<uint32_t>> entry_candidates;    // per coarse cluster, ascending
  uint32_t degree_cap = 24;

  size_t vertex_count() const { return adjacency.size(); }

  bool is_live(uint32_t v) const { return tombstone[v] == 0; }

  size_t live_count() const {
    size_t n = 0;
    for (uint8_t t : tombstone) n += t == 0;
    return n;
  }

  // Degree excluding shortcut edges (what the cap applies to).
  uint32_t base_degree(uint32_t v) const;
  uint32_t shortcut_count(uint32_t v) const;
  uint32_t total_degree(uint32_t v) const {
    return static_cast<uint32_t>(adjacency[v].size());
  }

  bool has_edge(uint32_t u, uint32_t v) const;
  bool in_cluster(uint32_t v, uint32_t cluster) const;
};

struct BuildParams {
  uint32_t k1 = 0;  // 0: nearest power of two to 16*sqrt(#vectors)
  uint32_t k2 = 0;  // 0: max(2, N/1000)
  uint32_t f = 0;   // construction fan-out; 0: use M
  uint32_t M = 24;
  uint32_t ef_construction = 80;
  uint32_t r_max = 10;
  uint32_t fallback_r = 3;  // fixed r when no cutoff model is available
  uint32_t f_prime = 10;    // ANN count checked per training pair (shortcuts)
  double shortcut_frac = 0.2;
  double sample_frac = 1.0;
  uint64_t seed = 0;
  bool use_tfidf = true;  // false: keep every TF>0 cluster (no pruning)
  SimilarityKind kind = SimilarityKind::cosine;
  uint32_t tree_max_depth = kCutoffMaxDepth;
  uint32_t tree_min_leaf = kCutoffMinLeaf;

  uint32_t fanout() const { return f == 0 ? M : f; }
  void validate() const;

  // Default sizing heuristics for the two-stage clustering.
  static uint32_t default_k1(size_t total_vectors);
  static uint32_t default_k2(size_t n_sets, uint32_t k1);
  void resolve_defaults(const Corpus& corpus);
};

// Everything needed to search: the normalized corpus, quantization
// structures, per-set cluster assignments, the cutoff model and the graph.
struct GemIndex {
  Corpus corpus;
  Codebook codebook;
  ClusterSpace space;
  std::vector<CodeSet> codes;
  CutoffModel cutoff;
  GemGraph graph;
  BuildParams params;

  size_t live_count() const { return graph.live_count(); }

  double set_qemd(uint32_t u, uint32_t v) const {
    return qemd(codes[u], codes[v], codebook);
  }
};

// Vertex-to-vertex distance used while wiring a graph; dist(from, to) need
// not be symmetric (the flat baseline graph builds under qCH).
using VertexDistanceFn = std::function<double(uint32_t, uint32_t)>;

// Wires one cluster's members (ascending id order) into the current graph:
// each member links to its fanout nearest already-wired members; members
// that arrived with edges from earlier clusters are merged via
// update_bridges instead.
void build_cluster_graph(GemGraph& graph,
                         const std::vector<uint32_t>& members,
                         const VertexDistanceFn& dist, uint32_t fanout,
                         uint32_t ef_construction, uint32_t degree_cap);

// Merges old and new neighbor candidates for a bridge vertex, keeping the
// degree cap while guaranteeing one representative per cluster of c_top
// whenever the merged candidate set contains one.
void update_bridges(GemGraph& graph, uint32_t p,
                    const std::vector<uint32_t>& new_neighbors,
                    const std::vector<uint32_t>& c_top,
                    const VertexDistanceFn& dist, uint32_t degree_cap);

// Reconnects fragmented cluster subgraphs with pinned edges until every
// cluster's induced member subgraph is a single component. Sweeps all
// clusters repeatedly because an eviction triggered by one repair can split
// another cluster.
void repair_cluster_connectivity(GemGraph& graph,
                                 const VertexDistanceFn& dist,
                                 uint32_t degree_cap);

// One undirected shortcut per training pair whose positive is missing from
// the query's top-f_prime results and whose endpoints have degree headroom.
void inject_shortcuts(GemIndex& index,
                      const std::vector<TrainingPair>& pairs, uint32_t f_prime,
                      uint32_t degree_cap);

// Full pipeline: two-stage clustering, TF-IDF profiles with the adaptive
// cutoff, per-cluster wiring with bridges, connectivity repair, shortcut
// injection over a shortcut_frac sample of the training pairs.
GemIndex build_index(Corpus corpus, BuildParams params,
                     const std::vector<TrainingPair>& pairs = {});

// Maintenance. Inserted sets must extend the dense id range; deletion is a
// tombstone (the vertex stays traversable but never surfaces in results).
void insert_set(GemIndex& index, VectorSet set);
void delete_set(GemIndex& index, uint64_t id);

}  // namespace gem
