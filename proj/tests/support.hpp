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

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <vector>

#include "gem/eval.hpp"
#include "gem/graph.hpp"
#include "gem/metric.hpp"
#include "gem/types.hpp"

namespace gem::test {

inline double gaussian(Rng& rng) {
  // Box-Muller; the draw count per call is fixed, keeping streams aligned.
  double u1 = rng.next_double();
  const double u2 = rng.next_double();
  if (u1 < 1e-300) u1 = 1e-300;
  return std::sqrt(-2.0 * std::log(u1)) *
         std::cos(2.0 * 3.14159265358979323846 * u2);
}

inline Vector random_unit_vector(Rng& rng, uint32_t dim) {
  Vector v(dim);
  double sq = 0.0;
  for (double& x : v) {
    x = gaussian(rng);
    sq += x * x;
  }
  const double norm = std::sqrt(sq);
  for (double& x : v) x = to_f32_grid(x / norm);
  return v;
}

// Perturbs `center` with Gaussian noise and renormalizes; all values land on
// the binary32 grid so corpora survive file round trips bit-exactly.
inline Vector jitter_unit(const Vector& center, double sigma, Rng& rng) {
  Vector v(center.size());
  double sq = 0.0;
  for (size_t i = 0; i < v.size(); ++i) {
    v[i] = center[i] + sigma * gaussian(rng);
    sq += v[i] * v[i];
  }
  const double norm = std::sqrt(sq);
  for (double& x : v) x = to_f32_grid(x / norm);
  return v;
}

inline VectorSet random_set(Rng& rng, uint64_t id, uint32_t dim, uint32_t m) {
  VectorSet set;
  set.id = id;
  set.vectors.reserve(m);
  for (uint32_t i = 0; i < m; ++i) {
    set.vectors.push_back(random_unit_vector(rng, dim));
  }
  return set;
}

inline Corpus random_corpus(Rng& rng, size_t n, uint32_t dim, uint32_t m_lo,
                            uint32_t m_hi) {
  Corpus corpus;
  corpus.dim = dim;
  for (size_t i = 0; i < n; ++i) {
    const uint32_t m =
        m_lo + static_cast<uint32_t>(rng.next_below(m_hi - m_lo + 1));
    corpus.sets.push_back(random_set(rng, i, dim, m));
  }
  return corpus;
}

struct ClusteredCorpus {
  Corpus corpus;
  std::vector<uint32_t> topic_of;      // per set
  std::vector<Vector> topic_centers;   // unit vectors
};

// N sets over `topics` well-separated unit directions; every vector is a
// small jitter of its set's topic center.
inline ClusteredCorpus clustered_corpus(Rng& rng, size_t n, uint32_t topics,
                                        uint32_t dim, uint32_t m_lo,
                                        uint32_t m_hi, double sigma = 0.08) {
  ClusteredCorpus out;
  out.corpus.dim = dim;
  for (uint32_t t = 0; t < topics; ++t) {
    out.topic_centers.push_back(random_unit_vector(rng, dim));
  }
  for (size_t i = 0; i < n; ++i) {
    const uint32_t topic = static_cast<uint32_t>(i % topics);
    const uint32_t m =
        m_lo + static_cast<uint32_t>(rng.next_below(m_hi - m_lo + 1));
    VectorSet set;
    set.id = i;
    for (uint32_t j = 0; j < m; ++j) {
      set.vectors.push_back(jitter_unit(out.topic_centers[topic], sigma, rng));
    }
    out.corpus.sets.push_back(std::move(set));
    out.topic_of.push_back(topic);
  }
  return out;
}

// Query near one topic center with fresh jitter.
inline VectorSet topic_query(Rng& rng, const ClusteredCorpus& cc,
                             uint32_t topic, uint64_t id, uint32_t m,
                             double sigma = 0.08) {
  VectorSet q;
  q.id = id;
  for (uint32_t j = 0; j < m; ++j) {
    q.vectors.push_back(jitter_unit(cc.topic_centers[topic], sigma, rng));
  }
  return q;
}

// Brute-force minimum-cost perfect matching over equal-size sets; together
// with the 1/m scaling this is the transport optimum (a permutation plan is
// optimal for equal uniform masses).
inline double min_permutation_cost(const VectorSet& a, const VectorSet& b,
                                   SimilarityKind kind) {
  const size_t m = a.vectors.size();
  std::vector<std::vector<double>> cost(m, std::vector<double>(m));
  for (size_t i = 0; i < m; ++i) {
    for (size_t j = 0; j < m; ++j) {
      cost[i][j] = vector_distance(a.vectors[i], b.vectors[j], kind);
    }
  }
  std::vector<size_t> perm(m);
  for (size_t i = 0; i < m; ++i) perm[i] = i;
  double best = std::numeric_limits<double>::infinity();
  do {
    double total = 0.0;
    for (size_t i = 0; i < m; ++i) total += cost[i][perm[i]];
    best = std::min(best, total);
  } while (std::next_permutation(perm.begin(), perm.end()));
  return best / static_cast<double>(m);
}

struct GraphCheck {
  bool bidirectional = true;
  bool degree_ok = true;
  bool bridge_ok = true;

  bool all() const { return bidirectional && degree_ok && bridge_ok; }
};

// Structural invariants: non-shortcut edges stored in both directions,
// base degree within the cap (total within cap + shortcut allowance), and
// every vertex keeping a neighbor in each of its clusters that has other
// members.
inline GraphCheck check_graph_invariants(const GemGraph& g) {
  GraphCheck out;
  for (uint32_t v = 0; v < g.vertex_count(); ++v) {
    for (const GemGraph::Edge& e : g.adjacency[v]) {
      bool back = false;
      for (const GemGraph::Edge& r : g.adjacency[e.to]) {
        if (r.to == v && r.kind == e.kind) {
          back = true;
          break;
        }
      }
      if (!back) out.bidirectional = false;
    }
    if (g.base_degree(v) > g.degree_cap) out.degree_ok = false;
    if (g.shortcut_count(v) > kMaxShortcutsPerVertex) out.degree_ok = false;
    if (g.total_degree(v) > g.degree_cap + kMaxShortcutsPerVertex) {
      out.degree_ok = false;
    }
    for (uint32_t c : g.cluster_membership[v]) {
      if (g.entry_candidates[c].size() < 2) continue;
      bool covered = false;
      for (const GemGraph::Edge& e : g.adjacency[v]) {
        if (g.in_cluster(e.to, c)) {
          covered = true;
          break;
        }
      }
      if (!covered) out.bridge_ok = false;
    }
  }
  return out;
}

inline std::vector<uint64_t> hit_ids(const SearchResult& res) {
  std::vector<uint64_t> ids;
  ids.reserve(res.hits.size());
  for (const auto& [id, score] : res.hits) {
    (void)score;
    ids.push_back(id);
  }
  return ids;
}

}  // namespace gem::test
