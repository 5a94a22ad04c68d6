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

#include "gem/metric.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <limits>
#include <queue>

namespace gem {

namespace {

void check_dims(const Vector& a, const Vector& b) {
  if (a.size() != b.size()) {
    raise(ErrorCode::dim_mismatch,
          "vector dims differ: " + std::to_string(a.size()) + " vs " +
              std::to_string(b.size()));
  }
}

// Exact min-cost flow on the bipartite transport network
//   source -> row i (cap supply[i], cost 0)
//   row i  -> col j (cap inf, cost c[i][j])
//   col j  -> sink  (cap demand[j], cost 0)
// Costs are scaled to int64 so augmentations are exact; Dijkstra with
// potentials keeps reduced costs nonnegative (all ground costs are >= 0).
class TransportSolver {
 public:
  TransportSolver(size_t n_rows, size_t n_cols,
                  const std::function<double(size_t, size_t)>& cost,
                  const std::vector<int64_t>& supply,
                  const std::vector<int64_t>& demand)
      : n_rows_(n_rows), n_cols_(n_cols) {
    const size_t n = n_rows_ + n_cols_ + 2;
    source_ = n - 2;
    sink_ = n - 1;
    head_.assign(n, -1);

    double cmax = 0.0;
    raw_cost_.resize(n_rows_ * n_cols_);
    for (size_t i = 0; i < n_rows_; ++i) {
      for (size_t j = 0; j < n_cols_; ++j) {
        const double c = cost(i, j);
        raw_cost_[i * n_cols_ + j] = c;
        cmax = std::max(cmax, c);
      }
    }
    scale_ = cmax > 0.0 ? std::ldexp(1.0, 46) / cmax : 1.0;

    int64_t total = 0;
    for (size_t i = 0; i < n_rows_; ++i) {
      add_edge(source_, i, supply[i], 0);
      total += supply[i];
    }
    for (size_t j = 0; j < n_cols_; ++j) {
      add_edge(n_rows_ + j, sink_, demand[j], 0);
    }
    for (size_t i = 0; i < n_rows_; ++i) {
      for (size_t j = 0; j < n_cols_; ++j) {
        const int64_t c =
            llround(raw_cost_[i * n_cols_ + j] * scale_);
        add_edge(i, n_rows_ + j, total, c);
      }
    }
    units_ = total;
  }

  // Runs to saturation; returns (row, col, units) for every loaded arc.
  std::vector<std::tuple<uint32_t, uint32_t, int64_t>> solve() {
    const size_t n = head_.size();
    std::vector<int64_t> pot(n, 0);
    std::vector<int64_t> dist(n);
    std::vector<int32_t> prev_edge(n);
    int64_t flow = 0;

    while (flow < units_) {
      constexpr int64_t kInf = std::numeric_limits<int64_t>::max() / 4;
      std::fill(dist.begin(), dist.end(), kInf);
      std::fill(prev_edge.begin(), prev_edge.end(), -1);
      dist[source_] = 0;

      using Item = std::pair<int64_t, size_t>;
      std::priority_queue<Item, std::vector<Item>, std::greater<Item>> heap;
      heap.emplace(0, source_);
      while (!heap.empty()) {
        auto [d, u] = heap.top();
        heap.pop();
        if (d > dist[u]) continue;
        for (int32_t e = head_[u]; e >= 0; e = edges_[e].next) {
          const Edge& edge = edges_[e];
          if (edge.cap <= edge.flow) continue;
          const int64_t nd = d + edge.cost + pot[u] - pot[edge.to];
          if (nd < dist[edge.to]) {
            dist[edge.to] = nd;
            prev_edge[edge.to] = e;
            heap.emplace(nd, edge.to);
          }
        }
      }
      if (prev_edge[sink_] < 0) {
        raise(ErrorCode::solver_failure,
              "transport network has no augmenting path");
      }
      for (size_t v = 0; v < n; ++v) {
        if (dist[v] < kInf) pot[v] += dist[v];
      }

      int64_t push = units_ - flow;
      for (size_t v = sink_; v != source_;) {
        const Edge& edge = edges_[prev_edge[v]];
        push = std::min(push, edge.cap - edge.flow);
        v = edge.from;
      }
      for (size_t v = sink_; v != source_;) {
        const int32_t e = prev_edge[v];
        edges_[e].flow += push;
        edges_[e ^ 1].flow -= push;
        v = edges_[e].from;
      }
      flow += push;
    }

    std::vector<std::tuple<uint32_t, uint32_t, int64_t>> loaded;
    for (size_t i = 0; i < n_rows_; ++i) {
      for (int32_t e = head_[i]; e >= 0; e = edges_[e].next) {
        const Edge& edge = edges_[e];
        if (edge.flow > 0 && edge.to != source_) {
          loaded.emplace_back(static_cast<uint32_t>(i),
                              static_cast<uint32_t>(edge.to - n_rows_),
                              edge.flow);
        }
      }
    }
    std::sort(loaded.begin(), loaded.end());
    return loaded;
  }

  int64_t units() const { return units_; }

  double raw_cost(uint32_t i, uint32_t j) const {
    return raw_cost_[static_cast<size_t>(i) * n_cols_ + j];
  }

 private:
  struct Edge {
    size_t from, to;
    int64_t cap, flow, cost;
    int32_t next;
  };

  void add_edge(size_t from, size_t to, int64_t cap, int64_t cost) {
    edges_.push_back({from, to, cap, 0, cost, head_[from]});
    head_[from] = static_cast<int32_t>(edges_.size() - 1);
    edges_.push_back({to, from, 0, 0, -cost, head_[to]});
    head_[to] = static_cast<int32_t>(edges_.size() - 1);
  }

  size_t n_rows_, n_cols_;
  size_t source_ = 0, sink_ = 0;
  int64_t units_ = 0;
  double scale_ = 1.0;
  std::vector<double> raw_cost_;
  std::vector<Edge> edges_;
  std::vector<int32_t> head_;
};

}  // namespace

double vector_distance(const Vector& a, const Vector& b, SimilarityKind kind) {
  check_dims(a, b);
  if (kind == SimilarityKind::cosine) {
    double dot = 0.0;
    for (size_t i = 0; i < a.size(); ++i) dot += a[i] * b[i];
    return std::max(0.0, 1.0 - dot);
  }
  double sq = 0.0;
  for (size_t i = 0; i < a.size(); ++i) {
    const double d = a[i] - b[i];
    sq += d * d;
  }
  return std::sqrt(sq);
}

double vector_similarity(const Vector& a, const Vector& b,
                         SimilarityKind kind) {
  check_dims(a, b);
  if (kind == SimilarityKind::cosine) {
    double dot = 0.0;
    for (size_t i = 0; i < a.size(); ++i) dot += a[i] * b[i];
    return dot;
  }
  return -vector_distance(a, b, kind);
}

double chamfer_similarity(const VectorSet& a, const VectorSet& b,
                          SimilarityKind kind) {
  if (a.vectors.empty() || b.vectors.empty()) {
    raise(ErrorCode::empty_set, "chamfer_similarity over an empty set");
  }
  double total = 0.0;
  for (const Vector& x : a.vectors) {
    double best = -std::numeric_limits<double>::infinity();
    for (const Vector& y : b.vectors) {
      best = std::max(best, vector_similarity(x, y, kind));
    }
    total += best;
  }
  return total;
}

double chamfer_distance(const VectorSet& a, const VectorSet& b,
                        SimilarityKind kind) {
  if (a.vectors.empty() || b.vectors.empty()) {
    raise(ErrorCode::empty_set, "chamfer_distance over an empty set");
  }
  double total = 0.0;
  for (const Vector& x : a.vectors) {
    double best = std::numeric_limits<double>::infinity();
    for (const Vector& y : b.vectors) {
      best = std::min(best, vector_distance(x, y, kind));
    }
    total += best;
  }
  return total / static_cast<double>(a.vectors.size());
}

TransportPlan emd(const VectorSet& a, const VectorSet& b,
                  SimilarityKind kind) {
  const size_t m1 = a.vectors.size();
  const size_t m2 = b.vectors.size();
  if (m1 == 0 || m2 == 0) {
    raise(ErrorCode::empty_set, "emd over an empty set");
  }
  // Scale masses 1/m1 and 1/m2 by m1*m2: supply m2 per row, demand m1 per
  // column, one unit = 1/(m1*m2) mass.
  std::vector<int64_t> supply(m1, static_cast<int64_t>(m2));
  std::vector<int64_t> demand(m2, static_cast<int64_t>(m1));
  TransportSolver solver(
      m1, m2,
      [&](size_t i, size_t j) {
        return vector_distance(a.vectors[i], b.vectors[j], kind);
      },
      supply, demand);

  const double unit = 1.0 / (static_cast<double>(m1) * static_cast<double>(m2));
  TransportPlan plan;
  for (const auto& [i, j, units] : solver.solve()) {
    const double mass = static_cast<double>(units) * unit;
    plan.flows.emplace_back(i, j, mass);
    plan.cost += mass * solver.raw_cost(i, j);
  }
  return plan;
}

Codebook build_codebook(std::vector<Vector> centroids, SimilarityKind kind) {
  if (centroids.empty()) {
    raise(ErrorCode::too_few_points, "codebook needs at least one centroid");
  }
  const size_t dim = centroids[0].size();
  for (const Vector& c : centroids) {
    if (c.size() != dim) {
      raise(ErrorCode::dim_mismatch, "codebook centroid dims differ");
    }
  }
  Codebook book;
  book.kind = kind;
  book.dim = static_cast<uint32_t>(dim);
  book.centroids = std::move(centroids);
  const size_t k1 = book.centroids.size();
  book.pair_dist.assign(k1 * k1, 0.0);
  for (size_t i = 0; i < k1; ++i) {
    for (size_t j = i + 1; j < k1; ++j) {
      const double d =
          vector_distance(book.centroids[i], book.centroids[j], kind);
      book.pair_dist[i * k1 + j] = d;
      book.pair_dist[j * k1 + i] = d;
    }
  }
  return book;
}

CodeSet encode(const VectorSet& set, const Codebook& codebook) {
  if (set.vectors.empty()) {
    raise(ErrorCode::empty_set, "cannot encode an empty set");
  }
  CodeSet out;
  out.set_id = set.id;
  out.codes.reserve(set.vectors.size());
  for (const Vector& v : set.vectors) {
    if (v.size() != codebook.dim) {
      raise(ErrorCode::dim_mismatch, "vector dim does not match codebook");
    }
    uint32_t best = 0;
    double best_dist = std::numeric_limits<double>::infinity();
    for (uint32_t c = 0; c < codebook.size(); ++c) {
      const double d = vector_distance(v, codebook.centroids[c], codebook.kind);
      if (d < best_dist) {
        best_dist = d;
        best = c;
      }
    }
    out.codes.push_back(best);
  }
  std::vector<uint32_t> sorted = out.codes;
  std::sort(sorted.begin(), sorted.end());
  for (size_t i = 0; i < sorted.size();) {
    size_t j = i;
    while (j < sorted.size() && sorted[j] == sorted[i]) ++j;
    out.histogram.emplace_back(sorted[i], static_cast<uint32_t>(j - i));
    i = j;
  }
  return out;
}

namespace {

void check_codes(const CodeSet& s, const Codebook& book) {
  for (const auto& [code, count] : s.histogram) {
    (void)count;
    if (code >= book.size()) {
      raise(ErrorCode::code_out_of_range,
            "code " + std::to_string(code) + " >= k1 " +
                std::to_string(book.size()));
    }
  }
  if (s.histogram.empty()) {
    raise(ErrorCode::empty_set, "code set has no codes");
  }
}

}  // namespace

double qemd(const CodeSet& a, const CodeSet& b, const Codebook& codebook) {
  check_codes(a, codebook);
  check_codes(b, codebook);
  const size_t n1 = a.histogram.size();
  const size_t n2 = b.histogram.size();
  int64_t m1 = 0, m2 = 0;
  for (const auto& [code, count] : a.histogram) {
    (void)code;
    m1 += count;
  }
  for (const auto& [code, count] : b.histogram) {
    (void)code;
    m2 += count;
  }
  // Histogram masses count/m with common denominator m1*m2.
  std::vector<int64_t> supply(n1), demand(n2);
  for (size_t i = 0; i < n1; ++i) supply[i] = a.histogram[i].second * m2;
  for (size_t j = 0; j < n2; ++j) demand[j] = b.histogram[j].second * m1;

  TransportSolver solver(
      n1, n2,
      [&](size_t i, size_t j) {
        return codebook.pair(a.histogram[i].first, b.histogram[j].first);
      },
      supply, demand);

  const double unit = 1.0 / (static_cast<double>(m1) * static_cast<double>(m2));
  double cost = 0.0;
  for (const auto& [i, j, units] : solver.solve()) {
    cost += static_cast<double>(units) * unit * solver.raw_cost(i, j);
  }
  return cost;
}

double qch(const CodeSet& q, const CodeSet& p, const Codebook& codebook) {
  check_codes(q, codebook);
  check_codes(p, codebook);
  double total = 0.0;
  for (const auto& [code, count] : q.histogram) {
    double best = std::numeric_limits<double>::infinity();
    for (const auto& [pcode, pcount] : p.histogram) {
      (void)pcount;
      best = std::min(best, codebook.pair(code, pcode));
    }
    total += best * static_cast<double>(count);
  }
  return total;
}

}  // namespace gem
