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
#include <tuple>
#include <utility>
#include <vector>

#include "gem/types.hpp"

namespace gem {

// Ground distance d_X between two vectors.
double vector_distance(const Vector& a, const Vector& b, SimilarityKind kind);

// Similarity Sim: dot product in cosine mode, negated distance in l2 mode
// (so that max-similarity always means min-distance).
double vector_similarity(const Vector& a, const Vector& b,
                         SimilarityKind kind);

// Set relevance score: sum over a's vectors of the best similarity in b.
double chamfer_similarity(const VectorSet& a, const VectorSet& b,
                          SimilarityKind kind);

// Distance-space counterpart: mean over a's vectors of the smallest d_X to
// b. The mean form (rather than the sum) is what the transport distance
// below bounds from above.
double chamfer_distance(const VectorSet& a, const VectorSet& b,
                        SimilarityKind kind);

// Optimal transport plan between two uniformly weighted vector sets.
// Row marginals are 1/m1, column marginals 1/m2.
struct TransportPlan {
  // (row index into a, column index into b, mass moved), mass > 0 only.
  std::vector<std::tuple<uint32_t, uint32_t, double>> flows;
  double cost = 0.0;
};

// Exact minimum-cost transport. Masses are scaled to integers and solved
// with successive shortest augmenting paths, so the returned plan is optimal
// for the scaled instance; the reported cost is recomputed from the plan
// with full-precision ground distances.
TransportPlan emd(const VectorSet& a, const VectorSet& b, SimilarityKind kind);

// Fine centroid vocabulary plus the precomputed k1 x k1 distance table.
struct Codebook {
  std::vector<Vector> centroids;  // k1 entries, binary32-grid values
  std::vector<double> pair_dist;  // k1*k1 row-major d_X table
  SimilarityKind kind = SimilarityKind::cosine;
  uint32_t dim = 0;

  uint32_t size() const { return static_cast<uint32_t>(centroids.size()); }

  double pair(uint32_t i, uint32_t j) const {
    return pair_dist[static_cast<size_t>(i) * centroids.size() + j];
  }
};

Codebook build_codebook(std::vector<Vector> centroids, SimilarityKind kind);

// Quantized representation of a set: one centroid code per vector plus the
// code histogram used by the transport solver.
struct CodeSet {
  uint64_t set_id = 0;
  std::vector<uint32_t> codes;
  std::vector<std::pair<uint32_t, uint32_t>> histogram;  // (code, count), code-sorted
};

// Nearest-centroid assignment; ties resolve to the lowest centroid index.
CodeSet encode(const VectorSet& set, const Codebook& codebook);

// Transport distance over code histograms with pair_dist as ground cost.
double qemd(const CodeSet& a, const CodeSet& b, const Codebook& codebook);

// Quantized Chamfer: sum over q's codes (with multiplicity) of the smallest
// table distance to any of p's codes. Not symmetric.
double qch(const CodeSet& q, const CodeSet& p, const Codebook& codebook);

}  // namespace gem
