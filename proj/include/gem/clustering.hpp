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
#include <span>
#include <utility>
#include <vector>

#include "gem/metric.hpp"
#include "gem/types.hpp"

namespace gem {

constexpr uint32_t kKmeansIters = 25;

// Lloyd's algorithm with k-means++ seeding. Empty clusters are reseeded from
// the point currently farthest from its assigned centroid, which keeps the
// objective monotone (the reseeded centroid had no members).
std::vector<Vector> kmeans(const std::vector<Vector>& points, uint32_t k,
                           uint32_t iters, Rng& rng);

// Coarse cluster space on top of the fine centroid vocabulary.
struct ClusterSpace {
  std::vector<Vector> index_centroids;   // k2, binary32-grid values
  std::vector<uint32_t> quant_to_index;  // fine code -> coarse cluster
  std::vector<uint64_t> doc_freq;        // per coarse cluster: sets with TF>0
  SimilarityKind kind = SimilarityKind::cosine;
  uint32_t dim = 0;

  uint32_t cluster_count() const {
    return static_cast<uint32_t>(index_centroids.size());
  }

  uint32_t coarse_of(uint32_t fine_code) const {
    return quant_to_index[fine_code];
  }
};

struct TwoStageResult {
  Codebook codebook;
  ClusterSpace space;
};

// Stage one clusters a vector sample into k1 fine centroids; stage two
// clusters those centroids into k2 coarse ones. doc_freq is filled from the
// full corpus via the fine-to-coarse assignment. k-means itself is
// Euclidean; cross-structure assignments (encode, quant_to_index) use d_X.
TwoStageResult two_stage_cluster(const Corpus& corpus, SimilarityKind kind,
                                 uint32_t k1, uint32_t k2, double sample_frac,
                                 Rng& rng);

// Weighted centroid profile: (coarse cluster, TF*IDF score), sorted by score
// descending with ties broken by ascending cluster index. Only clusters with
// TF > 0 appear. IDF = max(0, ln(N / (1 + doc_freq))); the clamp keeps
// scores nonnegative when a cluster is shared by nearly every set.
struct TfIdfProfile {
  std::vector<std::pair<uint32_t, double>> entries;

  bool empty() const { return entries.empty(); }
  size_t size() const { return entries.size(); }
};

TfIdfProfile tfidf_profile(const CodeSet& codes, const ClusterSpace& space,
                           uint64_t n_corpus);
TfIdfProfile tfidf_profile(const VectorSet& set, const Codebook& codebook,
                           const ClusterSpace& space, uint64_t n_corpus);

// First min(r, |entries|) clusters of the sorted profile, returned in
// ascending cluster-index order.
std::vector<uint32_t> prune_clusters(const TfIdfProfile& profile, uint32_t r);

struct TrainingPair {
  VectorSet query;
  uint64_t positive_id = 0;
};

// 1-based rank of the first profile entry whose cluster appears in
// query_clusters (sorted ascending); r_max when none of the top-r_max do.
uint32_t label_cutoff(const TfIdfProfile& profile_of_positive,
                      const std::vector<uint32_t>& query_clusters,
                      uint32_t r_max);

// CART-style classifier over {1..r_max} labels predicting how many profile
// clusters a set should keep.
struct CutoffModel {
  struct Node {
    int32_t left = -1;    // -1 on leaves
    int32_t right = -1;
    uint32_t feature = 0;
    double threshold = 0.0;
    uint32_t label = 0;   // leaf prediction

    bool is_leaf() const { return left < 0; }
  };

  std::vector<Node> nodes;
  uint32_t r_max = 10;

  bool empty() const { return nodes.empty(); }
  uint32_t predict(std::span<const double> features) const;
};

constexpr uint32_t kCutoffMaxDepth = 6;
constexpr uint32_t kCutoffMinLeaf = 10;

// Feature layout: top-r_max profile scores zero-padded, then the set size m.
std::vector<double> cutoff_features(const TfIdfProfile& profile, uint32_t m,
                                    uint32_t r_max);

CutoffModel train_cutoff_model(const std::vector<std::vector<double>>& features,
                               const std::vector<uint32_t>& labels,
                               uint32_t max_depth, uint32_t min_leaf,
                               uint32_t r_max);

// Leaf prediction clamped to [1, min(r_max, |profile|)].
uint32_t predict_cutoff(const CutoffModel& model, const TfIdfProfile& profile,
                        uint32_t m);

}  // namespace gem
