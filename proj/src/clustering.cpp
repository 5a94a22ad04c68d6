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

#include "gem/clustering.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>
#include <numeric>

namespace gem {

namespace {

double sq_dist(const Vector& a, const Vector& b) {
  double sq = 0.0;
  for (size_t i = 0; i < a.size(); ++i) {
    const double d = a[i] - b[i];
    sq += d * d;
  }
  return sq;
}

// k-means++ seeding: first centroid uniform, each next drawn with
// probability proportional to the squared distance to the closest chosen
// centroid. A zero total weight (all points already covered) falls back to a
// uniform draw.
std::vector<Vector> seed_centroids(const std::vector<Vector>& points,
                                   uint32_t k, Rng& rng) {
  std::vector<Vector> centroids;
  centroids.reserve(k);
  centroids.push_back(points[rng.next_below(points.size())]);

  std::vector<double> best_sq(points.size());
  for (size_t i = 0; i < points.size(); ++i) {
    best_sq[i] = sq_dist(points[i], centroids[0]);
  }
  while (centroids.size() < k) {
    const double total = std::accumulate(best_sq.begin(), best_sq.end(), 0.0);
    size_t pick;
    if (total <= 0.0) {
      pick = rng.next_below(points.size());
    } else {
      const double target = rng.next_double() * total;
      double acc = 0.0;
      pick = points.size() - 1;
      for (size_t i = 0; i < points.size(); ++i) {
        acc += best_sq[i];
        if (acc >= target) {
          pick = i;
          break;
        }
      }
    }
    centroids.push_back(points[pick]);
    for (size_t i = 0; i < points.size(); ++i) {
      best_sq[i] = std::min(best_sq[i], sq_dist(points[i], centroids.back()));
    }
  }
  return centroids;
}

}  // namespace

std::vector<Vector> kmeans(const std::vector<Vector>& points, uint32_t k,
                           uint32_t iters, Rng& rng) {
  if (k == 0) raise(ErrorCode::invalid_argument, "kmeans requires k >= 1");
  if (points.size() < k) {
    raise(ErrorCode::too_few_points,
          "kmeans needs at least k points: " + std::to_string(points.size()) +
              " < " + std::to_string(k));
  }
  const size_t dim = points[0].size();
  std::vector<Vector> centroids = seed_centroids(points, k, rng);
  std::vector<uint32_t> assign(points.size(), 0);

  for (uint32_t iter = 0; iter <= iters; ++iter) {
    // Assignment step.
    for (size_t i = 0; i < points.size(); ++i) {
      double best = std::numeric_limits<double>::infinity();
      uint32_t arg = 0;
      for (uint32_t c = 0; c < k; ++c) {
        const double d = sq_dist(points[i], centroids[c]);
        if (d < best) {
          best = d;
          arg = c;
        }
      }
      assign[i] = arg;
    }
    if (iter == iters) break;

    // Update step.
    std::vector<Vector> sums(k, Vector(dim, 0.0));
    std::vector<size_t> counts(k, 0);
    for (size_t i = 0; i < points.size(); ++i) {
      counts[assign[i]]++;
      for (size_t d = 0; d < dim; ++d) sums[assign[i]][d] += points[i][d];
    }
    bool any_empty = false;
    for (uint32_t c = 0; c < k; ++c) {
      if (counts[c] == 0) {
        any_empty = true;
        continue;
      }
      for (size_t d = 0; d < dim; ++d) {
        centroids[c][d] = sums[c][d] / static_cast<double>(counts[c]);
      }
    }
    if (any_empty) {
      // Reseed each empty cluster from the point farthest from its centroid.
      std::vector<double> far(points.size());
      for (size_t i = 0; i < points.size(); ++i) {
        far[i] = sq_dist(points[i], centroids[assign[i]]);
      }
      for (uint32_t c = 0; c < k; ++c) {
        if (counts[c] != 0) continue;
        const size_t pick = static_cast<size_t>(
            std::max_element(far.begin(), far.end()) - far.begin());
        centroids[c] = points[pick];
        far[pick] = 0.0;
      }
    }
  }
  return centroids;
}

TwoStageResult two_stage_cluster(const Corpus& corpus, SimilarityKind kind,
                                 uint32_t k1, uint32_t k2, double sample_frac,
                                 Rng& rng) {
  if (sample_frac <= 0.0 || sample_frac > 1.0) {
    raise(ErrorCode::invalid_argument, "sample_frac must be in (0, 1]");
  }
  if (k2 > k1) {
    raise(ErrorCode::invalid_argument, "two-stage clustering needs k1 >= k2");
  }

  std::vector<Vector> pool;
  for (const VectorSet& set : corpus.sets) {
    for (const Vector& v : set.vectors) pool.push_back(v);
  }
  std::vector<Vector> sample;
  if (sample_frac >= 1.0) {
    sample = pool;
  } else {
    const size_t want = static_cast<size_t>(
        std::llround(sample_frac * static_cast<double>(pool.size())));
    std::vector<size_t> order(pool.size());
    std::iota(order.begin(), order.end(), 0);
    rng.shuffle(order);
    order.resize(std::max<size_t>(want, 1));
    std::sort(order.begin(), order.end());
    for (size_t idx : order) sample.push_back(pool[idx]);
  }
  if (sample.size() < k1) {
    raise(ErrorCode::too_few_points,
          "sampled vector count " + std::to_string(sample.size()) +
              " < k1 " + std::to_string(k1));
  }

  std::vector<Vector> fine = kmeans(sample, k1, kKmeansIters, rng);
  for (Vector& c : fine) {
    for (double& x : c) x = to_f32_grid(x);
  }
  TwoStageResult out;
  out.codebook = build_codebook(fine, kind);

  std::vector<Vector> coarse = kmeans(fine, k2, kKmeansIters, rng);
  for (Vector& c : coarse) {
    for (double& x : c) x = to_f32_grid(x);
  }

  out.space.index_centroids = std::move(coarse);
  out.space.dim = corpus.dim;
  out.space.kind = kind;
  out.space.quant_to_index.resize(k1);
  for (uint32_t f = 0; f < k1; ++f) {
    double best = std::numeric_limits<double>::infinity();
    uint32_t arg = 0;
    for (uint32_t c = 0; c < k2; ++c) {
      const double d =
          vector_distance(fine[f], out.space.index_centroids[c], kind);
      if (d < best) {
        best = d;
        arg = c;
      }
    }
    out.space.quant_to_index[f] = arg;
  }

  out.space.doc_freq.assign(k2, 0);
  for (const VectorSet& set : corpus.sets) {
    const CodeSet codes = encode(set, out.codebook);
    std::vector<uint8_t> touched(k2, 0);
    for (const auto& [code, count] : codes.histogram) {
      (void)count;
      touched[out.space.quant_to_index[code]] = 1;
    }
    for (uint32_t c = 0; c < k2; ++c) {
      if (touched[c]) out.space.doc_freq[c]++;
    }
  }
  return out;
}

TfIdfProfile tfidf_profile(const CodeSet& codes, const ClusterSpace& space,
                           uint64_t n_corpus) {
  if (codes.histogram.empty()) {
    raise(ErrorCode::empty_set, "cannot profile an empty code set");
  }
  std::map<uint32_t, uint64_t> tf;
  for (const auto& [code, count] : codes.histogram) {
    tf[space.coarse_of(code)] += count;
  }
  TfIdfProfile profile;
  for (const auto& [cluster, count] : tf) {
    const double idf = std::max(
        0.0, std::log(static_cast<double>(n_corpus) /
                      (1.0 + static_cast<double>(space.doc_freq[cluster]))));
    profile.entries.emplace_back(cluster,
                                 static_cast<double>(count) * idf);
  }
  std::sort(profile.entries.begin(), profile.entries.end(),
            [](const auto& a, const auto& b) {
              if (a.second != b.second) return a.second > b.second;
              return a.first < b.first;
            });
  return profile;
}

TfIdfProfile tfidf_profile(const VectorSet& set, const Codebook& codebook,
                           const ClusterSpace& space, uint64_t n_corpus) {
  return tfidf_profile(encode(set, codebook), space, n_corpus);
}

std::vector<uint32_t> prune_clusters(const TfIdfProfile& profile, uint32_t r) {
  if (profile.empty()) {
    raise(ErrorCode::empty_profile, "cannot prune an empty profile");
  }
  if (r == 0) raise(ErrorCode::invalid_argument, "prune_clusters needs r >= 1");
  const size_t keep = std::min<size_t>(r, profile.entries.size());
  std::vector<uint32_t> out;
  out.reserve(keep);
  for (size_t i = 0; i < keep; ++i) out.push_back(profile.entries[i].first);
  std::sort(out.begin(), out.end());
  return out;
}

uint32_t label_cutoff(const TfIdfProfile& profile_of_positive,
                      const std::vector<uint32_t>& query_clusters,
                      uint32_t r_max) {
  const size_t limit =
      std::min<size_t>(r_max, profile_of_positive.entries.size());
  for (size_t i = 0; i < limit; ++i) {
    const uint32_t cluster = profile_of_positive.entries[i].first;
    if (std::binary_search(query_clusters.begin(), query_clusters.end(),
                           cluster)) {
      return static_cast<uint32_t>(i + 1);
    }
  }
  return r_max;
}

uint32_t CutoffModel::predict(std::span<const double> features) const {
  int32_t at = 0;
  while (!nodes[at].is_leaf()) {
    const Node& n = nodes[at];
    const double x = n.feature < features.size() ? features[n.feature] : 0.0;
    at = x <= n.threshold ? n.left : n.right;
  }
  return nodes[at].label;
}

std::vector<double> cutoff_features(const TfIdfProfile& profile, uint32_t m,
                                    uint32_t r_max) {
  std::vector<double> f(r_max + 1, 0.0);
  const size_t limit = std::min<size_t>(r_max, profile.entries.size());
  for (size_t i = 0; i < limit; ++i) f[i] = profile.entries[i].second;
  f[r_max] = static_cast<double>(m);
  return f;
}

namespace {

double gini(const std::vector<size_t>& counts, size_t total) {
  if (total == 0) return 0.0;
  double impurity = 1.0;
  for (size_t c : counts) {
    const double p = static_cast<double>(c) / static_cast<double>(total);
    impurity -= p * p;
  }
  return impurity;
}

uint32_t majority_label(const std::vector<size_t>& counts) {
  size_t best = 0;
  uint32_t label = 0;
  for (size_t c = 0; c < counts.size(); ++c) {
    if (counts[c] > best) {
      best = counts[c];
      label = static_cast<uint32_t>(c);
    }
  }
  return label;
}

struct TreeBuilder {
  const std::vector<std::vector<double>>& features;
  const std::vector<uint32_t>& labels;
  uint32_t max_depth;
  uint32_t min_leaf;
  uint32_t n_classes;  // labels are 1..r_max, stored as class index label-1+1
  CutoffModel* model;

  int32_t build(std::vector<size_t> idx, uint32_t depth) {
    std::vector<size_t> counts(n_classes + 1, 0);
    for (size_t i : idx) counts[labels[i]]++;
    const uint32_t majority = majority_label(counts);
    const double impurity = gini(counts, idx.size());

    const int32_t node_id = static_cast<int32_t>(model->nodes.size());
    model->nodes.push_back({});
    model->nodes[node_id].label = majority;

    if (depth >= max_depth || impurity <= 0.0 ||
        idx.size() < 2 * static_cast<size_t>(min_leaf)) {
      return node_id;
    }

    const size_t n_features = features[idx[0]].size();
    double best_score = std::numeric_limits<double>::infinity();
    size_t best_feature = 0;
    double best_threshold = 0.0;

    std::vector<std::pair<double, uint32_t>> column(idx.size());
    for (size_t f = 0; f < n_features; ++f) {
      for (size_t i = 0; i < idx.size(); ++i) {
        column[i] = {features[idx[i]][f], labels[idx[i]]};
      }
      std::sort(column.begin(), column.end());

      std::vector<size_t> left(n_classes + 1, 0);
      std::vector<size_t> right = counts;
      for (size_t i = 0; i + 1 < column.size(); ++i) {
        left[column[i].second]++;
        right[column[i].second]--;
        if (column[i].first == column[i + 1].first) continue;
        const size_t nl = i + 1;
        const size_t nr = column.size() - nl;
        if (nl < min_leaf || nr < min_leaf) continue;
        const double score =
            (static_cast<double>(nl) * gini(left, nl) +
             static_cast<double>(nr) * gini(right, nr)) /
            static_cast<double>(column.size());
        if (score + 1e-12 < best_score) {
          best_score = score;
          best_feature = f;
          best_threshold = 0.5 * (column[i].first + column[i + 1].first);
        }
      }
    }

    if (best_score >= impurity - 1e-12) {
      return node_id;  // no strictly improving split
    }

    std::vector<size_t> left_idx, right_idx;
    for (size_t i : idx) {
      (features[i][best_feature] <= best_threshold ? left_idx : right_idx)
          .push_back(i);
    }
    idx.clear();
    idx.shrink_to_fit();

    model->nodes[node_id].feature = static_cast<uint32_t>(best_feature);
    model->nodes[node_id].threshold = best_threshold;
    const int32_t l = build(std::move(left_idx), depth + 1);
    model->nodes[node_id].left = l;
    const int32_t r = build(std::move(right_idx), depth + 1);
    model->nodes[node_id].right = r;
    return node_id;
  }
};

}  // namespace

CutoffModel train_cutoff_model(const std::vector<std::vector<double>>& features,
                               const std::vector<uint32_t>& labels,
                               uint32_t max_depth, uint32_t min_leaf,
                               uint32_t r_max) {
  if (features.size() != labels.size()) {
    raise(ErrorCode::invalid_argument, "feature/label count mismatch");
  }
  if (features.size() < min_leaf) {
    raise(ErrorCode::too_few_samples,
          "need at least min_leaf samples to train");
  }
  for (uint32_t label : labels) {
    if (label < 1 || label > r_max) {
      raise(ErrorCode::invalid_argument, "labels must lie in [1, r_max]");
    }
  }
  CutoffModel model;
  model.r_max = r_max;
  std::vector<size_t> idx(features.size());
  std::iota(idx.begin(), idx.end(), 0);
  TreeBuilder builder{features, labels, max_depth, min_leaf, r_max, &model};
  builder.build(std::move(idx), 0);
  return model;
}

uint32_t predict_cutoff(const CutoffModel& model, const TfIdfProfile& profile,
                        uint32_t m) {
  if (profile.empty()) {
    raise(ErrorCode::empty_profile, "cannot predict on an empty profile");
  }
  const std::vector<double> f = cutoff_features(profile, m, model.r_max);
  const uint32_t raw = model.empty() ? 1 : model.predict(f);
  const uint32_t hi =
      std::min<uint32_t>(model.r_max, static_cast<uint32_t>(profile.size()));
  return std::clamp<uint32_t>(raw, 1, std::max<uint32_t>(hi, 1));
}

}  // namespace gem
