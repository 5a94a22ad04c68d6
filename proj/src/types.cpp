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

#include "gem/types.hpp"

#include <cmath>

namespace gem {

void validate_corpus(const Corpus& corpus) {
  if (corpus.sets.empty()) {
    raise(ErrorCode::too_few_points, "corpus is empty");
  }
  for (size_t i = 0; i < corpus.sets.size(); ++i) {
    const VectorSet& set = corpus.sets[i];
    if (set.id != i) {
      raise(ErrorCode::invalid_argument,
            "corpus ids must be dense 0..N-1; set " + std::to_string(i) +
                " has id " + std::to_string(set.id));
    }
    if (set.vectors.empty()) {
      raise(ErrorCode::empty_set, "set " + std::to_string(set.id) +
                                      " has no vectors");
    }
    for (const Vector& v : set.vectors) {
      if (v.size() != corpus.dim) {
        raise(ErrorCode::dim_mismatch,
              "vector dimension " + std::to_string(v.size()) +
                  " != corpus dim " + std::to_string(corpus.dim));
      }
      for (double x : v) {
        if (!std::isfinite(x)) {
          raise(ErrorCode::invalid_argument, "non-finite component in set " +
                                                 std::to_string(set.id));
        }
      }
    }
  }
}

VectorSet normalize_set(VectorSet set, SimilarityKind kind) {
  if (kind == SimilarityKind::l2) return set;
  for (Vector& v : set.vectors) {
    double sq = 0.0;
    for (double x : v) sq += x * x;
    const double norm = std::sqrt(sq);
    if (norm < 1e-12) {
      raise(ErrorCode::zero_vector,
            "zero vector in set " + std::to_string(set.id) +
                " cannot be cosine-normalized");
    }
    if (std::fabs(norm - 1.0) <= 1e-6) continue;
    for (double& x : v) x = to_f32_grid(x / norm);
  }
  return set;
}

Corpus normalize_corpus(Corpus corpus, SimilarityKind kind) {
  validate_corpus(corpus);
  if (kind == SimilarityKind::l2) {
    return corpus;
  }
  for (VectorSet& set : corpus.sets) {
    set = normalize_set(std::move(set), kind);
  }
  return corpus;
}

}  // namespace gem
