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
#include <random>
#include <stdexcept>
#include <string>
#include <vector>

namespace gem {

// Similarity backing Sim(.,.) and the ground distance d_X:
//   cosine: Sim = <a,b> on unit vectors, d_X = 1 - <a,b>
//   l2:     Sim = -||a-b||,               d_X = ||a-b||
enum class SimilarityKind : uint8_t { cosine = 0, l2 = 1 };

// Embedding coordinates are held as doubles in memory; everything that is
// persisted (corpus vectors, centroids) lives on the binary32 grid so that
// file round trips are lossless.
using Vector = std::vector<double>;

struct VectorSet {
  uint64_t id = 0;
  std::vector<Vector> vectors;

  size_t size() const { return vectors.size(); }
};

struct Corpus {
  std::vector<VectorSet> sets;
  uint32_t dim = 0;

  size_t size() const { return sets.size(); }
};

enum class ErrorCode : uint8_t {
  dim_mismatch,
  zero_vector,
  too_few_points,
  empty_set,
  empty_profile,
  too_few_samples,
  code_out_of_range,
  solver_failure,
  duplicate_id,
  unknown_doc_id,
  empty_query,
  empty_graph,
  empty_ground_truth,
  inconsistent_qrels,
  bad_magic,
  bad_version,
  truncated,
  io_error,
  invalid_argument,
};

class GemError : public std::runtime_error {
 public:
  GemError(ErrorCode code, const std::string& msg)
      : std::runtime_error(msg), code_(code) {}

  ErrorCode code() const { return code_; }

 private:
  ErrorCode code_;
};

[[noreturn]] inline void raise(ErrorCode code, const std::string& msg) {
  throw GemError(code, msg);
}

// Deterministic 64-bit generator. Draw paths avoid std distributions so that
// sequences are identical across standard library implementations.
class Rng {
 public:
  explicit Rng(uint64_t seed) : engine_(seed) {}

  uint64_t next_u64() { return engine_(); }

  // Uniform in [0, 1) with 53 bits of randomness.
  double next_double() {
    return static_cast<double>(next_u64() >> 11) * 0x1.0p-53;
  }

  // Uniform in [0, n) via rejection sampling (exact, no modulo bias).
  uint64_t next_below(uint64_t n) {
    if (n == 0) raise(ErrorCode::invalid_argument, "next_below(0)");
    const uint64_t limit = UINT64_MAX - UINT64_MAX % n;
    uint64_t draw;
    do {
      draw = next_u64();
    } while (draw >= limit);
    return draw % n;
  }

  // Fisher-Yates; stable across platforms unlike std::shuffle.
  template <typename T>
  void shuffle(std::vector<T>& items) {
    for (size_t i = items.size(); i > 1; --i) {
      std::swap(items[i - 1], items[next_below(i)]);
    }
  }

 private:
  std::mt19937_64 engine_;
};

// Snaps a double onto the binary32 grid.
inline double to_f32_grid(double x) {
  return static_cast<double>(static_cast<float>(x));
}

// Cosine mode rescales every vector to unit norm (idempotent: vectors already
// within 1e-6 of unit norm are left untouched so that saved corpora reload
// bit-identically). L2 mode is the identity.
Corpus normalize_corpus(Corpus corpus, SimilarityKind kind);

// Same normalization for a single set (query ingest, maintenance inserts).
VectorSet normalize_set(VectorSet set, SimilarityKind kind);

// Validates dims, finiteness and the dense 0..N-1 id range.
void validate_corpus(const Corpus& corpus);

}  // namespace gem
