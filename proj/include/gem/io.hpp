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
#include <string>
#include <utility>
#include <vector>

#include "gem/eval.hpp"
#include "gem/graph.hpp"
#include "gem/types.hpp"

namespace gem {

// Vector-set file ("GEMV"): header magic, version u32, N u64, d u32,
// flags u32; then per set: id u64, m u32, m*d little-endian binary32.
// The byte length must match the header arithmetic exactly.
Corpus load_vector_sets(const std::string& path);
void save_vector_sets(const Corpus& corpus, const std::string& path);

// Index file ("GEMI"): build params, corpus, codebook (centroids binary32,
// pair distances binary64), cluster space, per-set codes and assigned
// clusters, cutoff model, adjacency with per-edge kind flags, tombstones,
// and a trailing FNV-1a 64 checksum over all preceding bytes.
void save_index(const GemIndex& index, const std::string& path);
GemIndex load_index(const std::string& path);

// Text files: one "query_id<TAB>doc_id" line each. Ids must parse as
// non-negative integers; bounds are validated against the given limits
// (pass UINT64_MAX to skip a bound).
std::vector<std::pair<uint64_t, uint64_t>> load_id_pairs(
    const std::string& path, uint64_t max_query_id, uint64_t max_doc_id);
Qrels load_qrels(const std::string& path, uint64_t max_query_id,
                 uint64_t max_doc_id);

uint64_t fnv1a64(const void* data, size_t len, uint64_t seed);

}  // namespace gem
