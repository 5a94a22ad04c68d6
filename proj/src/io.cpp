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

#include "gem/io.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <cstring>
#include <fstream>
#include <sstream>

namespace gem {

uint64_t fnv1a64(const void* data, size_t len, uint64_t seed) {
  const auto* bytes = static_cast<const unsigned char*>(data);
  uint64_t h = seed;
  for (size_t i = 0; i < len; ++i) {
    h ^= bytes[i];
    h *= 1099511628211ull;
  }
  return h;
}

namespace {

constexpr uint64_t kFnvOffset = 14695981039346656037ull;
constexpr uint32_t kVectorFileVersion = 1;
constexpr uint32_t kIndexFileVersion = 1;

// Little-endian byte sink.
class Writer {
 public:
  void u8(uint8_t x) { buf_.push_back(static_cast<char>(x)); }

  void u32(uint32_t x) {
    for (int i = 0; i < 4; ++i) buf_.push_back(static_cast<char>(x >> (8 * i)));
  }

  void u64(uint64_t x) {
    for (int i = 0; i < 8; ++i) buf_.push_back(static_cast<char>(x >> (8 * i)));
  }

  void i32(int32_t x) { u32(static_cast<uint32_t>(x)); }

  void f32(float x) { u32(std::bit_cast<uint32_t>(x)); }

  void f64(double x) { u64(std::bit_cast<uint64_t>(x)); }

  void magic(const char m[4]) { buf_.append(m, 4); }

  const std::string& bytes() const { return buf_; }

  void flush(const std::string& path) const {
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) raise(ErrorCode::io_error, "cannot open for writing: " + path);
    out.write(buf_.data(), static_cast<std::streamsize>(buf_.size()));
    if (!out) raise(ErrorCode::io_error, "short write: " + path);
  }

 private:
  std::string buf_;
};

class Reader {
 public:
  explicit Reader(std::string bytes) : buf_(std::move(bytes)) {}

  size_t remaining() const { return buf_.size() - pos_; }
  size_t size() const { return buf_.size(); }
  const std::string& bytes() const { return buf_; }

  void need(size_t n) {
    if (remaining() < n) {
      raise(ErrorCode::truncated, "file truncated: need " + std::to_string(n) +
                                      " more bytes");
    }
  }

  uint8_t u8() {
    need(1);
    return static_cast<uint8_t>(buf_[pos_++]);
  }

  uint32_t u32() {
    need(4);
    uint32_t x = 0;
    for (int i = 0; i < 4; ++i) {
      x |= static_cast<uint32_t>(static_cast<unsigned char>(buf_[pos_++]))
           << (8 * i);
    }
    return x;
  }

  uint64_t u64() {
    need(8);
    uint64_t x = 0;
    for (int i = 0; i < 8; ++i) {
      x |= static_cast<uint64_t>(static_cast<unsigned char>(buf_[pos_++]))
           << (8 * i);
    }
    return x;
  }

  int32_t i32() { return static_cast<int32_t>(u32()); }
  float f32() { return std::bit_cast<float>(u32()); }
  double f64() { return std::bit_cast<double>(u64()); }

  void expect_magic(const char m[4], const std::string& what) {
    need(4);
    if (std::memcmp(buf_.data() + pos_, m, 4) != 0) {
      raise(ErrorCode::bad_magic, "bad magic for " + what);
    }
    pos_ += 4;
  }

  void expect_end() {
    if (remaining() != 0) {
      raise(ErrorCode::truncated,
            "trailing bytes: " + std::to_string(remaining()));
    }
  }

 private:
  std::string buf_;
  size_t pos_ = 0;
};

std::string slurp(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) raise(ErrorCode::io_error, "cannot open: " + path);
  std::ostringstream ss;
  ss << in.rdbuf();
  if (!in.good() && !in.eof()) raise(ErrorCode::io_error, "read failed: " + path);
  return std::move(ss).str();
}

}  // namespace

Corpus load_vector_sets(const std::string& path) {
  Reader r(slurp(path));
  r.expect_magic("GEMV", path);
  const uint32_t version = r.u32();
  if (version != kVectorFileVersion) {
    raise(ErrorCode::bad_version,
          "unsupported vector file version " + std::to_string(version));
  }
  const uint64_t n = r.u64();
  const uint32_t d = r.u32();
  (void)r.u32();  // flags, reserved

  Corpus corpus;
  corpus.dim = d;
  corpus.sets.reserve(n);
  for (uint64_t i = 0; i < n; ++i) {
    VectorSet set;
    set.id = r.u64();
    const uint32_t m = r.u32();
    if (m == 0) raise(ErrorCode::io_error, "set with zero vectors");
    set.vectors.reserve(m);
    for (uint32_t j = 0; j < m; ++j) {
      Vector v(d);
      for (uint32_t c = 0; c < d; ++c) {
        const float x = r.f32();
        if (!std::isfinite(x)) {
          raise(ErrorCode::io_error, "non-finite component in vector file");
        }
        v[c] = static_cast<double>(x);
      }
      set.vectors.push_back(std::move(v));
    }
    corpus.sets.push_back(std::move(set));
  }
  r.expect_end();
  validate_corpus(corpus);
  return corpus;
}

void save_vector_sets(const Corpus& corpus, const std::string& path) {
  Writer w;
  w.magic("GEMV");
  w.u32(kVectorFileVersion);
  w.u64(corpus.sets.size());
  w.u32(corpus.dim);
  w.u32(0);
  for (const VectorSet& set : corpus.sets) {
    w.u64(set.id);
    w.u32(static_cast<uint32_t>(set.vectors.size()));
    for (const Vector& v : set.vectors) {
      for (double x : v) w.f32(static_cast<float>(x));
    }
  }
  w.flush(path);
}

namespace {

void write_corpus_section(Writer& w, const Corpus& corpus) {
  w.u64(corpus.sets.size());
  w.u32(corpus.dim);
  for (const VectorSet& set : corpus.sets) {
    w.u64(set.id);
    w.u32(static_cast<uint32_t>(set.vectors.size()));
    for (const Vector& v : set.vectors) {
      for (double x : v) w.f32(static_cast<float>(x));
    }
  }
}

Corpus read_corpus_section(Reader& r) {
  Corpus corpus;
  const uint64_t n = r.u64();
  corpus.dim = r.u32();
  corpus.sets.reserve(n);
  for (uint64_t i = 0; i < n; ++i) {
    VectorSet set;
    set.id = r.u64();
    const uint32_t m = r.u32();
    set.vectors.reserve(m);
    for (uint32_t j = 0; j < m; ++j) {
      Vector v(corpus.dim);
      for (uint32_t c = 0; c < corpus.dim; ++c) {
        v[c] = static_cast<double>(r.f32());
      }
      set.vectors.push_back(std::move(v));
    }
    corpus.sets.push_back(std::move(set));
  }
  return corpus;
}

}  // namespace

void save_index(const GemIndex& index, const std::string& path) {
  Writer w;
  w.magic("GEMI");
  w.u32(kIndexFileVersion);

  const BuildParams& p = index.params;
  w.u8(static_cast<uint8_t>(p.kind));
  w.u32(p.k1);
  w.u32(p.k2);
  w.u32(p.f);
  w.u32(p.M);
  w.u32(p.ef_construction);
  w.u32(p.r_max);
  w.u32(p.fallback_r);
  w.u32(p.f_prime);
  w.u32(p.tree_max_depth);
  w.u32(p.tree_min_leaf);
  w.u8(p.use_tfidf ? 1 : 0);
  w.f64(p.shortcut_frac);
  w.f64(p.sample_frac);
  w.u64(p.seed);

  write_corpus_section(w, index.corpus);

  // Codebook: centroids live on the binary32 grid; the distance table is
  // stored in binary64 to keep its 1e-9 consistency with the centroids.
  const uint32_t k1 = index.codebook.size();
  w.u32(k1);
  w.u32(index.codebook.dim);
  for (const Vector& c : index.codebook.centroids) {
    for (double x : c) w.f32(static_cast<float>(x));
  }
  for (double d : index.codebook.pair_dist) w.f64(d);

  const uint32_t k2 = index.space.cluster_count();
  w.u32(k2);
  for (const Vector& c : index.space.index_centroids) {
    for (double x : c) w.f32(static_cast<float>(x));
  }
  for (uint32_t q : index.space.quant_to_index) w.u32(q);
  for (uint64_t f : index.space.doc_freq) w.u64(f);

  for (const CodeSet& cs : index.codes) {
    w.u32(static_cast<uint32_t>(cs.codes.size()));
    for (uint32_t code : cs.codes) w.u32(code);
  }
  for (const auto& c_top : index.graph.cluster_membership) {
    w.u32(static_cast<uint32_t>(c_top.size()));
    for (uint32_t c : c_top) w.u32(c);
  }

  w.u8(index.cutoff.empty() ? 0 : 1);
  if (!index.cutoff.empty()) {
    w.u32(index.cutoff.r_max);
    w.u32(static_cast<uint32_t>(index.cutoff.nodes.size()));
    for (const CutoffModel::Node& node : index.cutoff.nodes) {
      w.i32(node.left);
      w.i32(node.right);
      w.u32(node.feature);
      w.f64(node.threshold);
      w.u32(node.label);
    }
  }

  w.u32(index.graph.degree_cap);
  for (const auto& adj : index.graph.adjacency) {
    w.u32(static_cast<uint32_t>(adj.size()));
    for (const GemGraph::Edge& e : adj) {
      w.u32(e.to);
      w.u8(static_cast<uint8_t>(e.kind));
    }
  }

  uint64_t tomb_count = 0;
  for (uint8_t t : index.graph.tombstone) tomb_count += t != 0;
  w.u64(tomb_count);
  for (uint32_t v = 0; v < index.graph.tombstone.size(); ++v) {
    if (index.graph.tombstone[v]) w.u32(v);
  }

  w.u64(fnv1a64(w.bytes().data(), w.bytes().size(), kFnvOffset));
  w.flush(path);
}

GemIndex load_index(const std::string& path) {
  Reader r(slurp(path));
  if (r.size() < 12) raise(ErrorCode::truncated, "index file too small");
  {
    const std::string& all = r.bytes();
    const uint64_t stored = [&] {
      uint64_t x = 0;
      for (int i = 0; i < 8; ++i) {
        x |= static_cast<uint64_t>(
                 static_cast<unsigned char>(all[all.size() - 8 + i]))
             << (8 * i);
      }
      return x;
    }();
    const uint64_t actual = fnv1a64(all.data(), all.size() - 8, kFnvOffset);
    if (stored != actual) {
      raise(ErrorCode::io_error, "index checksum mismatch");
    }
  }

  r.expect_magic("GEMI", path);
  const uint32_t version = r.u32();
  if (version != kIndexFileVersion) {
    raise(ErrorCode::bad_version,
          "unsupported index file version " + std::to_string(version));
  }

  GemIndex index;
  BuildParams& p = index.params;
  p.kind = static_cast<SimilarityKind>(r.u8());
  p.k1 = r.u32();
  p.k2 = r.u32();
  p.f = r.u32();
  p.M = r.u32();
  p.ef_construction = r.u32();
  p.r_max = r.u32();
  p.fallback_r = r.u32();
  p.f_prime = r.u32();
  p.tree_max_depth = r.u32();
  p.tree_min_leaf = r.u32();
  p.use_tfidf = r.u8() != 0;
  p.shortcut_frac = r.f64();
  p.sample_frac = r.f64();
  p.seed = r.u64();

  index.corpus = read_corpus_section(r);
  const size_t n = index.corpus.size();

  const uint32_t k1 = r.u32();
  index.codebook.dim = r.u32();
  index.codebook.kind = p.kind;
  index.codebook.centroids.resize(k1, Vector(index.codebook.dim));
  for (Vector& c : index.codebook.centroids) {
    for (double& x : c) x = static_cast<double>(r.f32());
  }
  index.codebook.pair_dist.resize(static_cast<size_t>(k1) * k1);
  for (double& d : index.codebook.pair_dist) d = r.f64();

  const uint32_t k2 = r.u32();
  index.space.kind = p.kind;
  index.space.dim = index.codebook.dim;
  index.space.index_centroids.resize(k2, Vector(index.codebook.dim));
  for (Vector& c : index.space.index_centroids) {
    for (double& x : c) x = static_cast<double>(r.f32());
  }
  index.space.quant_to_index.resize(k1);
  for (uint32_t& q : index.space.quant_to_index) {
    q = r.u32();
    if (q >= k2) raise(ErrorCode::io_error, "coarse assignment out of range");
  }
  index.space.doc_freq.resize(k2);
  for (uint64_t& f : index.space.doc_freq) f = r.u64();

  index.codes.reserve(n);
  for (size_t i = 0; i < n; ++i) {
    CodeSet cs;
    cs.set_id = i;
    const uint32_t m = r.u32();
    if (m != index.corpus.sets[i].vectors.size()) {
      raise(ErrorCode::io_error, "code count does not match set size");
    }
    cs.codes.resize(m);
    for (uint32_t& code : cs.codes) {
      code = r.u32();
      if (code >= k1) raise(ErrorCode::io_error, "code out of range");
    }
    std::vector<uint32_t> sorted = cs.codes;
    std::sort(sorted.begin(), sorted.end());
    for (size_t a = 0; a < sorted.size();) {
      size_t b = a;
      while (b < sorted.size() && sorted[b] == sorted[a]) ++b;
      cs.histogram.emplace_back(sorted[a], static_cast<uint32_t>(b - a));
      a = b;
    }
    index.codes.push_back(std::move(cs));
  }

  index.graph.degree_cap = p.M;
  index.graph.cluster_membership.resize(n);
  for (auto& c_top : index.graph.cluster_membership) {
    const uint32_t len = r.u32();
    c_top.resize(len);
    for (uint32_t& c : c_top) {
      c = r.u32();
      if (c >= k2) raise(ErrorCode::io_error, "cluster id out of range");
    }
  }

  if (r.u8() != 0) {
    index.cutoff.r_max = r.u32();
    const uint32_t count = r.u32();
    index.cutoff.nodes.resize(count);
    for (CutoffModel::Node& node : index.cutoff.nodes) {
      node.left = r.i32();
      node.right = r.i32();
      node.feature = r.u32();
      node.threshold = r.f64();
      node.label = r.u32();
    }
  }

  index.graph.degree_cap = r.u32();
  index.graph.adjacency.resize(n);
  for (auto& adj : index.graph.adjacency) {
    const uint32_t deg = r.u32();
    adj.resize(deg);
    for (GemGraph::Edge& e : adj) {
      e.to = r.u32();
      if (e.to >= n) raise(ErrorCode::io_error, "edge endpoint out of range");
      e.kind = static_cast<EdgeKind>(r.u8());
    }
  }

  index.graph.tombstone.assign(n, 0);
  const uint64_t tomb_count = r.u64();
  for (uint64_t i = 0; i < tomb_count; ++i) {
    const uint32_t v = r.u32();
    if (v >= n) raise(ErrorCode::io_error, "tombstone id out of range");
    index.graph.tombstone[v] = 1;
  }

  (void)r.u64();  // checksum, verified up front
  r.expect_end();

  // Entry candidates are derived state.
  index.graph.entry_candidates.assign(k2, {});
  for (size_t v = 0; v < n; ++v) {
    for (uint32_t c : index.graph.cluster_membership[v]) {
      index.graph.entry_candidates[c].push_back(static_cast<uint32_t>(v));
    }
  }
  return index;
}

std::vector<std::pair<uint64_t, uint64_t>> load_id_pairs(
    const std::string& path, uint64_t max_query_id, uint64_t max_doc_id) {
  std::ifstream in(path);
  if (!in) raise(ErrorCode::io_error, "cannot open: " + path);
  std::vector<std::pair<uint64_t, uint64_t>> pairs;
  std::string line;
  size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty()) continue;
    std::istringstream ss(line);
    uint64_t qid = 0, did = 0;
    if (!(ss >> qid >> did) || line.find('-') != std::string::npos) {
      raise(ErrorCode::io_error,
            "malformed pair at " + path + ":" + std::to_string(line_no));
    }
    if (qid >= max_query_id || did >= max_doc_id) {
      raise(ErrorCode::io_error,
            "id out of range at " + path + ":" + std::to_string(line_no));
    }
    pairs.emplace_back(qid, did);
  }
  return pairs;
}

Qrels load_qrels(const std::string& path, uint64_t max_query_id,
                 uint64_t max_doc_id) {
  Qrels qrels;
  for (const auto& [qid, did] : load_id_pairs(path, max_query_id, max_doc_id)) {
    qrels.relevant[qid].push_back(did);
  }
  for (auto& [qid, ids] : qrels.relevant) {
    (void)qid;
    std::sort(ids.begin(), ids.end());
    ids.erase(std::unique(ids.begin(), ids.end()), ids.end());
  }
  return qrels;
}

}  // namespace gem
