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

#include <algorithm>
#include <cmath>

#include "doctest.h"
#include "gem/metric.hpp"
#include "support.hpp"

using namespace gem;

namespace {

VectorSet make_set(uint64_t id, std::vector<Vector> vectors) {
  VectorSet s;
  s.id = id;
  s.vectors = std::move(vectors);
  return s;
}

}  // namespace

TEST_CASE("chamfer similarity reproduces the per-token max-sim sum") {
  // Query tokens on three axes; the document offers best matches of
  // 0.94, 0.7 and 0.22 respectively.
  const double r0 = std::sqrt(1.0 - 0.94 * 0.94);
  const double r1 = std::sqrt(1.0 - 0.70 * 0.70);
  const double r2 = std::sqrt(1.0 - 0.22 * 0.22);
  const VectorSet q = make_set(0, {{1, 0, 0, 0}, {0, 1, 0, 0}, {0, 0, 1, 0}});
  const VectorSet p = make_set(1, {{0.94, 0, 0, r0},
                                   {0, 0.70, 0, r1},
                                   {0, 0, 0.22, r2}});
  CHECK(chamfer_similarity(q, p, SimilarityKind::cosine) ==
        doctest::Approx(1.86).epsilon(1e-12));
}

TEST_CASE("chamfer similarity of a set with itself is its size (cosine)") {
  Rng rng(2);
  const VectorSet a = test::random_set(rng, 0, 8, 5);
  CHECK(chamfer_similarity(a, a, SimilarityKind::cosine) ==
        doctest::Approx(5.0).epsilon(1e-9));
}

TEST_CASE("orthonormal singletons have zero chamfer similarity") {
  const VectorSet a = make_set(0, {{1, 0}});
  const VectorSet b = make_set(1, {{0, 1}});
  CHECK(chamfer_similarity(a, b, SimilarityKind::cosine) ==
        doctest::Approx(0.0));
}

TEST_CASE("chamfer similarity is invariant to element permutation") {
  Rng rng(5);
  for (int trial = 0; trial < 20; ++trial) {
    VectorSet a = test::random_set(rng, 0, 6, 4);
    VectorSet b = test::random_set(rng, 1, 6, 3);
    const double before = chamfer_similarity(a, b, SimilarityKind::cosine);
    rng.shuffle(a.vectors);
    rng.shuffle(b.vectors);
    CHECK(chamfer_similarity(a, b, SimilarityKind::cosine) ==
          doctest::Approx(before).epsilon(1e-12));
  }
}

TEST_CASE("chamfer distance identities") {
  Rng rng(3);
  const VectorSet a = test::random_set(rng, 0, 4, 4);
  CHECK(chamfer_distance(a, a, SimilarityKind::cosine) ==
        doctest::Approx(0.0).epsilon(1e-12));

  const VectorSet x = test::random_set(rng, 1, 4, 1);
  const VectorSet y = test::random_set(rng, 2, 4, 1);
  for (SimilarityKind kind : {SimilarityKind::cosine, SimilarityKind::l2}) {
    CHECK(chamfer_distance(x, y, kind) ==
          doctest::Approx(vector_distance(x.vectors[0], y.vectors[0], kind)));
  }
}

TEST_CASE("chamfer distance equals the mean of per-row minima") {
  Rng rng(11);
  const VectorSet a = test::random_set(rng, 0, 4, 3);
  const VectorSet b = test::random_set(rng, 1, 4, 2);
  for (SimilarityKind kind : {SimilarityKind::cosine, SimilarityKind::l2}) {
    double expected = 0.0;
    for (const Vector& x : a.vectors) {
      double best = 1e300;
      for (const Vector& y : b.vectors) {
        best = std::min(best, vector_distance(x, y, kind));
      }
      expected += best;
    }
    expected /= 3.0;
    CHECK(chamfer_distance(a, b, kind) ==
          doctest::Approx(expected).epsilon(1e-12));
  }
}

TEST_CASE("emd identities") {
  Rng rng(4);
  const VectorSet a = test::random_set(rng, 0, 6, 4);
  CHECK(emd(a, a, SimilarityKind::cosine).cost ==
        doctest::Approx(0.0).epsilon(1e-9));

  const VectorSet x = test::random_set(rng, 1, 6, 1);
  const VectorSet y = test::random_set(rng, 2, 6, 1);
  const TransportPlan plan = emd(x, y, SimilarityKind::l2);
  CHECK(plan.cost ==
        doctest::Approx(vector_distance(x.vectors[0], y.vectors[0],
                                        SimilarityKind::l2)));
  REQUIRE(plan.flows.size() == 1);
  CHECK(std::get<2>(plan.flows[0]) == doctest::Approx(1.0));
}

TEST_CASE("emd matches the permutation-matching oracle on equal sizes") {
  Rng rng(6);
  for (int trial = 0; trial < 40; ++trial) {
    const uint32_t m = 2 + static_cast<uint32_t>(rng.next_below(5));  // 2..6
    const SimilarityKind kind =
        trial % 2 == 0 ? SimilarityKind::cosine : SimilarityKind::l2;
    const VectorSet a = test::random_set(rng, 0, 5, m);
    const VectorSet b = test::random_set(rng, 1, 5, m);
    const double oracle = test::min_permutation_cost(a, b, kind);
    CHECK(emd(a, b, kind).cost == doctest::Approx(oracle).epsilon(1e-9));
  }
}

TEST_CASE("emd plan satisfies the uniform marginal constraints") {
  Rng rng(8);
  const VectorSet a = test::random_set(rng, 0, 4, 3);
  const VectorSet b = test::random_set(rng, 1, 4, 5);
  const TransportPlan plan = emd(a, b, SimilarityKind::cosine);

  std::vector<double> row(3, 0.0), col(5, 0.0);
  double recomputed = 0.0;
  for (const auto& [i, j, t] : plan.flows) {
    REQUIRE(t > 0.0);
    row[i] += t;
    col[j] += t;
    recomputed +=
        t * vector_distance(a.vectors[i], b.vectors[j], SimilarityKind::cosine);
  }
  for (double r : row) CHECK(r == doctest::Approx(1.0 / 3).epsilon(1e-9));
  for (double c : col) CHECK(c == doctest::Approx(1.0 / 5).epsilon(1e-9));
  CHECK(plan.cost == doctest::Approx(recomputed).epsilon(1e-12));
}

TEST_CASE("emd metric axioms hold on random triples") {
  Rng rng(10);
  for (int trial = 0; trial < 300; ++trial) {
    const uint32_t d = 2 + static_cast<uint32_t>(rng.next_below(7));
    auto rand_m = [&] { return 1 + static_cast<uint32_t>(rng.next_below(6)); };
    const VectorSet a = test::random_set(rng, 0, d, rand_m());
    const VectorSet b = test::random_set(rng, 1, d, rand_m());
    const VectorSet c = test::random_set(rng, 2, d, rand_m());

    // Symmetry and identity hold in both modes.
    for (SimilarityKind kind : {SimilarityKind::cosine, SimilarityKind::l2}) {
      CHECK(std::fabs(emd(a, b, kind).cost - emd(b, a, kind).cost) <= 1e-8);
      CHECK(emd(a, a, kind).cost <= 1e-9);
    }
    // Triangle inequality needs a metric ground distance; that is the l2
    // mode (1 - dot violates it already on three coplanar unit vectors).
    const double ab = emd(a, b, SimilarityKind::l2).cost;
    const double bc = emd(b, c, SimilarityKind::l2).cost;
    const double ac = emd(a, c, SimilarityKind::l2).cost;
    CHECK(ac <= ab + bc + 1e-8);
  }
}

TEST_CASE("chamfer distance is bounded by emd cost") {
  Rng rng(12);
  for (int trial = 0; trial < 300; ++trial) {
    const uint32_t d = 2 + static_cast<uint32_t>(rng.next_below(7));
    const VectorSet a =
        test::random_set(rng, 0, d, 1 + static_cast<uint32_t>(rng.next_below(6)));
    const VectorSet b =
        test::random_set(rng, 1, d, 1 + static_cast<uint32_t>(rng.next_below(6)));
    for (SimilarityKind kind : {SimilarityKind::cosine, SimilarityKind::l2}) {
      CHECK(chamfer_distance(a, b, kind) <= emd(a, b, kind).cost + 1e-8);
    }
  }
}

TEST_CASE("codebook pair distances are symmetric with zero diagonal") {
  SUBCASE("single centroid") {
    const Codebook book = build_codebook({{1.0, 0.0}}, SimilarityKind::cosine);
    CHECK(book.pair(0, 0) == 0.0);
  }
  SUBCASE("two orthogonal unit vectors") {
    const Codebook book =
        build_codebook({{1.0, 0.0}, {0.0, 1.0}}, SimilarityKind::cosine);
    CHECK(book.pair(0, 1) == doctest::Approx(1.0));
    CHECK(book.pair(1, 0) == doctest::Approx(1.0));
  }
  SUBCASE("random centroids match freshly computed distances") {
    Rng rng(13);
    std::vector<Vector> centroids;
    for (int i = 0; i < 5; ++i) {
      centroids.push_back(test::random_unit_vector(rng, 6));
    }
    const Codebook book = build_codebook(centroids, SimilarityKind::l2);
    for (uint32_t i = 0; i < 5; ++i) {
      for (uint32_t j = 0; j < 5; ++j) {
        const double fresh =
            vector_distance(centroids[i], centroids[j], SimilarityKind::l2);
        CHECK(std::fabs(book.pair(i, j) - fresh) <= 1e-9);
        CHECK(book.pair(i, j) == book.pair(j, i));
      }
    }
  }
}

TEST_CASE("encode maps vectors to nearest centroids") {
  Rng rng(14);
  std::vector<Vector> centroids;
  for (int i = 0; i < 8; ++i) {
    centroids.push_back(test::random_unit_vector(rng, 5));
  }
  const Codebook book = build_codebook(centroids, SimilarityKind::cosine);

  SUBCASE("vectors equal to centroids code to themselves") {
    VectorSet set;
    set.id = 0;
    set.vectors = {centroids[3], centroids[0], centroids[7]};
    const CodeSet cs = encode(set, book);
    CHECK(cs.codes == std::vector<uint32_t>{3, 0, 7});
    uint32_t total = 0;
    for (const auto& [code, count] : cs.histogram) {
      (void)code;
      total += count;
    }
    CHECK(total == 3);
  }

  SUBCASE("ties break toward the lower centroid index") {
    const Codebook tied = build_codebook(
        {{1.0, 0.0}, {1.0, 0.0}, {0.0, 1.0}}, SimilarityKind::cosine);
    VectorSet set;
    set.id = 0;
    set.vectors = {{1.0, 0.0}};
    CHECK(encode(set, tied).codes[0] == 0);
  }

  SUBCASE("codes match an exhaustive scan") {
    const VectorSet set = test::random_set(rng, 0, 5, 10);
    const CodeSet cs = encode(set, book);
    for (size_t i = 0; i < set.vectors.size(); ++i) {
      uint32_t best = 0;
      double best_d = 1e300;
      for (uint32_t c = 0; c < book.size(); ++c) {
        const double d = vector_distance(set.vectors[i], book.centroids[c],
                                         book.kind);
        if (d < best_d) {
          best_d = d;
          best = c;
        }
      }
      CHECK(cs.codes[i] == best);
    }
  }
}

TEST_CASE("qemd basics and solver cross-check") {
  Rng rng(15);
  std::vector<Vector> centroids;
  for (int i = 0; i < 6; ++i) {
    centroids.push_back(test::random_unit_vector(rng, 4));
  }
  const Codebook book = build_codebook(centroids, SimilarityKind::cosine);

  SUBCASE("identical unit histograms cost zero") {
    VectorSet a = make_set(0, {centroids[3], centroids[3]});
    VectorSet b = make_set(1, {centroids[3]});
    CHECK(qemd(encode(a, book), encode(b, book), book) ==
          doctest::Approx(0.0).epsilon(1e-12));
  }

  SUBCASE("singleton codes pay the table distance") {
    VectorSet a = make_set(0, {centroids[1]});
    VectorSet b = make_set(1, {centroids[4]});
    CHECK(qemd(encode(a, book), encode(b, book), book) ==
          doctest::Approx(book.pair(1, 4)));
  }

  SUBCASE("centroid-valued sets agree with the exact solver") {
    for (int trial = 0; trial < 25; ++trial) {
      auto pick = [&](uint64_t id) {
        const uint32_t m = 1 + static_cast<uint32_t>(rng.next_below(6));
        VectorSet s;
        s.id = id;
        for (uint32_t i = 0; i < m; ++i) {
          s.vectors.push_back(centroids[rng.next_below(6)]);
        }
        return s;
      };
      const VectorSet a = pick(0), b = pick(1);
      const double quantized = qemd(encode(a, book), encode(b, book), book);
      const double exact = emd(a, b, SimilarityKind::cosine).cost;
      CHECK(std::fabs(quantized - exact) <= 1e-9);
    }
  }
}

TEST_CASE("qch basics") {
  Rng rng(16);
  std::vector<Vector> centroids;
  for (int i = 0; i < 6; ++i) {
    centroids.push_back(test::random_unit_vector(rng, 4));
  }
  const Codebook book = build_codebook(centroids, SimilarityKind::cosine);

  SUBCASE("query codes contained in the document cost zero") {
    const VectorSet q = make_set(0, {centroids[2], centroids[5]});
    const VectorSet p = make_set(1, {centroids[5], centroids[2], centroids[0]});
    CHECK(qch(encode(q, book), encode(p, book), book) ==
          doctest::Approx(0.0).epsilon(1e-12));
  }

  SUBCASE("singletons pay the table distance") {
    const VectorSet q = make_set(0, {centroids[0]});
    const VectorSet p = make_set(1, {centroids[3]});
    CHECK(qch(encode(q, book), encode(p, book), book) ==
          doctest::Approx(book.pair(0, 3)));
  }

  SUBCASE("centroid-valued sets match the raw-vector sum form") {
    for (int trial = 0; trial < 25; ++trial) {
      auto pick = [&](uint64_t id) {
        const uint32_t m = 1 + static_cast<uint32_t>(rng.next_below(6));
        VectorSet s;
        s.id = id;
        for (uint32_t i = 0; i < m; ++i) {
          s.vectors.push_back(centroids[rng.next_below(6)]);
        }
        return s;
      };
      const VectorSet q = pick(0), p = pick(1);
      const double quantized = qch(encode(q, book), encode(p, book), book);
      const double raw = static_cast<double>(q.vectors.size()) *
                         chamfer_distance(q, p, SimilarityKind::cosine);
      CHECK(std::fabs(quantized - raw) <= 1e-9);
    }
  }

  SUBCASE("qch is not symmetric (regression pin)") {
    const VectorSet q = make_set(0, {centroids[1]});
    const VectorSet p = make_set(1, {centroids[1], centroids[4]});
    const CodeSet qc = encode(q, book), pc = encode(p, book);
    CHECK(qch(qc, pc, book) == doctest::Approx(0.0));
    CHECK(qch(pc, qc, book) == doctest::Approx(book.pair(1, 4)));
    CHECK(qch(pc, qc, book) > 0.0);
  }

  SUBCASE("out-of-range codes are rejected") {
    CodeSet bad;
    bad.codes = {99};
    bad.histogram = {{99, 1}};
    CodeSet ok;
    ok.codes = {0};
    ok.histogram = {{0, 1}};
    CHECK_THROWS_AS(qch(bad, ok, book), GemError);
    CHECK_THROWS_AS(qemd(bad, ok, book), GemError);
  }
}

TEST_CASE("dim mismatch raises across the metric surface") {
  const VectorSet a = make_set(0, {{1.0, 0.0}});
  const VectorSet b = make_set(1, {{1.0, 0.0, 0.0}});
  CHECK_THROWS_AS(chamfer_similarity(a, b, SimilarityKind::cosine), GemError);
  CHECK_THROWS_AS(chamfer_distance(a, b, SimilarityKind::l2), GemError);
  CHECK_THROWS_AS(emd(a, b, SimilarityKind::l2), GemError);
}
