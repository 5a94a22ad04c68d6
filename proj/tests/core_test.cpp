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

#include <cmath>

#include "doctest.h"
#include "gem/types.hpp"
#include "support.hpp"

using namespace gem;

TEST_CASE("l2 normalization is the identity") {
  Rng rng(1);
  const Corpus corpus = test::random_corpus(rng, 5, 4, 1, 5);
  const Corpus out = normalize_corpus(corpus, SimilarityKind::l2);
  REQUIRE(out.sets.size() == corpus.sets.size());
  for (size_t i = 0; i < out.sets.size(); ++i) {
    CHECK(out.sets[i].vectors == corpus.sets[i].vectors);
  }
}

TEST_CASE("cosine normalization rescales to unit norm") {
  Corpus corpus;
  corpus.dim = 2;
  corpus.sets.push_back({0, {{3.0, 4.0}}});
  const Corpus out = normalize_corpus(corpus, SimilarityKind::cosine);
  CHECK(out.sets[0].vectors[0][0] == doctest::Approx(0.6).epsilon(1e-7));
  CHECK(out.sets[0].vectors[0][1] == doctest::Approx(0.8).epsilon(1e-7));
}

TEST_CASE("cosine normalization rejects zero vectors") {
  Corpus corpus;
  corpus.dim = 3;
  corpus.sets.push_back({0, {{0.0, 0.0, 0.0}}});
  CHECK_THROWS_AS(normalize_corpus(corpus, SimilarityKind::cosine), GemError);
  try {
    normalize_corpus(corpus, SimilarityKind::cosine);
  } catch (const GemError& e) {
    CHECK(e.code() == ErrorCode::zero_vector);
  }
}

TEST_CASE("cosine normalization leaves unit norms within 1e-6 and keeps ids") {
  Rng rng(7);
  Corpus corpus;
  corpus.dim = 16;
  for (size_t i = 0; i < 40; ++i) {
    VectorSet set;
    set.id = i;
    for (int j = 0; j < 3; ++j) {
      Vector v(corpus.dim);
      for (double& x : v) x = 3.0 * test::gaussian(rng) + 0.25;
      set.vectors.push_back(v);
    }
    corpus.sets.push_back(set);
  }
  const Corpus out = normalize_corpus(corpus, SimilarityKind::cosine);
  for (size_t i = 0; i < out.sets.size(); ++i) {
    CHECK(out.sets[i].id == i);
    for (const Vector& v : out.sets[i].vectors) {
      double sq = 0.0;
      for (double x : v) sq += x * x;
      CHECK(std::fabs(std::sqrt(sq) - 1.0) <= 1e-6);
    }
  }
}

TEST_CASE("normalization is idempotent byte-for-byte") {
  Rng rng(9);
  const Corpus once =
      normalize_corpus(test::random_corpus(rng, 10, 8, 2, 6),
                       SimilarityKind::cosine);
  const Corpus twice = normalize_corpus(once, SimilarityKind::cosine);
  for (size_t i = 0; i < once.sets.size(); ++i) {
    CHECK(once.sets[i].vectors == twice.sets[i].vectors);
  }
}

TEST_CASE("identical seeds yield identical draw sequences") {
  Rng a(123456), b(123456);
  for (int i = 0; i < 10000; ++i) {
    REQUIRE(a.next_u64() == b.next_u64());
  }
}

TEST_CASE("next_below stays in range and covers values") {
  Rng rng(3);
  std::vector<int> seen(7, 0);
  for (int i = 0; i < 1000; ++i) {
    const uint64_t x = rng.next_below(7);
    REQUIRE(x < 7);
    seen[x]++;
  }
  for (int count : seen) CHECK(count > 0);
}

TEST_CASE("corpus validation rejects sparse ids and empty sets") {
  Corpus corpus;
  corpus.dim = 2;
  corpus.sets.push_back({1, {{1.0, 0.0}}});
  CHECK_THROWS_AS(validate_corpus(corpus), GemError);

  Corpus empty_set;
  empty_set.dim = 2;
  empty_set.sets.push_back({0, {}});
  CHECK_THROWS_AS(validate_corpus(empty_set), GemError);

  Corpus bad_dim;
  bad_dim.dim = 2;
  bad_dim.sets.push_back({0, {{1.0, 0.0, 0.0}}});
  CHECK_THROWS_AS(validate_corpus(bad_dim), GemError);
}
