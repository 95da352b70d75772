#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <random>

#include "error.hpp"
#include "eval_metrics.hpp"

using namespace sheetrefine;

namespace {

EmbeddingVector vec(std::vector<double> v, std::string id = "v") { return {std::move(id), std::move(v)}; }

}  // namespace

TEST_CASE("cosine_similarity") {
  CHECK(cosine_similarity(vec({3, 4}), vec({3, 4})) == 1.0);
  CHECK(cosine_similarity(vec({1, 0}), vec({0, 1})) == 0.0);
  CHECK(std::abs(cosine_similarity(vec({1, 1}), vec({1, 0})) - 1.0 / std::sqrt(2.0)) <= 1e-15);
  CHECK(std::abs(cosine_similarity(vec({1, 2}), vec({-1, -2})) + 1.0) <= 1e-15);
  CHECK_THROWS_AS(cosine_similarity(vec({1, 2}), vec({1, 2, 3})), Error);
  CHECK_THROWS_AS(cosine_similarity(vec({0, 0}), vec({1, 2})), Error);
}

TEST_CASE("cosine_similarity properties") {
  std::mt19937_64 rng(81);
  std::normal_distribution<double> d;
  std::uniform_real_distribution<double> scale(1e-3, 1e3);
  for (int trial = 0; trial < 500; ++trial) {
    const std::size_t dim = std::uniform_int_distribution<std::size_t>(1, 64)(rng);
    std::vector<double> a(dim), b(dim);
    for (auto& x : a) x = d(rng);
    for (auto& x : b) x = d(rng);
    const double c = cosine_similarity(vec(a), vec(b));
    CHECK(c >= -1.0);
    CHECK(c <= 1.0);
    CHECK(c == cosine_similarity(vec(b), vec(a)));
    const double s = scale(rng);
    std::vector<double> sa = a;
    for (auto& x : sa) x *= s;
    CHECK(std::abs(cosine_similarity(vec(sa), vec(b)) - c) <= 1e-12);
  }
}

TEST_CASE("prompt_similarity") {
  const auto text = vec({0, 1}, "text");
  const std::vector<EmbeddingVector> same{vec({0, 2}), vec({0, 5})};
  CHECK(prompt_similarity(same, text) == 1.0);
  const std::vector<EmbeddingVector> half{vec({1, 0}), vec({0, 3})};
  CHECK(prompt_similarity(half, text) == 0.5);
  CHECK_THROWS_AS(prompt_similarity({}, text), Error);
  const std::vector<EmbeddingVector> bad{vec({1, 0, 0})};
  CHECK_THROWS_AS(prompt_similarity(bad, text), Error);
}

TEST_CASE("identity_consistency") {
  const std::vector<EmbeddingVector> same(4, vec({0.3, -0.2, 0.9}));
  CHECK(std::abs(identity_consistency(same) - 1.0) <= 1e-15);
  const std::vector<EmbeddingVector> mixed{vec({1, 0}), vec({0, 1}), vec({1, 0})};
  CHECK(identity_consistency(mixed) == 1.0 / 3.0);
  const std::vector<EmbeddingVector> one{vec({1, 0})};
  CHECK_THROWS_AS(identity_consistency(one), Error);
  const std::vector<EmbeddingVector> mismatch{vec({1, 0}), vec({1, 0, 0})};
  CHECK_THROWS_AS(identity_consistency(mismatch), Error);
}

TEST_CASE("identity_consistency is permutation-invariant") {
  std::mt19937_64 rng(82);
  std::normal_distribution<double> d;
  for (int trial = 0; trial < 50; ++trial) {
    std::vector<EmbeddingVector> v;
    for (int i = 0; i < 6; ++i) v.push_back(vec({d(rng), d(rng), d(rng), d(rng)}));
    const double base = identity_consistency(v);
    std::shuffle(v.begin(), v.end(), rng);
    CHECK(std::abs(identity_consistency(v) - base) <= 1e-12);
  }
}

TEST_CASE("evaluate reports counts") {
  const std::vector<EmbeddingVector> imgs{vec({1, 0}), vec({0, 1}), vec({1, 0})};
  const auto r = evaluate(imgs, vec({1, 0}));
  CHECK(r.n_images == 3);
  CHECK(r.n_pairs == 3);
  CHECK(r.identity_consistency == 1.0 / 3.0);
  CHECK(r.prompt_similarity == 2.0 / 3.0);
}

TEST_CASE("parse_embeddings_json") {
  const auto v = parse_embeddings_json(R"([{"id":"a","values":[1,2.5]},{"id":"b","values":[0,-1]}])");
  REQUIRE(v.size() == 2);
  CHECK(v[0].id == "a");
  CHECK(v[0].values == std::vector<double>{1.0, 2.5});
  CHECK(parse_embeddings_json(R"({"id":"t","values":[1]})").size() == 1);

  auto parse_error = [](const char* text) {
    try {
      parse_embeddings_json(text);
    } catch (const Error& e) {
      return e.code() == ErrorCode::Parse;
    }
    return false;
  };
  CHECK(parse_error("[{"));
  CHECK(parse_error(R"([{"values":[1]}])"));
  CHECK(parse_error(R"([{"id":"a","values":[]}])"));
  CHECK(parse_error(R"([{"id":"a","values":["x"]}])"));
  CHECK(parse_error("42"));
}
