// Copyright 2026 The w2gm Authors. All Rights Reserved.
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

#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <map>
#include <sstream>

#include "oracles.hpp"
#include "synthetic.hpp"
#include "w2gm/corpus.hpp"
#include "w2gm/errors.hpp"

using namespace w2gm;

namespace {

Vocabulary vocab_of(const std::string& text, std::uint64_t min_count) {
  std::istringstream in(text);
  return build_vocab(in, min_count);
}

}  // namespace

TEST_CASE("build_vocab applies min_count") {
  const Vocabulary v2 = vocab_of("a a b", 2);
  REQUIRE(v2.size() == 1);
  CHECK(v2.token(0) == "a");
  CHECK(v2.count(0) == 2);
  CHECK_FALSE(v2.find("b").has_value());

  const Vocabulary v1 = vocab_of("a a b", 1);
  REQUIRE(v1.size() == 2);
  CHECK(v1.count(*v1.find("a")) == 2);
  CHECK(v1.count(*v1.find("b")) == 1);
  CHECK(v1.total_tokens() == 3);
}

TEST_CASE("build_vocab errors") {
  CHECK_THROWS_AS(vocab_of("a b c", 2), ConfigError);
  CHECK_THROWS_AS(vocab_of("", 1), ConfigError);
  CHECK_THROWS_AS(build_vocab(std::filesystem::path("/nonexistent/corpus.txt"), 1), IoError);
}

TEST_CASE("build_vocab counts match an independent counter") {
  std::mt19937_64 rng(7);
  std::uniform_int_distribution<int> word(0, 40);
  std::ostringstream text;
  for (int i = 0; i < 1000; ++i) {
    text << "w" << word(rng) << ((i % 13 == 12) ? "\n" : (i % 5 ? " " : "\t"));
  }
  const auto expected = oracle::count_tokens(text.str());
  const Vocabulary v = vocab_of(text.str(), 1);
  REQUIRE(v.size() == expected.size());
  for (const auto& [tok, n] : expected) {
    auto id = v.find(tok);
    REQUIRE(id.has_value());
    CHECK(v.count(*id) == n);
  }
  CHECK(v.total_tokens() == 1000);
}

TEST_CASE("vocabulary ids are dense and invertible") {
  const Vocabulary v = vocab_of("x y y z z z\nz y\n", 1);
  for (WordId i = 0; i < v.size(); ++i) CHECK(*v.find(v.token(i)) == i);
  // ordered by count
  CHECK(v.token(0) == "z");
  CHECK(v.token(1) == "y");
  CHECK(v.token(2) == "x");
  std::ostringstream tsv;
  v.write_tsv(tsv);
  CHECK(tsv.str() == "z\t4\ny\t3\nx\t1\n");
}

TEST_CASE("tokens keep case and split on ASCII whitespace only") {
  const Vocabulary v = vocab_of("Apple apple\tAPPLE\r\n", 1);
  CHECK(v.size() == 3);
}

TEST_CASE("subsample_discard_prob") {
  const double t = 1e-5;
  CHECK(subsample_discard_prob(t, t) == doctest::Approx(0.0));
  CHECK(subsample_discard_prob(4 * t, t) == doctest::Approx(0.5));
  CHECK(subsample_discard_prob(1e-3, 1e-5) == doctest::Approx(0.9));
  CHECK(subsample_discard_prob(1e-7, t) == 0.0);
  CHECK_THROWS_AS(subsample_discard_prob(0.0, t), DomainError);
  CHECK_THROWS_AS(subsample_discard_prob(-1.0, t), DomainError);
}

TEST_CASE("subsampling discard rate matches 1 - sqrt(t/f)") {
  // one word with frequency f among filler
  const double f = 0.25, t = 0.01;
  const double keep = 1.0 - subsample_discard_prob(f, t);  // 0.2
  const std::vector<double> keep_table{keep};
  Rng rng(3);
  const std::size_t n = 200000;
  std::vector<WordId> sentence(n, 0), out;
  subsample_sentence(sentence, keep_table, rng, out);
  const double rate = 1.0 - static_cast<double>(out.size()) / n;
  const double p = 1 - keep;
  const double sigma = std::sqrt(p * (1 - p) / n);
  CHECK(std::abs(rate - p) < 3 * sigma);
}

TEST_CASE("negative sampler: trivial distributions") {
  Rng rng(1);
  NegativeSampler single(std::vector<std::uint64_t>{5});
  for (int i = 0; i < 100; ++i) CHECK(single.sample(rng) == 0);

  NegativeSampler two(std::vector<std::uint64_t>{16, 1});
  CHECK(two.probability(0) == doctest::Approx(8.0 / 9.0).epsilon(1e-12));
  CHECK(two.probability(1) == doctest::Approx(1.0 / 9.0).epsilon(1e-12));
}

TEST_CASE("negative sampler: empirical frequencies within 3 sigma") {
  const std::vector<std::uint64_t> counts{100, 50, 10};
  double z = 0;
  for (auto c : counts) z += std::pow(static_cast<double>(c), 0.75);
  NegativeSampler s(counts);
  Rng rng(11);
  const int n = 1000000;
  std::vector<int> hits(3, 0);
  for (int i = 0; i < n; ++i) ++hits[s.sample(rng)];
  for (std::size_t i = 0; i < 3; ++i) {
    const double p = std::pow(static_cast<double>(counts[i]), 0.75) / z;
    const double sigma = std::sqrt(n * p * (1 - p));
    CHECK(std::abs(hits[i] - n * p) < 3 * sigma);
  }
}

TEST_CASE("emit_triples over one sentence") {
  NegativeSampler s(std::vector<std::uint64_t>{1, 1, 1});
  Rng rng(0);
  std::vector<std::pair<WordId, WordId>> pairs;
  const std::vector<WordId> sentence{0, 1, 2};
  emit_triples(sentence, 1, s, rng, [&](const TrainingTriple& t) {
    CHECK(t.negative < 3);
    pairs.emplace_back(t.center, t.positive);
  });
  const std::vector<std::pair<WordId, WordId>> expected{{0, 1}, {1, 0}, {1, 2}, {2, 1}};
  CHECK(pairs == expected);

  const std::vector<WordId> one{2};
  CHECK(emit_triples(one, 5, s, rng, [](const TrainingTriple&) { FAIL("no triple expected"); }) ==
        0);
}

TEST_CASE("stream_triples pair count matches a naive enumerator") {
  std::mt19937_64 gen(5);
  std::uniform_int_distribution<int> len(1, 15), word(0, 30);
  std::ostringstream text;
  std::uint64_t expected = 0;
  const std::size_t window = 3;
  for (int s = 0; s < 10000; ++s) {
    const int n = len(gen);
    for (int k = 0; k < n; ++k) text << (k ? " " : "") << "t" << word(gen);
    text << '\n';
    expected += oracle::window_pairs(static_cast<std::size_t>(n), window).size();
  }
  const auto path = synthetic::write_temp("pairs_corpus.txt", text.str());
  const Vocabulary v = build_vocab(path, 1);
  NegativeSampler sampler(v);
  Rng rng(9);
  // t >= 1 disables subsampling
  std::uint64_t seen = 0;
  const auto n = stream_triples(path, v, sampler, window, 1.0, rng, [&](const TrainingTriple& t) {
    CHECK(t.center < v.size());
    CHECK(t.positive < v.size());
    CHECK(t.negative < v.size());
    ++seen;
  });
  CHECK(n == expected);
  CHECK(seen == expected);
  std::filesystem::remove(path);
}

TEST_CASE("stream_triples is deterministic without subsampling") {
  const auto path = synthetic::write_temp("det_corpus.txt", "a b c d\nb c\nd a b\n");
  const Vocabulary v = build_vocab(path, 1);
  NegativeSampler sampler(v);
  auto collect = [&] {
    Rng rng(42);
    std::vector<TrainingTriple> out;
    stream_triples(path, v, sampler, 2, 1.0, rng, [&](const TrainingTriple& t) { out.push_back(t); });
    return out;
  };
  CHECK(collect() == collect());
  std::filesystem::remove(path);
}

TEST_CASE("stream_triples skips OOV tokens and removes them before windowing") {
  const auto path = synthetic::write_temp("oov_corpus.txt", "a rare b\n");
  const Vocabulary v = [&] {
    std::istringstream in("a b a b");
    return build_vocab(in, 2);
  }();
  NegativeSampler sampler(v);
  Rng rng(1);
  std::vector<std::pair<WordId, WordId>> pairs;
  stream_triples(path, v, sampler, 1, 1.0, rng,
                 [&](const TrainingTriple& t) { pairs.emplace_back(t.center, t.positive); });
  // with "rare" gone, a and b are adjacent
  CHECK(pairs.size() == 2);
  std::filesystem::remove(path);
}

TEST_CASE("encode_corpus and estimate_triples") {
  std::istringstream text("a b c\n\nz z\nc a\n");
  const Vocabulary v = Vocabulary::from_counts({{"a", 2}, {"b", 1}, {"c", 2}});
  const EncodedCorpus enc = encode_corpus(text, v);
  CHECK(enc.sentence_count() == 2);  // "z z" is entirely OOV
  CHECK(enc.sentence(0).size() == 3);
  CHECK(enc.sentence(1).size() == 2);
  const std::vector<double> keep(3, 1.0);
  CHECK(estimate_triples(enc, keep, 1) == window_pair_count(3, 1) + window_pair_count(2, 1));
  CHECK(window_pair_count(3, 1) == 4);
  CHECK(window_pair_count(0, 3) == 0);
}
