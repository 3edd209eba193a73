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

#include <bit>
#include <cmath>
#include <cstring>
#include <sstream>

#include "w2gm/errors.hpp"
#include "w2gm/model.hpp"

using namespace w2gm;

namespace {

Vocabulary small_vocab(std::size_t n) {
  std::vector<std::pair<std::string, std::uint64_t>> entries;
  for (std::size_t i = 0; i < n; ++i) entries.emplace_back("tok" + std::to_string(i), 100 - i);
  return Vocabulary::from_counts(std::move(entries));
}

TrainConfig small_config(CovarianceKind kind = CovarianceKind::kSpherical) {
  TrainConfig c;
  c.dim = 5;
  c.components = 3;
  c.covariance = kind;
  return c;
}

std::string serialize(const ParameterStore& s, const Vocabulary& v, const TrainConfig& c,
                      bool acc = false) {
  std::ostringstream out(std::ios::binary);
  save_model(out, s, v, c, acc);
  return out.str();
}

ModelFile deserialize(const std::string& bytes) {
  std::istringstream in(bytes, std::ios::binary);
  return load_model(in);
}

void put_u32(std::string& s, std::uint32_t v) {
  for (int i = 0; i < 4; ++i) s.push_back(static_cast<char>(v >> (8 * i)));
}
void put_u64(std::string& s, std::uint64_t v) {
  for (int i = 0; i < 8; ++i) s.push_back(static_cast<char>(v >> (8 * i)));
}
void put_f32(std::string& s, float v) { put_u32(s, std::bit_cast<std::uint32_t>(v)); }

std::uint64_t format_error_offset(const std::string& bytes) {
  try {
    deserialize(bytes);
  } catch (const FormatError& e) {
    return e.offset();
  }
  FAIL("expected FormatError");
  return 0;
}

}  // namespace

TEST_CASE("softmax sums to one for extreme scores") {
  std::mt19937_64 rng(1);
  std::uniform_real_distribution<double> u(-50, 50);
  for (int trial = 0; trial < 1000; ++trial) {
    std::vector<double> s(1 + trial % 6);
    for (auto& x : s) x = u(rng);
    const auto p = softmax(s);
    double sum = 0;
    for (double x : p) {
      CHECK(x >= 0);
      CHECK(x <= 1);
      sum += x;
    }
    CHECK(std::abs(sum - 1.0) < 1e-12);
  }
  CHECK(softmax(std::vector<double>{0.0, 0.0}) == std::vector<double>{0.5, 0.5});
}

TEST_CASE("init_store: weights, variances and mean range") {
  TrainConfig c;
  c.dim = 50;
  c.components = 2;
  Rng rng(5);
  const ParameterStore s = init_store(10000, c, rng);
  const double a = std::sqrt(3.0 / 50.0);
  CHECK(a == doctest::Approx(0.2449).epsilon(1e-3));

  double sum = 0, sum_sq = 0;
  std::size_t n = 0;
  for (Bank b : {Bank::kInput, Bank::kOutput}) {
    for (WordId w = 0; w < s.vocab_size(); ++w) {
      const WordMixture m = s.mixture(b, w);
      const auto p = m.weights();
      CHECK(p[0] == 0.5);
      CHECK(p[1] == 0.5);
      for (std::size_t i = 0; i < 2; ++i) {
        // exact up to the f32 rounding of the stored log-variance
        CHECK(std::abs(m.variance(i)[0] - 0.05) < 0.05 * 1e-7);
        for (double x : m.mean(i)) {
          CHECK(std::abs(x) <= a);
          sum += x;
          sum_sq += x * x;
          ++n;
        }
      }
    }
    for (float acc : s.accumulators(b)) CHECK(acc == 0.0f);
  }
  REQUIRE(n == 2000000);
  const double mean = sum / n;
  const double var = sum_sq / n - mean * mean;
  // variance of Uniform[-a, a] is a^2 / 3 = 1/D
  CHECK(var == doctest::Approx(1.0 / 50).epsilon(5e-3));
  CHECK(std::abs(mean) < 1e-3);
}

TEST_CASE("init_store is reproducible for a fixed seed") {
  const TrainConfig c = small_config(CovarianceKind::kDiagonal);
  Rng a(99), b(99), other(100);
  const ParameterStore sa = init_store(20, c, a);
  CHECK(sa == init_store(20, c, b));
  CHECK_FALSE(sa == init_store(20, c, other));
}

TEST_CASE("save/load round trip is bit-exact") {
  for (auto kind : {CovarianceKind::kSpherical, CovarianceKind::kDiagonal}) {
    TrainConfig c = small_config(kind);
    c.epsilon = 3e-4;
    c.seed = 12345;
    const Vocabulary v = small_vocab(7);
    Rng rng(3);
    ParameterStore s = init_store(v.size(), c, rng);
    // nonuniform scores and accumulators
    std::uniform_real_distribution<float> u(-3, 3);
    for (Bank b : {Bank::kInput, Bank::kOutput}) {
      for (WordId w = 0; w < v.size(); ++w) {
        auto p = s.params(b, w);
        for (std::size_t i = 0; i < c.components; ++i) p[s.shape().score_offset(i)] = u(rng);
      }
      for (auto& x : s.accumulators(b)) x = std::abs(u(rng));
    }

    const ModelFile plain = deserialize(serialize(s, v, c));
    CHECK(plain.vocab == v);
    CHECK(plain.store.bank(Bank::kInput).size() == s.bank(Bank::kInput).size());
    CHECK(std::equal(s.bank(Bank::kInput).begin(), s.bank(Bank::kInput).end(),
                     plain.store.bank(Bank::kInput).begin()));
    CHECK(std::equal(s.bank(Bank::kOutput).begin(), s.bank(Bank::kOutput).end(),
                     plain.store.bank(Bank::kOutput).begin()));
    CHECK_FALSE(plain.has_accumulators);
    CHECK(plain.config.to_key_values() == c.to_key_values());

    const ModelFile full = deserialize(serialize(s, v, c, true));
    CHECK(full.has_accumulators);
    CHECK(full.store == s);
  }
}

TEST_CASE("hand-written model file loads as written") {
  // V=2, D=2, K=1, spherical; no optional sections.
  std::string f = "W2GM";
  put_u32(f, 1);
  put_u32(f, 2);
  put_u32(f, 2);
  put_u32(f, 1);
  put_u32(f, 0);
  for (auto [tok, n] : {std::pair<std::string, std::uint64_t>{"cat", 9}, {"dog", 4}}) {
    put_u32(f, static_cast<std::uint32_t>(tok.size()));
    f += tok;
    put_u64(f, n);
  }
  const float in_means[2][2] = {{0.5f, -1.25f}, {2.0f, 0.125f}};
  const float out_means[2][2] = {{-0.5f, 1.0f}, {0.0f, 3.0f}};
  for (const auto* bank : {in_means, out_means}) {
    for (int w = 0; w < 2; ++w) {
      put_f32(f, 1.0f);
      put_f32(f, bank[w][0]);
      put_f32(f, bank[w][1]);
      put_f32(f, std::log(0.25f));
    }
  }

  const ModelFile m = deserialize(f);
  REQUIRE(m.vocab.size() == 2);
  CHECK(m.vocab.token(0) == "cat");
  CHECK(m.vocab.count(1) == 4);
  CHECK(m.store.shape() == MixtureShape{2, 1, CovarianceKind::kSpherical});
  for (WordId w = 0; w < 2; ++w) {
    const WordMixture in = m.store.mixture(Bank::kInput, w);
    const WordMixture out = m.store.mixture(Bank::kOutput, w);
    CHECK(in.mean(0)[0] == in_means[w][0]);
    CHECK(in.mean(0)[1] == in_means[w][1]);
    CHECK(out.mean(0)[0] == out_means[w][0]);
    CHECK(out.mean(0)[1] == out_means[w][1]);
    CHECK(in.weights()[0] == 1.0);
    CHECK(in.variance(0)[0] == doctest::Approx(0.25));
  }
}

TEST_CASE("corrupted files are rejected with positioned errors") {
  const TrainConfig c = small_config();
  const Vocabulary v = small_vocab(10);
  Rng rng(1);
  const ParameterStore s = init_store(v.size(), c, rng);
  const std::string good = serialize(s, v, c);

  SUBCASE("bad magic") {
    std::string b = good;
    b[0] = 'X';
    CHECK(format_error_offset(b) == 0);
  }
  SUBCASE("unsupported version") {
    std::string b = good;
    b[4] = 9;
    CHECK(format_error_offset(b) == 4);
  }
  SUBCASE("zero dimension") {
    std::string b = good;
    b[12] = b[13] = b[14] = b[15] = 0;
    CHECK(format_error_offset(b) == 12);
  }
  SUBCASE("unknown covariance kind") {
    std::string b = good;
    b[20] = 7;
    CHECK(format_error_offset(b) == 20);
  }
  SUBCASE("header says 10 words but only 9 records follow") {
    // Keep the header and first 9 vocabulary records only.
    std::size_t off = 24;
    for (int i = 0; i < 9; ++i) {
      std::uint32_t len = 0;
      std::memcpy(&len, good.data() + off, 4);
      off += 4 + len + 8;
    }
    const std::string b = good.substr(0, off);
    try {
      deserialize(b);
      FAIL("expected FormatError");
    } catch (const FormatError& e) {
      CHECK(e.offset() == off);
      CHECK(std::string(e.what()).find("truncated") != std::string::npos);
      CHECK(std::string(e.what()).find(std::to_string(off)) != std::string::npos);
    }
  }
  SUBCASE("truncated parameter block") {
    const std::string b = good.substr(0, good.size() / 2);
    CHECK_THROWS_AS(deserialize(b), FormatError);
  }
  SUBCASE("section with wrong size") {
    std::string b = good;
    b += "SCOR";
    put_u64(b, 12);
    b += std::string(12, '\0');
    CHECK(format_error_offset(b) == good.size() + 4);
  }
  SUBCASE("unknown section tag") {
    std::string b = good + "ZZZZ";
    put_u64(b, 0);
    CHECK(format_error_offset(b) == good.size());
  }
}

TEST_CASE("load_model on a missing path is an IoError") {
  CHECK_THROWS_AS(load_model(std::filesystem::path("/nonexistent/m.bin")), IoError);
}

TEST_CASE("dump prints one line per component") {
  TrainConfig c = small_config();
  c.dim = 2;
  c.components = 2;
  const Vocabulary v = small_vocab(2);
  ParameterStore s(v.size(), shape_of(c));
  WordMixture m(s.shape());
  m.mean(0)[0] = 1;
  m.mean(1)[1] = -2;
  m.log_var(0)[0] = 0;
  m.log_var(1)[0] = std::log(0.5);
  s.set_mixture(Bank::kInput, 1, m);
  std::ostringstream out;
  dump_model(out, s, v, Bank::kInput);
  const std::string text = out.str();
  CHECK(std::count(text.begin(), text.end(), '\n') == 4);
  CHECK(text.find("tok1:0  0.5  1 0  1\n") != std::string::npos);
  CHECK(text.find("tok1:1  0.5  0 -2  0.5\n") != std::string::npos);
}
