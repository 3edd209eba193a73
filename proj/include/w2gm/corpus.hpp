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

#pragma once

#include <cstdint>
#include <filesystem>
#include <functional>
#include <iosfwd>
#include <optional>
#include <random>
#include <span>
#include <string>
#include <string_view>
#include <unordered_map>
#include <utility>
#include <vector>

namespace w2gm {

using WordId = std::uint32_t;
using Rng = std::mt19937_64;

/// Token <-> dense id map with raw corpus counts. Ids are assigned by
/// decreasing count, ties broken by token bytes.
class Vocabulary {
 public:
  Vocabulary() = default;

  /// Builds from (token, count) entries. Duplicate tokens throw ConfigError.
  static Vocabulary from_counts(std::vector<std::pair<std::string, std::uint64_t>> entries);
  /// Keeps the given order as the id assignment.
  static Vocabulary from_ordered(std::vector<std::pair<std::string, std::uint64_t>> entries);

  std::size_t size() const noexcept { return tokens_.size(); }
  bool empty() const noexcept { return tokens_.empty(); }
  const std::string& token(WordId id) const { return tokens_.at(id); }
  std::uint64_t count(WordId id) const { return counts_.at(id); }
  std::span<const std::uint64_t> counts() const noexcept { return counts_; }
  /// Sum of the counts of retained tokens.
  std::uint64_t total_tokens() const noexcept { return total_; }
  std::optional<WordId> find(std::string_view token) const;

  /// One `token<TAB>count` line per word, ordered by id.
  void write_tsv(std::ostream& os) const;

  bool operator==(const Vocabulary& other) const {
    return tokens_ == other.tokens_ && counts_ == other.counts_;
  }

 private:
  struct Hash {
    using is_transparent = void;
    std::size_t operator()(std::string_view s) const noexcept {
      return std::hash<std::string_view>{}(s);
    }
  };

  std::vector<std::string> tokens_;
  std::vector<std::uint64_t> counts_;
  std::uint64_t total_ = 0;
  std::unordered_map<std::string, WordId, Hash, std::equal_to<>> index_;
};

/// Calls `fn(tokens)` for every newline-terminated sentence; tokens split on
/// ASCII whitespace. Empty lines are skipped.
void for_each_sentence(std::istream& in,
                       const std::function<void(std::span<const std::string_view>)>& fn);

Vocabulary build_vocab(std::istream& in, std::uint64_t min_count);
/// Throws IoError if the file cannot be read, ConfigError if no token
/// reaches min_count.
Vocabulary build_vocab(const std::filesystem::path& corpus, std::uint64_t min_count);

/// Probability of discarding a token of relative frequency `frequency`:
/// max(0, 1 - sqrt(t / frequency)).
double subsample_discard_prob(double frequency, double t);

/// Per-id keep probability under subsampling threshold t.
std::vector<double> keep_probabilities(const Vocabulary& vocab, double t);

/// Draws ids with probability proportional to count^{3/4} by binary search
/// over the cumulative mass.
class NegativeSampler {
 public:
  explicit NegativeSampler(std::span<const std::uint64_t> counts, double power = 0.75);
  explicit NegativeSampler(const Vocabulary& vocab) : NegativeSampler(vocab.counts()) {}

  WordId sample(Rng& rng) const;
  double probability(WordId id) const;
  std::size_t size() const noexcept { return cumulative_.size(); }

 private:
  std::vector<double> cumulative_;
};

struct TrainingTriple {
  WordId center;
  WordId positive;
  WordId negative;

  bool operator==(const TrainingTriple&) const = default;
};

/// Removes each token independently with probability 1 - keep[id].
void subsample_sentence(std::span<const WordId> sentence, std::span<const double> keep,
                        Rng& rng, std::vector<WordId>& out);

/// Number of (center, context) pairs a sentence of `length` tokens yields
/// with a symmetric window clipped at the sentence bounds.
std::uint64_t window_pair_count(std::size_t length, std::size_t window);

/// Emits one triple per (center, context) pair of an already subsampled
/// sentence, each with a freshly drawn negative. Returns the triple count.
template <typename Fn>
std::uint64_t emit_triples(std::span<const WordId> sentence, std::size_t window,
                           const NegativeSampler& sampler, Rng& rng, Fn&& fn) {
  std::uint64_t n = 0;
  const std::size_t len = sentence.size();
  for (std::size_t i = 0; i < len; ++i) {
    const std::size_t lo = i > window ? i - window : 0;
    const std::size_t hi = std::min(len - 1, i + window);
    for (std::size_t j = lo; j <= hi; ++j) {
      if (j == i) continue;
      fn(TrainingTriple{sentence[i], sentence[j], sampler.sample(rng)});
      ++n;
    }
  }
  return n;
}

/// Streams triples straight from a corpus file. Out-of-vocabulary tokens are
/// dropped before subsampling and windowing.
std::uint64_t stream_triples(const std::filesystem::path& corpus, const Vocabulary& vocab,
                             const NegativeSampler& sampler, std::size_t window, double t,
                             Rng& rng, const std::function<void(const TrainingTriple&)>& fn);

/// A corpus mapped to ids with OOV tokens removed, held in memory so that
/// workers can split it by sentence.
struct EncodedCorpus {
  std::vector<WordId> ids;
  // sentence s spans ids[offsets[s], offsets[s + 1])
  std::vector<std::size_t> offsets{0};

  std::size_t sentence_count() const noexcept { return offsets.size() - 1; }
  std::span<const WordId> sentence(std::size_t s) const {
    return std::span<const WordId>(ids).subspan(offsets[s], offsets[s + 1] - offsets[s]);
  }
};

EncodedCorpus encode_corpus(std::istream& in, const Vocabulary& vocab);
EncodedCorpus encode_corpus(const std::filesystem::path& corpus, const Vocabulary& vocab);

/// Expected number of triples in one pass: each sentence contributes the
/// window pair count of its expected retained length.
std::uint64_t estimate_triples(const EncodedCorpus& corpus, std::span<const double> keep,
                               std::size_t window);

}  // namespace w2gm
