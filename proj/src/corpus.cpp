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

#include "w2gm/corpus.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <istream>
#include <ostream>

#include "w2gm/errors.hpp"

namespace w2gm {

namespace {

bool is_space(char c) {
  return c == ' ' || c == '\t' || c == '\r' || c == '\v' || c == '\f';
}

std::ifstream open_corpus(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open corpus '" + path.string() + "'");
  return in;
}

}  // namespace

Vocabulary Vocabulary::from_counts(std::vector<std::pair<std::string, std::uint64_t>> entries) {
  std::sort(entries.begin(), entries.end(), [](const auto& a, const auto& b) {
    return a.second != b.second ? a.second > b.second : a.first < b.first;
  });
  return from_ordered(std::move(entries));
}

Vocabulary Vocabulary::from_ordered(std::vector<std::pair<std::string, std::uint64_t>> entries) {
  Vocabulary v;
  v.tokens_.reserve(entries.size());
  v.counts_.reserve(entries.size());
  for (auto& [tok, n] : entries) {
    const auto id = static_cast<WordId>(v.tokens_.size());
    if (!v.index_.emplace(tok, id).second) {
      throw ConfigError("duplicate token '" + tok + "' in vocabulary");
    }
    v.total_ += n;
    v.counts_.push_back(n);
    v.tokens_.push_back(std::move(tok));
  }
  return v;
}

std::optional<WordId> Vocabulary::find(std::string_view token) const {
  auto it = index_.find(token);
  if (it == index_.end()) return std::nullopt;
  return it->second;
}

void Vocabulary::write_tsv(std::ostream& os) const {
  for (std::size_t i = 0; i < tokens_.size(); ++i) {
    os << tokens_[i] << '\t' << counts_[i] << '\n';
  }
}

void for_each_sentence(std::istream& in,
                       const std::function<void(std::span<const std::string_view>)>& fn) {
  std::string line;
  std::vector<std::string_view> tokens;
  while (std::getline(in, line)) {
    tokens.clear();
    std::size_t i = 0;
    while (i < line.size()) {
      while (i < line.size() && is_space(line[i])) ++i;
      std::size_t j = i;
      while (j < line.size() && !is_space(line[j])) ++j;
      if (j > i) tokens.emplace_back(line.data() + i, j - i);
      i = j;
    }
    if (!tokens.empty()) fn(tokens);
  }
}

Vocabulary build_vocab(std::istream& in, std::uint64_t min_count) {
  std::unordered_map<std::string, std::uint64_t> counts;
  for_each_sentence(in, [&](std::span<const std::string_view> sentence) {
    for (auto tok : sentence) ++counts[std::string(tok)];
  });
  if (in.bad()) throw IoError("read error while counting corpus tokens");

  std::vector<std::pair<std::string, std::uint64_t>> kept;
  for (auto& [tok, n] : counts) {
    if (n >= min_count) kept.emplace_back(tok, n);
  }
  if (kept.empty()) {
    throw ConfigError("empty vocabulary: no token occurs at least " +
                      std::to_string(min_count) + " times");
  }
  return Vocabulary::from_counts(std::move(kept));
}

Vocabulary build_vocab(const std::filesystem::path& corpus, std::uint64_t min_count) {
  auto in = open_corpus(corpus);
  return build_vocab(in, min_count);
}

double subsample_discard_prob(double frequency, double t) {
  if (!(frequency > 0)) throw DomainError("subsampling frequency must be > 0");
  if (!(t > 0)) throw DomainError("subsampling threshold must be > 0");
  return std::max(0.0, 1.0 - std::sqrt(t / frequency));
}

std::vector<double> keep_probabilities(const Vocabulary& vocab, double t) {
  std::vector<double> keep(vocab.size());
  const auto total = static_cast<double>(vocab.total_tokens());
  for (WordId i = 0; i < vocab.size(); ++i) {
    keep[i] = 1.0 - subsample_discard_prob(static_cast<double>(vocab.count(i)) / total, t);
  }
  return keep;
}

NegativeSampler::NegativeSampler(std::span<const std::uint64_t> counts, double power) {
  if (counts.empty()) throw ConfigError("negative sampler needs a nonempty vocabulary");
  cumulative_.reserve(counts.size());
  double acc = 0;
  for (auto c : counts) {
    acc += std::pow(static_cast<double>(c), power);
    cumulative_.push_back(acc);
  }
}

WordId NegativeSampler::sample(Rng& rng) const {
  std::uniform_real_distribution<double> u(0.0, cumulative_.back());
  const double x = u(rng);
  auto it = std::upper_bound(cumulative_.begin(), cumulative_.end(), x);
  auto idx = static_cast<std::size_t>(it - cumulative_.begin());
  return static_cast<WordId>(std::min(idx, cumulative_.size() - 1));
}

double NegativeSampler::probability(WordId id) const {
  const double prev = id == 0 ? 0.0 : cumulative_.at(id - 1);
  return (cumulative_.at(id) - prev) / cumulative_.back();
}

void subsample_sentence(std::span<const WordId> sentence, std::span<const double> keep,
                        Rng& rng, std::vector<WordId>& out) {
  out.clear();
  std::uniform_real_distribution<double> u(0.0, 1.0);
  for (WordId id : sentence) {
    const double p = keep[id];
    if (p >= 1.0 || u(rng) < p) out.push_back(id);
  }
}

std::uint64_t window_pair_count(std::size_t length, std::size_t window) {
  std::uint64_t n = 0;
  for (std::size_t i = 0; i < length; ++i) {
    n += std::min(i, window) + std::min(length - 1 - i, window);
  }
  return n;
}

std::uint64_t stream_triples(const std::filesystem::path& corpus, const Vocabulary& vocab,
                             const NegativeSampler& sampler, std::size_t window, double t,
                             Rng& rng, const std::function<void(const TrainingTriple&)>& fn) {
  auto in = open_corpus(corpus);
  const auto keep = keep_probabilities(vocab, t);
  std::vector<WordId> ids;
  std::vector<WordId> kept;
  std::uint64_t n = 0;
  for_each_sentence(in, [&](std::span<const std::string_view> sentence) {
    ids.clear();
    for (auto tok : sentence) {
      if (auto id = vocab.find(tok)) ids.push_back(*id);
    }
    subsample_sentence(ids, keep, rng, kept);
    n += emit_triples(kept, window, sampler, rng, fn);
  });
  return n;
}

EncodedCorpus encode_corpus(std::istream& in, const Vocabulary& vocab) {
  EncodedCorpus out;
  for_each_sentence(in, [&](std::span<const std::string_view> sentence) {
    for (auto tok : sentence) {
      if (auto id = vocab.find(tok)) out.ids.push_back(*id);
    }
    if (out.ids.size() > out.offsets.back()) out.offsets.push_back(out.ids.size());
  });
  if (in.bad()) throw IoError("read error while encoding corpus");
  return out;
}

EncodedCorpus encode_corpus(const std::filesystem::path& corpus, const Vocabulary& vocab) {
  auto in = open_corpus(corpus);
  return encode_corpus(in, vocab);
}

std::uint64_t estimate_triples(const EncodedCorpus& corpus, std::span<const double> keep,
                               std::size_t window) {
  std::uint64_t total = 0;
  for (std::size_t s = 0; s < corpus.sentence_count(); ++s) {
    double expected = 0;
    for (WordId id : corpus.sentence(s)) expected += keep[id];
    total += window_pair_count(static_cast<std::size_t>(std::llround(expected)), window);
  }
  return total;
}

}  // namespace w2gm
