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

#include "w2gm/eval.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <istream>
#include <limits>
#include <numeric>

#include "w2gm/errors.hpp"

namespace w2gm {

namespace {

std::vector<std::string_view> split_fields(std::string_view line) {
  std::vector<std::string_view> out;
  const char* seps = line.find('\t') != std::string_view::npos ? "\t" : " \t";
  std::size_t i = 0;
  while (i <= line.size()) {
    const std::size_t j = line.find_first_of(seps, i);
    const std::size_t end = j == std::string_view::npos ? line.size() : j;
    if (end > i) out.push_back(line.substr(i, end - i));
    if (j == std::string_view::npos) break;
    i = j + 1;
  }
  return out;
}

std::optional<double> parse_double(std::string_view s) {
  double v = 0;
  auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (ec != std::errc() || ptr != s.data() + s.size() || !std::isfinite(v)) return std::nullopt;
  return v;
}

std::vector<EvalPair> read_pairs(std::istream& in, bool binary) {
  std::vector<EvalPair> out;
  std::string line;
  std::size_t lineno = 0;
  bool first = true;
  while (std::getline(in, line)) {
    ++lineno;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    const auto fields = split_fields(line);
    if (fields.empty()) continue;
    const bool is_first = first;
    first = false;
    if (fields.size() < 3) {
      throw ConfigError("dataset line " + std::to_string(lineno) + ": expected 3 fields");
    }
    const auto gold = parse_double(fields[2]);
    if (!gold) {
      if (is_first) continue;  // header
      throw ConfigError("dataset line " + std::to_string(lineno) + ": non-numeric score '" +
                        std::string(fields[2]) + "'");
    }
    if (binary && *gold != 0.0 && *gold != 1.0) {
      throw ConfigError("dataset line " + std::to_string(lineno) + ": label must be 0 or 1");
    }
    out.push_back({std::string(fields[0]), std::string(fields[1]), *gold});
  }
  return out;
}

std::ifstream open_dataset(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open dataset '" + path.string() + "'");
  return in;
}

struct ResolvedPair {
  WordId a;
  WordId b;
  double gold;
};

std::vector<ResolvedPair> resolve(const Vocabulary& vocab, std::span<const EvalPair> pairs,
                                  std::size_t& dropped) {
  std::vector<ResolvedPair> out;
  dropped = 0;
  for (const auto& p : pairs) {
    auto a = vocab.find(p.word1);
    auto b = vocab.find(p.word2);
    if (a && b) {
      out.push_back({*a, *b, p.gold});
    } else {
      ++dropped;
    }
  }
  return out;
}

bool neighbor_before(const Neighbor& a, const Neighbor& b) {
  if (a.score != b.score) return a.score > b.score;
  if (a.word != b.word) return a.word < b.word;
  return a.component < b.component;
}

}  // namespace

std::vector<EvalPair> read_similarity_dataset(std::istream& in) { return read_pairs(in, false); }

std::vector<EvalPair> read_similarity_dataset(const std::filesystem::path& path) {
  auto in = open_dataset(path);
  return read_pairs(in, false);
}

std::vector<EvalPair> read_entailment_dataset(std::istream& in) { return read_pairs(in, true); }

std::vector<EvalPair> read_entailment_dataset(const std::filesystem::path& path) {
  auto in = open_dataset(path);
  return read_pairs(in, true);
}

ScoredPairs score_pairs(const ParameterStore& store, const Vocabulary& vocab,
                        std::span<const EvalPair> pairs, SimilarityMeasure m, double epsilon) {
  ScoredPairs out;
  const auto resolved = resolve(vocab, pairs, out.dropped);
  const auto n = static_cast<std::ptrdiff_t>(resolved.size());
  out.scores.resize(resolved.size());
  out.gold.resize(resolved.size());
#pragma omp parallel for schedule(static)
  for (std::ptrdiff_t i = 0; i < n; ++i) {
    const auto& p = resolved[static_cast<std::size_t>(i)];
    out.scores[i] = similarity(m, store.mixture(Bank::kInput, p.a),
                               store.mixture(Bank::kInput, p.b), epsilon);
    out.gold[i] = p.gold;
  }
  return out;
}

ScoredPairs score_pairs_serial(const ParameterStore& store, const Vocabulary& vocab,
                               std::span<const EvalPair> pairs, SimilarityMeasure m,
                               double epsilon) {
  ScoredPairs out;
  for (const auto& p : resolve(vocab, pairs, out.dropped)) {
    out.scores.push_back(similarity(m, store.mixture(Bank::kInput, p.a),
                                    store.mixture(Bank::kInput, p.b), epsilon));
    out.gold.push_back(p.gold);
  }
  return out;
}

SimilarityReport evaluate_similarity(const ParameterStore& store, const Vocabulary& vocab,
                                     std::span<const EvalPair> pairs, SimilarityMeasure m,
                                     double epsilon) {
  const ScoredPairs scored = score_pairs(store, vocab, pairs, m, epsilon);
  if (scored.scores.size() < 2) {
    throw ConfigError("only " + std::to_string(scored.scores.size()) + " in-vocabulary pairs (" +
                      std::to_string(scored.dropped) + " dropped); need at least 2");
  }
  SimilarityReport r;
  r.pairs = scored.scores.size();
  r.dropped = scored.dropped;
  r.rho = spearman(scored.scores, scored.gold);
  return r;
}

EntailmentReport evaluate_entailment(const ParameterStore& store, const Vocabulary& vocab,
                                     std::span<const EvalPair> pairs, SimilarityMeasure m,
                                     double epsilon) {
  const ScoredPairs scored = score_pairs(store, vocab, pairs, m, epsilon);
  std::vector<int> labels(scored.gold.size());
  std::transform(scored.gold.begin(), scored.gold.end(), labels.begin(),
                 [](double g) { return g != 0.0 ? 1 : 0; });
  EntailmentReport r;
  r.pairs = scored.scores.size();
  r.dropped = scored.dropped;
  try {
    r.sweep = best_threshold_sweep(scored.scores, labels);
  } catch (const DomainError& e) {
    throw ConfigError(std::string("entailment dataset: ") + e.what());
  }
  return r;
}

NeighborQuery parse_query(std::string_view text, const Vocabulary& vocab, std::size_t components) {
  if (auto id = vocab.find(text)) return {*id, std::nullopt};
  const auto colon = text.rfind(':');
  if (colon != std::string_view::npos && colon + 1 < text.size()) {
    const auto head = text.substr(0, colon);
    const auto tail = text.substr(colon + 1);
    std::size_t comp = 0;
    auto [ptr, ec] = std::from_chars(tail.data(), tail.data() + tail.size(), comp);
    if (ec == std::errc() && ptr == tail.data() + tail.size()) {
      if (auto id = vocab.find(head)) {
        if (comp >= components) {
          throw ConfigError("component " + std::to_string(comp) + " out of range for '" +
                            std::string(head) + "' (K=" + std::to_string(components) + ")");
        }
        return {*id, comp};
      }
    }
  }
  throw ConfigError("query word '" + std::string(text) + "' is not in the vocabulary");
}

NeighborIndex::NeighborIndex(const ParameterStore& store, Bank bank)
    : dim_(store.shape().dim),
      components_(store.shape().components),
      rows_(store.vocab_size() * store.shape().components),
      unit_(rows_ * dim_, 0.0) {
  const MixtureShape& shape = store.shape();
  for (WordId w = 0; w < store.vocab_size(); ++w) {
    auto p = store.params(bank, w);
    for (std::size_t i = 0; i < components_; ++i) {
      double* dst = unit_.data() + (w * components_ + i) * dim_;
      double norm = 0;
      for (std::size_t r = 0; r < dim_; ++r) {
        dst[r] = p[shape.mean_offset(i) + r];
        norm += dst[r] * dst[r];
      }
      norm = std::sqrt(norm);
      // zero-norm rows stay zero and score 0 against everything
      if (norm > 0) {
        for (std::size_t r = 0; r < dim_; ++r) dst[r] /= norm;
      }
    }
  }
}

std::vector<std::size_t> NeighborIndex::query_rows(const NeighborQuery& q) const {
  std::vector<std::size_t> rows;
  if (q.component) {
    rows.push_back(q.word * components_ + *q.component);
  } else {
    for (std::size_t i = 0; i < components_; ++i) rows.push_back(q.word * components_ + i);
  }
  return rows;
}

double NeighborIndex::row_score(std::span<const std::size_t> qrows, std::size_t row) const {
  const double* b = unit_.data() + row * dim_;
  double best = -std::numeric_limits<double>::infinity();
  for (std::size_t qr : qrows) {
    const double* a = unit_.data() + qr * dim_;
    double dot = 0;
    for (std::size_t r = 0; r < dim_; ++r) dot += a[r] * b[r];
    best = std::max(best, dot);
  }
  return best;
}

std::vector<double> NeighborIndex::scores(const NeighborQuery& q) const {
  const auto qrows = query_rows(q);
  const std::size_t self_begin = q.word * components_;
  std::vector<double> s(rows_);
  const auto n = static_cast<std::ptrdiff_t>(rows_);
#pragma omp parallel for schedule(static)
  for (std::ptrdiff_t row = 0; row < n; ++row) {
    const auto r = static_cast<std::size_t>(row);
    s[r] = (r >= self_begin && r < self_begin + components_)
               ? -std::numeric_limits<double>::infinity()
               : row_score(qrows, r);
  }
  return s;
}

std::vector<double> NeighborIndex::scores_serial(const NeighborQuery& q) const {
  const auto qrows = query_rows(q);
  const std::size_t self_begin = q.word * components_;
  std::vector<double> s(rows_);
  for (std::size_t r = 0; r < rows_; ++r) {
    s[r] = (r >= self_begin && r < self_begin + components_)
               ? -std::numeric_limits<double>::infinity()
               : row_score(qrows, r);
  }
  return s;
}

std::vector<Neighbor> NeighborIndex::top(const std::vector<double>& s, std::size_t n) const {
  std::vector<Neighbor> all;
  all.reserve(s.size());
  for (std::size_t r = 0; r < s.size(); ++r) {
    if (std::isfinite(s[r])) {
      all.push_back({static_cast<WordId>(r / components_), r % components_, s[r]});
    }
  }
  n = std::min(n, all.size());
  std::partial_sort(all.begin(), all.begin() + static_cast<std::ptrdiff_t>(n), all.end(),
                    neighbor_before);
  all.resize(n);
  return all;
}

std::vector<Neighbor> NeighborIndex::query(const NeighborQuery& q, std::size_t n) const {
  return top(scores(q), n);
}

std::vector<Neighbor> NeighborIndex::query_serial(const NeighborQuery& q, std::size_t n) const {
  return top(scores_serial(q), n);
}

namespace {

std::vector<Neighbor> top_words(std::vector<double> s, WordId self, std::size_t n) {
  std::vector<Neighbor> all;
  for (WordId v = 0; v < s.size(); ++v) {
    if (v != self) all.push_back({v, 0, s[v]});
  }
  n = std::min(n, all.size());
  std::partial_sort(all.begin(), all.begin() + static_cast<std::ptrdiff_t>(n), all.end(),
                    neighbor_before);
  all.resize(n);
  return all;
}

}  // namespace

std::vector<Neighbor> rank_words(const ParameterStore& store, WordId word, SimilarityMeasure m,
                                 double epsilon, std::size_t n) {
  const WordMixture q = store.mixture(Bank::kInput, word);
  std::vector<double> s(store.vocab_size());
  const auto v = static_cast<std::ptrdiff_t>(s.size());
#pragma omp parallel for schedule(static)
  for (std::ptrdiff_t i = 0; i < v; ++i) {
    s[i] = similarity(m, q, store.mixture(Bank::kInput, static_cast<WordId>(i)), epsilon);
  }
  return top_words(std::move(s), word, n);
}

std::vector<Neighbor> rank_words_serial(const ParameterStore& store, WordId word,
                                        SimilarityMeasure m, double epsilon, std::size_t n) {
  const WordMixture q = store.mixture(Bank::kInput, word);
  std::vector<double> s(store.vocab_size());
  for (WordId i = 0; i < s.size(); ++i) {
    s[i] = similarity(m, q, store.mixture(Bank::kInput, i), epsilon);
  }
  return top_words(std::move(s), word, n);
}

}  // namespace w2gm
