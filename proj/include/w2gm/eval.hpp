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

#include <cstddef>
#include <filesystem>
#include <iosfwd>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "w2gm/corpus.hpp"
#include "w2gm/metrics.hpp"
#include "w2gm/model.hpp"

namespace w2gm {

struct EvalPair {
  std::string word1;
  std::string word2;
  double gold = 0;  // similarity score, or 0/1 entailment label
};

/// `word1<TAB>word2<TAB>score`; a first line whose third field is not numeric
/// is taken as a header.
std::vector<EvalPair> read_similarity_dataset(std::istream& in);
std::vector<EvalPair> read_similarity_dataset(const std::filesystem::path& path);
/// `word1<TAB>word2<TAB>label` with label 0 or 1; header detection as above.
std::vector<EvalPair> read_entailment_dataset(std::istream& in);
std::vector<EvalPair> read_entailment_dataset(const std::filesystem::path& path);

struct ScoredPairs {
  std::vector<double> scores;  // higher = more similar
  std::vector<double> gold;
  std::size_t dropped = 0;     // pairs with an out-of-vocabulary word
};

/// Scores in-vocabulary pairs on the input bank. The OpenMP version and the
/// serial reference produce identical output.
ScoredPairs score_pairs(const ParameterStore& store, const Vocabulary& vocab,
                        std::span<const EvalPair> pairs, SimilarityMeasure m, double epsilon);
ScoredPairs score_pairs_serial(const ParameterStore& store, const Vocabulary& vocab,
                               std::span<const EvalPair> pairs, SimilarityMeasure m,
                               double epsilon);

struct SimilarityReport {
  std::size_t pairs = 0;
  std::size_t dropped = 0;
  std::optional<double> rho;  // nullopt: degenerate ranking
};

/// Throws ConfigError when fewer than two pairs survive OOV dropping.
SimilarityReport evaluate_similarity(const ParameterStore& store, const Vocabulary& vocab,
                                     std::span<const EvalPair> pairs, SimilarityMeasure m,
                                     double epsilon);

struct EntailmentReport {
  std::size_t pairs = 0;
  std::size_t dropped = 0;
  ThresholdSweep sweep;
};

EntailmentReport evaluate_entailment(const ParameterStore& store, const Vocabulary& vocab,
                                     std::span<const EvalPair> pairs, SimilarityMeasure m,
                                     double epsilon);

struct Neighbor {
  WordId word = 0;
  std::size_t component = 0;
  double score = 0;
};

struct NeighborQuery {
  WordId word = 0;
  std::optional<std::size_t> component;  // nullopt: all components of the word
};

/// Parses `token` or `token:i`. Throws ConfigError naming an OOV token or an
/// out-of-range component.
NeighborQuery parse_query(std::string_view text, const Vocabulary& vocab, std::size_t components);

/// Unit-normalized component means of one bank, V*K rows of D, scanned
/// linearly per query. Candidates are components of other words, scored by
/// cosine against the query component (or the best of the query's
/// components).
class NeighborIndex {
 public:
  explicit NeighborIndex(const ParameterStore& store, Bank bank = Bank::kInput);

  std::vector<Neighbor> query(const NeighborQuery& q, std::size_t n) const;
  std::vector<Neighbor> query_serial(const NeighborQuery& q, std::size_t n) const;

  /// Score of every row for `q` (query word rows are -inf).
  std::vector<double> scores(const NeighborQuery& q) const;
  std::vector<double> scores_serial(const NeighborQuery& q) const;

  std::size_t rows() const noexcept { return rows_; }

 private:
  std::vector<std::size_t> query_rows(const NeighborQuery& q) const;
  double row_score(std::span<const std::size_t> qrows, std::size_t row) const;
  std::vector<Neighbor> top(const std::vector<double>& s, std::size_t n) const;

  std::size_t dim_ = 0;
  std::size_t components_ = 0;
  std::size_t rows_ = 0;
  std::vector<double> unit_;
};

/// Whole-word ranking by a mixture similarity (input bank), excluding the
/// query word. Entries carry component 0.
std::vector<Neighbor> rank_words(const ParameterStore& store, WordId word, SimilarityMeasure m,
                                 double epsilon, std::size_t n);
std::vector<Neighbor> rank_words_serial(const ParameterStore& store, WordId word,
                                        SimilarityMeasure m, double epsilon, std::size_t n);

}  // namespace w2gm
