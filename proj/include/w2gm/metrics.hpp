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

#include <optional>
#include <span>
#include <string_view>
#include <vector>

#include "w2gm/model.hpp"

namespace w2gm {

enum class SimilarityMeasure {
  kMaxCosine,           // mc
  kExpectedLikelihood,  // el
  kMinEuclidean,        // me
  kAvgCosine,
  kMinKl,
  kMaxNegKl,
};

/// Accepts the short names mc, el, me, avg, cos (max cosine), kl, minkl.
SimilarityMeasure parse_measure(std::string_view name);
std::string_view to_string(SimilarityMeasure m);

// Cosine of a zero-norm vector is taken as 0.
double cosine(std::span<const double> a, std::span<const double> b);

double max_cosine(const WordMixture& f, const WordMixture& g);
double avg_cosine(const WordMixture& f, const WordMixture& g);
double min_euclidean(const WordMixture& f, const WordMixture& g);
/// min over component pairs of KL(f_i || g_j); asymmetric.
double min_kl(const WordMixture& f, const WordMixture& g);
inline double max_neg_kl(const WordMixture& f, const WordMixture& g) { return -min_kl(f, g); }
double elk_score(const WordMixture& f, const WordMixture& g, double epsilon);

/// Raw value of `m` (distances stay distances).
double measure(SimilarityMeasure m, const WordMixture& f, const WordMixture& g, double epsilon);
/// Higher means more similar: min_euclidean and min_kl are negated.
double similarity(SimilarityMeasure m, const WordMixture& f, const WordMixture& g,
                  double epsilon);

/// Fractional ranks starting at 1; ties share their average rank.
std::vector<double> fractional_ranks(std::span<const double> xs);

/// Spearman rank correlation. Throws DomainError if lengths differ or n < 2;
/// returns nullopt when either side has zero rank variance.
std::optional<double> spearman(std::span<const double> xs, std::span<const double> ys);

struct ThresholdPoint {
  double threshold = 0;
  double precision = 0;
  double recall = 0;
  double f1 = 0;
};

struct ThresholdSweep {
  double best_ap = 0;
  double best_f1 = 0;
  double best_f1_threshold = 0;
  /// One point per distinct score, descending; predict positive when
  /// score >= threshold.
  std::vector<ThresholdPoint> points;
};

/// Average precision of the score ranking plus the best F1 over all
/// thresholds. Labels are 0/1; both classes must be present.
ThresholdSweep best_threshold_sweep(std::span<const double> scores, std::span<const int> labels);

}  // namespace w2gm
