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

#include "w2gm/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <string>

#include "w2gm/energy.hpp"
#include "w2gm/errors.hpp"

namespace w2gm {

SimilarityMeasure parse_measure(std::string_view name) {
  if (name == "mc" || name == "cos" || name == "max_cosine") return SimilarityMeasure::kMaxCosine;
  if (name == "el" || name == "elk") return SimilarityMeasure::kExpectedLikelihood;
  if (name == "me") return SimilarityMeasure::kMinEuclidean;
  if (name == "avg" || name == "avg_cosine") return SimilarityMeasure::kAvgCosine;
  if (name == "minkl" || name == "min_kl") return SimilarityMeasure::kMinKl;
  if (name == "kl" || name == "max_neg_kl") return SimilarityMeasure::kMaxNegKl;
  throw ConfigError("unknown metric '" + std::string(name) + "'");
}

std::string_view to_string(SimilarityMeasure m) {
  switch (m) {
    case SimilarityMeasure::kMaxCosine: return "mc";
    case SimilarityMeasure::kExpectedLikelihood: return "el";
    case SimilarityMeasure::kMinEuclidean: return "me";
    case SimilarityMeasure::kAvgCosine: return "avg";
    case SimilarityMeasure::kMinKl: return "minkl";
    case SimilarityMeasure::kMaxNegKl: return "kl";
  }
  return "?";
}

double cosine(std::span<const double> a, std::span<const double> b) {
  double dot = 0, na = 0, nb = 0;
  for (std::size_t r = 0; r < a.size(); ++r) {
    dot += a[r] * b[r];
    na += a[r] * a[r];
    nb += b[r] * b[r];
  }
  if (na == 0 || nb == 0) return 0.0;
  return dot / (std::sqrt(na) * std::sqrt(nb));
}

double max_cosine(const WordMixture& f, const WordMixture& g) {
  double best = -std::numeric_limits<double>::infinity();
  for (std::size_t i = 0; i < f.components(); ++i) {
    for (std::size_t j = 0; j < g.components(); ++j) {
      best = std::max(best, cosine(f.mean(i), g.mean(j)));
    }
  }
  return best;
}

double avg_cosine(const WordMixture& f, const WordMixture& g) {
  const auto p = f.weights();
  const auto q = g.weights();
  double sum = 0;
  for (std::size_t i = 0; i < f.components(); ++i) {
    for (std::size_t j = 0; j < g.components(); ++j) {
      sum += p[i] * q[j] * cosine(f.mean(i), g.mean(j));
    }
  }
  return sum;
}

double min_euclidean(const WordMixture& f, const WordMixture& g) {
  double best = std::numeric_limits<double>::infinity();
  for (std::size_t i = 0; i < f.components(); ++i) {
    for (std::size_t j = 0; j < g.components(); ++j) {
      const auto a = f.mean(i);
      const auto b = g.mean(j);
      double d2 = 0;
      for (std::size_t r = 0; r < a.size(); ++r) d2 += (a[r] - b[r]) * (a[r] - b[r]);
      best = std::min(best, std::sqrt(d2));
    }
  }
  return best;
}

double min_kl(const WordMixture& f, const WordMixture& g) {
  double best = std::numeric_limits<double>::infinity();
  for (std::size_t i = 0; i < f.components(); ++i) {
    const auto vf = f.variance(i);
    for (std::size_t j = 0; j < g.components(); ++j) {
      best = std::min(best, kl_gaussian(f.mean(i), vf, g.mean(j), g.variance(j)));
    }
  }
  return best;
}

double elk_score(const WordMixture& f, const WordMixture& g, double epsilon) {
  return log_energy(f, g, epsilon);
}

double measure(SimilarityMeasure m, const WordMixture& f, const WordMixture& g, double epsilon) {
  switch (m) {
    case SimilarityMeasure::kMaxCosine: return max_cosine(f, g);
    case SimilarityMeasure::kExpectedLikelihood: return elk_score(f, g, epsilon);
    case SimilarityMeasure::kMinEuclidean: return min_euclidean(f, g);
    case SimilarityMeasure::kAvgCosine: return avg_cosine(f, g);
    case SimilarityMeasure::kMinKl: return min_kl(f, g);
    case SimilarityMeasure::kMaxNegKl: return max_neg_kl(f, g);
  }
  return 0;
}

double similarity(SimilarityMeasure m, const WordMixture& f, const WordMixture& g,
                  double epsilon) {
  const double v = measure(m, f, g, epsilon);
  return (m == SimilarityMeasure::kMinEuclidean || m == SimilarityMeasure::kMinKl) ? -v : v;
}

std::vector<double> fractional_ranks(std::span<const double> xs) {
  std::vector<std::size_t> order(xs.size());
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(),
                   [&](std::size_t a, std::size_t b) { return xs[a] < xs[b]; });
  std::vector<double> ranks(xs.size());
  std::size_t i = 0;
  while (i < order.size()) {
    std::size_t j = i;
    while (j + 1 < order.size() && xs[order[j + 1]] == xs[order[i]]) ++j;
    const double avg = 0.5 * static_cast<double>(i + j) + 1.0;
    for (std::size_t k = i; k <= j; ++k) ranks[order[k]] = avg;
    i = j + 1;
  }
  return ranks;
}

std::optional<double> spearman(std::span<const double> xs, std::span<const double> ys) {
  if (xs.size() != ys.size()) throw DomainError("spearman: length mismatch");
  if (xs.size() < 2) throw DomainError("spearman: need at least 2 pairs");
  const auto rx = fractional_ranks(xs);
  const auto ry = fractional_ranks(ys);
  const double n = static_cast<double>(xs.size());
  const double mx = std::accumulate(rx.begin(), rx.end(), 0.0) / n;
  const double my = std::accumulate(ry.begin(), ry.end(), 0.0) / n;
  double sxy = 0, sxx = 0, syy = 0;
  for (std::size_t i = 0; i < rx.size(); ++i) {
    sxy += (rx[i] - mx) * (ry[i] - my);
    sxx += (rx[i] - mx) * (rx[i] - mx);
    syy += (ry[i] - my) * (ry[i] - my);
  }
  if (sxx == 0 || syy == 0) return std::nullopt;
  return std::clamp(sxy / std::sqrt(sxx * syy), -1.0, 1.0);
}

ThresholdSweep best_threshold_sweep(std::span<const double> scores, std::span<const int> labels) {
  if (scores.size() != labels.size()) throw DomainError("threshold sweep: length mismatch");
  std::size_t positives = 0;
  for (int l : labels) {
    if (l != 0 && l != 1) throw DomainError("threshold sweep: labels must be 0 or 1");
    positives += static_cast<std::size_t>(l);
  }
  if (positives == 0 || positives == labels.size()) {
    throw DomainError("threshold sweep: need both positive and negative labels");
  }

  std::vector<std::size_t> order(scores.size());
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(),
                   [&](std::size_t a, std::size_t b) { return scores[a] > scores[b]; });

  ThresholdSweep out;
  const double total_pos = static_cast<double>(positives);
  std::size_t tp = 0;
  std::size_t predicted = 0;
  double prev_recall = 0;
  std::size_t i = 0;
  while (i < order.size()) {
    const double threshold = scores[order[i]];
    while (i < order.size() && scores[order[i]] == threshold) {
      tp += static_cast<std::size_t>(labels[order[i]]);
      ++predicted;
      ++i;
    }
    ThresholdPoint pt;
    pt.threshold = threshold;
    pt.precision = static_cast<double>(tp) / static_cast<double>(predicted);
    pt.recall = static_cast<double>(tp) / total_pos;
    pt.f1 = tp == 0 ? 0.0 : 2 * pt.precision * pt.recall / (pt.precision + pt.recall);
    out.best_ap += (pt.recall - prev_recall) * pt.precision;
    prev_recall = pt.recall;
    if (pt.f1 > out.best_f1) {
      out.best_f1 = pt.f1;
      out.best_f1_threshold = threshold;
    }
    out.points.push_back(pt);
  }
  return out;
}

}  // namespace w2gm
