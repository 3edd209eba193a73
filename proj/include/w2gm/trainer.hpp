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

#include <atomic>
#include <cstdint>
#include <filesystem>
#include <functional>
#include <iosfwd>
#include <span>
#include <unordered_map>
#include <vector>

#include "w2gm/config.hpp"
#include "w2gm/corpus.hpp"
#include "w2gm/model.hpp"

namespace w2gm {

/// max(0, margin - log E(w, c) + log E(w, c_neg)).
double hinge_loss(const WordMixture& w, const WordMixture& c, const WordMixture& c_neg,
                  double margin, double epsilon);

/// Gradient of hinge_loss with respect to the flat parameters of the center
/// (input bank), positive context and negative context (output bank). All
/// zeros when the hinge is inactive, including loss exactly 0.
struct TripleGradient {
  double loss = 0;
  bool active = false;
  std::vector<double> center;
  std::vector<double> positive;
  std::vector<double> negative;
};

TripleGradient loss_gradient(const WordMixture& w, const WordMixture& c,
                             const WordMixture& c_neg, double margin, double epsilon);

/// lr(step) = start + (end - start) * min(step / total, 1).
class LrSchedule {
 public:
  LrSchedule(double start, double end, std::uint64_t total_steps);

  double at(std::uint64_t step) const;
  std::uint64_t total_steps() const noexcept { return total_; }

 private:
  double start_;
  double end_;
  std::uint64_t total_;
};

/// Per coordinate: acc += g^2; theta -= lr * g / (sqrt(acc) + kAdagradDelta).
/// Reads and writes are relaxed atomics so concurrent workers may share the
/// arrays without locks.
void adagrad_update(std::span<float> params, std::span<float> accumulators,
                    std::span<const double> grad, double lr);

/// Applies one triple's gradient to the three touched words.
void adagrad_step(ParameterStore& store, const TrainingTriple& triple,
                  const TripleGradient& grad, double lr);

/// Sums gradients per (bank, word) over a mini-batch so each touched word
/// receives a single Adagrad update.
class GradientBatch {
 public:
  explicit GradientBatch(std::size_t param_count) : param_count_(param_count) {}

  void add(Bank bank, WordId word, std::span<const double> grad);
  /// Applies every accumulated gradient in insertion order, then clears.
  void apply(ParameterStore& store, double lr);
  std::size_t touched() const noexcept { return keys_.size(); }

 private:
  std::size_t param_count_;
  std::unordered_map<std::uint64_t, std::size_t> slots_;
  std::vector<std::uint64_t> keys_;
  std::vector<double> sums_;
};

struct EpochReport {
  std::size_t epoch = 0;
  std::uint64_t triples = 0;
  double mean_loss = 0;
  double lr = 0;
};

/// `epoch N  triples M  mean_loss X  lr Y`
void write_progress(std::ostream& os, const EpochReport& r);

/// Drives epochs of hinge-loss SGD over an encoded corpus. run_epoch shards
/// sentences over config.workers OpenMP threads that update the store
/// without locks; run_epoch_serial is the single-stream reference and matches
/// run_epoch bit for bit when workers == 1.
class Trainer {
 public:
  Trainer(const TrainConfig& config, const Vocabulary& vocab, const EncodedCorpus& corpus,
          ParameterStore& store);

  EpochReport run_epoch(std::size_t epoch);
  EpochReport run_epoch_serial(std::size_t epoch);

  const LrSchedule& schedule() const noexcept { return schedule_; }
  std::uint64_t step() const noexcept { return step_.load(); }

 private:
  struct ShardStats {
    double loss = 0;
    std::uint64_t triples = 0;
  };

  ShardStats process_shard(std::size_t first, std::size_t last, Rng& rng);
  Rng shard_rng(std::size_t epoch, std::size_t worker) const;

  const TrainConfig& config_;
  const EncodedCorpus& corpus_;
  ParameterStore& store_;
  NegativeSampler sampler_;
  std::vector<double> keep_;
  LrSchedule schedule_;
  std::atomic<std::uint64_t> step_{0};
};

struct TrainResult {
  Vocabulary vocab;
  ParameterStore store;
  std::vector<EpochReport> epochs;
};

using EpochCallback = std::function<void(const EpochReport&, const ParameterStore&)>;

TrainResult train(const Vocabulary& vocab, const EncodedCorpus& corpus,
                  const TrainConfig& config, std::ostream* progress = nullptr,
                  const EpochCallback& on_epoch = {});

/// build_vocab -> encode -> init_store -> config.epochs epochs.
TrainResult train(const std::filesystem::path& corpus, const TrainConfig& config,
                  std::ostream* progress = nullptr, const EpochCallback& on_epoch = {});

}  // namespace w2gm
