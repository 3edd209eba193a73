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

#include "w2gm/trainer.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <ostream>

#ifdef _OPENMP
#include <omp.h>
#endif

#include "w2gm/energy.hpp"
#include "w2gm/errors.hpp"

namespace w2gm {

double hinge_loss(const WordMixture& w, const WordMixture& c, const WordMixture& c_neg,
                  double margin, double epsilon) {
  return std::max(0.0, margin - log_energy(w, c, epsilon) + log_energy(w, c_neg, epsilon));
}

TripleGradient loss_gradient(const WordMixture& w, const WordMixture& c,
                             const WordMixture& c_neg, double margin, double epsilon) {
  TripleGradient out;
  const auto pos = log_energy_gradient(w, c, epsilon);
  const auto neg = log_energy_gradient(w, c_neg, epsilon);
  const double hinge = margin - pos.value + neg.value;
  out.center.assign(w.params().size(), 0.0);
  out.positive.assign(c.params().size(), 0.0);
  out.negative.assign(c_neg.params().size(), 0.0);
  if (!(hinge > 0)) return out;

  out.loss = hinge;
  out.active = true;
  for (std::size_t k = 0; k < out.center.size(); ++k) out.center[k] = neg.d_f[k] - pos.d_f[k];
  for (std::size_t k = 0; k < out.positive.size(); ++k) out.positive[k] = -pos.d_g[k];
  for (std::size_t k = 0; k < out.negative.size(); ++k) out.negative[k] = neg.d_g[k];
  return out;
}

LrSchedule::LrSchedule(double start, double end, std::uint64_t total_steps)
    : start_(start), end_(end), total_(std::max<std::uint64_t>(total_steps, 1)) {
  if (end > start) throw ConfigError("learning rate schedule must be nonincreasing");
}

double LrSchedule::at(std::uint64_t step) const {
  const double frac =
      std::min(1.0, static_cast<double>(step) / static_cast<double>(total_));
  return start_ + (end_ - start_) * frac;
}

void adagrad_update(std::span<float> params, std::span<float> accumulators,
                    std::span<const double> grad, double lr) {
  for (std::size_t k = 0; k < grad.size(); ++k) {
    const double g = grad[k];
    if (g == 0.0) continue;
    std::atomic_ref<float> acc_ref(accumulators[k]);
    std::atomic_ref<float> param_ref(params[k]);
    const double acc = static_cast<double>(acc_ref.load(std::memory_order_relaxed)) + g * g;
    acc_ref.store(static_cast<float>(acc), std::memory_order_relaxed);
    const double theta = param_ref.load(std::memory_order_relaxed);
    param_ref.store(static_cast<float>(theta - lr * g / (std::sqrt(acc) + kAdagradDelta)),
                    std::memory_order_relaxed);
  }
}

void adagrad_step(ParameterStore& store, const TrainingTriple& triple,
                  const TripleGradient& grad, double lr) {
  if (!grad.active) return;
  adagrad_update(store.params(Bank::kInput, triple.center),
                 store.accumulators(Bank::kInput, triple.center), grad.center, lr);
  adagrad_update(store.params(Bank::kOutput, triple.positive),
                 store.accumulators(Bank::kOutput, triple.positive), grad.positive, lr);
  adagrad_update(store.params(Bank::kOutput, triple.negative),
                 store.accumulators(Bank::kOutput, triple.negative), grad.negative, lr);
}

void GradientBatch::add(Bank bank, WordId word, std::span<const double> grad) {
  const std::uint64_t key = (static_cast<std::uint64_t>(bank) << 32) | word;
  auto [it, inserted] = slots_.try_emplace(key, keys_.size());
  if (inserted) {
    keys_.push_back(key);
    sums_.resize(sums_.size() + param_count_, 0.0);
  }
  double* dst = sums_.data() + it->second * param_count_;
  for (std::size_t k = 0; k < param_count_; ++k) dst[k] += grad[k];
}

void GradientBatch::apply(ParameterStore& store, double lr) {
  for (std::size_t s = 0; s < keys_.size(); ++s) {
    const auto bank = static_cast<Bank>(keys_[s] >> 32);
    const auto word = static_cast<WordId>(keys_[s] & 0xffffffffu);
    adagrad_update(store.params(bank, word), store.accumulators(bank, word),
                   std::span<const double>(sums_.data() + s * param_count_, param_count_), lr);
  }
  slots_.clear();
  keys_.clear();
  sums_.clear();
}

void write_progress(std::ostream& os, const EpochReport& r) {
  os << "epoch " << r.epoch << "  triples " << r.triples << "  mean_loss " << r.mean_loss
     << "  lr " << r.lr << '\n';
}

namespace {

// Snapshot of one word's parameters; relaxed loads tolerate concurrent writers.
void load_relaxed(ParameterStore& store, Bank bank, WordId w, WordMixture& out) {
  auto src = store.params(bank, w);
  auto dst = out.params();
  for (std::size_t k = 0; k < src.size(); ++k) {
    dst[k] = std::atomic_ref<float>(src[k]).load(std::memory_order_relaxed);
  }
}

}  // namespace

Trainer::Trainer(const TrainConfig& config, const Vocabulary& vocab, const EncodedCorpus& corpus,
                 ParameterStore& store)
    : config_(config),
      corpus_(corpus),
      store_(store),
      sampler_(vocab),
      keep_(keep_probabilities(vocab, config.subsample_t)),
      schedule_(config.lr_start, config.lr_end,
                estimate_triples(corpus, keep_, config.window) * config.epochs) {
  config.validate();
  if (store.vocab_size() != vocab.size() || !(store.shape() == shape_of(config))) {
    throw ConfigError("parameter store does not match vocabulary and config");
  }
}

Rng Trainer::shard_rng(std::size_t epoch, std::size_t worker) const {
  std::seed_seq seq{static_cast<std::uint32_t>(config_.seed),
                    static_cast<std::uint32_t>(config_.seed >> 32),
                    static_cast<std::uint32_t>(epoch), static_cast<std::uint32_t>(worker)};
  return Rng(seq);
}

Trainer::ShardStats Trainer::process_shard(std::size_t first, std::size_t last, Rng& rng) {
  const MixtureShape shape = store_.shape();
  WordMixture w(shape), c(shape), c_neg(shape);
  GradientBatch batch(shape.param_count());
  std::vector<WordId> kept;
  ShardStats stats;
  std::size_t in_batch = 0;

  auto flush = [&] {
    if (in_batch == 0) return;
    const std::uint64_t step = step_.fetch_add(in_batch, std::memory_order_relaxed);
    batch.apply(store_, schedule_.at(step));
    in_batch = 0;
  };

  for (std::size_t s = first; s < last; ++s) {
    subsample_sentence(corpus_.sentence(s), keep_, rng, kept);
    emit_triples(kept, config_.window, sampler_, rng, [&](const TrainingTriple& t) {
      load_relaxed(store_, Bank::kInput, t.center, w);
      load_relaxed(store_, Bank::kOutput, t.positive, c);
      load_relaxed(store_, Bank::kOutput, t.negative, c_neg);
      const TripleGradient g = loss_gradient(w, c, c_neg, config_.margin, config_.epsilon);
      if (g.active) {
        batch.add(Bank::kInput, t.center, g.center);
        batch.add(Bank::kOutput, t.positive, g.positive);
        batch.add(Bank::kOutput, t.negative, g.negative);
      }
      stats.loss += g.loss;
      ++stats.triples;
      if (++in_batch == config_.batch_size) flush();
    });
  }
  flush();
  return stats;
}

EpochReport Trainer::run_epoch_serial(std::size_t epoch) {
  Rng rng = shard_rng(epoch, 0);
  const ShardStats stats = process_shard(0, corpus_.sentence_count(), rng);
  EpochReport r;
  r.epoch = epoch;
  r.triples = stats.triples;
  r.mean_loss = stats.triples ? stats.loss / static_cast<double>(stats.triples) : 0.0;
  r.lr = schedule_.at(step());
  return r;
}

EpochReport Trainer::run_epoch(std::size_t epoch) {
#ifdef _OPENMP
  const std::size_t sentences = corpus_.sentence_count();
  const auto workers = static_cast<int>(std::min(config_.workers, std::max<std::size_t>(sentences, 1)));
  double loss = 0;
  std::uint64_t triples = 0;
#pragma omp parallel num_threads(workers) reduction(+ : loss, triples)
  {
    const auto tid = static_cast<std::size_t>(omp_get_thread_num());
    const auto nt = static_cast<std::size_t>(omp_get_num_threads());
    Rng rng = shard_rng(epoch, tid);
    const ShardStats stats = process_shard(sentences * tid / nt, sentences * (tid + 1) / nt, rng);
    loss += stats.loss;
    triples += stats.triples;
  }
  EpochReport r;
  r.epoch = epoch;
  r.triples = triples;
  r.mean_loss = triples ? loss / static_cast<double>(triples) : 0.0;
  r.lr = schedule_.at(step());
  return r;
#else
  return run_epoch_serial(epoch);
#endif
}

TrainResult train(const Vocabulary& vocab, const EncodedCorpus& corpus,
                  const TrainConfig& config, std::ostream* progress,
                  const EpochCallback& on_epoch) {
  config.validate();
  TrainResult result;
  result.vocab = vocab;
  Rng rng(config.seed);
  result.store = init_store(vocab.size(), config, rng);
  Trainer trainer(config, result.vocab, corpus, result.store);
  for (std::size_t e = 1; e <= config.epochs; ++e) {
    const EpochReport r = trainer.run_epoch(e);
    if (progress) write_progress(*progress, r);
    if (on_epoch) on_epoch(r, result.store);
    result.epochs.push_back(r);
  }
  return result;
}

TrainResult train(const std::filesystem::path& corpus, const TrainConfig& config,
                  std::ostream* progress, const EpochCallback& on_epoch) {
  config.validate();
  const Vocabulary vocab = build_vocab(corpus, config.min_count);
  const EncodedCorpus encoded = encode_corpus(corpus, vocab);
  return train(vocab, encoded, config, progress, on_epoch);
}

}  // namespace w2gm
