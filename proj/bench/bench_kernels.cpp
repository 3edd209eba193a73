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

// Serial reference vs OpenMP kernels. Thread count follows OMP_NUM_THREADS.

#include <benchmark/benchmark.h>

#include <omp.h>

#include <random>
#include <sstream>
#include <string>
#include <vector>

#include "w2gm/corpus.hpp"
#include "w2gm/eval.hpp"
#include "w2gm/model.hpp"
#include "w2gm/trainer.hpp"

namespace {

using namespace w2gm;

struct Fixture {
  Vocabulary vocab;
  ParameterStore store;
  std::vector<EvalPair> pairs;
};

const Fixture& fixture() {
  static const Fixture f = [] {
    Fixture f;
    std::vector<std::pair<std::string, std::uint64_t>> entries;
    for (int i = 0; i < 20000; ++i) entries.emplace_back("w" + std::to_string(i), 20000 - i);
    f.vocab = Vocabulary::from_counts(std::move(entries));
    TrainConfig config;
    Rng rng(1);
    f.store = init_store(f.vocab.size(), config, rng);
    std::uniform_int_distribution<int> pick(0, 19999);
    for (int i = 0; i < 5000; ++i) {
      f.pairs.push_back({"w" + std::to_string(pick(rng)), "w" + std::to_string(pick(rng)), 0.0});
    }
    return f;
  }();
  return f;
}

void BM_NeighborScanSerial(benchmark::State& state) {
  const NeighborIndex index(fixture().store);
  for (auto _ : state) benchmark::DoNotOptimize(index.query_serial({17, std::nullopt}, 10));
}

void BM_NeighborScanParallel(benchmark::State& state) {
  const NeighborIndex index(fixture().store);
  for (auto _ : state) benchmark::DoNotOptimize(index.query({17, std::nullopt}, 10));
  state.counters["threads"] = omp_get_max_threads();
}

void BM_ScorePairsSerial(benchmark::State& state) {
  const auto& f = fixture();
  for (auto _ : state) {
    benchmark::DoNotOptimize(
        score_pairs_serial(f.store, f.vocab, f.pairs, SimilarityMeasure::kExpectedLikelihood, 1e-4));
  }
}

void BM_ScorePairsParallel(benchmark::State& state) {
  const auto& f = fixture();
  for (auto _ : state) {
    benchmark::DoNotOptimize(
        score_pairs(f.store, f.vocab, f.pairs, SimilarityMeasure::kExpectedLikelihood, 1e-4));
  }
  state.counters["threads"] = omp_get_max_threads();
}

struct TrainFixture {
  Vocabulary vocab;
  EncodedCorpus corpus;
};

const TrainFixture& train_fixture() {
  static const TrainFixture f = [] {
    std::mt19937_64 rng(3);
    std::uniform_int_distribution<int> word(0, 999);
    std::ostringstream text;
    for (int s = 0; s < 2000; ++s) {
      for (int k = 0; k < 12; ++k) text << (k ? " " : "") << "t" << word(rng);
      text << '\n';
    }
    TrainFixture f;
    std::istringstream a(text.str()), b(text.str());
    f.vocab = build_vocab(a, 1);
    f.corpus = encode_corpus(b, f.vocab);
    return f;
  }();
  return f;
}

void run_training_epoch(benchmark::State& state, bool serial) {
  const auto& f = train_fixture();
  TrainConfig config;
  config.dim = 20;
  config.window = 5;
  config.min_count = 1;
  config.subsample_t = 1.0;
  config.workers = static_cast<std::size_t>(state.range(0));
  for (auto _ : state) {
    state.PauseTiming();
    Rng rng(config.seed);
    ParameterStore store = init_store(f.vocab.size(), config, rng);
    Trainer trainer(config, f.vocab, f.corpus, store);
    state.ResumeTiming();
    benchmark::DoNotOptimize(serial ? trainer.run_epoch_serial(1) : trainer.run_epoch(1));
  }
}

void BM_TrainEpochSerial(benchmark::State& state) { run_training_epoch(state, true); }
void BM_TrainEpochParallel(benchmark::State& state) { run_training_epoch(state, false); }

}  // namespace

BENCHMARK(BM_NeighborScanSerial)->Unit(benchmark::kMicrosecond);
BENCHMARK(BM_NeighborScanParallel)->Unit(benchmark::kMicrosecond);
BENCHMARK(BM_ScorePairsSerial)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_ScorePairsParallel)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_TrainEpochSerial)->Arg(1)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_TrainEpochParallel)->Arg(1)->Arg(2)->Arg(4)->Unit(benchmark::kMillisecond);

BENCHMARK_MAIN();
