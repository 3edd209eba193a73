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
#include <iosfwd>
#include <span>
#include <vector>

#include "w2gm/config.hpp"
#include "w2gm/corpus.hpp"

namespace w2gm {

/// Dimensions of one word's Gaussian mixture. A mixture's parameters are a
/// flat array laid out as [K means of D][K log-variance records][K scores],
/// where a log-variance record holds 1 value (spherical) or D (diagonal).
struct MixtureShape {
  std::size_t dim = 0;
  std::size_t components = 0;
  CovarianceKind covariance = CovarianceKind::kSpherical;

  std::size_t var_size() const noexcept {
    return covariance == CovarianceKind::kSpherical ? 1 : dim;
  }
  std::size_t param_count() const noexcept { return components * (dim + var_size() + 1); }
  std::size_t mean_offset(std::size_t i) const noexcept { return i * dim; }
  std::size_t log_var_offset(std::size_t i) const noexcept {
    return components * dim + i * var_size();
  }
  std::size_t score_offset(std::size_t i) const noexcept {
    return components * (dim + var_size()) + i;
  }

  bool operator==(const MixtureShape&) const = default;
};

MixtureShape shape_of(const TrainConfig& config);

/// Numerically stable softmax.
std::vector<double> softmax(std::span<const double> scores);

/// One word's K-component Gaussian mixture in double precision. Variances are
/// held as logs and weights as unconstrained scores, so any parameter vector
/// is a valid density.
class WordMixture {
 public:
  WordMixture() = default;
  explicit WordMixture(MixtureShape shape)
      : shape_(shape), params_(shape.param_count(), 0.0) {}

  const MixtureShape& shape() const noexcept { return shape_; }
  std::size_t dim() const noexcept { return shape_.dim; }
  std::size_t components() const noexcept { return shape_.components; }

  std::span<double> params() noexcept { return params_; }
  std::span<const double> params() const noexcept { return params_; }

  std::span<double> mean(std::size_t i) {
    return params().subspan(shape_.mean_offset(i), shape_.dim);
  }
  std::span<const double> mean(std::size_t i) const {
    return params().subspan(shape_.mean_offset(i), shape_.dim);
  }
  std::span<double> log_var(std::size_t i) {
    return params().subspan(shape_.log_var_offset(i), shape_.var_size());
  }
  std::span<const double> log_var(std::size_t i) const {
    return params().subspan(shape_.log_var_offset(i), shape_.var_size());
  }
  double& score(std::size_t i) { return params_[shape_.score_offset(i)]; }
  double score(std::size_t i) const { return params_[shape_.score_offset(i)]; }

  /// Variance record of component i (exp of the log-variances).
  std::vector<double> variance(std::size_t i) const;
  /// Mean of component i's variance record; the spherical variance itself.
  double mean_variance(std::size_t i) const;
  std::vector<double> scores() const;
  std::vector<double> weights() const { return softmax(scores()); }

 private:
  MixtureShape shape_;
  std::vector<double> params_;
};

enum class Bank { kInput = 0, kOutput = 1 };

/// Input and output mixture banks in single precision, plus one Adagrad
/// accumulator per parameter. Storage is word-major: word w's parameters
/// occupy [w * param_count, (w + 1) * param_count) of its bank.
class ParameterStore {
 public:
  ParameterStore() = default;
  ParameterStore(std::size_t vocab_size, MixtureShape shape);

  std::size_t vocab_size() const noexcept { return vocab_size_; }
  const MixtureShape& shape() const noexcept { return shape_; }

  std::span<float> bank(Bank b) noexcept { return banks_[index(b)]; }
  std::span<const float> bank(Bank b) const noexcept { return banks_[index(b)]; }
  std::span<float> accumulators(Bank b) noexcept { return acc_[index(b)]; }
  std::span<const float> accumulators(Bank b) const noexcept { return acc_[index(b)]; }

  std::span<float> params(Bank b, WordId w) {
    return bank(b).subspan(w * shape_.param_count(), shape_.param_count());
  }
  std::span<const float> params(Bank b, WordId w) const {
    return bank(b).subspan(w * shape_.param_count(), shape_.param_count());
  }
  std::span<float> accumulators(Bank b, WordId w) {
    return accumulators(b).subspan(w * shape_.param_count(), shape_.param_count());
  }

  /// Copy of one word's mixture, widened to double.
  WordMixture mixture(Bank b, WordId w) const;
  /// Overwrites one word's parameters, narrowing to float.
  void set_mixture(Bank b, WordId w, const WordMixture& m);

  bool operator==(const ParameterStore& other) const = default;

 private:
  static std::size_t index(Bank b) noexcept { return static_cast<std::size_t>(b); }

  std::size_t vocab_size_ = 0;
  MixtureShape shape_;
  std::vector<float> banks_[2];
  std::vector<float> acc_[2];
};

/// Means ~ Uniform[-sqrt(3/D), sqrt(3/D)], variances = init_var, scores = 0,
/// accumulators = 0, for both banks.
ParameterStore init_store(std::size_t vocab_size, const TrainConfig& config, Rng& rng);

struct ModelFile {
  Vocabulary vocab;
  ParameterStore store;
  TrainConfig config;
  bool has_accumulators = false;
};

inline constexpr std::uint32_t kModelFormatVersion = 1;

/// Little-endian binary model. The fixed part is
///   "W2GM" | version u32 | V u32 | D u32 | K u32 | cov_kind u32
///   | V x (len u32, token bytes, count u64)
///   | input bank, output bank: per word, per component:
///       weight f32, D mean f32, 1 or D log-variance f32
/// followed by optional tagged sections (tag[4] | length u64 | payload):
///   CONF  key=value training config lines
///   SCOR  raw mixture scores, both banks, f32
///   ADAG  Adagrad accumulators, both banks, in-memory layout, f32
/// Without SCOR, scores are recovered as log(weight).
void save_model(std::ostream& out, const ParameterStore& store, const Vocabulary& vocab,
                const TrainConfig& config, bool with_accumulators = false);
void save_model(const std::filesystem::path& path, const ParameterStore& store,
                const Vocabulary& vocab, const TrainConfig& config,
                bool with_accumulators = false);

/// Throws FormatError (with byte offset) on bad magic, unsupported version,
/// shape mismatch, or truncation.
ModelFile load_model(std::istream& in);
ModelFile load_model(const std::filesystem::path& path);

/// `token:i  p  mean...  var...`, one line per component, ordered by id.
void dump_model(std::ostream& out, const ParameterStore& store, const Vocabulary& vocab,
                Bank bank = Bank::kInput);

}  // namespace w2gm
