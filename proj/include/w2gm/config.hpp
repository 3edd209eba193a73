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
#include <map>
#include <string>
#include <string_view>

namespace w2gm {

enum class CovarianceKind : std::uint32_t { kSpherical = 0, kDiagonal = 1 };

std::string_view to_string(CovarianceKind kind);
CovarianceKind parse_covariance_kind(std::string_view name);

/// Training hyperparameters. Defaults are the full-scale settings: D=50, K=2,
/// window 10, margin 1, batch 128, learning rate 0.05 decaying linearly to
/// 1e-5, subsampling threshold 1e-5, min count 100, epsilon 1e-4, initial
/// variance 0.05, spherical covariances.
struct TrainConfig {
  std::size_t dim = 50;
  std::size_t components = 2;
  std::size_t window = 10;
  double margin = 1.0;
  std::size_t batch_size = 128;
  double lr_start = 0.05;
  double lr_end = 1e-5;
  // A threshold >= 1 never discards anything.
  double subsample_t = 1e-5;
  std::uint64_t min_count = 100;
  double epsilon = 1e-4;
  double init_var = 0.05;
  std::size_t epochs = 1;
  CovarianceKind covariance = CovarianceKind::kSpherical;
  std::size_t workers = 1;
  std::uint64_t seed = 1;

  /// Throws ConfigError naming the first offending field.
  void validate() const;

  std::map<std::string, std::string> to_key_values() const;
  /// Unknown keys throw ConfigError; missing keys keep their current value.
  void apply_key_values(const std::map<std::string, std::string>& kv);
};

/// Adagrad denominator stabilizer.
inline constexpr double kAdagradDelta = 1e-8;

}  // namespace w2gm
