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

#include <span>
#include <utility>
#include <vector>

#include "w2gm/model.hpp"

namespace w2gm {

// Variance records passed to the functions below hold either a single value
// (spherical, broadcast over all D coordinates) or D values (diagonal).

/// Log of the Gaussian overlap integral between two components:
///   xi = log N(0; mu_f - mu_g, diag(var_f + var_g + epsilon)).
/// Throws DomainError on a non-positive variance or mismatched sizes.
double log_partial_energy(std::span<const double> mu_f, std::span<const double> var_f,
                          std::span<const double> mu_g, std::span<const double> var_g,
                          double epsilon);

/// KL(f || g) between two diagonal Gaussians.
double kl_gaussian(std::span<const double> mu_f, std::span<const double> var_f,
                   std::span<const double> mu_g, std::span<const double> var_g);

/// Partial energies of every component pair; max_index is the first maximum
/// in row-major order.
struct PartialEnergyMatrix {
  std::size_t rows = 0;
  std::size_t cols = 0;
  std::vector<double> xi;
  std::pair<std::size_t, std::size_t> max_index{0, 0};

  double operator()(std::size_t i, std::size_t j) const { return xi[i * cols + j]; }
  double max() const { return (*this)(max_index.first, max_index.second); }
};

PartialEnergyMatrix partial_energies(const WordMixture& f, const WordMixture& g, double epsilon);

/// Log expected likelihood kernel log \int f g, evaluated as
///   xi_max + log sum_ij p_i q_j exp(xi_ij - xi_max)
/// so that it stays finite when every exp(xi_ij) underflows.
double log_energy(const WordMixture& f, const WordMixture& g, double epsilon);

/// log_energy and its gradient with respect to the flat parameter vectors of
/// both mixtures (means, log-variances, scores).
struct LogEnergyGradient {
  double value = 0;
  std::vector<double> d_f;
  std::vector<double> d_g;
};

LogEnergyGradient log_energy_gradient(const WordMixture& f, const WordMixture& g,
                                      double epsilon);

}  // namespace w2gm
