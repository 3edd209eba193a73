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

#include "w2gm/energy.hpp"

#include <cmath>
#include <limits>
#include <string>

#include "w2gm/errors.hpp"

namespace w2gm {

namespace {

constexpr double kLog2Pi = 1.8378770664093454836;  // log(2 pi)

void check_shapes(std::span<const double> mu_f, std::span<const double> var_f,
                  std::span<const double> mu_g, std::span<const double> var_g) {
  const std::size_t d = mu_f.size();
  if (mu_g.size() != d) throw DomainError("mean vectors differ in dimension");
  for (auto var : {var_f, var_g}) {
    if (var.size() != 1 && var.size() != d) {
      throw DomainError("variance record must have 1 or D entries, got " +
                        std::to_string(var.size()));
    }
    for (double v : var) {
      if (!(v > 0)) throw DomainError("variance must be > 0");
    }
  }
}

inline double at(std::span<const double> var, std::size_t r) {
  return var.size() == 1 ? var[0] : var[r];
}

void check_pair(const WordMixture& f, const WordMixture& g) {
  if (f.dim() != g.dim() || f.shape().covariance != g.shape().covariance) {
    throw DomainError("mixtures differ in dimension or covariance kind");
  }
}

std::vector<std::vector<double>> variances(const WordMixture& m) {
  std::vector<std::vector<double>> out(m.components());
  for (std::size_t i = 0; i < m.components(); ++i) out[i] = m.variance(i);
  return out;
}

}  // namespace

double log_partial_energy(std::span<const double> mu_f, std::span<const double> var_f,
                          std::span<const double> mu_g, std::span<const double> var_g,
                          double epsilon) {
  check_shapes(mu_f, var_f, mu_g, var_g);
  const std::size_t d = mu_f.size();
  double log_det = 0;
  double quad = 0;
  if (var_f.size() == 1 && var_g.size() == 1) {
    const double s = var_f[0] + var_g[0] + epsilon;
    for (std::size_t r = 0; r < d; ++r) {
      const double diff = mu_f[r] - mu_g[r];
      quad += diff * diff;
    }
    log_det = static_cast<double>(d) * std::log(s);
    quad /= s;
  } else {
    for (std::size_t r = 0; r < d; ++r) {
      const double s = at(var_f, r) + at(var_g, r) + epsilon;
      const double diff = mu_f[r] - mu_g[r];
      log_det += std::log(s);
      quad += diff * diff / s;
    }
  }
  return -0.5 * log_det - 0.5 * static_cast<double>(d) * kLog2Pi - 0.5 * quad;
}

double kl_gaussian(std::span<const double> mu_f, std::span<const double> var_f,
                   std::span<const double> mu_g, std::span<const double> var_g) {
  check_shapes(mu_f, var_f, mu_g, var_g);
  double kl = 0;
  for (std::size_t r = 0; r < mu_f.size(); ++r) {
    const double vf = at(var_f, r);
    const double vg = at(var_g, r);
    const double diff = mu_g[r] - mu_f[r];
    kl += vf / vg + diff * diff / vg - 1.0 + std::log(vg / vf);
  }
  return 0.5 * kl;
}

PartialEnergyMatrix partial_energies(const WordMixture& f, const WordMixture& g,
                                     double epsilon) {
  check_pair(f, g);
  const auto vf = variances(f);
  const auto vg = variances(g);
  PartialEnergyMatrix m;
  m.rows = f.components();
  m.cols = g.components();
  m.xi.resize(m.rows * m.cols);
  double best = -std::numeric_limits<double>::infinity();
  for (std::size_t i = 0; i < m.rows; ++i) {
    for (std::size_t j = 0; j < m.cols; ++j) {
      const double xi = log_partial_energy(f.mean(i), vf[i], g.mean(j), vg[j], epsilon);
      m.xi[i * m.cols + j] = xi;
      if (xi > best) {
        best = xi;
        m.max_index = {i, j};
      }
    }
  }
  return m;
}

double log_energy(const WordMixture& f, const WordMixture& g, double epsilon) {
  const PartialEnergyMatrix xi = partial_energies(f, g, epsilon);
  const auto p = f.weights();
  const auto q = g.weights();
  const double top = xi.max();
  double sum = 0;
  for (std::size_t i = 0; i < xi.rows; ++i) {
    for (std::size_t j = 0; j < xi.cols; ++j) {
      sum += p[i] * q[j] * std::exp(xi(i, j) - top);
    }
  }
  return top + std::log(sum);
}

LogEnergyGradient log_energy_gradient(const WordMixture& f, const WordMixture& g,
                                      double epsilon) {
  const PartialEnergyMatrix xi = partial_energies(f, g, epsilon);
  const auto p = f.weights();
  const auto q = g.weights();
  const auto vf = variances(f);
  const auto vg = variances(g);
  const std::size_t kf = xi.rows;
  const std::size_t kg = xi.cols;
  const std::size_t d = f.dim();
  const MixtureShape& sf = f.shape();
  const MixtureShape& sg = g.shape();

  // gamma_ij: posterior share of pair (i, j) in the kernel sum.
  const double top = xi.max();
  std::vector<double> gamma(kf * kg);
  double sum = 0;
  for (std::size_t i = 0; i < kf; ++i) {
    for (std::size_t j = 0; j < kg; ++j) {
      gamma[i * kg + j] = p[i] * q[j] * std::exp(xi(i, j) - top);
      sum += gamma[i * kg + j];
    }
  }
  for (auto& x : gamma) x /= sum;

  LogEnergyGradient out;
  out.value = top + std::log(sum);
  out.d_f.assign(sf.param_count(), 0.0);
  out.d_g.assign(sg.param_count(), 0.0);

  for (std::size_t i = 0; i < kf; ++i) {
    double row = 0;
    for (std::size_t j = 0; j < kg; ++j) row += gamma[i * kg + j];
    out.d_f[sf.score_offset(i)] = row - p[i];
  }
  for (std::size_t j = 0; j < kg; ++j) {
    double col = 0;
    for (std::size_t i = 0; i < kf; ++i) col += gamma[i * kg + j];
    out.d_g[sg.score_offset(j)] = col - q[j];
  }

  for (std::size_t i = 0; i < kf; ++i) {
    const auto mu_f = f.mean(i);
    for (std::size_t j = 0; j < kg; ++j) {
      const double w = gamma[i * kg + j];
      const auto mu_g = g.mean(j);
      for (std::size_t r = 0; r < d; ++r) {
        const double df = at(vf[i], r);
        const double dg = at(vg[j], r);
        const double s = df + dg + epsilon;
        const double diff = mu_f[r] - mu_g[r];
        const double d_mean = -diff / s;
        // d xi / d s for this coordinate
        const double d_s = 0.5 * (diff * diff / (s * s) - 1.0 / s);
        out.d_f[sf.mean_offset(i) + r] += w * d_mean;
        out.d_g[sg.mean_offset(j) + r] -= w * d_mean;
        const std::size_t rf = vf[i].size() == 1 ? 0 : r;
        const std::size_t rg = vg[j].size() == 1 ? 0 : r;
        out.d_f[sf.log_var_offset(i) + rf] += w * d_s * df;
        out.d_g[sg.log_var_offset(j) + rg] += w * d_s * dg;
      }
    }
  }
  return out;
}

}  // namespace w2gm
