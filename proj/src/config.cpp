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

#include "w2gm/config.hpp"

#include <charconv>
#include <cmath>
#include <sstream>

#include "w2gm/errors.hpp"

namespace w2gm {

std::string_view to_string(CovarianceKind kind) {
  return kind == CovarianceKind::kDiagonal ? "diagonal" : "spherical";
}

CovarianceKind parse_covariance_kind(std::string_view name) {
  if (name == "spherical" || name == "0") return CovarianceKind::kSpherical;
  if (name == "diagonal" || name == "1") return CovarianceKind::kDiagonal;
  throw ConfigError("unknown covariance kind '" + std::string(name) + "'");
}

void TrainConfig::validate() const {
  auto require = [](bool ok, const char* what) {
    if (!ok) throw ConfigError(std::string("invalid config: ") + what);
  };
  require(dim >= 1, "dim must be >= 1");
  require(components >= 1, "components must be >= 1");
  require(window >= 1, "window must be >= 1");
  require(std::isfinite(margin) && margin > 0, "margin must be > 0");
  require(batch_size >= 1, "batch_size must be >= 1");
  require(std::isfinite(lr_start) && lr_start >= 0, "lr_start must be >= 0");
  require(std::isfinite(lr_end) && lr_end >= 0, "lr_end must be >= 0");
  require(lr_end <= lr_start, "lr_end must not exceed lr_start");
  require(std::isfinite(subsample_t) && subsample_t > 0, "subsample_t must be > 0");
  require(min_count >= 1, "min_count must be >= 1");
  require(std::isfinite(epsilon) && epsilon >= 0, "epsilon must be >= 0");
  require(std::isfinite(init_var) && init_var > 0, "init_var must be > 0");
  require(epochs >= 1, "epochs must be >= 1");
  require(workers >= 1, "workers must be >= 1");
}

namespace {

std::string format_double(double v) {
  std::ostringstream os;
  os.precision(17);
  os << v;
  return os.str();
}

template <typename T>
T parse_number(const std::string& key, const std::string& value) {
  T out{};
  const char* first = value.data();
  const char* last = value.data() + value.size();
  auto [ptr, ec] = std::from_chars(first, last, out);
  if (ec != std::errc() || ptr != last) {
    throw ConfigError("config key '" + key + "': cannot parse '" + value + "'");
  }
  return out;
}

}  // namespace

std::map<std::string, std::string> TrainConfig::to_key_values() const {
  return {
      {"dim", std::to_string(dim)},
      {"k", std::to_string(components)},
      {"window", std::to_string(window)},
      {"margin", format_double(margin)},
      {"batch", std::to_string(batch_size)},
      {"lr-start", format_double(lr_start)},
      {"lr-end", format_double(lr_end)},
      {"subsample", format_double(subsample_t)},
      {"min-count", std::to_string(min_count)},
      {"epsilon", format_double(epsilon)},
      {"init-var", format_double(init_var)},
      {"epochs", std::to_string(epochs)},
      {"covariance", std::string(to_string(covariance))},
      {"workers", std::to_string(workers)},
      {"seed", std::to_string(seed)},
  };
}

void TrainConfig::apply_key_values(const std::map<std::string, std::string>& kv) {
  for (const auto& [key, value] : kv) {
    if (key == "dim") dim = parse_number<std::size_t>(key, value);
    else if (key == "k") components = parse_number<std::size_t>(key, value);
    else if (key == "window") window = parse_number<std::size_t>(key, value);
    else if (key == "margin") margin = parse_number<double>(key, value);
    else if (key == "batch") batch_size = parse_number<std::size_t>(key, value);
    else if (key == "lr-start") lr_start = parse_number<double>(key, value);
    else if (key == "lr-end") lr_end = parse_number<double>(key, value);
    else if (key == "subsample") subsample_t = parse_number<double>(key, value);
    else if (key == "min-count") min_count = parse_number<std::uint64_t>(key, value);
    else if (key == "epsilon") epsilon = parse_number<double>(key, value);
    else if (key == "init-var") init_var = parse_number<double>(key, value);
    else if (key == "epochs") epochs = parse_number<std::size_t>(key, value);
    else if (key == "covariance") covariance = parse_covariance_kind(value);
    else if (key == "workers") workers = parse_number<std::size_t>(key, value);
    else if (key == "seed") seed = parse_number<std::uint64_t>(key, value);
    else throw ConfigError("unknown config key '" + key + "'");
  }
}

}  // namespace w2gm
