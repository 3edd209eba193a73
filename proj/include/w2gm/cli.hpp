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

#include <filesystem>
#include <iosfwd>
#include <map>
#include <string>
#include <vector>

#include "w2gm/config.hpp"

namespace w2gm {

inline constexpr int kExitOk = 0;
inline constexpr int kExitFailure = 1;
inline constexpr int kExitUsage = 2;

/// Reads a flat `key=value` file; `#` starts a comment line. Keys are the
/// long flag names of `train` (dim, k, window, ...).
std::map<std::string, std::string> read_config_file(const std::filesystem::path& path);

/// Entry point behind the w2gm binary. args[0] is the program name.
/// Reports go to `out`, progress and errors to `err`; returns the exit code.
int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace w2gm
