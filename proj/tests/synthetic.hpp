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
#include <fstream>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include <unistd.h>

namespace w2gm::synthetic {

inline const std::vector<std::string> kRiverCluster{"river", "water", "stream", "lake",
                                                    "shore", "fish",  "boat",   "flood"};
inline const std::vector<std::string> kMusicCluster{"guitar", "drum", "song",   "piano",
                                                    "melody", "band", "rhythm", "chord"};
inline const std::string kPolysemous = "bankrock";

/// Background vocabulary that never shares a sentence with the topic words.
inline std::string background_word(std::size_t i) { return "bg" + std::to_string(i); }

/// Repeating block: one river sentence holding the polysemous word, `plain`
/// river sentences without it, the same for music, then two background
/// sentences. The polysemous word thus appears half the time among river
/// words and half among music words, and the background supplies negatives
/// unrelated to either topic.
inline std::string polysemy_corpus(std::size_t sentences, std::size_t sentence_len,
                                   std::uint64_t seed, std::size_t background = 100,
                                   std::size_t plain = 1) {
  std::mt19937_64 rng(seed);
  std::uniform_int_distribution<std::size_t> pick(0, kRiverCluster.size() - 1);
  std::uniform_int_distribution<std::size_t> pick_bg(0, background - 1);
  std::uniform_int_distribution<std::size_t> where(0, sentence_len);
  std::ostringstream out;
  for (std::size_t s = 0; s < sentences; ++s) {
    const std::size_t topic = plain + 1;
    const std::size_t slot = s % (2 * topic + 2);
    std::vector<std::string> words;
    for (std::size_t k = 0; k < sentence_len; ++k) {
      if (slot < topic) {
        words.push_back(kRiverCluster[pick(rng)]);
      } else if (slot < 2 * topic) {
        words.push_back(kMusicCluster[pick(rng)]);
      } else {
        words.push_back(background_word(pick_bg(rng)));
      }
    }
    if (slot == 0 || slot == topic) {
      words.insert(words.begin() + static_cast<std::ptrdiff_t>(where(rng)), kPolysemous);
    }
    for (std::size_t k = 0; k < words.size(); ++k) out << (k ? " " : "") << words[k];
    out << '\n';
  }
  return out.str();
}

/// Writes `text` to a fresh file under the system temp directory.
inline std::filesystem::path write_temp(const std::string& name, const std::string& text) {
  const auto path = std::filesystem::temp_directory_path() / (std::to_string(::getpid()) + "_" + name);
  std::ofstream(path, std::ios::binary) << text;
  return path;
}

}  // namespace w2gm::synthetic
