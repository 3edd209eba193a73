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

#include "w2gm/model.hpp"

#include <algorithm>
#include <array>
#include <bit>
#include <cmath>
#include <cstring>
#include <fstream>
#include <istream>
#include <ostream>
#include <sstream>

#include "w2gm/errors.hpp"

namespace w2gm {

MixtureShape shape_of(const TrainConfig& config) {
  return MixtureShape{config.dim, config.components, config.covariance};
}

std::vector<double> softmax(std::span<const double> scores) {
  std::vector<double> out(scores.size());
  if (scores.empty()) return out;
  const double mx = *std::max_element(scores.begin(), scores.end());
  double sum = 0;
  for (std::size_t i = 0; i < scores.size(); ++i) {
    out[i] = std::exp(scores[i] - mx);
    sum += out[i];
  }
  for (auto& p : out) p /= sum;
  return out;
}

std::vector<double> WordMixture::variance(std::size_t i) const {
  auto lv = log_var(i);
  std::vector<double> v(lv.size());
  std::transform(lv.begin(), lv.end(), v.begin(), [](double x) { return std::exp(x); });
  return v;
}

double WordMixture::mean_variance(std::size_t i) const {
  auto v = variance(i);
  double s = 0;
  for (double x : v) s += x;
  return s / static_cast<double>(v.size());
}

std::vector<double> WordMixture::scores() const {
  std::vector<double> s(components());
  for (std::size_t i = 0; i < s.size(); ++i) s[i] = score(i);
  return s;
}

ParameterStore::ParameterStore(std::size_t vocab_size, MixtureShape shape)
    : vocab_size_(vocab_size), shape_(shape) {
  const std::size_t n = vocab_size * shape.param_count();
  for (int b = 0; b < 2; ++b) {
    banks_[b].assign(n, 0.0f);
    acc_[b].assign(n, 0.0f);
  }
}

WordMixture ParameterStore::mixture(Bank b, WordId w) const {
  WordMixture m(shape_);
  auto src = params(b, w);
  std::copy(src.begin(), src.end(), m.params().begin());
  return m;
}

void ParameterStore::set_mixture(Bank b, WordId w, const WordMixture& m) {
  if (!(m.shape() == shape_)) throw ConfigError("mixture shape does not match store");
  auto dst = params(b, w);
  std::transform(m.params().begin(), m.params().end(), dst.begin(),
                 [](double x) { return static_cast<float>(x); });
}

ParameterStore init_store(std::size_t vocab_size, const TrainConfig& config, Rng& rng) {
  config.validate();
  const MixtureShape shape = shape_of(config);
  ParameterStore store(vocab_size, shape);
  const double a = std::sqrt(3.0 / static_cast<double>(shape.dim));
  std::uniform_real_distribution<double> u(-a, a);
  const auto log_v = static_cast<float>(std::log(config.init_var));
  for (Bank b : {Bank::kInput, Bank::kOutput}) {
    for (WordId w = 0; w < vocab_size; ++w) {
      auto p = store.params(b, w);
      for (std::size_t i = 0; i < shape.components; ++i) {
        for (std::size_t r = 0; r < shape.dim; ++r) {
          p[shape.mean_offset(i) + r] = static_cast<float>(u(rng));
        }
        for (std::size_t r = 0; r < shape.var_size(); ++r) {
          p[shape.log_var_offset(i) + r] = log_v;
        }
        p[shape.score_offset(i)] = 0.0f;
      }
    }
  }
  return store;
}

// ---------------------------------------------------------------------------
// Binary format

namespace {

constexpr std::array<char, 4> kMagic{'W', '2', 'G', 'M'};
constexpr std::array<char, 4> kTagConfig{'C', 'O', 'N', 'F'};
constexpr std::array<char, 4> kTagScores{'S', 'C', 'O', 'R'};
constexpr std::array<char, 4> kTagAdagrad{'A', 'D', 'A', 'G'};
constexpr std::uint32_t kMaxTokenBytes = 1u << 20;

class Writer {
 public:
  explicit Writer(std::ostream& out) : out_(out) {}

  void bytes(const void* p, std::size_t n) {
    out_.write(static_cast<const char*>(p), static_cast<std::streamsize>(n));
  }
  void u32(std::uint32_t v) { le(v); }
  void u64(std::uint64_t v) { le(v); }
  void f32(float v) { le(std::bit_cast<std::uint32_t>(v)); }

 private:
  template <typename U>
  void le(U v) {
    std::array<unsigned char, sizeof(U)> buf;
    for (std::size_t i = 0; i < sizeof(U); ++i) buf[i] = static_cast<unsigned char>(v >> (8 * i));
    bytes(buf.data(), buf.size());
  }

  std::ostream& out_;
};

class Reader {
 public:
  explicit Reader(std::istream& in) : in_(in) {}

  std::uint64_t offset() const noexcept { return offset_; }

  void bytes(void* p, std::size_t n, const char* what) {
    in_.read(static_cast<char*>(p), static_cast<std::streamsize>(n));
    const auto got = static_cast<std::size_t>(in_.gcount());
    if (got != n) {
      throw FormatError(std::string("truncated file while reading ") + what, offset_ + got);
    }
    offset_ += n;
  }
  std::uint32_t u32(const char* what) { return le<std::uint32_t>(what); }
  std::uint64_t u64(const char* what) { return le<std::uint64_t>(what); }
  float f32(const char* what) { return std::bit_cast<float>(le<std::uint32_t>(what)); }

  bool at_end() { return in_.peek() == std::char_traits<char>::eof(); }

 private:
  template <typename U>
  U le(const char* what) {
    std::array<unsigned char, sizeof(U)> buf;
    bytes(buf.data(), buf.size(), what);
    U v = 0;
    for (std::size_t i = 0; i < sizeof(U); ++i) v |= static_cast<U>(buf[i]) << (8 * i);
    return v;
  }

  std::istream& in_;
  std::uint64_t offset_ = 0;
};

void write_section(Writer& w, const std::array<char, 4>& tag, std::span<const float> a,
                   std::span<const float> b) {
  w.bytes(tag.data(), tag.size());
  w.u64(4 * (a.size() + b.size()));
  for (float x : a) w.f32(x);
  for (float x : b) w.f32(x);
}

void read_floats(Reader& r, std::span<float> dst, const char* what) {
  for (auto& x : dst) x = r.f32(what);
}

std::uint32_t checked_u32(std::size_t v, const char* what) {
  if (v > UINT32_MAX) throw ConfigError(std::string(what) + " does not fit the model format");
  return static_cast<std::uint32_t>(v);
}

}  // namespace

void save_model(std::ostream& out, const ParameterStore& store, const Vocabulary& vocab,
                const TrainConfig& config, bool with_accumulators) {
  if (store.vocab_size() != vocab.size()) {
    throw ConfigError("store and vocabulary sizes differ");
  }
  const MixtureShape& shape = store.shape();
  Writer w(out);
  w.bytes(kMagic.data(), kMagic.size());
  w.u32(kModelFormatVersion);
  w.u32(checked_u32(vocab.size(), "vocabulary size"));
  w.u32(checked_u32(shape.dim, "dimension"));
  w.u32(checked_u32(shape.components, "component count"));
  w.u32(static_cast<std::uint32_t>(shape.covariance));

  for (WordId i = 0; i < vocab.size(); ++i) {
    const std::string& tok = vocab.token(i);
    w.u32(checked_u32(tok.size(), "token length"));
    w.bytes(tok.data(), tok.size());
    w.u64(vocab.count(i));
  }

  for (Bank b : {Bank::kInput, Bank::kOutput}) {
    for (WordId i = 0; i < vocab.size(); ++i) {
      auto p = store.params(b, i);
      std::vector<double> scores(shape.components);
      for (std::size_t k = 0; k < shape.components; ++k) scores[k] = p[shape.score_offset(k)];
      const auto weights = softmax(scores);
      for (std::size_t k = 0; k < shape.components; ++k) {
        w.f32(static_cast<float>(weights[k]));
        for (std::size_t r = 0; r < shape.dim; ++r) w.f32(p[shape.mean_offset(k) + r]);
        for (std::size_t r = 0; r < shape.var_size(); ++r) w.f32(p[shape.log_var_offset(k) + r]);
      }
    }
  }

  std::ostringstream conf;
  for (const auto& [k, v] : config.to_key_values()) conf << k << '=' << v << '\n';
  const std::string text = conf.str();
  w.bytes(kTagConfig.data(), kTagConfig.size());
  w.u64(text.size());
  w.bytes(text.data(), text.size());

  std::vector<float> scores[2];
  for (Bank b : {Bank::kInput, Bank::kOutput}) {
    auto& dst = scores[static_cast<int>(b)];
    for (WordId i = 0; i < vocab.size(); ++i) {
      auto p = store.params(b, i);
      for (std::size_t k = 0; k < shape.components; ++k) dst.push_back(p[shape.score_offset(k)]);
    }
  }
  write_section(w, kTagScores, scores[0], scores[1]);

  if (with_accumulators) {
    write_section(w, kTagAdagrad, store.accumulators(Bank::kInput),
                  store.accumulators(Bank::kOutput));
  }
  if (!out) throw IoError("write failed while saving model");
}

void save_model(const std::filesystem::path& path, const ParameterStore& store,
                const Vocabulary& vocab, const TrainConfig& config, bool with_accumulators) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw IoError("cannot open '" + path.string() + "' for writing");
  save_model(out, store, vocab, config, with_accumulators);
  out.close();
  if (!out) throw IoError("write failed for '" + path.string() + "'");
}

ModelFile load_model(std::istream& in) {
  Reader r(in);
  std::array<char, 4> magic{};
  r.bytes(magic.data(), magic.size(), "magic");
  if (magic != kMagic) throw FormatError("bad magic, not a w2gm model", 0);
  const std::uint64_t version_at = r.offset();
  const auto version = r.u32("format version");
  if (version != kModelFormatVersion) {
    throw FormatError("unsupported format version " + std::to_string(version), version_at);
  }

  auto positive = [&](const char* what) {
    const std::uint64_t at = r.offset();
    const auto v = r.u32(what);
    if (v == 0) throw FormatError(std::string(what) + " must be positive", at);
    return v;
  };
  const auto vocab_size = positive("vocabulary size");
  const auto dim = positive("dimension");
  const auto components = positive("component count");
  const std::uint64_t cov_at = r.offset();
  const auto cov = r.u32("covariance kind");
  if (cov > 1) throw FormatError("unknown covariance kind " + std::to_string(cov), cov_at);
  const MixtureShape shape{dim, components, static_cast<CovarianceKind>(cov)};

  std::vector<std::pair<std::string, std::uint64_t>> entries;
  entries.reserve(vocab_size);
  for (std::uint32_t i = 0; i < vocab_size; ++i) {
    const std::uint64_t at = r.offset();
    const auto len = r.u32("token length");
    if (len == 0 || len > kMaxTokenBytes) {
      throw FormatError("implausible token length " + std::to_string(len) + " for word " +
                            std::to_string(i),
                        at);
    }
    std::string tok(len, '\0');
    r.bytes(tok.data(), len, "token");
    entries.emplace_back(std::move(tok), r.u64("token count"));
  }

  ModelFile model;
  const std::uint64_t vocab_at = r.offset();
  try {
    model.vocab = Vocabulary::from_ordered(std::move(entries));
  } catch (const ConfigError& e) {
    throw FormatError(e.what(), vocab_at);
  }

  model.store = ParameterStore(vocab_size, shape);
  std::vector<float> weights[2];
  for (Bank b : {Bank::kInput, Bank::kOutput}) {
    auto& wts = weights[static_cast<int>(b)];
    wts.reserve(static_cast<std::size_t>(vocab_size) * components);
    for (WordId i = 0; i < vocab_size; ++i) {
      auto p = model.store.params(b, i);
      for (std::size_t k = 0; k < components; ++k) {
        wts.push_back(r.f32("mixture weight"));
        read_floats(r, p.subspan(shape.mean_offset(k), dim), "mean");
        read_floats(r, p.subspan(shape.log_var_offset(k), shape.var_size()), "log-variance");
      }
    }
  }

  bool have_scores = false;
  TrainConfig config;
  config.dim = dim;
  config.components = components;
  config.covariance = shape.covariance;

  while (!r.at_end()) {
    const std::uint64_t tag_at = r.offset();
    std::array<char, 4> tag{};
    r.bytes(tag.data(), tag.size(), "section tag");
    const std::uint64_t len_at = r.offset();
    const auto len = r.u64("section length");
    if (tag == kTagConfig) {
      if (len > (1u << 20)) throw FormatError("config section too large", len_at);
      std::string text(len, '\0');
      r.bytes(text.data(), len, "config section");
      std::map<std::string, std::string> kv;
      std::istringstream lines(text);
      std::string line;
      while (std::getline(lines, line)) {
        if (line.empty()) continue;
        const auto eq = line.find('=');
        if (eq == std::string::npos) throw FormatError("bad config line '" + line + "'", len_at);
        kv[line.substr(0, eq)] = line.substr(eq + 1);
      }
      try {
        config.apply_key_values(kv);
      } catch (const ConfigError& e) {
        throw FormatError(e.what(), len_at);
      }
      if (shape_of(config) != shape) {
        throw FormatError("config section disagrees with header shape", len_at);
      }
    } else if (tag == kTagScores || tag == kTagAdagrad) {
      const bool scores = tag == kTagScores;
      const std::uint64_t expected =
          scores ? 4ull * 2 * vocab_size * components : 4ull * 2 * model.store.bank(Bank::kInput).size();
      if (len != expected) {
        throw FormatError("section size " + std::to_string(len) + " does not match shape (expected " +
                              std::to_string(expected) + ")",
                          len_at);
      }
      for (Bank b : {Bank::kInput, Bank::kOutput}) {
        if (scores) {
          for (WordId i = 0; i < vocab_size; ++i) {
            auto p = model.store.params(b, i);
            for (std::size_t k = 0; k < components; ++k) p[shape.score_offset(k)] = r.f32("score");
          }
        } else {
          read_floats(r, model.store.accumulators(b), "accumulator");
        }
      }
      (scores ? have_scores : model.has_accumulators) = true;
    } else {
      throw FormatError("unknown section tag '" + std::string(tag.data(), tag.size()) + "'", tag_at);
    }
  }

  if (!have_scores) {
    for (Bank b : {Bank::kInput, Bank::kOutput}) {
      const auto& wts = weights[static_cast<int>(b)];
      for (WordId i = 0; i < vocab_size; ++i) {
        auto p = model.store.params(b, i);
        for (std::size_t k = 0; k < components; ++k) {
          const float wt = wts[i * components + k];
          if (!(wt > 0)) throw FormatError("non-positive mixture weight without score section", 0);
          p[shape.score_offset(k)] = std::log(wt);
        }
      }
    }
  }
  model.config = config;
  return model;
}

ModelFile load_model(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open model '" + path.string() + "'");
  return load_model(in);
}

void dump_model(std::ostream& out, const ParameterStore& store, const Vocabulary& vocab,
                Bank bank) {
  const auto& shape = store.shape();
  for (WordId w = 0; w < vocab.size(); ++w) {
    const WordMixture m = store.mixture(bank, w);
    const auto weights = m.weights();
    for (std::size_t i = 0; i < shape.components; ++i) {
      out << vocab.token(w) << ':' << i << "  " << weights[i] << ' ';
      for (double x : m.mean(i)) out << ' ' << x;
      out << ' ';
      for (double v : m.variance(i)) out << ' ' << v;
      out << '\n';
    }
  }
}

}  // namespace w2gm
