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

#include "w2gm/cli.hpp"

#include <CLI11.hpp>

#include <cstdio>
#include <fstream>
#include <iomanip>
#include <iostream>
#include <sstream>

#include "w2gm/corpus.hpp"
#include "w2gm/errors.hpp"
#include "w2gm/eval.hpp"
#include "w2gm/metrics.hpp"
#include "w2gm/model.hpp"
#include "w2gm/trainer.hpp"

namespace w2gm {

std::map<std::string, std::string> read_config_file(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open config file '" + path.string() + "'");
  std::map<std::string, std::string> kv;
  std::string line;
  std::size_t lineno = 0;
  auto trim = [](std::string s) {
    const auto b = s.find_first_not_of(" \t\r");
    const auto e = s.find_last_not_of(" \t\r");
    return b == std::string::npos ? std::string() : s.substr(b, e - b + 1);
  };
  while (std::getline(in, line)) {
    ++lineno;
    line = trim(line);
    if (line.empty() || line[0] == '#') continue;
    const auto eq = line.find('=');
    if (eq == std::string::npos) {
      throw ConfigError(path.string() + ":" + std::to_string(lineno) + ": expected key=value");
    }
    kv[trim(line.substr(0, eq))] = trim(line.substr(eq + 1));
  }
  return kv;
}

namespace {

// Usage problems found after CLI11 has parsed (bad values, conflicting
// flags) map to exit code 2 like parse errors.
class UsageError : public Error {
 public:
  using Error::Error;
};

std::string fixed2(double v) {
  std::ostringstream os;
  os << std::fixed << std::setprecision(2) << v;
  return os.str();
}

std::string find_config_arg(const std::vector<std::string>& args) {
  for (std::size_t i = 1; i < args.size(); ++i) {
    if (args[i] == "--config" && i + 1 < args.size()) return args[i + 1];
    if (args[i].rfind("--config=", 0) == 0) return args[i].substr(9);
  }
  return {};
}

void add_train_flags(CLI::App* cmd, TrainConfig& c, std::string& cov) {
  cmd->add_option("--dim", c.dim, "embedding dimension D")->capture_default_str();
  cmd->add_option("--k", c.components, "mixture components per word")->capture_default_str();
  cmd->add_option("--window", c.window, "context window on each side")->capture_default_str();
  cmd->add_option("--margin", c.margin, "hinge margin")->capture_default_str();
  cmd->add_option("--batch", c.batch_size, "triples per mini-batch")->capture_default_str();
  cmd->add_option("--lr-start", c.lr_start, "initial learning rate")->capture_default_str();
  cmd->add_option("--lr-end", c.lr_end, "final learning rate")->capture_default_str();
  cmd->add_option("--subsample", c.subsample_t, "subsampling threshold t")->capture_default_str();
  cmd->add_option("--min-count", c.min_count, "minimum token count")->capture_default_str();
  cmd->add_option("--epsilon", c.epsilon, "variance stabilizer")->capture_default_str();
  cmd->add_option("--init-var", c.init_var, "initial variance")->capture_default_str();
  cmd->add_option("--epochs", c.epochs, "passes over the corpus")->capture_default_str();
  cmd->add_option("--covariance", cov, "spherical or diagonal")
      ->check(CLI::IsMember({"spherical", "diagonal"}))
      ->capture_default_str();
  cmd->add_option("--workers", c.workers, "training threads")->capture_default_str();
  cmd->add_option("--seed", c.seed, "random seed")->capture_default_str();
}

int cmd_train(const std::string& corpus, const std::string& out_path, TrainConfig config,
              const std::string& cov, bool checkpoint, std::ostream& out, std::ostream& err) {
  try {
    config.covariance = parse_covariance_kind(cov);
    config.validate();
  } catch (const ConfigError& e) {
    throw UsageError(e.what());
  }
  const TrainResult r = train(std::filesystem::path(corpus), config, &err);
  save_model(std::filesystem::path(out_path), r.store, r.vocab, config, checkpoint);
  out << "wrote " << out_path << "  V " << r.vocab.size() << "  D " << config.dim << "  K "
      << config.components << "  covariance " << to_string(config.covariance) << '\n';
  return kExitOk;
}

int cmd_eval_sim(const std::string& model_path, const std::string& dataset,
                 const std::string& metric, std::ostream& out) {
  const ModelFile model = load_model(std::filesystem::path(model_path));
  const auto pairs = read_similarity_dataset(std::filesystem::path(dataset));
  const auto m = parse_measure(metric);
  const SimilarityReport r =
      evaluate_similarity(model.store, model.vocab, pairs, m, model.config.epsilon);
  out << std::filesystem::path(dataset).filename().string() << "  metric " << metric
      << "  pairs " << r.pairs << "  dropped " << r.dropped << "  rho*100 "
      << (r.rho ? fixed2(*r.rho * 100.0) : std::string("degenerate")) << '\n';
  return kExitOk;
}

int cmd_eval_entail(const std::string& model_path, const std::string& dataset,
                    const std::string& metric, std::ostream& out) {
  const ModelFile model = load_model(std::filesystem::path(model_path));
  const auto pairs = read_entailment_dataset(std::filesystem::path(dataset));
  const auto m = metric == "kl" ? SimilarityMeasure::kMaxNegKl : SimilarityMeasure::kMaxCosine;
  const EntailmentReport r =
      evaluate_entailment(model.store, model.vocab, pairs, m, model.config.epsilon);
  out << std::filesystem::path(dataset).filename().string() << "  metric " << metric
      << "  pairs " << r.pairs << "  dropped " << r.dropped << "  best_ap "
      << std::setprecision(6) << r.sweep.best_ap << "  best_f1 " << r.sweep.best_f1
      << "  f1_threshold " << r.sweep.best_f1_threshold << '\n';
  return kExitOk;
}

int cmd_neighbors(const std::string& model_path, const std::string& query, std::size_t n,
                  const std::string& metric, std::ostream& out) {
  const ModelFile model = load_model(std::filesystem::path(model_path));
  const NeighborQuery q = parse_query(query, model.vocab, model.store.shape().components);
  std::vector<Neighbor> result;
  const bool componentwise = metric == "cos";
  if (componentwise) {
    result = NeighborIndex(model.store).query(q, n);
  } else {
    result = rank_words(model.store, q.word, parse_measure(metric), model.config.epsilon, n);
  }
  for (const auto& nb : result) {
    out << model.vocab.token(nb.word);
    if (componentwise) out << ':' << nb.component;
    out << '\t' << nb.score << '\n';
  }
  return kExitOk;
}

}  // namespace

int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  TrainConfig config;
  try {
    if (const auto path = find_config_arg(args); !path.empty()) {
      config.apply_key_values(read_config_file(path));
    }
  } catch (const Error& e) {
    err << "error: " << e.what() << '\n';
    return kExitUsage;
  }

  CLI::App app{"Gaussian mixture word embeddings: training and evaluation", "w2gm"};
  app.require_subcommand(1, 1);

  std::string corpus, out_path = "model.bin", config_path;
  std::string cov(to_string(config.covariance));
  bool checkpoint = false;
  auto* train_cmd = app.add_subcommand("train", "train a model on a text corpus");
  train_cmd->add_option("--corpus", corpus, "whitespace-tokenized text, one sentence per line")
      ->required();
  train_cmd->add_option("--out", out_path, "model file to write")->capture_default_str();
  train_cmd->add_option("--config", config_path, "key=value defaults (flags take precedence)");
  train_cmd->add_flag("--checkpoint", checkpoint, "also store Adagrad accumulators");
  add_train_flags(train_cmd, config, cov);

  std::string model_path, dataset, metric_sim = "mc", metric_entail = "kl";
  auto* sim_cmd = app.add_subcommand("eval-sim", "Spearman correlation on a similarity dataset");
  sim_cmd->add_option("--model", model_path)->required();
  sim_cmd->add_option("--dataset", dataset, "TSV word1 word2 score")->required();
  sim_cmd->add_option("--metric", metric_sim, "mc | el | me | avg")
      ->check(CLI::IsMember({"mc", "el", "me", "avg"}))
      ->capture_default_str();

  auto* ent_cmd = app.add_subcommand("eval-entail", "best AP / F1 on an entailment dataset");
  ent_cmd->add_option("--model", model_path)->required();
  ent_cmd->add_option("--dataset", dataset, "TSV word1 word2 label")->required();
  ent_cmd->add_option("--metric", metric_entail, "cos | kl")
      ->check(CLI::IsMember({"cos", "kl"}))
      ->capture_default_str();

  std::string query, metric_nb = "cos";
  std::size_t n = 10;
  auto* nb_cmd = app.add_subcommand("neighbors", "nearest neighbors of a word or word:i");
  nb_cmd->add_option("--model", model_path)->required();
  nb_cmd->add_option("--query", query, "token or token:i")->required();
  nb_cmd->add_option("--n", n, "number of neighbors")->capture_default_str();
  nb_cmd->add_option("--metric", metric_nb, "cos (per component) | mc | el | me | avg | kl")
      ->check(CLI::IsMember({"cos", "mc", "el", "me", "avg", "kl"}))
      ->capture_default_str();

  std::string bank = "input";
  auto* dump_cmd = app.add_subcommand("dump", "print every mixture component as text");
  dump_cmd->add_option("--model", model_path)->required();
  dump_cmd->add_option("--bank", bank, "input | output")
      ->check(CLI::IsMember({"input", "output"}))
      ->capture_default_str();

  std::uint64_t min_count = config.min_count;
  auto* vocab_cmd = app.add_subcommand("vocab", "print token<TAB>count by id");
  auto* vocab_corpus = vocab_cmd->add_option("--corpus", corpus);
  auto* vocab_model = vocab_cmd->add_option("--model", model_path);
  vocab_corpus->excludes(vocab_model);
  vocab_cmd->add_option("--min-count", min_count)->capture_default_str();

  std::vector<const char*> argv;
  argv.reserve(args.size());
  for (const auto& a : args) argv.push_back(a.c_str());
  try {
    app.parse(static_cast<int>(argv.size()), argv.data());
  } catch (const CLI::CallForHelp&) {
    out << app.help();
    return kExitOk;
  } catch (const CLI::ParseError& e) {
    err << "usage error: " << e.what() << '\n';
    const auto subs = app.get_subcommands();
    err << (subs.empty() ? app.help() : subs.front()->help());
    return kExitUsage;
  }

  try {
    if (*train_cmd) return cmd_train(corpus, out_path, config, cov, checkpoint, out, err);
    if (*sim_cmd) return cmd_eval_sim(model_path, dataset, metric_sim, out);
    if (*ent_cmd) return cmd_eval_entail(model_path, dataset, metric_entail, out);
    if (*nb_cmd) return cmd_neighbors(model_path, query, n, metric_nb, out);
    if (*dump_cmd) {
      const ModelFile model = load_model(std::filesystem::path(model_path));
      dump_model(out, model.store, model.vocab, bank == "output" ? Bank::kOutput : Bank::kInput);
      return kExitOk;
    }
    if (*vocab_cmd) {
      if (corpus.empty() == model_path.empty()) {
        throw UsageError("vocab needs exactly one of --corpus or --model");
      }
      if (!corpus.empty()) {
        build_vocab(std::filesystem::path(corpus), min_count).write_tsv(out);
      } else {
        load_model(std::filesystem::path(model_path)).vocab.write_tsv(out);
      }
      return kExitOk;
    }
  } catch (const UsageError& e) {
    err << "usage error: " << e.what() << '\n';
    return kExitUsage;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << '\n';
    return kExitFailure;
  }
  return kExitUsage;
}

}  // namespace w2gm
