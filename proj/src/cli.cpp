// Copyright 2026 The extsum Authors.
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

#include "extsum/cli.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <deque>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>

#include "CLI11.hpp"
#include "json.hpp"

#include "extsum/corpus.hpp"
#include "extsum/errors.hpp"
#include "extsum/evaluation.hpp"
#include "extsum/model.hpp"
#include "extsum/oracle.hpp"
#include "extsum/rouge.hpp"
#include "extsum/run_config.hpp"
#include "extsum/training.hpp"

namespace extsum::cli {
namespace {

namespace fs = std::filesystem;

constexpr const char* kRunConfigFile = "run_config.txt";
constexpr const char* kBestCheckpoint = "best.ckpt";
constexpr const char* kTrainReport = "train_report.json";
constexpr const char* kEvalReport = "eval_report.json";
constexpr const char* kSummaries = "summaries.jsonl";
constexpr const char* kInspectReport = "inspect.json";

// Options shared by every subcommand.
struct Common {
  std::string config;
  std::optional<std::uint64_t> seed;
  std::string out = ".";
  std::vector<std::string> overrides;
  // Subcommand flags that map onto config keys, applied last.
  // deque: options hold references to the elements.
  std::deque<std::pair<std::string, std::optional<std::string>>> keyed;

  void attach(CLI::App* app, bool with_out = true) {
    app->add_option("--config", config, "Flat key = value configuration file");
    app->add_option("--seed", seed, "Random seed");
    if (with_out) app->add_option("--out", out, "Output directory");
    app->add_option("--set", overrides, "Override a configuration key (key=value)");
  }

  void flag(CLI::App* app, const std::string& name, const std::string& key,
            const std::string& help) {
    keyed.emplace_back(key, std::nullopt);
    app->add_option(name, keyed.back().second, help);
  }

  RunConfig resolve() const {
    RunConfig cfg;
    if (!config.empty()) cfg.merge_file(config);
    for (const auto& o : overrides) cfg.set(o);
    for (const auto& [key, value] : keyed)
      if (value) cfg.set(key, *value);
    if (seed) cfg.set("seed", std::to_string(*seed));
    cfg.validate();
    return cfg;
  }
};

void write_json(const fs::path& path, const nlohmann::json& j) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write " + path.string());
  out << j.dump(2) << '\n';
}

std::string join(const Sentence& s) {
  std::string out;
  for (std::size_t i = 0; i < s.size(); ++i) {
    if (i) out.push_back(' ');
    out += s[i];
  }
  return out;
}

std::vector<Document> read_docs(const std::string& path, const RunConfig& cfg,
                                std::ostream& err) {
  LoadedCorpus c = load_corpus(path, cfg.corpus);
  if (c.skipped_empty) {
    err << "warning: skipped " << c.skipped_empty << " empty document(s) in " << path
        << '\n';
  }
  return std::move(c.documents);
}

// ---------------------------------------------------------------- make-labels

struct MakeLabelsArgs {
  Common common;
  std::string input;
  std::string output;
  bool overwrite = false;
};

int make_labels(const MakeLabelsArgs& a, std::ostream& out, std::ostream& err) {
  const RunConfig cfg = a.common.resolve();
  std::vector<Document> docs = read_docs(a.input, cfg, err);
  if (!a.overwrite) {
    for (const auto& d : docs) {
      if (d.labels) {
        err << "error: document '" << d.id
            << "' already has labels; pass --overwrite to replace them\n";
        return 1;
      }
    }
  }
  oracle::LabeledCorpus labeled = oracle::label_corpus(std::move(docs), cfg.oracle);

  const fs::path out_path(a.output);
  if (out_path.has_parent_path()) fs::create_directories(out_path.parent_path());
  {
    std::ofstream f(out_path);
    if (!f) throw std::runtime_error("cannot write " + out_path.string());
    write_corpus(f, labeled.documents);
  }
  const nlohmann::json stats = {{"documents", labeled.stats.documents},
                                {"mean_selected", labeled.stats.mean_selected},
                                {"mean_score", labeled.stats.mean_score},
                                {"metric", oracle::metric_name(cfg.oracle.metric)}};
  write_json(out_path.string() + ".stats.json", stats);
  cfg.write(out_path.string() + ".run_config.txt");
  out << "labeled " << labeled.stats.documents << " documents, mean selected "
      << labeled.stats.mean_selected << ", mean " << oracle::metric_name(cfg.oracle.metric)
      << ' ' << labeled.stats.mean_score << '\n';
  return 0;
}

// ---------------------------------------------------------------------- train

struct TrainArgs {
  Common common;
  std::string train_path;
  std::string valid_path;
};

int train_cmd(const TrainArgs& a, std::ostream& out, std::ostream& err) {
  const RunConfig cfg = a.common.resolve();
  const std::vector<Document> train_docs = read_docs(a.train_path, cfg, err);
  const std::vector<Document> valid_docs = read_docs(a.valid_path, cfg, err);
  if (train_docs.empty()) throw ConfigError("training corpus is empty");

  const Vocabulary vocab = build_vocab(train_docs, cfg.corpus.vocab_cap);
  // Data/mode mismatches surface here, before any parameter is touched.
  const auto train_set = make_examples(train_docs, vocab, cfg.train.mode);
  const auto valid_set = make_examples(valid_docs, vocab, cfg.train.mode);

  ModelConfig mc = cfg.model;
  mc.vocab_size = vocab.size();
  mc.embedding_dim = cfg.corpus.embedding_dim;
  mc.max_abs_positions = cfg.corpus.max_sentences;
  mc.decoder_enabled = cfg.train.mode == TrainMode::kAbstractive;
  Model model(mc);

  Rng rng(cfg.seed);
  if (!cfg.word_vectors.empty()) {
    const WordVectors wv =
        load_word_vectors(cfg.word_vectors, vocab, mc.embedding_dim, rng);
    err << "word vectors cover " << wv.covered << " of "
        << vocab.size() - Vocabulary::kNumReserved << " tokens\n";
    model.initialize(rng, &wv.matrix);
  } else {
    model.initialize(rng);
  }

  const fs::path dir(a.common.out);
  fs::create_directories(dir);
  cfg.write(dir / kRunConfigFile);

  TrainConfig tc = cfg.train;
  tc.seed = cfg.seed;
  TrainReport report = train(model, train_set, valid_set, tc, [&](const EpochRecord& e) {
    out << "epoch " << e.epoch << " train_loss " << e.train_loss << " valid_loss "
        << e.valid_loss << (e.improved ? " *" : "") << '\n';
  });
  report.best_checkpoint = kBestCheckpoint;
  save_checkpoint(dir / kBestCheckpoint, model, vocab);

  nlohmann::json j = report.to_json();
  if (tc.mode == TrainMode::kExtractive) {
    j["final_train_accuracy"] = label_accuracy(model, train_set);
  } else {
    j["final_train_perplexity"] =
        evaluate_loss(model, train_set, TrainMode::kAbstractive).perplexity();
  }
  write_json(dir / kTrainReport, j);
  out << "best epoch " << report.best_epoch << ", stopped at epoch "
      << report.stopped_epoch << '\n';
  return 0;
}

// ------------------------------------------------------------------ summarize

struct ModelArgs {
  Common common;
  std::string checkpoint;
  std::string corpus;
};

std::optional<Checkpoint> maybe_load(const std::string& path,
                                     const eval::SelectionPolicy& policy) {
  if (!policy.uses_probabilities()) return std::nullopt;
  if (path.empty()) {
    throw ConfigError("policy " + policy.str() + " needs --checkpoint");
  }
  return load_checkpoint(path);
}

int summarize_cmd(const ModelArgs& a, std::ostream& out, std::ostream& err) {
  const RunConfig cfg = a.common.resolve();
  const auto limit = rouge::LengthLimit::parse(cfg.limit);
  const auto policy = eval::SelectionPolicy::parse(cfg.policy, limit);
  const std::optional<Checkpoint> ck = maybe_load(a.checkpoint, policy);
  const std::vector<Document> docs = read_docs(a.corpus, cfg, err);

  const fs::path dir(a.common.out);
  fs::create_directories(dir);
  cfg.write(dir / kRunConfigFile);
  std::ofstream f(dir / kSummaries);
  if (!f) throw std::runtime_error("cannot write summaries");
  for (const auto& d : docs) {
    std::vector<double> probs;
    if (ck) probs = predict(ck->model, encode(d, ck->vocab)).probabilities;
    const auto selected = eval::select(probs, d, policy);
    nlohmann::json row = {{"id", d.id}, {"selected_indices", selected}};
    nlohmann::json sentences = nlohmann::json::array();
    for (std::size_t i : selected) sentences.push_back(join(d.sentences[i]));
    row["summary_sentences"] = std::move(sentences);
    row["probabilities"] = ck ? nlohmann::json(probs) : nlohmann::json(nullptr);
    f << row.dump() << '\n';
  }
  out << "wrote " << docs.size() << " summaries to " << (dir / kSummaries).string()
      << '\n';
  return 0;
}

// ------------------------------------------------------------------- evaluate

struct EvaluateArgs {
  ModelArgs model;
  std::optional<std::string> protocol;
  bool verbose = false;
  std::string tune_range;
  std::string valid_path;
};

void apply_protocol(RunConfig& cfg, const std::string& protocol) {
  if (protocol == "recall@75bytes") {
    cfg.set("limit", "bytes:75");
    cfg.set("flavor", "recall");
  } else if (protocol == "recall@275bytes") {
    cfg.set("limit", "bytes:275");
    cfg.set("flavor", "recall");
  } else if (protocol == "recall@75words") {
    cfg.set("limit", "words:75");
    cfg.set("flavor", "recall");
  } else if (protocol == "f1") {
    cfg.set("limit", "none");
    cfg.set("flavor", "f1");
  } else {
    throw ConfigError("unknown protocol '" + protocol + "'");
  }
}

std::vector<std::size_t> parse_range(const std::string& text) {
  const auto colon = text.find(':');
  try {
    if (colon == std::string::npos) return {std::stoul(text)};
    const std::size_t lo = std::stoul(text.substr(0, colon));
    const std::size_t hi = std::stoul(text.substr(colon + 1));
    std::vector<std::size_t> ks;
    for (std::size_t k = std::max<std::size_t>(lo, 1); k <= hi; ++k) ks.push_back(k);
    return ks;
  } catch (const std::logic_error&) {
    throw ConfigError("invalid k range '" + text + "' (expected K or LO:HI)");
  }
}

void print_table(std::ostream& out, const eval::CorpusReport& r) {
  char line[128];
  out << "policy " << r.policy << "  limit " << r.limit << "  flavor " << r.flavor
      << "  documents " << r.documents.size() << '\n';
  std::snprintf(line, sizeof line, "  %-8s %.6f\n", "ROUGE-1", r.rouge1);
  out << line;
  std::snprintf(line, sizeof line, "  %-8s %.6f\n", "ROUGE-2", r.rouge2);
  out << line;
  std::snprintf(line, sizeof line, "  %-8s %.6f\n", "ROUGE-L", r.rougeL);
  out << line;
}

int evaluate_cmd(const EvaluateArgs& a, std::ostream& out, std::ostream& err) {
  RunConfig cfg = a.model.common.resolve();
  if (a.protocol) apply_protocol(cfg, *a.protocol);
  const auto limit = rouge::LengthLimit::parse(cfg.limit);
  const auto flavor = eval::parse_flavor(cfg.flavor);
  const auto variant = eval::parse_variant(cfg.metric);

  std::optional<std::size_t> tuned_k;
  std::optional<Checkpoint> ck;
  eval::Scorer scorer;
  if (!a.tune_range.empty()) {
    if (a.valid_path.empty()) throw ConfigError("--tune-k needs --valid");
    if (a.model.checkpoint.empty()) throw ConfigError("--tune-k needs --checkpoint");
    ck = load_checkpoint(a.model.checkpoint);
    scorer = eval::model_scorer(ck->model, ck->vocab);
    const auto valid = read_docs(a.valid_path, cfg, err);
    const auto ks = parse_range(a.tune_range);
    tuned_k = eval::tune_k(valid, scorer, ks, variant);
    cfg.set("policy", "topk:" + std::to_string(*tuned_k));
  }
  const auto policy = eval::SelectionPolicy::parse(cfg.policy, limit);
  if (!ck) {
    ck = maybe_load(a.model.checkpoint, policy);
    if (ck) scorer = eval::model_scorer(ck->model, ck->vocab);
  }
  const std::vector<Document> docs = read_docs(a.model.corpus, cfg, err);
  const eval::CorpusReport report =
      eval::evaluate_corpus(docs, scorer, policy, limit, flavor);

  const fs::path dir(a.model.common.out);
  fs::create_directories(dir);
  cfg.write(dir / kRunConfigFile);
  nlohmann::json j = report.to_json(a.verbose);
  j["metric"] = cfg.metric;
  if (tuned_k) j["tuned_k"] = *tuned_k;
  write_json(dir / kEvalReport, j);
  print_table(out, report);
  return 0;
}

// -------------------------------------------------------------------- inspect

struct InspectArgs {
  ModelArgs model;
  std::string id;
};

int inspect_cmd(const InspectArgs& a, std::ostream& out, std::ostream& err) {
  const RunConfig cfg = a.model.common.resolve();
  if (a.model.checkpoint.empty()) throw ConfigError("inspect needs --checkpoint");
  const Checkpoint ck = load_checkpoint(a.model.checkpoint);
  const std::vector<Document> docs = read_docs(a.model.corpus, cfg, err);

  const Document* doc = nullptr;
  if (a.id.empty()) {
    if (docs.size() != 1) {
      err << "error: --id is required when the corpus holds " << docs.size()
          << " documents\n";
      return 1;
    }
    doc = &docs.front();
  } else {
    for (const auto& d : docs)
      if (d.id == a.id) doc = &d;
    if (!doc) {
      err << "error: no document with id '" << a.id << "'\n";
      return 1;
    }
  }

  const Prediction p = predict(ck.model, encode(*doc, ck.vocab));
  static constexpr const char* kFactors[] = {"content", "salience", "novelty",
                                             "abs_pos", "rel_pos", "bias"};
  auto factor = [](const SentenceScoreBreakdown& b, int k) {
    const double v[] = {b.content, b.salience, b.novelty, b.abs_pos, b.rel_pos, b.bias};
    return v[k];
  };
  // Min-max per factor over the document; constant columns map to 0.
  double lo[6], hi[6];
  for (int k = 0; k < 6; ++k) {
    lo[k] = hi[k] = factor(p.breakdowns[0], k);
    for (const auto& b : p.breakdowns) {
      lo[k] = std::min(lo[k], factor(b, k));
      hi[k] = std::max(hi[k], factor(b, k));
    }
  }
  auto normalized = [&](const SentenceScoreBreakdown& b, int k) {
    return hi[k] > lo[k] ? (factor(b, k) - lo[k]) / (hi[k] - lo[k]) : 0.0;
  };

  nlohmann::json rows = nlohmann::json::array();
  for (std::size_t j = 0; j < p.breakdowns.size(); ++j) {
    const auto& b = p.breakdowns[j];
    nlohmann::json raw, norm;
    for (int k = 0; k < 6; ++k) {
      raw[kFactors[k]] = factor(b, k);
      norm[kFactors[k]] = normalized(b, k);
    }
    rows.push_back({{"index", j},
                    {"text", join(doc->sentences[j])},
                    {"raw", std::move(raw)},
                    {"normalized", std::move(norm)},
                    {"probability", b.probability}});
  }
  const fs::path dir(a.model.common.out);
  fs::create_directories(dir);
  cfg.write(dir / kRunConfigFile);
  write_json(dir / kInspectReport, {{"id", doc->id}, {"sentences", rows}});

  char line[256];
  out << "document " << doc->id << '\n';
  std::snprintf(line, sizeof line, "%4s %10s %10s %10s %10s %10s %10s %8s\n", "j",
                "content", "salience", "novelty", "abs_pos", "rel_pos", "bias", "prob");
  out << "raw\n" << line;
  for (std::size_t j = 0; j < p.breakdowns.size(); ++j) {
    const auto& b = p.breakdowns[j];
    std::snprintf(line, sizeof line,
                  "%4zu %10.4f %10.4f %10.4f %10.4f %10.4f %10.4f %8.4f\n", j,
                  b.content, b.salience, b.novelty, b.abs_pos, b.rel_pos, b.bias,
                  b.probability);
    out << line;
  }
  std::snprintf(line, sizeof line, "%4s %10s %10s %10s %10s %10s %10s %8s\n", "j",
                "content", "salience", "novelty", "abs_pos", "rel_pos", "bias", "prob");
  out << "normalized\n" << line;
  for (std::size_t j = 0; j < p.breakdowns.size(); ++j) {
    const auto& b = p.breakdowns[j];
    std::snprintf(line, sizeof line,
                  "%4zu %10.4f %10.4f %10.4f %10.4f %10.4f %10.4f %8.4f\n", j,
                  normalized(b, 0), normalized(b, 1), normalized(b, 2),
                  normalized(b, 3), normalized(b, 4), normalized(b, 5),
                  b.probability);
    out << line;
  }
  return 0;
}

}  // namespace

int run(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
  CLI::App app{"Hierarchical GRU extractive summarizer"};
  app.require_subcommand(1);

  MakeLabelsArgs ml;
  auto* ml_cmd = app.add_subcommand("make-labels",
                                    "Derive extractive labels from reference summaries");
  ml.common.attach(ml_cmd, false);
  ml_cmd->add_option("--input", ml.input, "Corpus JSONL")->required();
  ml_cmd->add_option("--output", ml.output, "Labeled corpus JSONL")->required();
  ml_cmd->add_flag("--overwrite", ml.overwrite, "Replace existing labels");
  ml.common.flag(ml_cmd, "--oracle-metric", "oracle_metric",
                 "rouge1_f1 | rouge2_f1 | mean_r1_r2_f1 | rouge1_recall");
  ml.common.flag(ml_cmd, "--max-selected", "oracle_max_selected",
                 "Cap on selected sentences (0 = none)");

  TrainArgs tr;
  auto* tr_cmd = app.add_subcommand("train", "Train a model");
  tr.common.attach(tr_cmd);
  tr_cmd->add_option("--train", tr.train_path, "Training corpus JSONL")->required();
  tr_cmd->add_option("--valid", tr.valid_path, "Validation corpus JSONL")->required();
  tr.common.flag(tr_cmd, "--mode", "mode", "extractive | abstractive");
  tr.common.flag(tr_cmd, "--word-vectors", "word_vectors",
                 "Pretrained vectors in word2vec text format");

  ModelArgs sm;
  auto* sm_cmd = app.add_subcommand("summarize", "Extract summaries");
  sm.common.attach(sm_cmd);
  sm_cmd->add_option("--checkpoint", sm.checkpoint, "Model checkpoint");
  sm_cmd->add_option("--corpus", sm.corpus, "Corpus JSONL")->required();
  sm.common.flag(sm_cmd, "--policy", "policy", "prob | topk:K | lead:N");
  sm.common.flag(sm_cmd, "--limit", "limit", "none | bytes:N | words:N");

  EvaluateArgs ev;
  auto* ev_cmd = app.add_subcommand("evaluate", "Score summaries with ROUGE");
  ev.model.common.attach(ev_cmd);
  ev_cmd->add_option("--checkpoint", ev.model.checkpoint, "Model checkpoint");
  ev_cmd->add_option("--corpus", ev.model.corpus, "Corpus JSONL")->required();
  ev.model.common.flag(ev_cmd, "--policy", "policy", "prob | topk:K | lead:N");
  ev.model.common.flag(ev_cmd, "--limit", "limit", "none | bytes:N | words:N");
  ev.model.common.flag(ev_cmd, "--flavor", "flavor", "recall | precision | f1");
  ev.model.common.flag(ev_cmd, "--metric", "metric", "r1 | r2 | rl (for --tune-k)");
  ev_cmd->add_option("--protocol", ev.protocol,
                     "recall@75bytes | recall@275bytes | recall@75words | f1");
  ev_cmd->add_flag("--verbose", ev.verbose, "Include per-document scores");
  ev_cmd->add_option("--tune-k", ev.tune_range, "Pick top-k on --valid over LO:HI");
  ev_cmd->add_option("--valid", ev.valid_path, "Validation corpus for --tune-k");

  InspectArgs in;
  auto* in_cmd = app.add_subcommand("inspect", "Per-sentence score breakdown");
  in.model.common.attach(in_cmd);
  in_cmd->add_option("--checkpoint", in.model.checkpoint, "Model checkpoint")->required();
  in_cmd->add_option("--corpus", in.model.corpus, "Corpus JSONL")->required();
  in_cmd->add_option("--id", in.id, "Document id");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    return app.exit(e, out, err);
  }

  try {
    if (*ml_cmd) return make_labels(ml, out, err);
    if (*tr_cmd) return train_cmd(tr, out, err);
    if (*sm_cmd) return summarize_cmd(sm, out, err);
    if (*ev_cmd) return evaluate_cmd(ev, out, err);
    if (*in_cmd) return inspect_cmd(in, out, err);
  } catch (const std::exception& e) {
    err << "error: " << e.what() << '\n';
    return 1;
  }
  return 1;
}

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  std::vector<const char*> argv{"extsum"};
  for (const auto& a : args) argv.push_back(a.c_str());
  return run(static_cast<int>(argv.size()), argv.data(), out, err);
}

}  // namespace extsum::cli
