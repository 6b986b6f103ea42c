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

#include <cmath>
#include <fstream>
#include <sstream>

#include <gtest/gtest.h>
#include <nlohmann/json.hpp>

#include "extsum/cli.hpp"
#include "extsum/model.hpp"
#include "support/synthetic_corpus.hpp"

namespace extsum {
namespace {

namespace fs = std::filesystem;
using nlohmann::json;

struct Result {
  int code;
  std::string out;
  std::string err;
};

Result run(const std::vector<std::string>& args) {
  std::ostringstream out, err;
  const int code = cli::run(args, out, err);
  return {code, out.str(), err.str()};
}

std::vector<json> read_jsonl(const fs::path& p) {
  std::ifstream in(p);
  std::vector<json> rows;
  for (std::string line; std::getline(in, line);)
    if (!line.empty()) rows.push_back(json::parse(line));
  return rows;
}

json read_json(const fs::path& p) { return json::parse(testing::read_file(p)); }

void write_text(const fs::path& p, const std::string& text) {
  std::ofstream(p) << text;
}

Document worked_doc() {
  Document d;
  d.id = "w";
  d.sentences = {{"a", "b"}, {"c", "d"}, {"a", "b", "c"}};
  d.summary = std::vector<Sentence>{{"a", "b", "c", "d"}};
  return d;
}

// Small model settings so CLI training stays fast.
const std::vector<std::string> kTinyModel{
    "--set", "embedding_dim=6", "--set", "hidden_dim=6", "--set",
    "position_embedding_dim=3", "--set", "num_rel_segments=3",
    "--set", "batch_size=4", "--set", "max_epochs=3"};

std::vector<std::string> concat(std::vector<std::string> a, const std::vector<std::string>& b) {
  a.insert(a.end(), b.begin(), b.end());
  return a;
}

TEST(MakeLabelsCommandTest, WritesOracleLabelsStatsAndConfig) {
  const auto dir = testing::fresh_temp_dir("cli_make_labels");
  const std::vector<Document> docs{worked_doc()};
  testing::write_jsonl(dir / "in.jsonl", docs);
  const Result r = run({"make-labels", "--input", (dir / "in.jsonl").string(), "--output",
                        (dir / "out.jsonl").string()});
  ASSERT_EQ(r.code, 0) << r.err;
  const auto rows = read_jsonl(dir / "out.jsonl");
  ASSERT_EQ(rows.size(), 1u);
  EXPECT_EQ(rows[0].at("labels"), json({0, 1, 1}));
  const json stats = read_json(dir / "out.jsonl.stats.json");
  EXPECT_EQ(stats.at("documents"), 1);
  EXPECT_TRUE(fs::exists(dir / "out.jsonl.run_config.txt"));
}

TEST(MakeLabelsCommandTest, RefusesToOverwriteExistingLabels) {
  const auto dir = testing::fresh_temp_dir("cli_make_labels_refuse");
  Document d = worked_doc();
  d.labels = std::vector<int>{1, 0, 0};
  const std::vector<Document> docs{d};
  testing::write_jsonl(dir / "in.jsonl", docs);
  const std::vector<std::string> args{"make-labels", "--input", (dir / "in.jsonl").string(),
                                      "--output", (dir / "out.jsonl").string()};
  const Result refused = run(args);
  EXPECT_NE(refused.code, 0);
  EXPECT_NE(refused.err.find("--overwrite"), std::string::npos);
  EXPECT_FALSE(fs::exists(dir / "out.jsonl"));
  const Result forced = run(concat(args, {"--overwrite"}));
  ASSERT_EQ(forced.code, 0) << forced.err;
  EXPECT_EQ(read_jsonl(dir / "out.jsonl")[0].at("labels"), json({0, 1, 1}));
}

TEST(MakeLabelsCommandTest, EmptyInputGivesEmptyOutput) {
  const auto dir = testing::fresh_temp_dir("cli_make_labels_empty");
  write_text(dir / "in.jsonl", "");
  const Result r = run({"make-labels", "--input", (dir / "in.jsonl").string(), "--output",
                        (dir / "out.jsonl").string()});
  ASSERT_EQ(r.code, 0) << r.err;
  EXPECT_EQ(testing::read_file(dir / "out.jsonl"), "");
  EXPECT_EQ(read_json(dir / "out.jsonl.stats.json").at("documents"), 0);
}

TEST(MakeLabelsCommandTest, ParseErrorExitsNonzero) {
  const auto dir = testing::fresh_temp_dir("cli_make_labels_bad");
  write_text(dir / "in.jsonl", "{\"id\": 3\n");
  const Result r = run({"make-labels", "--input", (dir / "in.jsonl").string(), "--output",
                        (dir / "out.jsonl").string()});
  EXPECT_EQ(r.code, 1);
  EXPECT_NE(r.err.find("line 1"), std::string::npos);
}

struct TrainedRun {
  fs::path dir;
  fs::path corpus;
};

TrainedRun train_small(const std::string& name, const std::vector<std::string>& extra = {}) {
  TrainedRun t;
  t.dir = testing::fresh_temp_dir(name);
  t.corpus = t.dir / "corpus.jsonl";
  const auto docs = testing::make_labeled_corpus(
      3, {.documents = 6, .vocab = 20, .min_sentences = 3, .max_sentences = 5,
          .min_words = 3, .max_words = 5, .min_positive = 1, .max_positive = 2});
  testing::write_jsonl(t.corpus, docs);
  auto args = concat({"train", "--train", t.corpus.string(), "--valid", t.corpus.string(),
                      "--out", (t.dir / "run").string(), "--seed", "7"},
                     kTinyModel);
  const Result r = run(concat(args, extra));
  EXPECT_EQ(r.code, 0) << r.err;
  return t;
}

TEST(TrainCommandTest, WritesCheckpointReportAndConfig) {
  const TrainedRun t = train_small("cli_train");
  const json report = read_json(t.dir / "run" / "train_report.json");
  EXPECT_EQ(report.at("mode"), "extractive");
  EXPECT_EQ(report.at("best_checkpoint"), "best.ckpt");
  EXPECT_TRUE(report.contains("final_train_accuracy"));
  EXPECT_EQ(report.at("epochs").size(), 3u);
  EXPECT_TRUE(fs::exists(t.dir / "run" / "best.ckpt"));
  const std::string cfg = testing::read_file(t.dir / "run" / "run_config.txt");
  EXPECT_NE(cfg.find("hidden_dim = 6"), std::string::npos);
  EXPECT_NE(cfg.find("seed = 7"), std::string::npos);
}

TEST(TrainCommandTest, SameSeedGivesByteIdenticalOutputs) {
  const TrainedRun a = train_small("cli_train_det_a");
  const TrainedRun b = train_small("cli_train_det_b");
  EXPECT_EQ(testing::read_file(a.dir / "run" / "train_report.json"),
            testing::read_file(b.dir / "run" / "train_report.json"));
  EXPECT_EQ(testing::read_file(a.dir / "run" / "best.ckpt"),
            testing::read_file(b.dir / "run" / "best.ckpt"));
}

TEST(TrainCommandTest, RerunFromWrittenConfigReproduces) {
  const TrainedRun a = train_small("cli_train_rerun");
  const Result r = run({"train", "--train", a.corpus.string(), "--valid", a.corpus.string(),
                        "--out", (a.dir / "again").string(), "--config",
                        (a.dir / "run" / "run_config.txt").string()});
  ASSERT_EQ(r.code, 0) << r.err;
  EXPECT_EQ(testing::read_file(a.dir / "run" / "train_report.json"),
            testing::read_file(a.dir / "again" / "train_report.json"));
  EXPECT_EQ(testing::read_file(a.dir / "run" / "run_config.txt"),
            testing::read_file(a.dir / "again" / "run_config.txt"));
}

TEST(TrainCommandTest, AbstractiveWithoutSummariesFailsBeforeTraining) {
  const auto dir = testing::fresh_temp_dir("cli_train_abs_mismatch");
  Document d = worked_doc();
  d.summary.reset();
  d.labels = std::vector<int>{0, 1, 1};
  const std::vector<Document> docs{d};
  testing::write_jsonl(dir / "c.jsonl", docs);
  const Result r = run({"train", "--train", (dir / "c.jsonl").string(), "--valid",
                        (dir / "c.jsonl").string(), "--mode", "abstractive", "--out",
                        (dir / "run").string()});
  EXPECT_EQ(r.code, 1);
  EXPECT_NE(r.err.find("w"), std::string::npos);
  EXPECT_FALSE(fs::exists(dir / "run" / "best.ckpt"));
}

TEST(TrainCommandTest, UnknownConfigKeyRejected) {
  const auto dir = testing::fresh_temp_dir("cli_bad_key");
  const std::vector<Document> docs{worked_doc()};
  testing::write_jsonl(dir / "c.jsonl", docs);
  const Result r = run({"train", "--train", (dir / "c.jsonl").string(), "--valid",
                        (dir / "c.jsonl").string(), "--set", "hiden_dim=3"});
  EXPECT_EQ(r.code, 1);
  EXPECT_NE(r.err.find("hiden_dim"), std::string::npos);
}

TEST(SummarizeCommandTest, LeadBypassesCheckpoint) {
  const auto dir = testing::fresh_temp_dir("cli_summarize_lead");
  const std::vector<Document> docs{worked_doc()};
  testing::write_jsonl(dir / "c.jsonl", docs);
  const Result r = run({"summarize", "--corpus", (dir / "c.jsonl").string(), "--policy",
                        "lead:2", "--out", dir.string()});
  ASSERT_EQ(r.code, 0) << r.err;
  const auto rows = read_jsonl(dir / "summaries.jsonl");
  ASSERT_EQ(rows.size(), 1u);
  EXPECT_EQ(rows[0].at("selected_indices"), json({0, 1}));
  EXPECT_EQ(rows[0].at("summary_sentences"), json({"a b", "c d"}));
  EXPECT_TRUE(rows[0].at("probabilities").is_null());
  EXPECT_TRUE(fs::exists(dir / "run_config.txt"));
}

TEST(SummarizeCommandTest, ZeroParameterCheckpointGivesOneHalf) {
  const auto dir = testing::fresh_temp_dir("cli_summarize_zero");
  const std::vector<Document> docs{worked_doc()};
  testing::write_jsonl(dir / "c.jsonl", docs);
  ModelConfig c;
  c.vocab_size = 8;
  c.embedding_dim = 3;
  c.hidden_dim = 3;
  c.position_embedding_dim = 2;
  save_checkpoint(dir / "zero.ckpt", Model(c), build_vocab(docs, 8));
  const Result r = run({"summarize", "--checkpoint", (dir / "zero.ckpt").string(), "--corpus",
                        (dir / "c.jsonl").string(), "--policy", "topk:2", "--out",
                        dir.string()});
  ASSERT_EQ(r.code, 0) << r.err;
  const auto rows = read_jsonl(dir / "summaries.jsonl");
  EXPECT_EQ(rows[0].at("probabilities"), json({0.5, 0.5, 0.5}));
  EXPECT_EQ(rows[0].at("selected_indices"), json({0, 1}));
}

TEST(SummarizeCommandTest, CheckpointVersionMismatchExitsNonzero) {
  const auto dir = testing::fresh_temp_dir("cli_summarize_version");
  const std::vector<Document> docs{worked_doc()};
  testing::write_jsonl(dir / "c.jsonl", docs);
  ModelConfig c;
  c.vocab_size = 8;
  c.embedding_dim = 3;
  c.hidden_dim = 3;
  c.position_embedding_dim = 2;
  json j = checkpoint_to_json(Model(c), build_vocab(docs, 8));
  j["version"] = 99;
  write_text(dir / "old.ckpt", j.dump());
  const Result r = run({"summarize", "--checkpoint", (dir / "old.ckpt").string(), "--corpus",
                        (dir / "c.jsonl").string(), "--policy", "topk:1", "--out",
                        dir.string()});
  EXPECT_EQ(r.code, 1);
  EXPECT_NE(r.err.find("version"), std::string::npos);
  EXPECT_FALSE(fs::exists(dir / "summaries.jsonl"));
}

TEST(SummarizeCommandTest, ProbabilityPolicyWithoutCheckpointFails) {
  const auto dir = testing::fresh_temp_dir("cli_summarize_nockpt");
  const std::vector<Document> docs{worked_doc()};
  testing::write_jsonl(dir / "c.jsonl", docs);
  const Result r = run({"summarize", "--corpus", (dir / "c.jsonl").string(), "--out",
                        dir.string()});
  EXPECT_EQ(r.code, 1);
  EXPECT_NE(r.err.find("--checkpoint"), std::string::npos);
}

std::vector<Document> perfect_lead_docs() {
  std::vector<Document> docs;
  for (int i = 0; i < 3; ++i) {
    Document d;
    d.id = "p" + std::to_string(i);
    for (int s = 0; s < 5; ++s)
      d.sentences.push_back({"x" + std::to_string(i), "s" + std::to_string(s), "y"});
    d.summary = std::vector<Sentence>(d.sentences.begin(), d.sentences.begin() + 3);
    docs.push_back(d);
  }
  return docs;
}

TEST(EvaluateCommandTest, PerfectLeadCorpusScoresOne) {
  const auto dir = testing::fresh_temp_dir("cli_evaluate_lead");
  testing::write_jsonl(dir / "c.jsonl", perfect_lead_docs());
  const std::vector<std::string> args{"evaluate", "--corpus", (dir / "c.jsonl").string(),
                                      "--policy", "lead:3", "--protocol", "f1", "--out",
                                      dir.string()};
  const Result r = run(args);
  ASSERT_EQ(r.code, 0) << r.err;
  const json report = read_json(dir / "eval_report.json");
  EXPECT_EQ(report.at("rouge1"), 1.0);
  EXPECT_EQ(report.at("flavor"), "f1");
  EXPECT_EQ(report.at("limit"), "none");
  EXPECT_NE(r.out.find("ROUGE-1"), std::string::npos);
  const std::string first = testing::read_file(dir / "eval_report.json");
  const Result again = run(args);
  EXPECT_EQ(again.out, r.out);
  EXPECT_EQ(testing::read_file(dir / "eval_report.json"), first);
}

TEST(EvaluateCommandTest, ProtocolsSetLimitAndFlavor) {
  const auto dir = testing::fresh_temp_dir("cli_evaluate_protocols");
  testing::write_jsonl(dir / "c.jsonl", perfect_lead_docs());
  const std::vector<std::pair<std::string, std::string>> expected{
      {"recall@75bytes", "bytes:75"},
      {"recall@275bytes", "bytes:275"},
      {"recall@75words", "words:75"}};
  for (const auto& [protocol, limit] : expected) {
    const Result r = run({"evaluate", "--corpus", (dir / "c.jsonl").string(), "--policy",
                          "lead:3", "--protocol", protocol, "--out", dir.string()});
    ASSERT_EQ(r.code, 0) << r.err;
    const json report = read_json(dir / "eval_report.json");
    EXPECT_EQ(report.at("limit"), limit);
    EXPECT_EQ(report.at("flavor"), "recall");
  }
  const Result bad = run({"evaluate", "--corpus", (dir / "c.jsonl").string(), "--policy",
                          "lead:3", "--protocol", "recall@1byte", "--out", dir.string()});
  EXPECT_EQ(bad.code, 1);
}

TEST(EvaluateCommandTest, VerboseAddsPerDocumentRows) {
  const auto dir = testing::fresh_temp_dir("cli_evaluate_verbose");
  testing::write_jsonl(dir / "c.jsonl", perfect_lead_docs());
  const Result r = run({"evaluate", "--corpus", (dir / "c.jsonl").string(), "--policy",
                        "lead:3", "--verbose", "--out", dir.string()});
  ASSERT_EQ(r.code, 0) << r.err;
  EXPECT_EQ(read_json(dir / "eval_report.json").at("per_document").size(), 3u);
}

TEST(EvaluateCommandTest, TuneKPicksFromValidation) {
  const TrainedRun t = train_small("cli_tune_k");
  const Result r = run({"evaluate", "--checkpoint", (t.dir / "run" / "best.ckpt").string(),
                        "--corpus", t.corpus.string(), "--valid", t.corpus.string(),
                        "--tune-k", "1:3", "--out", (t.dir / "eval").string()});
  ASSERT_EQ(r.code, 0) << r.err;
  const json report = read_json(t.dir / "eval" / "eval_report.json");
  const auto k = report.at("tuned_k").get<int>();
  EXPECT_GE(k, 1);
  EXPECT_LE(k, 3);
  EXPECT_EQ(report.at("policy"), "topk:" + std::to_string(k));
}

ModelConfig one_dim() {
  ModelConfig c;
  c.vocab_size = 8;
  c.embedding_dim = 1;
  c.hidden_dim = 1;
  c.position_embedding_dim = 1;
  c.max_abs_positions = 4;
  c.num_rel_segments = 2;
  return c;
}

json inspect(const fs::path& dir, const Model& m, const std::vector<Document>& docs,
             const std::string& id, int* code = nullptr) {
  testing::write_jsonl(dir / "c.jsonl", docs);
  save_checkpoint(dir / "m.ckpt", m, build_vocab(docs, 8));
  const Result r = run({"inspect", "--checkpoint", (dir / "m.ckpt").string(), "--corpus",
                        (dir / "c.jsonl").string(), "--id", id, "--out", dir.string()});
  if (code) *code = r.code;
  if (r.code != 0) {
    if (!code) ADD_FAILURE() << r.err;
    return json();
  }
  EXPECT_NE(r.out.find("normalized"), std::string::npos);
  return read_json(dir / "inspect.json");
}

TEST(InspectCommandTest, ZeroModel) {
  const auto dir = testing::fresh_temp_dir("cli_inspect_zero");
  const json j = inspect(dir, Model(one_dim()), {worked_doc()}, "w");
  ASSERT_EQ(j.at("sentences").size(), 3u);
  for (const auto& row : j.at("sentences")) {
    for (const auto& [k, v] : row.at("raw").items()) EXPECT_EQ(v, 0.0) << k;
    for (const auto& [k, v] : row.at("normalized").items()) EXPECT_EQ(v, 0.0) << k;
    EXPECT_EQ(row.at("probability"), 0.5);
  }
}

TEST(InspectCommandTest, OneDimensionalWorkedExample) {
  // b_sent = 20 saturates tanh to exactly 1.0, so every h_j is [1] and the
  // document reduces to the hand-computed two-sentence toy.
  ModelConfig c = one_dim();
  c.vocab_size = 6;  // reserved entries plus "a" and "b"
  Model m(c);
  m.params().at("sent/b_sent").value.fill(20.0);
  m.params().at("cls/W_content").value.fill(1.0);
  m.params().at("cls/W_novelty").value.fill(1.0);
  Document d;
  d.id = "toy";
  d.sentences = {{"a"}, {"b"}};
  d.summary = std::vector<Sentence>{{"a"}};
  const auto dir = testing::fresh_temp_dir("cli_inspect_toy");
  const json j = inspect(dir, m, {d}, "toy");
  const auto& rows = j.at("sentences");
  const double p1 = 1.0 / (1.0 + std::exp(-1.0));
  EXPECT_EQ(rows[0].at("raw").at("novelty"), 0.0);
  EXPECT_NEAR(rows[0].at("probability").get<double>(), p1, 1e-15);
  EXPECT_NEAR(rows[1].at("raw").at("novelty").get<double>(), std::tanh(p1), 1e-15);
  EXPECT_NEAR(rows[1].at("raw").at("novelty").get<double>(), 0.6234, 1e-3);
  EXPECT_EQ(rows[1].at("normalized").at("novelty"), 1.0);
  EXPECT_EQ(rows[0].at("normalized").at("content"), 0.0);  // constant column
}

TEST(InspectCommandTest, RawTermsReassembleProbability) {
  ModelConfig c = one_dim();
  c.embedding_dim = 3;
  c.hidden_dim = 4;
  Model m(c);
  Rng rng(2);
  m.initialize(rng);
  for (auto& p : m.params()) fill_uniform(p.value, 1.0, rng);
  const auto dir = testing::fresh_temp_dir("cli_inspect_identity");
  const json j = inspect(dir, m, {worked_doc()}, "w");
  for (const auto& row : j.at("sentences")) {
    const auto& r = row.at("raw");
    const double z = r.at("content").get<double>() + r.at("salience").get<double>() -
                     r.at("novelty").get<double>() + r.at("abs_pos").get<double>() +
                     r.at("rel_pos").get<double>() + r.at("bias").get<double>();
    EXPECT_NEAR(1.0 / (1.0 + std::exp(-z)), row.at("probability").get<double>(), 1e-9);
    for (const auto& [k, v] : row.at("normalized").items()) {
      EXPECT_GE(v.get<double>(), 0.0) << k;
      EXPECT_LE(v.get<double>(), 1.0) << k;
    }
  }
}

TEST(InspectCommandTest, UnknownIdExitsNonzero) {
  const auto dir = testing::fresh_temp_dir("cli_inspect_unknown");
  int code = 0;
  inspect(dir, Model(one_dim()), {worked_doc()}, "nope", &code);
  EXPECT_EQ(code, 1);
  EXPECT_FALSE(fs::exists(dir / "inspect.json"));
}

TEST(ConfigPrecedenceTest, FlagsOverrideSetOverrideFile) {
  const auto dir = testing::fresh_temp_dir("cli_precedence");
  testing::write_jsonl(dir / "c.jsonl", perfect_lead_docs());
  write_text(dir / "cfg.txt", "# comment\npolicy = lead:1\nflavor = recall\nlimit = words:2\n");
  Result r = run({"evaluate", "--corpus", (dir / "c.jsonl").string(), "--config",
                  (dir / "cfg.txt").string(), "--out", dir.string()});
  ASSERT_EQ(r.code, 0) << r.err;
  json report = read_json(dir / "eval_report.json");
  EXPECT_EQ(report.at("policy"), "lead:1");
  EXPECT_EQ(report.at("limit"), "words:2");
  r = run({"evaluate", "--corpus", (dir / "c.jsonl").string(), "--config",
           (dir / "cfg.txt").string(), "--set", "policy=lead:2", "--policy", "lead:3",
           "--set", "limit=none", "--out", dir.string()});
  ASSERT_EQ(r.code, 0) << r.err;
  report = read_json(dir / "eval_report.json");
  EXPECT_EQ(report.at("policy"), "lead:3");
  EXPECT_EQ(report.at("limit"), "none");
  EXPECT_EQ(report.at("flavor"), "recall");
}

TEST(CliTest, MissingSubcommandOrRequiredOption) {
  EXPECT_NE(run({}).code, 0);
  EXPECT_NE(run({"summarize"}).code, 0);
  EXPECT_NE(run({"frobnicate"}).code, 0);
}

}  // namespace
}  // namespace extsum
