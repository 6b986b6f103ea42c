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

#include "extsum/run_config.hpp"

#include <charconv>
#include <fstream>
#include <sstream>

#include "extsum/errors.hpp"
#include "extsum/evaluation.hpp"
#include "extsum/rouge.hpp"

namespace extsum {
namespace {

std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string::npos) return "";
  const auto e = s.find_last_not_of(" \t\r");
  return s.substr(b, e - b + 1);
}

template <typename T>
T parse_number(const std::string& key, const std::string& value) {
  T out{};
  const auto* first = value.data();
  const auto* last = value.data() + value.size();
  const auto [ptr, ec] = std::from_chars(first, last, out);
  if (ec != std::errc() || ptr != last) {
    throw ConfigError("invalid value '" + value + "' for '" + key + "'");
  }
  return out;
}

std::string format_double(double v) {
  char buf[64];
  const auto [ptr, ec] = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, ptr);
}

}  // namespace

void RunConfig::set(const std::string& key, const std::string& value) {
  auto size = [&] { return parse_number<std::size_t>(key, value); };
  auto real = [&] { return parse_number<double>(key, value); };

  if (key == "max_sentences") {
    corpus.max_sentences = size();
    model.max_abs_positions = corpus.max_sentences;
  } else if (key == "max_words_per_sentence") {
    corpus.max_words_per_sentence = size();
  } else if (key == "vocab_cap") {
    corpus.vocab_cap = size();
  } else if (key == "embedding_dim") {
    corpus.embedding_dim = size();
    model.embedding_dim = corpus.embedding_dim;
  } else if (key == "hidden_dim") {
    model.hidden_dim = size();
  } else if (key == "position_embedding_dim") {
    model.position_embedding_dim = size();
  } else if (key == "num_rel_segments") {
    model.num_rel_segments = size();
  } else if (key == "decoder_hidden_dim") {
    model.decoder_hidden_dim = size();
  } else if (key == "decoder_ff_dim") {
    model.decoder_ff_dim = size();
  } else if (key == "mode") {
    train.mode = parse_train_mode(value);
  } else if (key == "batch_size") {
    train.batch_size = size();
  } else if (key == "max_epochs") {
    train.max_epochs = size();
  } else if (key == "patience") {
    train.patience = size();
  } else if (key == "clip_norm") {
    train.clip_norm = real();
  } else if (key == "adadelta_rho") {
    train.adadelta_rho = real();
  } else if (key == "adadelta_eps") {
    train.adadelta_eps = real();
  } else if (key == "seed") {
    seed = parse_number<std::uint64_t>(key, value);
    train.seed = seed;
  } else if (key == "oracle_metric") {
    oracle.metric = oracle::parse_metric(value);
  } else if (key == "oracle_max_selected") {
    const std::size_t n = size();
    oracle.max_selected = n ? std::optional<std::size_t>(n) : std::nullopt;
  } else if (key == "policy") {
    eval::SelectionPolicy::parse(value, rouge::LengthLimit::none());
    policy = value;
  } else if (key == "limit") {
    rouge::LengthLimit::parse(value);
    limit = value;
  } else if (key == "flavor") {
    eval::parse_flavor(value);
    flavor = value;
  } else if (key == "metric") {
    eval::parse_variant(value);
    metric = value;
  } else if (key == "word_vectors") {
    word_vectors = value;
  } else {
    throw ConfigError("unknown configuration key '" + key + "'");
  }
}

void RunConfig::set(const std::string& assignment) {
  const auto eq = assignment.find('=');
  if (eq == std::string::npos) {
    throw ConfigError("expected key=value, got '" + assignment + "'");
  }
  set(trim(assignment.substr(0, eq)), trim(assignment.substr(eq + 1)));
}

void RunConfig::merge(std::istream& in) {
  std::string line;
  std::size_t number = 0;
  while (std::getline(in, line)) {
    ++number;
    const std::string t = trim(line);
    if (t.empty() || t[0] == '#') continue;
    try {
      set(t);
    } catch (const ConfigError& e) {
      throw ConfigError("config line " + std::to_string(number) + ": " + e.what());
    }
  }
}

void RunConfig::merge_file(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open config file " + path.string());
  merge(in);
}

std::string RunConfig::serialize() const {
  std::ostringstream out;
  out << "# extsum run configuration\n";
  out << "seed = " << seed << '\n';
  out << "max_sentences = " << corpus.max_sentences << '\n';
  out << "max_words_per_sentence = " << corpus.max_words_per_sentence << '\n';
  out << "vocab_cap = " << corpus.vocab_cap << '\n';
  out << "embedding_dim = " << corpus.embedding_dim << '\n';
  out << "hidden_dim = " << model.hidden_dim << '\n';
  out << "position_embedding_dim = " << model.position_embedding_dim << '\n';
  out << "num_rel_segments = " << model.num_rel_segments << '\n';
  out << "decoder_hidden_dim = " << model.decoder_hidden_dim << '\n';
  out << "decoder_ff_dim = " << model.decoder_ff_dim << '\n';
  out << "mode = " << train_mode_name(train.mode) << '\n';
  out << "batch_size = " << train.batch_size << '\n';
  out << "max_epochs = " << train.max_epochs << '\n';
  out << "patience = " << train.patience << '\n';
  out << "clip_norm = " << format_double(train.clip_norm) << '\n';
  out << "adadelta_rho = " << format_double(train.adadelta_rho) << '\n';
  out << "adadelta_eps = " << format_double(train.adadelta_eps) << '\n';
  out << "oracle_metric = " << oracle::metric_name(oracle.metric) << '\n';
  out << "oracle_max_selected = " << oracle.max_selected.value_or(0) << '\n';
  out << "policy = " << policy << '\n';
  out << "limit = " << limit << '\n';
  out << "flavor = " << flavor << '\n';
  out << "metric = " << metric << '\n';
  if (!word_vectors.empty()) out << "word_vectors = " << word_vectors << '\n';
  return out.str();
}

void RunConfig::write(const std::filesystem::path& path) const {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write " + path.string());
  out << serialize();
}

void RunConfig::validate() const {
  corpus.validate();
  train.validate();
  if (model.hidden_dim == 0 || model.position_embedding_dim == 0 ||
      model.num_rel_segments == 0) {
    throw ConfigError("model dimensions must be positive");
  }
  rouge::LengthLimit::parse(limit);
  eval::SelectionPolicy::parse(policy, rouge::LengthLimit::parse(limit));
  eval::parse_flavor(flavor);
  eval::parse_variant(metric);
}

}  // namespace extsum
