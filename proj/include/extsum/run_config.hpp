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

#pragma once

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <string>

#include "extsum/corpus.hpp"
#include "extsum/model.hpp"
#include "extsum/oracle.hpp"
#include "extsum/training.hpp"

namespace extsum {

// Every setting a subcommand can depend on, resolved from defaults, an
// optional flat `key = value` file, and command-line overrides (applied in
// that order). Input and output paths are not part of it.
struct RunConfig {
  CorpusConfig corpus;
  ModelConfig model;  // vocab_size is filled in from the data
  TrainConfig train;
  oracle::OracleConfig oracle;
  std::string policy = "prob";
  std::string limit = "none";
  std::string flavor = "f1";
  std::string metric = "r1";
  std::string word_vectors;  // optional pretrained vectors for train
  std::uint64_t seed = 1;

  // Sets one key; throws ConfigError on unknown keys or bad values.
  void set(const std::string& key, const std::string& value);
  // Applies a `key=value` override.
  void set(const std::string& assignment);
  // Reads `key = value` lines; blank lines and lines starting with '#' are
  // ignored.
  void merge(std::istream& in);
  void merge_file(const std::filesystem::path& path);

  // One `key = value` line per key, in a fixed order. Round-trips through
  // merge().
  std::string serialize() const;
  void write(const std::filesystem::path& path) const;

  // Validates cross-field constraints.
  void validate() const;
};

}  // namespace extsum
