// Copyright 2026 The llmtv Authors. All rights reserved.
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

// Fine-tuning corpus construction: labeling pairs with the checker,
// deduplication, ratio sampling with a held-out test split, and export of
// system/user/assistant message records.

#include "llmtv/predictor.h"

#include <filesystem>
#include <iosfwd>

namespace llmtv {

struct DatasetRecord {
  TransformationPair pair;
  Label label = Label::Sound;
  ReasonSet reasons; // empty iff Sound
  std::string source_tag;
};

struct FineTuneExample {
  std::string system;
  std::string user;
  std::string assistant;

  bool operator==(const FineTuneExample &) const = default;
};

struct SkippedPair {
  std::string id;
  UnknownCause cause;
};

struct LabeledCorpus {
  std::vector<DatasetRecord> records;
  std::vector<SkippedPair> skipped;
};

LabeledCorpus label_corpus(const std::vector<TransformationPair> &pairs,
                           const CheckConfig &cfg,
                           const std::string &source_tag = "checker");

/// Drops later copies of an already seen (source, target) text pair, then
/// every Sound record whose source and target print identically.
std::vector<DatasetRecord> dedupe(const std::vector<DatasetRecord> &records);

struct SampleConfig {
  unsigned sound_parts = 1; // ratio sound_parts : unsound_parts
  unsigned unsound_parts = 1;
  uint64_t seed = 1;
  size_t test_count = 40;
};

/// Parses "S:U" with positive integer parts.
std::pair<unsigned, unsigned> parse_ratio(std::string_view text);

class InsufficientData : public std::runtime_error {
public:
  using std::runtime_error::runtime_error;
};

struct Split {
  std::vector<DatasetRecord> train;
  std::vector<DatasetRecord> test;
};

/// Holds out a label-balanced test set, then keeps every remaining unsound
/// record and exactly ratio x U sound records for training.
Split sample(const std::vector<DatasetRecord> &records, const SampleConfig &cfg);

FineTuneExample to_finetune(const DatasetRecord &record);

/// One JSON object per line: {"messages":[system, user, assistant]}.
void emit_finetune(const std::vector<DatasetRecord> &records, std::ostream &os);
std::string finetune_line(const FineTuneExample &example);
FineTuneExample parse_finetune_line(std::string_view line);

// Corpus and record files.

/// Reads `<id>.src.mir.ll` / `<id>.tgt.mir.ll` pairs from a directory, or a
/// manifest whose lines are `<id> <src-path> <tgt-path>` (paths relative to
/// the manifest; `#` starts a comment).
std::vector<TransformationPair> load_corpus(const std::filesystem::path &path);

std::string record_to_json(const DatasetRecord &record);
DatasetRecord record_from_json(std::string_view line);
void write_records(const std::vector<DatasetRecord> &records, std::ostream &os);
std::vector<DatasetRecord> read_records(std::istream &is);

class FileError : public std::runtime_error {
public:
  using std::runtime_error::runtime_error;
};

/// Throws FileError when the file cannot be read.
std::string read_file(const std::filesystem::path &path);

} // namespace llmtv
