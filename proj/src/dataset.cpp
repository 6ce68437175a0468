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

#include "llmtv/dataset.h"

#include <json.hpp>

#include <algorithm>
#include <fstream>
#include <map>
#include <random>
#include <set>
#include <sstream>

namespace llmtv {

using nlohmann::json;

LabeledCorpus label_corpus(const std::vector<TransformationPair> &pairs,
                           const CheckConfig &cfg,
                           const std::string &source_tag) {
  LabeledCorpus out;
  for (const auto &pair : pairs) {
    Verdict v = check_pair(pair, cfg);
    if (v.is_unknown()) {
      out.skipped.push_back({pair.id, v.cause});
      continue;
    }
    DatasetRecord r;
    r.pair = pair;
    r.label = v.is_sound() ? Label::Sound : Label::Unsound;
    r.reasons = v.reasons;
    r.source_tag = source_tag;
    out.records.push_back(std::move(r));
  }
  return out;
}

std::vector<DatasetRecord> dedupe(const std::vector<DatasetRecord> &records) {
  std::set<std::pair<std::string, std::string>> seen;
  std::vector<DatasetRecord> out;
  for (const auto &r : records) {
    std::string src = print_function(r.pair.src);
    std::string tgt = print_function(r.pair.tgt);
    if (!seen.emplace(src, tgt).second)
      continue;
    if (r.label == Label::Sound && src == tgt)
      continue;
    out.push_back(r);
  }
  return out;
}

std::pair<unsigned, unsigned> parse_ratio(std::string_view text) {
  size_t colon = text.find(':');
  auto part = [&](std::string_view s) {
    if (s.empty() || !std::all_of(s.begin(), s.end(), ::isdigit))
      throw std::invalid_argument("ratio must look like S:U, got '" +
                                  std::string(text) + "'");
    unsigned long v = std::stoul(std::string(s));
    if (v == 0 || v > 1'000'000)
      throw std::invalid_argument("ratio parts must be positive");
    return static_cast<unsigned>(v);
  };
  if (colon == std::string_view::npos)
    throw std::invalid_argument("ratio must look like S:U, got '" +
                                std::string(text) + "'");
  return {part(text.substr(0, colon)), part(text.substr(colon + 1))};
}

Split sample(const std::vector<DatasetRecord> &records, const SampleConfig &cfg) {
  if (cfg.sound_parts == 0 || cfg.unsound_parts == 0)
    throw std::invalid_argument("ratio parts must be positive");
  std::vector<size_t> sound, unsound;
  for (size_t i = 0; i < records.size(); ++i)
    (records[i].label == Label::Sound ? sound : unsound).push_back(i);

  std::mt19937_64 rng(cfg.seed);
  // Fisher-Yates with rng() % n keeps the order independent of the
  // standard library's distribution implementation.
  auto shuffle = [&](std::vector<size_t> &v) {
    for (size_t i = v.size(); i > 1; --i)
      std::swap(v[i - 1], v[rng() % i]);
  };
  shuffle(sound);
  shuffle(unsound);

  const size_t test_sound = (cfg.test_count + 1) / 2;
  const size_t test_unsound = cfg.test_count / 2;
  if (test_sound > sound.size() || test_unsound > unsound.size())
    throw InsufficientData("test split needs " + std::to_string(test_sound) +
                           " sound and " + std::to_string(test_unsound) +
                           " unsound records");

  Split split;
  for (size_t k = 0; k < test_sound; ++k)
    split.test.push_back(records[sound[k]]);
  for (size_t k = 0; k < test_unsound; ++k)
    split.test.push_back(records[unsound[k]]);

  const size_t u = unsound.size() - test_unsound;
  const uint64_t want = static_cast<uint64_t>(u) * cfg.sound_parts;
  if (want % cfg.unsound_parts != 0)
    throw InsufficientData("ratio " + std::to_string(cfg.sound_parts) + ":" +
                           std::to_string(cfg.unsound_parts) +
                           " does not divide " + std::to_string(u) +
                           " unsound records evenly");
  const size_t s = want / cfg.unsound_parts;
  if (s > sound.size() - test_sound)
    throw InsufficientData("need " + std::to_string(s) +
                           " sound records for training, have " +
                           std::to_string(sound.size() - test_sound));

  // Training order follows the input order, not the shuffle.
  std::vector<size_t> train(unsound.begin() + test_unsound, unsound.end());
  train.insert(train.end(), sound.begin() + test_sound,
               sound.begin() + test_sound + s);
  std::sort(train.begin(), train.end());
  for (size_t i : train)
    split.train.push_back(records[i]);
  return split;
}

FineTuneExample to_finetune(const DatasetRecord &record) {
  PromptBundle p = encode_prompt(record.pair);
  return {std::move(p.system), std::move(p.user),
          encode_assistant(record.label, record.reasons)};
}

std::string finetune_line(const FineTuneExample &example) {
  json j = {{"messages",
             json::array({{{"role", "system"}, {"content", example.system}},
                          {{"role", "user"}, {"content", example.user}},
                          {{"role", "assistant"},
                           {"content", example.assistant}}})}};
  return j.dump();
}

FineTuneExample parse_finetune_line(std::string_view line) {
  json j = json::parse(line);
  const json &m = j.at("messages");
  if (m.size() != 3 || m[0].at("role") != "system" ||
      m[1].at("role") != "user" || m[2].at("role") != "assistant")
    throw std::invalid_argument("fine-tune line must hold system, user and "
                                "assistant messages");
  return {m[0].at("content"), m[1].at("content"), m[2].at("content")};
}

void emit_finetune(const std::vector<DatasetRecord> &records, std::ostream &os) {
  for (const auto &r : records)
    os << finetune_line(to_finetune(r)) << "\n";
}

// ---------------------------------------------------------------------------
// Files

std::string read_file(const std::filesystem::path &path) {
  std::ifstream in(path, std::ios::binary);
  if (!in)
    throw FileError("cannot read " + path.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

std::vector<TransformationPair> load_corpus(const std::filesystem::path &path) {
  namespace fs = std::filesystem;
  std::vector<TransformationPair> pairs;
  if (fs::is_directory(path)) {
    const std::string suffix = ".src.mir.ll";
    std::vector<std::string> ids;
    for (const auto &entry : fs::directory_iterator(path)) {
      std::string name = entry.path().filename().string();
      if (name.size() > suffix.size() &&
          name.compare(name.size() - suffix.size(), suffix.size(), suffix) == 0)
        ids.push_back(name.substr(0, name.size() - suffix.size()));
    }
    std::sort(ids.begin(), ids.end());
    for (const auto &id : ids)
      pairs.push_back(parse_pair(read_file(path / (id + ".src.mir.ll")),
                                 read_file(path / (id + ".tgt.mir.ll")), id));
    return pairs;
  }

  std::istringstream manifest(read_file(path));
  const fs::path base = path.parent_path();
  std::string line;
  while (std::getline(manifest, line)) {
    if (auto hash = line.find('#'); hash != std::string::npos)
      line.erase(hash);
    std::istringstream ls(line);
    std::string id, src, tgt;
    if (!(ls >> id))
      continue;
    if (!(ls >> src >> tgt))
      throw std::runtime_error("manifest line needs <id> <src> <tgt>: " + line);
    pairs.push_back(
        parse_pair(read_file(base / src), read_file(base / tgt), id));
  }
  return pairs;
}

std::string record_to_json(const DatasetRecord &record) {
  json reasons = json::array();
  for (UnsoundReason r : record.reasons)
    reasons.push_back(reason_name(r));
  json j = {{"id", record.pair.id},
            {"src", print_function(record.pair.src)},
            {"tgt", print_function(record.pair.tgt)},
            {"label", record.label == Label::Sound ? "sound" : "unsound"},
            {"reasons", reasons},
            {"source_tag", record.source_tag}};
  return j.dump();
}

DatasetRecord record_from_json(std::string_view line) {
  json j = json::parse(line);
  DatasetRecord r;
  r.pair = parse_pair(j.at("src").get<std::string>(),
                      j.at("tgt").get<std::string>(),
                      j.at("id").get<std::string>());
  const std::string label = j.at("label");
  if (label != "sound" && label != "unsound")
    throw std::invalid_argument("record label must be sound or unsound");
  r.label = label == "sound" ? Label::Sound : Label::Unsound;
  for (const auto &name : j.value("reasons", json::array())) {
    auto reason = reason_from_name(name.get<std::string>());
    if (!reason)
      throw std::invalid_argument("unknown reason " + name.dump());
    r.reasons.insert(*reason);
  }
  if ((r.label == Label::Sound) != r.reasons.empty())
    throw std::invalid_argument("record " + r.pair.id +
                                ": reasons must be empty iff sound");
  r.source_tag = j.value("source_tag", "");
  return r;
}

void write_records(const std::vector<DatasetRecord> &records, std::ostream &os) {
  for (const auto &r : records)
    os << record_to_json(r) << "\n";
}

std::vector<DatasetRecord> read_records(std::istream &is) {
  std::vector<DatasetRecord> out;
  std::string line;
  while (std::getline(is, line))
    if (line.find_first_not_of(" \t\r") != std::string::npos)
      out.push_back(record_from_json(line));
  return out;
}

} // namespace llmtv
