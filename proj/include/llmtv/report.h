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

// Versioned JSON encoding of pipeline reports and counterexamples.

#include "llmtv/pipeline.h"

#include <json.hpp>

namespace llmtv {

inline constexpr int kReportSchemaVersion = 1;

nlohmann::json value_to_json(const Value &v);
nlohmann::json memory_to_json(const MemoryState &m);
MemoryState memory_from_json(const nlohmann::json &j);
nlohmann::json outcome_to_json(const ExecOutcome &o);
ExecOutcome outcome_from_json(const nlohmann::json &j);
nlohmann::json counterexample_to_json(const CounterExample &cex);
CounterExample counterexample_from_json(const nlohmann::json &j);

nlohmann::json verdict_to_json(const Verdict &v);
nlohmann::json prediction_to_json(const Prediction &p);
nlohmann::json fuzz_report_to_json(const FuzzReport &r);
nlohmann::json report_to_json(const PipelineReport &report);

/// Writes the report as pretty-printed JSON; "-" means stdout.
/// Throws std::runtime_error on I/O failure.
void write_report(const PipelineReport &report, const std::string &path);
void write_json(const nlohmann::json &doc, const std::string &path);

/// Loads the counterexample stored in a report document.
CounterExample load_counterexample(const nlohmann::json &report);

} // namespace llmtv
