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

// End-to-end validation: formal check first; pairs the checker cannot
// decide go to the predictor; return-value/memory unsoundness predictions
// go to the fuzzer for confirmation.

#include "llmtv/dataset.h"
#include "llmtv/fuzzer.h"
#include "llmtv/predictor.h"

#include <functional>
#include <map>

namespace llmtv {

enum class Stage : uint8_t {
  CheckerDecided,
  RoutedToPredictor,
  Predicted,
  RoutedToFuzzer,
  FuzzerConfirmed,
  FuzzerUnconfirmed,
  Reported,
};

std::string_view stage_name(Stage s);

enum class Provenance : uint8_t {
  Formal,
  Predicted,
  FuzzConfirmed,
  PredictedUnconfirmed,
};

std::string_view provenance_name(Provenance p);

struct FinalResult {
  enum class Kind : uint8_t { Sound, Unsound, Unknown };

  Kind kind = Kind::Unknown;
  Provenance provenance = Provenance::Formal; // Sound / Unsound
  ReasonSet reasons;                          // Unsound
  std::string cause;                          // Unknown

  bool operator==(const FinalResult &) const = default;
};

inline constexpr std::string_view kPredictorUnavailable =
    "predictor_unavailable";

struct PipelineConfig {
  CheckConfig check;
  BackendConfig backend;
  FuzzConfig fuzz;
  std::string report_path;
};

struct PipelineReport {
  std::string pair_id;
  std::vector<Stage> trace;
  FinalResult final;
  std::optional<Verdict> verdict;
  std::optional<Prediction> prediction;
  std::optional<std::string> predict_error; // "<kind>: <message>"
  std::optional<FuzzReport> fuzz;
  std::optional<CounterExample> counterexample;
  std::map<std::string, double> timings_ms;
};

/// Stage implementations, injectable so routing can be exercised alone.
/// `predict` may throw PredictError.
struct StageRunners {
  std::function<Verdict(const TransformationPair &)> check;
  std::function<Prediction(const TransformationPair &)> predict;
  std::function<FuzzReport(const TransformationPair &, const ReasonSet &)> fuzz;
};

PipelineReport run_pipeline(const TransformationPair &pair,
                            const StageRunners &stages);

PipelineReport validate(const TransformationPair &pair,
                        const PipelineConfig &cfg, Backend &backend);
PipelineReport validate(const TransformationPair &pair,
                        const PipelineConfig &cfg);

/// Validates pairs on `workers` threads; reports keep the input order.
std::vector<PipelineReport>
validate_batch(const std::vector<TransformationPair> &pairs,
               const PipelineConfig &cfg, Backend &backend, unsigned workers);

} // namespace llmtv
