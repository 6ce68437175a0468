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

#include "llmtv/pipeline.h"
#include "llmtv/report.h"

#include <atomic>
#include <mutex>
#include <thread>

namespace llmtv {

std::string_view stage_name(Stage s) {
  switch (s) {
  case Stage::CheckerDecided: return "checker_decided";
  case Stage::RoutedToPredictor: return "routed_to_predictor";
  case Stage::Predicted: return "predicted";
  case Stage::RoutedToFuzzer: return "routed_to_fuzzer";
  case Stage::FuzzerConfirmed: return "fuzzer_confirmed";
  case Stage::FuzzerUnconfirmed: return "fuzzer_unconfirmed";
  case Stage::Reported: return "reported";
  }
  return "?";
}

std::string_view provenance_name(Provenance p) {
  switch (p) {
  case Provenance::Formal: return "formal";
  case Provenance::Predicted: return "predicted";
  case Provenance::FuzzConfirmed: return "fuzz_confirmed";
  case Provenance::PredictedUnconfirmed: return "predicted_unconfirmed";
  }
  return "?";
}

namespace {

using Clock = std::chrono::steady_clock;

double ms_since(Clock::time_point t0) {
  return std::chrono::duration<double, std::milli>(Clock::now() - t0).count();
}

FinalResult make_sound(Provenance p) {
  return {FinalResult::Kind::Sound, p, {}, {}};
}

FinalResult make_unsound(ReasonSet reasons, Provenance p) {
  return {FinalResult::Kind::Unsound, p, std::move(reasons), {}};
}

FinalResult make_unknown(std::string cause) {
  return {FinalResult::Kind::Unknown, Provenance::Formal, {}, std::move(cause)};
}

} // namespace

PipelineReport run_pipeline(const TransformationPair &pair,
                            const StageRunners &stages) {
  PipelineReport r;
  r.pair_id = pair.id;

  auto t0 = Clock::now();
  Verdict v = stages.check(pair);
  r.timings_ms["checker"] = ms_since(t0);
  r.verdict = v;

  if (!v.is_unknown()) {
    r.trace.push_back(Stage::CheckerDecided);
    if (v.is_sound()) {
      r.final = make_sound(Provenance::Formal);
    } else {
      r.final = make_unsound(v.reasons, Provenance::Formal);
      r.counterexample = v.cex;
    }
    r.trace.push_back(Stage::Reported);
    return r;
  }

  r.trace.push_back(Stage::RoutedToPredictor);
  t0 = Clock::now();
  Prediction pred;
  try {
    pred = stages.predict(pair);
  } catch (const PredictError &e) {
    r.timings_ms["predictor"] = ms_since(t0);
    r.predict_error =
        std::string(predict_error_name(e.kind())) + ": " + e.what();
    r.final = make_unknown(std::string(kPredictorUnavailable));
    r.trace.push_back(Stage::Reported);
    return r;
  }
  r.timings_ms["predictor"] = ms_since(t0);
  r.prediction = pred;
  r.trace.push_back(Stage::Predicted);

  if (pred.status == Label::Sound) {
    r.final = make_sound(Provenance::Predicted);
    r.trace.push_back(Stage::Reported);
    return r;
  }

  ReasonSet targets = fuzzable_reasons(pred.reasons);
  if (targets.empty()) {
    r.final = make_unsound(pred.reasons, Provenance::PredictedUnconfirmed);
    r.trace.push_back(Stage::Reported);
    return r;
  }

  r.trace.push_back(Stage::RoutedToFuzzer);
  t0 = Clock::now();
  FuzzReport fr = stages.fuzz(pair, targets);
  r.timings_ms["fuzzer"] = ms_since(t0);
  r.fuzz = fr;
  if (fr.found()) {
    r.trace.push_back(Stage::FuzzerConfirmed);
    r.final = make_unsound({*fr.reason}, Provenance::FuzzConfirmed);
    r.counterexample = fr.cex;
  } else {
    r.trace.push_back(Stage::FuzzerUnconfirmed);
    r.final = make_unsound(pred.reasons, Provenance::PredictedUnconfirmed);
  }
  r.trace.push_back(Stage::Reported);
  return r;
}

PipelineReport validate(const TransformationPair &pair,
                        const PipelineConfig &cfg, Backend &backend) {
  StageRunners stages;
  stages.check = [&](const TransformationPair &p) {
    return check_pair(p, cfg.check);
  };
  stages.predict = [&](const TransformationPair &p) {
    return predict(p, backend);
  };
  stages.fuzz = [&](const TransformationPair &p, const ReasonSet &reasons) {
    return fuzz(p, reasons, cfg.fuzz);
  };
  PipelineReport r = run_pipeline(pair, stages);
  if (!cfg.report_path.empty())
    write_report(r, cfg.report_path);
  return r;
}

PipelineReport validate(const TransformationPair &pair,
                        const PipelineConfig &cfg) {
  auto backend = make_backend(cfg.backend);
  return validate(pair, cfg, *backend);
}

std::vector<PipelineReport>
validate_batch(const std::vector<TransformationPair> &pairs,
               const PipelineConfig &cfg, Backend &backend, unsigned workers) {
  std::vector<PipelineReport> out(pairs.size());
  PipelineConfig one = cfg;
  one.report_path.clear();
  one.check.workers = 1;

  std::atomic<size_t> next{0};
  std::mutex err_mu;
  std::exception_ptr err;
  auto work = [&] {
    for (size_t i = next++; i < pairs.size(); i = next++) {
      try {
        out[i] = validate(pairs[i], one, backend);
      } catch (...) {
        std::lock_guard lock(err_mu);
        if (!err)
          err = std::current_exception();
      }
    }
  };
  workers = std::max(1u, std::min<unsigned>(workers, pairs.size()));
  if (workers == 1) {
    work();
  } else {
    std::vector<std::jthread> pool;
    for (unsigned w = 0; w < workers; ++w)
      pool.emplace_back(work);
  }
  if (err)
    std::rethrow_exception(err);
  return out;
}

} // namespace llmtv
