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

#include "llmtv/report.h"

#include <fstream>
#include <iostream>

namespace llmtv {

using nlohmann::json;

namespace {

Type type_from_string(const std::string &s) {
  if (s == "ptr")
    return Type::ptr();
  if (s.size() > 1 && s[0] == 'i')
    return Type::i(static_cast<unsigned>(std::stoul(s.substr(1))));
  throw std::invalid_argument("bad type '" + s + "' in report");
}

UBKind ub_from_name(const std::string &s) {
  for (auto k : {UBKind::DivByZero, UBKind::RemByZero, UBKind::DivOverflow,
                 UBKind::NullDeref, UBKind::OutOfBounds,
                 UBKind::BranchOnPoison})
    if (ub_kind_name(k) == s)
      return k;
  throw std::invalid_argument("bad UB kind '" + s + "' in report");
}

json reasons_to_json(const ReasonSet &reasons) {
  json a = json::array();
  for (auto r : reasons)
    a.push_back(std::string(reason_name(r)));
  return a;
}

std::string_view verdict_kind_name(Verdict::Kind k) {
  switch (k) {
  case Verdict::Kind::Sound: return "sound";
  case Verdict::Kind::Unsound: return "unsound";
  case Verdict::Kind::Unknown: return "unknown";
  }
  return "?";
}

std::string_view final_kind_name(FinalResult::Kind k) {
  switch (k) {
  case FinalResult::Kind::Sound: return "sound";
  case FinalResult::Kind::Unsound: return "unsound";
  case FinalResult::Kind::Unknown: return "unknown";
  }
  return "?";
}

} // namespace

json value_to_json(const Value &v) { return v.str(); }

json memory_to_json(const MemoryState &m) {
  json blocks = json::array();
  for (const auto &b : m.blocks) {
    json cells = json::array();
    for (const auto &c : b.cells)
      cells.push_back(c.str());
    blocks.push_back({{"elem", b.elem.str()}, {"cells", cells}});
  }
  return {{"param_blocks", m.param_blocks}, {"blocks", blocks}};
}

MemoryState memory_from_json(const json &j) {
  MemoryState m;
  m.param_blocks = j.at("param_blocks").get<uint32_t>();
  for (const auto &b : j.at("blocks")) {
    MemBlock blk;
    blk.elem = type_from_string(b.at("elem").get<std::string>());
    for (const auto &c : b.at("cells"))
      blk.cells.push_back(parse_value(c.get<std::string>()));
    m.blocks.push_back(std::move(blk));
  }
  return m;
}

json outcome_to_json(const ExecOutcome &o) {
  switch (o.kind) {
  case ExecOutcome::Kind::OutOfFuel:
    return {{"kind", "out_of_fuel"}};
  case ExecOutcome::Kind::TriggeredUB:
    return {{"kind", "ub"},
            {"ub", std::string(ub_kind_name(o.ub))},
            {"block", o.at.block},
            {"index", o.at.index}};
  case ExecOutcome::Kind::Returned:
    break;
  }
  json j = {{"kind", "returned"}, {"memory", memory_to_json(o.mem)}};
  j["value"] = o.ret ? json(o.ret->str()) : json(nullptr);
  return j;
}

ExecOutcome outcome_from_json(const json &j) {
  auto kind = j.at("kind").get<std::string>();
  if (kind == "out_of_fuel")
    return ExecOutcome::out_of_fuel();
  if (kind == "ub")
    return ExecOutcome::triggered_ub(
        ub_from_name(j.at("ub").get<std::string>()),
        {j.at("block").get<std::string>(), j.at("index").get<int>()});
  if (kind != "returned")
    throw std::invalid_argument("bad outcome kind '" + kind + "' in report");
  std::optional<Value> ret;
  if (!j.at("value").is_null())
    ret = parse_value(j.at("value").get<std::string>());
  return ExecOutcome::returned(ret, memory_from_json(j.at("memory")));
}

json counterexample_to_json(const CounterExample &cex) {
  json args = json::array();
  for (const auto &a : cex.args)
    args.push_back(a.str());
  return {{"args", args},
          {"memory", memory_to_json(cex.mem0)},
          {"src_outcome", outcome_to_json(cex.src_outcome)},
          {"tgt_outcome", outcome_to_json(cex.tgt_outcome)},
          {"src_choices", cex.src_choices},
          {"tgt_choices", cex.tgt_choices},
          {"summary", "source " + cex.src_outcome.str() + "; target " +
                          cex.tgt_outcome.str()}};
}

CounterExample counterexample_from_json(const json &j) {
  CounterExample cex;
  for (const auto &a : j.at("args"))
    cex.args.push_back(parse_value(a.get<std::string>()));
  cex.mem0 = memory_from_json(j.at("memory"));
  cex.src_outcome = outcome_from_json(j.at("src_outcome"));
  cex.tgt_outcome = outcome_from_json(j.at("tgt_outcome"));
  cex.src_choices = j.at("src_choices").get<std::vector<uint64_t>>();
  cex.tgt_choices = j.at("tgt_choices").get<std::vector<uint64_t>>();
  return cex;
}

json verdict_to_json(const Verdict &v) {
  json j = {{"verdict", verdict_kind_name(v.kind)}};
  if (v.is_unsound())
    j["reasons"] = reasons_to_json(v.reasons);
  if (v.is_unknown())
    j["cause"] = unknown_cause_name(v.cause);
  return j;
}

json prediction_to_json(const Prediction &p) {
  return {{"status", p.status == Label::Sound ? "sound" : "unsound"},
          {"reasons", reasons_to_json(p.reasons)},
          {"backend", p.backend},
          {"raw", p.raw}};
}

json fuzz_report_to_json(const FuzzReport &r) {
  json j = {{"found", r.found()},
            {"trials_run", r.trials_run},
            {"stats",
             {{"return_value_trials", r.stats.return_value_trials},
              {"memory_trials", r.stats.memory_trials},
              {"discarded", r.stats.discarded}}}};
  if (r.reason)
    j["reason"] = reason_name(*r.reason);
  if (r.cex)
    j["counterexample"] = counterexample_to_json(*r.cex);
  return j;
}

json report_to_json(const PipelineReport &r) {
  json j;
  j["schema_version"] = kReportSchemaVersion;
  j["pair_id"] = r.pair_id;
  j["final"] = final_kind_name(r.final.kind);
  if (r.final.kind == FinalResult::Kind::Unknown) {
    j["cause"] = r.final.cause;
  } else {
    j["provenance"] = provenance_name(r.final.provenance);
  }
  j["reasons"] = reasons_to_json(r.final.reasons);
  json trace = json::array();
  for (auto s : r.trace)
    trace.push_back(stage_name(s));
  j["stage_trace"] = trace;
  if (r.verdict)
    j["checker"] = verdict_to_json(*r.verdict);
  if (r.prediction)
    j["prediction"] = prediction_to_json(*r.prediction);
  if (r.predict_error)
    j["prediction_error"] = *r.predict_error;
  if (r.fuzz)
    j["fuzz"] = fuzz_report_to_json(*r.fuzz);
  if (r.counterexample)
    j["counterexample"] = counterexample_to_json(*r.counterexample);
  j["timings_ms"] = r.timings_ms;
  return j;
}

void write_json(const json &doc, const std::string &path) {
  if (path == "-") {
    std::cout << doc.dump(2) << "\n";
    return;
  }
  std::ofstream os(path);
  if (!os)
    throw std::runtime_error("cannot open '" + path + "' for writing");
  os << doc.dump(2) << "\n";
  if (!os)
    throw std::runtime_error("write to '" + path + "' failed");
}

void write_report(const PipelineReport &report, const std::string &path) {
  write_json(report_to_json(report), path);
}

CounterExample load_counterexample(const json &report) {
  if (report.value("schema_version", 0) != kReportSchemaVersion)
    throw std::invalid_argument("unsupported report schema version");
  if (!report.contains("counterexample"))
    throw std::invalid_argument("report has no counterexample");
  return counterexample_from_json(report.at("counterexample"));
}

} // namespace llmtv
