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

#include "llmtv/cli.h"
#include "llmtv/report.h"

#include <CLI11.hpp>

#include <fstream>
#include <iostream>

namespace llmtv {

namespace {

namespace fs = std::filesystem;
using nlohmann::json;

/// Exit with a specific code after a message has been printed.
struct CliExit {
  int code;
};

struct Options {
  unsigned max_enum_bits = 20;
  uint64_t fuel = 10'000;
  unsigned undef_budget = 2;
  uint64_t timeout_ms = 30'000;
  unsigned workers = 1;

  std::string backend = "remote";
  std::string model = RemoteConfig{}.model;
  std::string endpoint = RemoteConfig{}.endpoint;
  std::string api_key_env = RemoteConfig{}.api_key_env;
  double noise = 0.0;

  uint64_t seed = 1;
  uint64_t iterations = 100'000;
  std::vector<std::string> reasons;

  std::string report;
};

CheckConfig check_config(const Options &o) {
  CheckConfig c;
  c.max_enum_bits = o.max_enum_bits;
  c.fuel = o.fuel;
  c.undef_budget = o.undef_budget;
  c.timeout_ms = o.timeout_ms;
  c.workers = o.workers;
  validate_config(c);
  return c;
}

BackendConfig backend_config(const Options &o) {
  BackendConfig b;
  auto kind = backend_kind_from_name(o.backend);
  if (!kind)
    throw std::invalid_argument("unknown backend '" + o.backend + "'");
  b.kind = *kind;
  b.remote.model = o.model;
  b.remote.endpoint = o.endpoint;
  b.remote.api_key_env = o.api_key_env;
  b.noise_rate = o.noise;
  b.seed = o.seed;
  return b;
}

FuzzConfig fuzz_config(const Options &o) {
  FuzzConfig f;
  f.seed = o.seed;
  f.iterations = o.iterations;
  f.fuel = o.fuel;
  f.undef.max_occurrences = o.undef_budget;
  return f;
}

std::string pair_id_from_path(const std::string &path) {
  std::string name = fs::path(path).filename().string();
  for (std::string_view suffix : {".src.mir.ll", ".mir.ll", ".ll"}) {
    if (name.size() > suffix.size() && name.ends_with(suffix))
      return name.substr(0, name.size() - suffix.size());
  }
  return name;
}

TransformationPair load_pair(const std::string &src, const std::string &tgt) {
  std::string src_text = read_file(src);
  return parse_pair(src_text, read_file(tgt), pair_id_from_path(src));
}

int exit_code(const FinalResult &f) {
  switch (f.kind) {
  case FinalResult::Kind::Sound: return kExitSound;
  case FinalResult::Kind::Unsound: return kExitUnsound;
  case FinalResult::Kind::Unknown: return kExitUnknown;
  }
  return kExitUnknown;
}

std::string summary(const PipelineReport &r) {
  std::string s = r.pair_id + ": ";
  switch (r.final.kind) {
  case FinalResult::Kind::Sound:
    s += "sound (" + std::string(provenance_name(r.final.provenance)) + ")";
    break;
  case FinalResult::Kind::Unsound: {
    s += "unsound (" + std::string(provenance_name(r.final.provenance)) + ";";
    for (auto reason : r.final.reasons)
      s += " " + std::string(reason_name(reason));
    s += ")";
    break;
  }
  case FinalResult::Kind::Unknown:
    s += "unknown (" + r.final.cause + ")";
    break;
  }
  if (r.counterexample) {
    s += "\n  input:";
    for (const auto &a : r.counterexample->args)
      s += " " + a.str();
    s += "\n  source " + r.counterexample->src_outcome.str();
    s += "\n  target " + r.counterexample->tgt_outcome.str();
  }
  return s;
}

int finish(PipelineReport &r, const Options &o, std::ostream &out) {
  r.trace.push_back(Stage::Reported);
  std::string path = o.report.empty() ? r.pair_id + ".report.json" : o.report;
  // With "-" stdout carries only the JSON document.
  if (path == "-") {
    out << report_to_json(r).dump(2) << "\n";
  } else {
    write_report(r, path);
    out << summary(r) << "\n" << "report: " << path << "\n";
  }
  return exit_code(r.final);
}

int cmd_check(const std::string &src, const std::string &tgt,
              const Options &o, std::ostream &out) {
  auto pair = load_pair(src, tgt);
  PipelineReport r;
  r.pair_id = pair.id;
  auto t0 = std::chrono::steady_clock::now();
  Verdict v = check_pair(pair, check_config(o));
  r.timings_ms["checker"] = std::chrono::duration<double, std::milli>(
                                std::chrono::steady_clock::now() - t0)
                                .count();
  r.verdict = v;
  if (v.is_unknown()) {
    r.final = {FinalResult::Kind::Unknown, Provenance::Formal, {},
               std::string(unknown_cause_name(v.cause))};
  } else {
    r.trace.push_back(Stage::CheckerDecided);
    r.final.kind = v.is_sound() ? FinalResult::Kind::Sound
                                : FinalResult::Kind::Unsound;
    r.final.reasons = v.reasons;
    r.counterexample = v.cex;
  }
  return finish(r, o, out);
}

int cmd_predict(const std::string &src, const std::string &tgt,
                const Options &o, std::ostream &out) {
  auto pair = load_pair(src, tgt);
  PipelineReport r;
  r.pair_id = pair.id;
  try {
    Prediction p = predict(pair, backend_config(o));
    r.prediction = p;
    r.trace.push_back(Stage::Predicted);
    if (p.status == Label::Sound) {
      r.final = {FinalResult::Kind::Sound, Provenance::Predicted, {}, {}};
    } else {
      r.final = {FinalResult::Kind::Unsound, Provenance::PredictedUnconfirmed,
                 p.reasons, {}};
    }
  } catch (const PredictError &e) {
    r.predict_error =
        std::string(predict_error_name(e.kind())) + ": " + e.what();
    r.final = {FinalResult::Kind::Unknown, Provenance::Formal, {},
               std::string(kPredictorUnavailable)};
  }
  return finish(r, o, out);
}

int cmd_fuzz(const std::string &src, const std::string &tgt, const Options &o,
             std::ostream &out) {
  auto pair = load_pair(src, tgt);
  ReasonSet reasons;
  for (const auto &name : o.reasons) {
    auto r = reason_from_name(name);
    if (!r)
      throw CLI::ValidationError("--reason", "unknown reason '" + name + "'");
    reasons.insert(*r);
  }
  PipelineReport r;
  r.pair_id = pair.id;
  r.trace.push_back(Stage::RoutedToFuzzer);
  FuzzReport fr;
  try {
    fr = fuzz(pair, reasons, fuzz_config(o));
  } catch (const RejectedReason &e) {
    throw CLI::ValidationError("--reason", e.what());
  }
  r.fuzz = fr;
  if (fr.found()) {
    r.trace.push_back(Stage::FuzzerConfirmed);
    r.final = {FinalResult::Kind::Unsound, Provenance::FuzzConfirmed,
               {*fr.reason}, {}};
    r.counterexample = fr.cex;
  } else {
    r.trace.push_back(Stage::FuzzerUnconfirmed);
    r.final = {FinalResult::Kind::Unknown, Provenance::Formal, {},
               "no_counterexample"};
  }
  return finish(r, o, out);
}

PipelineConfig pipeline_config(const Options &o) {
  PipelineConfig cfg;
  cfg.check = check_config(o);
  cfg.backend = backend_config(o);
  cfg.fuzz = fuzz_config(o);
  return cfg;
}

int cmd_validate(const std::string &src, const std::string &tgt,
                 const Options &o, std::ostream &out) {
  auto pair = load_pair(src, tgt);
  PipelineConfig cfg = pipeline_config(o);
  auto backend = make_backend(cfg.backend);
  PipelineReport r = validate(pair, cfg, *backend);
  r.trace.pop_back(); // finish() appends Reported after writing
  return finish(r, o, out);
}

int cmd_replay(const std::string &src, const std::string &tgt,
               const std::string &report, const Options &o,
               std::ostream &out) {
  auto pair = load_pair(src, tgt);
  json doc;
  try {
    doc = json::parse(read_file(report));
  } catch (const json::exception &e) {
    throw std::invalid_argument(std::string("malformed report: ") + e.what());
  }
  CounterExample cex = load_counterexample(doc);
  UndefBudget budget{o.undef_budget, UndefBudget{}.max_bits};
  if (replay_counterexample(pair, cex, o.fuel, budget)) {
    out << pair.id << ": counterexample reproduced\n";
    return kExitUnsound;
  }
  DivergenceResult d =
      run_differential(pair, Input{cex.args, cex.mem0}, o.fuel, budget);
  if (d.diverged) {
    out << pair.id << ": input diverges ("
        << reason_name(*d.reason) << "); recorded outcomes differ\n";
    return kExitUnsound;
  }
  out << pair.id << ": counterexample did not reproduce\n";
  return kExitUnknown;
}

int cmd_batch(const std::string &corpus, const Options &o, std::ostream &out) {
  auto pairs = load_corpus(corpus);
  PipelineConfig cfg = pipeline_config(o);
  auto backend = make_backend(cfg.backend);
  auto reports = validate_batch(pairs, cfg, *backend, o.workers);
  std::string path = o.report.empty() ? "batch.report.json" : o.report;
  json doc = {{"schema_version", kReportSchemaVersion},
              {"reports", json::array()}};
  bool any_unsound = false, any_unknown = false;
  for (const auto &r : reports) {
    doc["reports"].push_back(report_to_json(r));
    if (path != "-")
      out << summary(r) << "\n";
    any_unsound |= r.final.kind == FinalResult::Kind::Unsound;
    any_unknown |= r.final.kind == FinalResult::Kind::Unknown;
  }
  if (path == "-")
    out << doc.dump(2) << "\n";
  else
    write_json(doc, path);
  if (any_unsound)
    return kExitUnsound;
  return any_unknown ? kExitUnknown : kExitSound;
}

template <class F>
void with_output(const std::string &path, std::ostream &out, F &&write) {
  if (path == "-") {
    write(out);
    return;
  }
  std::ofstream os(path);
  if (!os)
    throw std::runtime_error("cannot open '" + path + "' for writing");
  write(os);
  if (!os)
    throw std::runtime_error("write to '" + path + "' failed");
}

std::vector<DatasetRecord> load_records(const std::string &path) {
  std::ifstream in(path);
  if (!in)
    throw FileError("cannot read " + path);
  return read_records(in);
}

} // namespace

int run_cli(const std::vector<std::string> &args, std::ostream &out,
            std::ostream &err) {
  CLI::App app{"Translation validation for a mini SSA IR", "llmtv"};
  app.require_subcommand(1);
  Options o;

  auto add_check = [&](CLI::App *c) {
    c->add_option("--max-enum-bits", o.max_enum_bits,
                  "Input entropy enumerated exhaustively")
        ->capture_default_str();
    c->add_option("--fuel", o.fuel, "Execution step limit per run")
        ->capture_default_str();
    c->add_option("--undef-budget", o.undef_budget,
                  "Undef uses enumerated per run")
        ->capture_default_str();
    c->add_option("--timeout-ms", o.timeout_ms)->capture_default_str();
    c->add_option("--workers", o.workers)->capture_default_str();
  };
  auto add_backend = [&](CLI::App *c) {
    c->add_option("--backend", o.backend, "Predictor backend")
        ->check(CLI::IsMember({"remote", "heuristic", "oracle"}))
        ->capture_default_str();
    c->add_option("--model", o.model)->capture_default_str();
    c->add_option("--endpoint", o.endpoint)->capture_default_str();
    c->add_option("--api-key-env", o.api_key_env,
                  "Environment variable holding the API key")
        ->capture_default_str();
    c->add_option("--noise", o.noise, "Oracle label noise rate")
        ->check(CLI::Range(0.0, 1.0));
  };
  auto add_fuzz = [&](CLI::App *c) {
    c->add_option("--iterations", o.iterations)->capture_default_str();
  };
  auto add_seed = [&](CLI::App *c) {
    c->add_option("--seed", o.seed)->capture_default_str();
  };
  auto add_report = [&](CLI::App *c) {
    c->add_option("--report", o.report,
                  "Report path ('-' for stdout; default <id>.report.json)");
  };

  std::string src, tgt, report_in, corpus;
  auto add_pair = [&](CLI::App *c) {
    c->add_option("src", src, "Source function file")->required();
    c->add_option("tgt", tgt, "Target function file")->required();
  };

  auto *check = app.add_subcommand("check", "Bounded refinement check");
  add_pair(check);
  add_check(check);
  add_report(check);

  auto *pred = app.add_subcommand("predict", "Query the predictor");
  add_pair(pred);
  add_backend(pred);
  add_seed(pred);
  add_report(pred);

  auto *fz = app.add_subcommand("fuzz", "Reason-directed fuzzing");
  add_pair(fz);
  fz->add_option("--reason", o.reasons, "return_value and/or memory")
      ->required();
  add_seed(fz);
  add_fuzz(fz);
  fz->add_option("--fuel", o.fuel)->capture_default_str();
  add_report(fz);

  auto *val = app.add_subcommand("validate", "Full validation pipeline");
  add_pair(val);
  add_check(val);
  add_backend(val);
  add_seed(val);
  add_fuzz(val);
  add_report(val);

  auto *rep = app.add_subcommand("replay", "Replay a report counterexample");
  add_pair(rep);
  rep->add_option("report", report_in, "Report JSON file")->required();
  rep->add_option("--fuel", o.fuel)->capture_default_str();
  rep->add_option("--undef-budget", o.undef_budget)->capture_default_str();

  auto *batch = app.add_subcommand("batch", "Validate a corpus");
  batch->add_option("corpus", corpus, "Corpus directory or manifest")
      ->required();
  add_check(batch);
  add_backend(batch);
  add_seed(batch);
  add_fuzz(batch);
  add_report(batch);

  auto *ds = app.add_subcommand("dataset", "Fine-tuning corpus tools");
  ds->require_subcommand(1);
  std::string in_path, out_path = "-", train_path, test_path, ratio = "1:1";
  size_t test_count = 40;

  auto *ds_label = ds->add_subcommand("label", "Label a corpus");
  ds_label->add_option("corpus", corpus)->required();
  ds_label->add_option("--out", out_path)->capture_default_str();
  add_check(ds_label);

  auto *ds_dedupe = ds->add_subcommand("dedupe", "Remove duplicates");
  ds_dedupe->add_option("records", in_path)->required();
  ds_dedupe->add_option("--out", out_path)->capture_default_str();

  auto *ds_sample = ds->add_subcommand("sample", "Ratio sampling");
  ds_sample->add_option("records", in_path)->required();
  ds_sample->add_option("--ratio", ratio, "sound:unsound")
      ->capture_default_str();
  add_seed(ds_sample);
  ds_sample->add_option("--test-count", test_count)->capture_default_str();
  ds_sample->add_option("--train", train_path)->required();
  ds_sample->add_option("--test", test_path)->required();

  auto *ds_emit = ds->add_subcommand("emit", "Export fine-tune lines");
  ds_emit->add_option("records", in_path)->required();
  ds_emit->add_option("--out", out_path)->capture_default_str();

  std::vector<std::string> rev(args.rbegin(), args.rend());
  if (!rev.empty())
    rev.pop_back();

  try {
    app.parse(rev);
  } catch (const CLI::ParseError &e) {
    int code = app.exit(e, out, err);
    return code == 0 ? 0 : kExitUsage;
  }

  try {
    if (*check)
      return cmd_check(src, tgt, o, out);
    if (*pred)
      return cmd_predict(src, tgt, o, out);
    if (*fz)
      return cmd_fuzz(src, tgt, o, out);
    if (*val)
      return cmd_validate(src, tgt, o, out);
    if (*rep)
      return cmd_replay(src, tgt, report_in, o, out);
    if (*batch)
      return cmd_batch(corpus, o, out);
    if (*ds_label) {
      auto labeled = label_corpus(load_corpus(corpus), check_config(o));
      for (const auto &s : labeled.skipped)
        err << "skipped " << s.id << ": " << unknown_cause_name(s.cause)
            << "\n";
      with_output(out_path, out,
                  [&](std::ostream &os) { write_records(labeled.records, os); });
      err << "labeled " << labeled.records.size() << ", skipped "
          << labeled.skipped.size() << "\n";
      return kExitSound;
    }
    if (*ds_dedupe) {
      auto records = load_records(in_path);
      auto kept = dedupe(records);
      with_output(out_path, out, [&](std::ostream &os) { write_records(kept, os); });
      err << "kept " << kept.size() << " of " << records.size() << "\n";
      return kExitSound;
    }
    if (*ds_sample) {
      SampleConfig sc;
      std::tie(sc.sound_parts, sc.unsound_parts) = parse_ratio(ratio);
      sc.seed = o.seed;
      sc.test_count = test_count;
      Split split = sample(load_records(in_path), sc);
      with_output(train_path, out,
                  [&](std::ostream &os) { write_records(split.train, os); });
      with_output(test_path, out,
                  [&](std::ostream &os) { write_records(split.test, os); });
      err << "train " << split.train.size() << ", test " << split.test.size()
          << "\n";
      return kExitSound;
    }
    if (*ds_emit) {
      auto records = load_records(in_path);
      with_output(out_path, out,
                  [&](std::ostream &os) { emit_finetune(records, os); });
      return kExitSound;
    }
  } catch (const CLI::ValidationError &e) {
    err << "error: " << e.what() << "\n";
    return kExitUsage;
  } catch (const FileError &e) {
    err << "error: " << e.what() << "\n";
    return kExitNoInput;
  } catch (const ParseError &e) {
    err << "error: " << e.what() << "\n";
    return kExitDataErr;
  } catch (const SsaError &e) {
    err << "error: " << e.what() << "\n";
    return kExitDataErr;
  } catch (const SignatureMismatch &e) {
    err << "error: " << e.what() << "\n";
    return kExitDataErr;
  } catch (const InsufficientData &e) {
    err << "error: " << e.what() << "\n";
    return kExitDataErr;
  } catch (const json::exception &e) {
    err << "error: " << e.what() << "\n";
    return kExitDataErr;
  } catch (const std::invalid_argument &e) {
    err << "error: " << e.what() << "\n";
    return kExitDataErr;
  } catch (const std::exception &e) {
    err << "error: " << e.what() << "\n";
    return kExitIOErr;
  }
  return kExitUsage;
}

} // namespace llmtv
