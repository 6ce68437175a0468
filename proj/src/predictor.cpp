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

#include "llmtv/predictor.h"

#define CPPHTTPLIB_OPENSSL_SUPPORT
#include <httplib.h>
#include <json.hpp>

#include <algorithm>
#include <cctype>
#include <cstdlib>
#include <random>
#include <thread>

namespace llmtv {

const std::string_view kSystemText =
    "Your task involves analyzing the given IR transformations. On receiving "
    "a transformation in the \"Transformation: X \xE2\x86\x92 Y\" format, "
    "analyze and respond in the \"Status: A Reason: B\" format. \"A\" denotes "
    "the transformation's correctness as CORRECT or UNSOUND. For UNSOUND "
    "transformations, list reasons \"B\". Your analysis involves a two-step "
    "approach:\n"
    "- Special Value Injection: Inject specific values into both original and "
    "transformed IR to observe and compare behaviors.\n"
    "- Step-by-Step Computation and Analysis: Execute detailed computations "
    "for both IR versions to pinpoint discrepancies.\n"
    "Base your analysis on the following to assess soundness:\n"
    "- Undefined Behavior Consistency: The target should only trigger UB if "
    "the source does. New UB in the target renders the transformation "
    "unsound.\n"
    "- Return Domain Consistency: The target's return domain must align with "
    "the source's, except when the source triggers UB. A mismatched return "
    "domain without source UB suggests unsoundness.\n"
    "- Poison Value Propagation: The target's return value should indicate "
    "poison only if the source\xE2\x80\x99s does. Any additional poison in the "
    "target signals unsoundness.\n"
    "- Undefined Value Handling: The target's return value should be "
    "Undefined only if the source\xE2\x80\x99s is Undefined or poison. "
    "Introduction of Undefined values by the target without source "
    "justification is unsound.\n"
    "- Return Value Consistency: The return values of both the source and "
    "target should match when the source is clear of Undefined or poison. "
    "Variances under a well-defined source indicate unsoundness.\n"
    "- Memory State Refinement: Verify that the memory state after target "
    "execution refines that of the source's. Memory state inconsistencies "
    "suggest unsoundness.";

namespace {

constexpr std::string_view kUserPrefix = "Transformation: ";

std::string lower(std::string_view s) {
  std::string out(s);
  std::transform(out.begin(), out.end(), out.begin(),
                 [](unsigned char c) { return std::tolower(c); });
  return out;
}

std::string_view reason_phrase(UnsoundReason r) {
  switch (r) {
  case UnsoundReason::ReturnValue: return "return values";
  case UnsoundReason::Memory: return "memory";
  case UnsoundReason::NewUB: return "new undefined behavior";
  }
  return "?";
}

bool has_word(std::string_view hay, std::string_view word) {
  for (size_t pos = hay.find(word); pos != std::string_view::npos;
       pos = hay.find(word, pos + 1)) {
    bool left = pos == 0 || !std::isalnum(static_cast<unsigned char>(hay[pos - 1]));
    size_t end = pos + word.size();
    bool right =
        end == hay.size() || !std::isalnum(static_cast<unsigned char>(hay[end]));
    if (left && right)
      return true;
  }
  return false;
}

} // namespace

PromptBundle encode_prompt(const TransformationPair &pair) {
  PromptBundle p;
  p.system = std::string(kSystemText);
  p.user = std::string(kUserPrefix) + print_function(pair.src) + " " +
           std::string(kArrow) + " " + print_function(pair.tgt);
  return p;
}

std::pair<std::string, std::string> decode_user(std::string_view user) {
  if (user.substr(0, kUserPrefix.size()) != kUserPrefix)
    throw std::invalid_argument("user message lacks the transformation prefix");
  user.remove_prefix(kUserPrefix.size());
  const std::string sep = " " + std::string(kArrow) + " ";
  size_t pos = user.find(sep);
  if (pos == std::string_view::npos)
    throw std::invalid_argument("user message lacks the arrow separator");
  return {std::string(user.substr(0, pos)),
          std::string(user.substr(pos + sep.size()))};
}

size_t estimate_tokens(const PromptBundle &prompt) {
  return (prompt.system.size() + prompt.user.size() + 2) / 3;
}

std::string encode_assistant(Label label, const ReasonSet &reasons) {
  if (label == Label::Sound)
    return "Transformation status: SOUND Reason: none";
  std::string s = "Transformation status: UNSOUND Reason: ";
  bool first = true;
  for (UnsoundReason r : {UnsoundReason::ReturnValue, UnsoundReason::Memory,
                          UnsoundReason::NewUB}) {
    if (!reasons.count(r))
      continue;
    if (!first)
      s += ", ";
    s += reason_phrase(r);
    first = false;
  }
  return s;
}

Prediction decode_response(std::string_view text) {
  const std::string low = lower(text);
  std::optional<Label> status;
  size_t after = 0;
  for (size_t pos = low.find("status:"); pos != std::string::npos;
       pos = low.find("status:", pos + 1)) {
    size_t i = pos + 7;
    while (i < low.size() && std::isspace(static_cast<unsigned char>(low[i])))
      ++i;
    size_t j = i;
    while (j < low.size() && std::isalpha(static_cast<unsigned char>(low[j])))
      ++j;
    std::string_view word(low.data() + i, j - i);
    if (word == "unsound")
      status = Label::Unsound;
    else if (word == "sound" || word == "correct")
      status = Label::Sound;
    if (status) {
      after = j;
      break;
    }
  }
  if (!status)
    throw DecodeError(DecodeError::Kind::Unparseable,
                      "no status token in response");

  Prediction p;
  p.status = *status;
  p.raw = std::string(text);
  if (p.status == Label::Sound)
    return p;

  size_t from = low.find("reason", after);
  if (from == std::string::npos)
    from = after;
  std::string_view tail(low.data() + from, low.size() - from);
  std::string_view raw_tail(text.data() + from, text.size() - from);
  if (tail.find("memory") != std::string_view::npos)
    p.reasons.insert(UnsoundReason::Memory);
  if (tail.find("return") != std::string_view::npos)
    p.reasons.insert(UnsoundReason::ReturnValue);
  if (tail.find("undefined behavior") != std::string_view::npos ||
      tail.find("undefined behaviour") != std::string_view::npos ||
      has_word(raw_tail, "UB"))
    p.reasons.insert(UnsoundReason::NewUB);
  if (p.reasons.empty())
    throw DecodeError(DecodeError::Kind::MissingReason,
                      "UNSOUND response names no known reason");
  return p;
}

std::string_view predict_error_name(PredictError::Kind kind) {
  switch (kind) {
  case PredictError::Kind::Transport: return "transport";
  case PredictError::Kind::Decode: return "decode";
  case PredictError::Kind::Auth: return "auth";
  case PredictError::Kind::TooLarge: return "too_large";
  }
  return "?";
}

CheckConfig BackendConfig::default_oracle_check() {
  CheckConfig c;
  c.max_enum_bits = 24;
  c.on_out_of_fuel = CheckConfig::FuelPolicy::SkipInput;
  c.timeout_ms = 120'000;
  return c;
}

std::optional<BackendConfig::Kind> backend_kind_from_name(std::string_view name) {
  if (name == "remote")
    return BackendConfig::Kind::Remote;
  if (name == "heuristic")
    return BackendConfig::Kind::Heuristic;
  if (name == "oracle")
    return BackendConfig::Kind::Oracle;
  return std::nullopt;
}

std::string_view backend_kind_name(BackendConfig::Kind kind) {
  switch (kind) {
  case BackendConfig::Kind::Remote: return "remote";
  case BackendConfig::Kind::Heuristic: return "heuristic";
  case BackendConfig::Kind::Oracle: return "oracle";
  }
  return "?";
}

// ---------------------------------------------------------------------------
// Offline backends

namespace {

Prediction offline_prediction(Label label, ReasonSet reasons,
                              std::string backend) {
  Prediction p = decode_response(encode_assistant(label, reasons));
  p.backend = std::move(backend);
  return p;
}

class HeuristicBackend final : public Backend {
public:
  std::string id() const override { return "heuristic"; }

  Prediction complete(const TransformationPair &pair,
                      const PromptBundle &) override {
    if (canonicalize_registers(pair.src) == canonicalize_registers(pair.tgt))
      return offline_prediction(Label::Sound, {}, id());
    return offline_prediction(Label::Unsound, {UnsoundReason::ReturnValue},
                              id());
  }
};

uint64_t fnv1a(std::string_view s, uint64_t h = 1469598103934665603ull) {
  for (unsigned char c : s) {
    h ^= c;
    h *= 1099511628211ull;
  }
  return h;
}

class OracleBackend final : public Backend {
public:
  OracleBackend(CheckConfig check, double noise_rate, uint64_t seed)
      : check_(check), noise_rate_(noise_rate), seed_(seed) {}

  std::string id() const override { return "oracle"; }

  Prediction complete(const TransformationPair &pair,
                      const PromptBundle &prompt) override {
    Verdict v = check_pair(pair, check_);
    Label label = v.is_unsound() ? Label::Unsound : Label::Sound;
    ReasonSet reasons = v.is_unsound() ? v.reasons : ReasonSet{};
    if (noise_rate_ > 0) {
      // Per-pair stream so concurrent predictions stay reproducible.
      std::mt19937_64 rng(seed_ ^ fnv1a(prompt.user));
      double u = static_cast<double>(rng() >> 11) * 0x1.0p-53;
      if (u < noise_rate_) {
        if (label == Label::Sound) {
          label = Label::Unsound;
          reasons = {UnsoundReason::ReturnValue};
        } else {
          label = Label::Sound;
          reasons.clear();
        }
      }
    }
    return offline_prediction(label, reasons, id());
  }

private:
  CheckConfig check_;
  double noise_rate_;
  uint64_t seed_;
};

} // namespace

std::unique_ptr<Backend> make_backend(const BackendConfig &cfg) {
  switch (cfg.kind) {
  case BackendConfig::Kind::Heuristic:
    return std::make_unique<HeuristicBackend>();
  case BackendConfig::Kind::Oracle:
    if (!(cfg.noise_rate >= 0.0 && cfg.noise_rate <= 1.0))
      throw std::invalid_argument("noise rate must be in [0, 1]");
    validate_config(cfg.oracle_check);
    return std::make_unique<OracleBackend>(cfg.oracle_check, cfg.noise_rate,
                                           cfg.seed);
  case BackendConfig::Kind::Remote:
    return std::make_unique<RemoteBackend>(cfg.remote);
  }
  throw std::invalid_argument("unknown backend kind");
}

Prediction predict(const TransformationPair &pair, Backend &backend) {
  PromptBundle prompt = encode_prompt(pair);
  if (size_t n = estimate_tokens(prompt); n > kMaxPromptTokens)
    throw PredictError(PredictError::Kind::TooLarge,
                       "prompt estimated at " + std::to_string(n) +
                           " tokens exceeds the " +
                           std::to_string(kMaxPromptTokens) + " token limit");
  return backend.complete(pair, prompt);
}

Prediction predict(const TransformationPair &pair, const BackendConfig &cfg) {
  auto backend = make_backend(cfg);
  return predict(pair, *backend);
}

// ---------------------------------------------------------------------------
// Remote backend

RemoteBackend::RemoteBackend(RemoteConfig cfg) : cfg_(std::move(cfg)) {
  const std::string &url = cfg_.endpoint;
  size_t scheme_end = url.find("://");
  if (scheme_end == std::string::npos)
    throw std::invalid_argument("endpoint must be an http(s) URL: " + url);
  std::string scheme = url.substr(0, scheme_end);
  if (scheme != "http" && scheme != "https")
    throw std::invalid_argument("unsupported endpoint scheme: " + scheme);
  size_t path_start = url.find('/', scheme_end + 3);
  scheme_host_ = url.substr(0, path_start);
  path_ = path_start == std::string::npos ? "/" : url.substr(path_start);
  if (cfg_.max_concurrent == 0)
    throw std::invalid_argument("max_concurrent must be positive");
}

std::string RemoteBackend::id() const { return "remote:" + cfg_.model; }

std::string RemoteBackend::request_body(const PromptBundle &prompt) const {
  nlohmann::json body = {
      {"model", cfg_.model},
      {"temperature", cfg_.temperature},
      {"messages",
       nlohmann::json::array(
           {{{"role", "system"}, {"content", prompt.system}},
            {{"role", "user"}, {"content", prompt.user}}})},
  };
  return body.dump();
}

std::string RemoteBackend::post_once(const std::string &body,
                                     const std::string &key, bool &retryable) {
  retryable = false;
  httplib::Client cli(scheme_host_);
  auto timeout = std::chrono::milliseconds(cfg_.request_timeout_ms);
  cli.set_connection_timeout(timeout);
  cli.set_read_timeout(timeout);
  cli.set_write_timeout(timeout);
  httplib::Headers headers = {{"Authorization", "Bearer " + key}};
  auto res = cli.Post(path_, headers, body, "application/json");
  if (!res) {
    retryable = true;
    throw PredictError(PredictError::Kind::Transport,
                       "request failed: " + httplib::to_string(res.error()));
  }
  if (res->status == 401 || res->status == 403)
    throw PredictError(PredictError::Kind::Auth,
                       "endpoint rejected credentials (HTTP " +
                           std::to_string(res->status) + ")");
  if (res->status == 429 || res->status >= 500) {
    retryable = true;
    throw PredictError(PredictError::Kind::Transport,
                       "HTTP " + std::to_string(res->status));
  }
  if (res->status != 200)
    throw PredictError(PredictError::Kind::Transport,
                       "HTTP " + std::to_string(res->status));
  return res->body;
}

Prediction RemoteBackend::complete(const TransformationPair &,
                                   const PromptBundle &prompt) {
  const char *key = std::getenv(cfg_.api_key_env.c_str());
  if (!key || !*key)
    throw PredictError(PredictError::Kind::Auth,
                       "API key variable " + cfg_.api_key_env + " is not set");

  {
    std::unique_lock lock(mu_);
    cv_.wait(lock, [&] { return in_flight_ < cfg_.max_concurrent; });
    ++in_flight_;
  }
  struct Release {
    RemoteBackend *self;
    ~Release() {
      {
        std::lock_guard lock(self->mu_);
        --self->in_flight_;
      }
      self->cv_.notify_one();
    }
  } release{this};

  const std::string body = request_body(prompt);
  std::string response;
  for (unsigned attempt = 0;; ++attempt) {
    bool retryable = false;
    try {
      response = post_once(body, key, retryable);
      break;
    } catch (const PredictError &) {
      if (!retryable || attempt >= cfg_.max_retries)
        throw;
    }
    std::this_thread::sleep_for(
        std::chrono::milliseconds(cfg_.backoff_ms << attempt));
  }

  std::string content;
  try {
    auto doc = nlohmann::json::parse(response);
    content = doc.at("choices").at(0).at("message").at("content");
  } catch (const nlohmann::json::exception &e) {
    throw PredictError(PredictError::Kind::Decode,
                       std::string("malformed completion: ") + e.what());
  }
  try {
    Prediction p = decode_response(content);
    p.backend = id();
    return p;
  } catch (const DecodeError &e) {
    throw PredictError(PredictError::Kind::Decode, e.what());
  }
}

} // namespace llmtv
